//! Empirical distribution tools.

use crate::error::{ChannelError, Result};

/// Kolmogorov-Smirnov distance `sup |F_n - F|` between a sample and a
/// continuous distribution function. The sample is sorted in place.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(ChannelError::domain("KS distance of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(ChannelError::domain("KS distance of a sample containing NaN"));
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    Ok(d)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(ChannelError::domain("KS distance of an empty sample"));
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// A distribution function tabulated at sorted nodes and linearly
/// interpolated, for evaluating an expensive CDF at many points.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    x: Vec<f64>,
    f: Vec<f64>,
}

impl TabulatedCdf {
    /// Tabulates `cdf` at `n` equally spaced nodes on `[lo, hi]`, which
    /// should cover the support.
    pub fn new<F: Fn(f64) -> f64 + Sync>(cdf: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        use rayon::prelude::*;
        if !(lo < hi) || n < 2 {
            return Err(ChannelError::domain(format!("bad table range [{lo}, {hi}] with {n} nodes")));
        }
        let x: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let mut f: Vec<f64> = x.par_iter().map(|&x| cdf(x)).collect();
        // Enforce monotonicity against rounding.
        for k in 1..n {
            f[k] = f[k].max(f[k - 1]);
        }
        Ok(TabulatedCdf { x, f })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] {
            return 0.0;
        }
        if x >= self.x[n - 1] {
            return self.f[n - 1];
        }
        let step = (self.x[n - 1] - self.x[0]) / (n - 1) as f64;
        let k = (((x - self.x[0]) / step) as usize).min(n - 2);
        let t = (x - self.x[k]) / (self.x[k + 1] - self.x[k]);
        self.f[k] + t * (self.f[k + 1] - self.f[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_sample_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut xs: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_distance(&mut xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 1.63 / (100_000f64).sqrt(), "{d}");
        let mut shifted: Vec<f64> = xs.iter().map(|x| x * 0.9).collect();
        assert!(ks_distance(&mut shifted, |x| x.clamp(0.0, 1.0)).unwrap() > 0.09);
    }

    #[test]
    fn exact_small_case() {
        let mut xs = [0.5];
        assert!((ks_distance(&mut xs, |x| x).unwrap() - 0.5).abs() < 1e-15);
        assert!(ks_distance(&mut [], |x| x).is_err());
    }

    #[test]
    fn two_sample() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        let mut b = vec![3.5, 4.5, 5.5, 6.5];
        assert!((ks_two_sample(&mut a, &mut b).unwrap() - 0.75).abs() < 1e-15);
        let mut c = a.clone();
        assert_eq!(ks_two_sample(&mut a, &mut c).unwrap(), 0.0);
    }

    #[test]
    fn table_interpolates() {
        let t = TabulatedCdf::new(|x: f64| x * x, 0.0, 1.0, 1001).unwrap();
        assert!((t.eval(0.5) - 0.25).abs() < 1e-6);
        assert_eq!(t.eval(2.0), 1.0);
        assert_eq!(t.eval(-1.0), 0.0);
    }
}
