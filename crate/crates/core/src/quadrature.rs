//! Gauss-Legendre quadrature: fixed rules, adaptive bisection, and a
//! squared-variable substitution that tames square-root endpoint
//! behaviour.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const ADAPTIVE_ORDER: usize = 15;

fn adaptive_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ADAPTIVE_ORDER))
}

#[inline]
fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Upper bound on the number of panels.
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9, abs: 1e-15, max_panels: 2000 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn split<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, rule: &(Vec<f64>, Vec<f64>)) -> [Panel; 2] {
    let m = 0.5 * (a + b);
    let left = fixed(f, a, m, rule);
    let right = fixed(f, m, b, rule);
    // The difference to the parent bounds the error of the halves; share it
    // in proportion to their magnitudes.
    let err = (left + right - whole).abs();
    let mag = left.abs() + right.abs();
    let (el, er) = if mag > 0.0 { (err * left.abs() / mag, err * right.abs() / mag) } else { (0.5 * err, 0.5 * err) };
    [
        Panel { a, b: m, value: left, error: el.max(err * 0.1) },
        Panel { a: m, b, value: right, error: er.max(err * 0.1) },
    ]
}

/// Globally adaptive Gauss-Legendre integral of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance or the panel budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = adaptive_rule();
    let whole = fixed(&f, a, b, rule);
    let mut heap = std::collections::BinaryHeap::new();
    for p in split(&f, a, b, whole, rule) {
        heap.push(p);
    }
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let noise = 64.0 * f64::EPSILON * heap.iter().map(|p| p.value.abs()).sum::<f64>();
        if error <= (tol.rel * total.abs()).max(tol.abs).max(noise) || heap.len() >= tol.max_panels {
            // Sum in position order so the result does not depend on heap layout.
            let mut panels = heap.into_vec();
            panels.sort_by(|x, y| x.a.total_cmp(&y.a));
            return panels.iter().map(|p| p.value).sum();
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.b - worst.a <= f64::EPSILON * worst.a.abs().max(worst.b.abs()) {
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        for p in split(&f, worst.a, worst.b, worst.value, rule) {
            heap.push(p);
        }
    }
}

/// Integral of `f` over `[a, b]` where `f` may behave like `(x - a)^{±1/2}`
/// or `(b - x)^{±1/2}` at the ends.
///
/// Each half is mapped through `x = a + (m - a) t²` (and its mirror),
/// which turns those endpoint behaviours into smooth ones in `t`.
pub fn integrate_open<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let hl = m - a;
    let hr = b - m;
    // t ∈ [-1, 0] covers the left half, t ∈ [0, 1] the right one.
    let g = |t: f64| {
        if t < 0.0 {
            2.0 * hl * -t * f(a + hl * t * t)
        } else {
            2.0 * hr * t * f(b - hr * t * t)
        }
    };
    integrate(g, -1.0, 1.0, tol)
}

/// Sum of [`integrate_open`] over consecutive panels between `breaks`.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> f64 {
    let panels = breaks.windows(2).filter(|w| w[1] > w[0]).count().max(1);
    let per_panel = Tolerance { abs: tol.abs / panels as f64, ..tol };
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate_open(&f, w[0], w[1], per_panel))
        .sum()
}

/// Fixed composite rule over `[a, b]` using the same squared substitution
/// at both ends as [`integrate_open`]; each half uses `sub` equal panels of
/// an `order`-point Gauss-Legendre rule in `t`.
///
/// Returns `(x, w)` pairs with `Σ w f(x) ≈ ∫ f`.
pub fn composite_open(a: f64, b: f64, order: usize, sub: usize) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let (gx, gw) = gauss_legendre(order);
    let m = 0.5 * (a + b);
    let mut out = Vec::with_capacity(2 * order * sub);
    for (base, h, sign) in [(a, m - a, 1.0), (b, b - m, -1.0)] {
        for p in 0..sub {
            let t0 = p as f64 / sub as f64;
            let t1 = (p + 1) as f64 / sub as f64;
            let half = 0.5 * (t1 - t0);
            let mid = 0.5 * (t0 + t1);
            for (x, w) in gx.iter().zip(&gw) {
                let t = mid + half * x;
                out.push((base + sign * h * t * t, w * half * 2.0 * h * t));
            }
        }
    }
    out
}
