//! Signal propagation of a single satellite: channel gain, propagation
//! delay, and Doppler shift, plus the maximum Doppler over the visible cap.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ChannelError, Result};
use crate::geometry::{acos_clamped, ShellConfig, UserGeometry, SPEED_OF_LIGHT, TRIG_GRACE};

/// Ascending (northbound) or descending satellite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mark {
    Ascending,
    Descending,
}

impl Mark {
    pub const BOTH: [Mark; 2] = [Mark::Ascending, Mark::Descending];

    /// `+1` for ascending, `-1` for descending.
    pub fn sign(self) -> f64 {
        match self {
            Mark::Ascending => 1.0,
            Mark::Descending => -1.0,
        }
    }

    pub fn from_sign(sign: f64) -> Mark {
        if sign >= 0.0 {
            Mark::Ascending
        } else {
            Mark::Descending
        }
    }
}

/// One marked point of the constellation point process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatellitePoint {
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub mark: Mark,
}

impl SatellitePoint {
    pub fn new(shell: &ShellConfig, theta_rad: f64, phi_rad: f64, mark: Mark) -> Result<Self> {
        let b_bar = shell.polar_inclination_rad();
        if !(phi_rad >= b_bar - TRIG_GRACE && phi_rad <= PI - b_bar + TRIG_GRACE) {
            return Err(ChannelError::domain(format!(
                "polar angle {phi_rad} outside the inclination band [{b_bar}, {}]",
                PI - b_bar
            )));
        }
        Ok(SatellitePoint { theta_rad, phi_rad, mark })
    }
}

fn check_sigma(user: &UserGeometry, sigma: f64) -> Result<()> {
    if sigma < user.sigma_min_rad - TRIG_GRACE || sigma > user.sigma_max_rad + TRIG_GRACE {
        return Err(ChannelError::domain(format!(
            "central angle {sigma} outside [{}, {}]",
            user.sigma_min_rad, user.sigma_max_rad
        )));
    }
    Ok(())
}

/// Central angle whose slant range is `distance`.
fn sigma_from_distance(shell: &ShellConfig, distance: f64) -> f64 {
    let r = shell.earth_radius_m;
    let big_r = shell.shell_radius_m();
    let s2 = (distance * distance - (big_r - r).powi(2)) / (4.0 * r * big_r);
    2.0 * s2.clamp(0.0, 1.0).sqrt().asin()
}

/// Channel gain `1/‖d‖²` (m⁻²) at central angle `sigma`.
pub fn gain(shell: &ShellConfig, user: &UserGeometry, sigma: f64) -> Result<f64> {
    check_sigma(user, sigma)?;
    Ok(1.0 / shell.slant_range_sq(sigma))
}

/// Central angle at which the gain equals `g`.
pub fn gain_inverse(shell: &ShellConfig, user: &UserGeometry, g: f64) -> Result<f64> {
    let (g_min, g_max) = gain_range(shell, user);
    if !(g >= g_min * (1.0 - 1e-12) && g <= g_max * (1.0 + 1e-12)) {
        return Err(ChannelError::domain(format!("gain {g} outside [{g_min}, {g_max}]")));
    }
    let sigma = sigma_from_distance(shell, (1.0 / g).sqrt());
    Ok(sigma.clamp(user.sigma_min_rad, user.sigma_max_rad))
}

/// Propagation delay `‖d‖/c` (s) at central angle `sigma`.
pub fn delay(shell: &ShellConfig, user: &UserGeometry, sigma: f64) -> Result<f64> {
    check_sigma(user, sigma)?;
    Ok(shell.slant_range(sigma) / SPEED_OF_LIGHT)
}

/// Central angle at which the delay equals `tau`.
pub fn delay_inverse(shell: &ShellConfig, user: &UserGeometry, tau: f64) -> Result<f64> {
    let (t_min, t_max) = delay_range(shell, user);
    if !(tau >= t_min * (1.0 - 1e-12) && tau <= t_max * (1.0 + 1e-12)) {
        return Err(ChannelError::domain(format!("delay {tau} outside [{t_min}, {t_max}]")));
    }
    let sigma = sigma_from_distance(shell, SPEED_OF_LIGHT * tau);
    Ok(sigma.clamp(user.sigma_min_rad, user.sigma_max_rad))
}

/// `(g_min, g_max)` over the visible cap.
pub fn gain_range(shell: &ShellConfig, user: &UserGeometry) -> (f64, f64) {
    (
        1.0 / shell.slant_range_sq(user.sigma_max_rad),
        1.0 / shell.slant_range_sq(user.sigma_min_rad),
    )
}

/// `(τ_min, τ_max)` over the visible cap.
pub fn delay_range(shell: &ShellConfig, user: &UserGeometry) -> (f64, f64) {
    (
        shell.slant_range(user.sigma_min_rad) / SPEED_OF_LIGHT,
        shell.slant_range(user.sigma_max_rad) / SPEED_OF_LIGHT,
    )
}

/// Heading of a satellite relative to east, signed by its mark.
pub fn direction_angle(shell: &ShellConfig, phi: f64, mark: Mark) -> Result<f64> {
    let x = shell.inclination_rad.cos() / phi.sin();
    if !(0.0..=1.0 + TRIG_GRACE).contains(&x) {
        return Err(ChannelError::domain(format!(
            "polar angle {phi} outside the inclination band"
        )));
    }
    Ok(mark.sign() * x.min(1.0).acos())
}

#[inline]
fn direction_angle_clamped(cos_b: f64, phi: f64, mark: Mark) -> f64 {
    mark.sign() * acos_clamped(cos_b / phi.sin())
}

/// Normalised Doppler (m/s): the projection of the satellite velocity on
/// the unit line-of-sight vector from the user to the satellite.
///
/// Positive values mean the slant range is growing.
pub fn doppler_normalized(shell: &ShellConfig, user: &UserGeometry, sat: &SatellitePoint) -> f64 {
    LatitudeLine::new(shell, user, sat.phi_rad, sat.mark).eval(sat.theta_rad)
}

/// Doppler shift in Hz, `(f_c / c) · V`.
pub fn doppler(shell: &ShellConfig, user: &UserGeometry, sat: &SatellitePoint) -> f64 {
    shell.doppler_scale() * doppler_normalized(shell, user, sat)
}

/// Doppler along one latitude line `φ = const` for a fixed mark, with the
/// `θ`-independent factors precomputed. Values are in the unit of `scale`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LatitudeLine {
    a: f64,
    b: f64,
    c: f64,
    d0: f64,
    d1: f64,
    k: f64,
}

impl LatitudeLine {
    pub(crate) fn new(shell: &ShellConfig, user: &UserGeometry, phi: f64, mark: Mark) -> Self {
        Self::with_scale(shell, user, phi, mark, 1.0)
    }

    pub(crate) fn with_scale(shell: &ShellConfig, user: &UserGeometry, phi: f64, mark: Mark, scale: f64) -> Self {
        let r = shell.earth_radius_m;
        let big_r = shell.shell_radius_m();
        let beta = direction_angle_clamped(shell.inclination_rad.cos(), phi, mark);
        let (sb, cb) = beta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (su, cu) = user.user_polar_rad.sin_cos();
        LatitudeLine {
            a: -cb * su,
            b: sb * cp * su,
            c: -sb * sp * cu,
            d0: r * r + big_r * big_r - 2.0 * r * big_r * cu * cp,
            d1: 2.0 * r * big_r * su * sp,
            k: scale * shell.sat_speed_mps * r,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, theta: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let d = (self.d0 - self.d1 * st).sqrt();
        self.k * (self.a * ct + self.b * st + self.c) / d
    }
}

/// Options for the maximum-Doppler search.
#[derive(Debug, Clone, Copy)]
pub struct MaxDopplerSearch {
    /// Grid points per axis of the cap parameter box.
    pub grid: usize,
    /// Stop refining once an iteration improves by less than this (Hz).
    pub tol_hz: f64,
}

impl Default for MaxDopplerSearch {
    fn default() -> Self {
        MaxDopplerSearch { grid: 1001, tol_hz: 1.0 }
    }
}

/// Maximum Doppler shift (Hz) over both marks and the visible cap.
pub fn max_doppler(shell: &ShellConfig, user: &UserGeometry) -> f64 {
    max_doppler_with(shell, user, MaxDopplerSearch::default())
}

/// Point of the cap at angular distance `rho` from the user along azimuth
/// `alpha` (clockwise from north), as `(θ, φ)`.
pub fn cap_point(user: &UserGeometry, rho: f64, alpha: f64) -> (f64, f64) {
    let (su, cu) = user.user_polar_rad.sin_cos();
    let (sr, cr) = rho.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let cos_phi = (cu * cr + su * sr * ca).clamp(-1.0, 1.0);
    let phi = cos_phi.acos();
    let dtheta = if su < 1e-12 {
        alpha
    } else {
        (sa * sr * su).atan2(cr - cu * cos_phi)
    };
    (UserGeometry::USER_AZIMUTH_RAD + dtheta, phi)
}

pub fn max_doppler_with(shell: &ShellConfig, user: &UserGeometry, search: MaxDopplerSearch) -> f64 {
    let n = search.grid.max(3);
    let sigma1 = user.sigma_max_rad;
    let b_bar = shell.polar_inclination_rad();
    let scale = shell.doppler_scale();
    let value = |rho: f64, alpha: f64, mark: Mark| -> Option<f64> {
        let (theta, phi) = cap_point(user, rho, alpha);
        if phi < b_bar || phi > PI - b_bar {
            return None;
        }
        Some(scale * LatitudeLine::new(shell, user, phi, mark).eval(theta))
    };
    let rho_at = |i: usize| sigma1 * i as f64 / (n - 1) as f64;
    let alpha_at = |j: usize| 2.0 * PI * j as f64 / n as f64;

    let mut best = (f64::NEG_INFINITY, 0usize, 0usize, Mark::Ascending);
    for mark in Mark::BOTH {
        let row_best = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut b = (f64::NEG_INFINITY, i, 0usize);
                for j in 0..n {
                    if let Some(v) = value(rho_at(i), alpha_at(j), mark) {
                        if v > b.0 {
                            b = (v, i, j);
                        }
                    }
                }
                b
            })
            // Ties resolve to the lowest (i, j) so the result is order independent.
            .reduce(
                || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
                |x, y| if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x },
            );
        if row_best.0 > best.0 {
            best = (row_best.0, row_best.1, row_best.2, mark);
        }
    }
    if !best.0.is_finite() {
        return 0.0;
    }

    let (mut v_best, i, j, mark) = best;
    let mut rho = rho_at(i);
    let mut alpha = alpha_at(j);
    let d_rho = sigma1 / (n - 1) as f64;
    let d_alpha = 2.0 * PI / n as f64;
    for _ in 0..60 {
        let before = v_best;
        let (r_new, v_r) = line_max(
            |x| value(x, alpha, mark),
            rho,
            (rho - d_rho).max(0.0),
            (rho + d_rho).min(sigma1),
        );
        if v_r > v_best {
            v_best = v_r;
            rho = r_new;
        }
        let (a_new, v_a) = line_max(|x| value(rho, x, mark), alpha, alpha - d_alpha, alpha + d_alpha);
        if v_a > v_best {
            v_best = v_a;
            alpha = a_new;
        }
        if v_best - before < search.tol_hz * 1e-3 {
            break;
        }
    }
    v_best
}

/// Golden-section maximisation of `f` on `[lo, hi]`, restricted to the
/// feasible sub-interval around `start` (where `f` returns `Some`).
fn line_max<F: Fn(f64) -> Option<f64>>(f: F, start: f64, lo: f64, hi: f64) -> (f64, f64) {
    let Some(f_start) = f(start) else {
        return (start, f64::NEG_INFINITY);
    };
    let shrink = |mut inside: f64, mut outside: f64| {
        if f(outside).is_some() {
            return outside;
        }
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if f(mid).is_some() {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let (mut a, mut b) = (shrink(start, lo), shrink(start, hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |x: f64| f(x).unwrap_or(f64::NEG_INFINITY);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..80 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = eval(x1);
        }
    }
    let candidates = [(start, f_start), (x1, f1), (x2, f2), (a, eval(a)), (b, eval(b))];
    candidates
        .into_iter()
        .fold((start, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc })
}

/// Gain at the central angle of delay `tau`, which reduces to `1/(cτ)²`.
pub fn gain_at_delay(shell: &ShellConfig, tau: f64) -> f64 {
    let sigma = sigma_from_distance(shell, SPEED_OF_LIGHT * tau);
    1.0 / shell.slant_range_sq(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use crate::geometry::{unit_vector, SPEED_OF_LIGHT};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(lat: f64, elev: f64) -> (ShellConfig, UserGeometry) {
        let shell = ShellConfig::default();
        let user = UserGeometry::from_degrees(&shell, lat, elev).unwrap();
        (shell, user)
    }

    /// Doppler as `v · d̂` from Cartesian satellite velocity and line of sight.
    fn cartesian_doppler(shell: &ShellConfig, user: &UserGeometry, sat: &SatellitePoint) -> f64 {
        let big_r = shell.shell_radius_m();
        let r = shell.earth_radius_m;
        let (theta, phi) = (sat.theta_rad, sat.phi_rad);
        let beta = direction_angle(shell, phi, sat.mark).unwrap();
        // v = v (cos β θ̂ - sin β φ̂)
        let theta_hat = [-theta.sin(), theta.cos(), 0.0];
        let phi_hat = [phi.cos() * theta.cos(), phi.cos() * theta.sin(), -phi.sin()];
        let v: Vec<f64> = (0..3)
            .map(|k| shell.sat_speed_mps * (beta.cos() * theta_hat[k] - beta.sin() * phi_hat[k]))
            .collect();
        let s = unit_vector(theta, phi);
        let u = user.unit_position();
        let d: Vec<f64> = (0..3).map(|k| big_r * s[k] - r * u[k]).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / norm
    }

    fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        let increasing = f(hi) > f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < target) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gain_reference_values() {
        let (shell, user) = setup(0.0, 30.0);
        let g0 = gain(&shell, &user, 0.0).unwrap();
        assert!((g0 - 1.0 / 550e3f64.powi(2)).abs() < 1e-24);
        assert!((g0 - 3.3058e-12).abs() < 1e-15);
        let d_max = shell.slant_range(user.sigma_max_rad);
        assert!((gain(&shell, &user, user.sigma_max_rad).unwrap() - d_max.powi(-2)).abs() < 1e-25);
        assert!(gain(&shell, &user, user.sigma_max_rad + 1e-6).is_err());
    }

    #[test]
    fn gain_inverse_matches_bisection() {
        let (shell, user) = setup(0.0, 30.0);
        let (g_min, g_max) = gain_range(&shell, &user);
        assert!(gain_inverse(&shell, &user, g_max).unwrap().abs() < 1e-7);
        assert!((gain_inverse(&shell, &user, g_min).unwrap() - user.sigma_max_rad).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = rng.gen_range(g_min..g_max);
            let sigma = gain_inverse(&shell, &user, g).unwrap();
            let back = gain(&shell, &user, sigma).unwrap();
            assert!(((back - g) / g).abs() < 1e-12);
        }
        let g_mid = 0.5 * (g_min + g_max);
        let oracle = bisect(|s| 1.0 / shell.slant_range_sq(s), g_mid, 0.0, user.sigma_max_rad);
        assert!((gain_inverse(&shell, &user, g_mid).unwrap() - oracle).abs() < 1e-10);
        assert!(gain_inverse(&shell, &user, g_max * 1.01).is_err());
    }

    #[test]
    fn delay_reference_values() {
        let (shell, user) = setup(0.0, 30.0);
        let t0 = delay(&shell, &user, 0.0).unwrap();
        assert!((t0 - 1.8346e-3).abs() < 1e-7);
        let t_max = delay(&shell, &user, user.sigma_max_rad).unwrap();
        assert!((t_max - 3.31e-3).abs() < 0.01e-3, "{t_max}");
        let (t_lo, t_hi) = delay_range(&shell, &user);
        assert!(delay_inverse(&shell, &user, t_lo).unwrap().abs() < 1e-7);
        assert!((delay_inverse(&shell, &user, t_hi).unwrap() - user.sigma_max_rad).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let tau = rng.gen_range(t_lo..t_hi);
            let back = delay(&shell, &user, delay_inverse(&shell, &user, tau).unwrap()).unwrap();
            assert!((back - tau).abs() < 1e-15);
        }
        let t_mid = 0.5 * (t_lo + t_hi);
        let oracle = bisect(|s| shell.slant_range(s) / SPEED_OF_LIGHT, t_mid, 0.0, user.sigma_max_rad);
        assert!((delay_inverse(&shell, &user, t_mid).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn gain_and_delay_are_monotone() {
        let (shell, user) = setup(0.0, 10.0);
        let mut prev = (f64::INFINITY, 0.0);
        for i in 0..=500 {
            let s = user.sigma_max_rad * i as f64 / 500.0;
            let g = gain(&shell, &user, s).unwrap();
            let t = delay(&shell, &user, s).unwrap();
            assert!(g < prev.0 && t > prev.1);
            prev = (g, t);
        }
    }

    #[test]
    fn gain_at_delay_identity() {
        let (shell, user) = setup(0.0, 30.0);
        let (t_lo, t_hi) = delay_range(&shell, &user);
        for i in 0..=100 {
            let tau = t_lo + (t_hi - t_lo) * i as f64 / 100.0;
            let direct = 1.0 / (SPEED_OF_LIGHT * tau).powi(2);
            assert!(((gain_at_delay(&shell, tau) - direct) / direct).abs() < 1e-13);
        }
    }

    #[test]
    fn direction_angle_cases() {
        let shell = ShellConfig::default();
        let b = shell.inclination_rad;
        assert!((direction_angle(&shell, FRAC_PI_2, Mark::Ascending).unwrap() - b).abs() < 1e-12);
        let b_bar = shell.polar_inclination_rad();
        assert!(direction_angle(&shell, b_bar, Mark::Ascending).unwrap().abs() < 1e-6);
        assert!(direction_angle(&shell, b_bar, Mark::Descending).unwrap().abs() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let phi = rng.gen_range(b_bar..PI - b_bar);
            let up = direction_angle(&shell, phi, Mark::Ascending).unwrap();
            let down = direction_angle(&shell, phi, Mark::Descending).unwrap();
            assert_eq!(up, -down);
        }
        assert!(direction_angle(&shell, 0.1, Mark::Ascending).is_err());
    }

    #[test]
    fn overhead_doppler_vanishes() {
        let (shell, user) = setup(0.0, 30.0);
        for mark in Mark::BOTH {
            let sat = SatellitePoint::new(&shell, FRAC_PI_2, FRAC_PI_2, mark).unwrap();
            assert!(doppler(&shell, &user, &sat).abs() < 1e-6);
        }
    }

    #[test]
    fn doppler_matches_cartesian_projection() {
        let shell = ShellConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b_bar = shell.polar_inclination_rad();
        for lat in [0.0, 25.0, 60.0] {
            let user = UserGeometry::from_degrees(&shell, lat, 10.0).unwrap();
            for _ in 0..200 {
                let sat = SatellitePoint {
                    theta_rad: rng.gen_range(0.0..2.0 * PI),
                    phi_rad: rng.gen_range(b_bar + 1e-6..PI - b_bar - 1e-6),
                    mark: if rng.gen() { Mark::Ascending } else { Mark::Descending },
                };
                let ours = doppler_normalized(&shell, &user, &sat);
                let oracle = cartesian_doppler(&shell, &user, &sat);
                assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{ours} vs {oracle}");
                assert!(ours.abs() <= shell.sat_speed_mps * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn equator_doppler_antisymmetry() {
        let (shell, user) = setup(0.0, 30.0);
        let b_bar = shell.polar_inclination_rad();
        for i in 0..10 {
            for j in 0..10 {
                let x = 0.3 * i as f64 / 9.0;
                let phi = b_bar + 0.01 + (PI - 2.0 * b_bar - 0.02) * j as f64 / 9.0;
                for mark in Mark::BOTH {
                    let p = SatellitePoint { theta_rad: FRAC_PI_2 + x, phi_rad: phi, mark };
                    let q = SatellitePoint { theta_rad: FRAC_PI_2 - x, phi_rad: PI - phi, mark };
                    let vp = doppler_normalized(&shell, &user, &p);
                    let vq = doppler_normalized(&shell, &user, &q);
                    assert!((vp + vq).abs() < 1e-9, "{vp} {vq}");
                }
            }
        }
    }

    #[test]
    fn cap_points_sit_at_requested_distance() {
        let (_, user) = setup(35.0, 10.0);
        for i in 0..20 {
            let rho = 0.01 * i as f64;
            let alpha = 0.37 * i as f64;
            let (theta, phi) = cap_point(&user, rho, alpha);
            assert!((user.central_angle(theta, phi) - rho).abs() < 1e-9);
        }
    }

    #[test]
    fn max_doppler_reference_values() {
        let (shell, user) = setup(0.0, 30.0);
        let nu = max_doppler(&shell, &user);
        assert!((nu / 246.2e3 - 1.0).abs() < 0.01, "{nu}");
        let d_min = shell.slant_range(user.sigma_min_rad);
        let bound = shell.doppler_scale() * shell.sat_speed_mps * shell.earth_radius_m / d_min;
        assert!(nu <= bound);

        let user30 = UserGeometry::new(&shell, 30f64.to_radians(), 10f64.to_radians()).unwrap();
        let nu30 = max_doppler(&shell, &user30);
        assert!((nu30 / 246.8e3 - 1.0).abs() < 0.01, "{nu30}");
    }
}
