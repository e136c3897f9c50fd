//! Probability that a satellite falls inside the visible cap, and the
//! visible-satellite count it implies.

use std::f64::consts::{PI, TAU};

use statrs::function::gamma::ln_gamma;

use crate::error::{ChannelError, Result};
use crate::geometry::{ShellConfig, UserGeometry};
use crate::nbpp::{omega_of_phi, phi_cdf, phi_of_omega, phi_pdf};
use crate::quadrature::{integrate_open, Tolerance};

const POLE_EPS: f64 = 1e-12;

/// Length (in rotational angle) of the part of the latitude line `φ`
/// inside a cap of central angle `sigma` centred on the user.
pub fn arc_length(user: &UserGeometry, phi: f64, sigma: f64) -> f64 {
    arc_length_at(user.user_polar_rad, phi, sigma)
}

/// The four sine factors of `1 ∓ k`; all positive strictly inside the
/// partially covered band.
#[inline]
fn sine_factors(phi_u: f64, phi: f64, sigma: f64) -> [f64; 4] {
    [
        (0.5 * (sigma + phi - phi_u)).sin(),
        (0.5 * (sigma - phi + phi_u)).sin(),
        (0.5 * (phi + phi_u + sigma)).sin(),
        (0.5 * (phi + phi_u - sigma)).sin(),
    ]
}

pub(crate) fn arc_length_at(phi_u: f64, phi: f64, sigma: f64) -> f64 {
    if phi_u < POLE_EPS {
        return if phi <= sigma { TAU } else { 0.0 };
    }
    if phi <= sigma - phi_u || phi >= TAU - sigma - phi_u {
        return TAU;
    }
    if phi <= phi_u - sigma || phi >= phi_u + sigma {
        return 0.0;
    }
    let [s1, s2, s3, s4] = sine_factors(phi_u, phi, sigma);
    4.0 * (s1 * s2).max(0.0).sqrt().atan2((s3 * s4).max(0.0).sqrt())
}

/// `∂L/∂cos σ` on the partially covered band; zero elsewhere.
pub(crate) fn arc_length_prime_at(phi_u: f64, phi: f64, sigma: f64) -> f64 {
    if phi <= (phi_u - sigma).abs() || phi >= phi_u + sigma {
        return 0.0;
    }
    let [s1, s2, s3, s4] = sine_factors(phi_u, phi, sigma);
    -1.0 / (s1 * s2 * s3 * s4).sqrt()
}

/// The cap-probability machinery for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapModel {
    pub shell: ShellConfig,
    pub user: UserGeometry,
    pub quadrature_tol: f64,
    p_sat: f64,
}

impl CapModel {
    pub fn new(shell: ShellConfig, user: UserGeometry) -> Result<Self> {
        Self::with_tolerance(shell, user, 1e-9)
    }

    pub fn with_tolerance(shell: ShellConfig, user: UserGeometry, quadrature_tol: f64) -> Result<Self> {
        shell.validate()?;
        if !(quadrature_tol > 0.0 && quadrature_tol < 1e-2) {
            return Err(ChannelError::config(format!("quadrature tolerance {quadrature_tol} out of range")));
        }
        let mut model = CapModel { shell, user, quadrature_tol, p_sat: f64::NAN };
        model.p_sat = model.p_cap(user.sigma_max_rad);
        if !(model.p_sat > 0.0) {
            return Err(ChannelError::NoVisibleSatellites {
                gap_deg: (shell.polar_inclination_rad() - user.user_polar_rad).to_degrees(),
                cap_deg: user.sigma1_rad.to_degrees(),
            });
        }
        Ok(model)
    }

    /// Builds shell-default geometry from latitude and minimum elevation in
    /// degrees.
    pub fn from_degrees(shell: ShellConfig, latitude_deg: f64, min_elevation_deg: f64) -> Result<Self> {
        let user = UserGeometry::from_degrees(&shell, latitude_deg, min_elevation_deg)?;
        Self::new(shell, user)
    }

    /// Probability that one satellite is visible.
    pub fn p_sat(&self) -> f64 {
        self.p_sat
    }

    fn tol(&self) -> Tolerance {
        Tolerance { rel: self.quadrature_tol, abs: 1e-15, max_panels: 2000 }
    }

    /// Range of the argument of latitude over which a latitude line meets
    /// the cap of angle `sigma` only partially, clipped to the band.
    pub(crate) fn partial_omega_range(&self, sigma: f64) -> Option<(f64, f64)> {
        let phi_u = self.user.user_polar_rad;
        let b_bar = self.shell.polar_inclination_rad();
        let phi_lo = (phi_u - sigma).abs().max(b_bar);
        let phi_hi = (phi_u + sigma).min(PI - b_bar);
        (phi_hi > phi_lo).then(|| (omega_of_phi(&self.shell, phi_hi), omega_of_phi(&self.shell, phi_lo)))
    }

    /// Range of the argument of latitude whose latitude lines meet the cap
    /// of angle `sigma` at all, clipped to the band.
    pub(crate) fn cap_omega_range(&self, sigma: f64) -> Option<(f64, f64)> {
        let phi_u = self.user.user_polar_rad;
        let b_bar = self.shell.polar_inclination_rad();
        let phi_lo = (phi_u - sigma).max(b_bar);
        let phi_hi = (phi_u + sigma).min(PI - b_bar);
        (phi_hi > phi_lo).then(|| (omega_of_phi(&self.shell, phi_hi), omega_of_phi(&self.shell, phi_lo)))
    }

    /// Probability that one satellite lies within central angle `sigma`.
    pub fn p_cap(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let phi_u = self.user.user_polar_rad;
        if phi_u < POLE_EPS {
            return phi_cdf(&self.shell, sigma);
        }
        let full = phi_cdf(&self.shell, (sigma - phi_u).max(0.0));
        let partial = match self.partial_omega_range(sigma) {
            Some((a, b)) => {
                let shell = self.shell;
                integrate_open(|w| arc_length_at(phi_u, phi_of_omega(&shell, w), sigma), a, b, self.tol())
                    / (2.0 * PI * PI)
            }
            None => 0.0,
        };
        (full + partial).clamp(0.0, 1.0)
    }

    /// Derivative of [`CapModel::p_cap`] with respect to `cos σ`.
    pub fn p_cap_prime(&self, sigma: f64) -> f64 {
        let phi_u = self.user.user_polar_rad;
        if phi_u < POLE_EPS {
            return -phi_pdf(&self.shell, sigma) / sigma.sin();
        }
        match self.partial_omega_range(sigma) {
            Some((a, b)) => {
                let shell = self.shell;
                integrate_open(|w| arc_length_prime_at(phi_u, phi_of_omega(&shell, w), sigma), a, b, self.tol())
                    / (2.0 * PI * PI)
            }
            None => 0.0,
        }
    }

    /// Probability that exactly `n` of the `N` satellites are visible.
    pub fn visible_count_pmf(&self, n: usize) -> Result<f64> {
        let big_n = self.shell.n_sats;
        if n > big_n {
            return Err(ChannelError::domain(format!("count {n} exceeds N = {big_n}")));
        }
        let p = self.p_sat;
        if p >= 1.0 {
            return Ok(if n == big_n { 1.0 } else { 0.0 });
        }
        let (nf, bf) = (n as f64, big_n as f64);
        let log_choose = ln_gamma(bf + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(bf - nf + 1.0);
        Ok((log_choose + nf * p.ln() + (bf - nf) * (-p).ln_1p()).exp())
    }

    /// Mean number of visible satellites, `N p_sat`.
    pub fn avg_visible(&self) -> f64 {
        self.shell.n_sats as f64 * self.p_sat
    }

    /// Probability that at least one satellite is visible.
    pub fn availability(&self) -> f64 {
        -(self.shell.n_sats as f64 * (-self.p_sat).ln_1p()).exp_m1()
    }
}

/// Average visible count, or zero where the user sees no part of the band.
pub fn avg_visible_or_zero(shell: &ShellConfig, latitude_deg: f64, min_elevation_deg: f64) -> Result<(f64, f64, f64)> {
    match CapModel::from_degrees(*shell, latitude_deg, min_elevation_deg) {
        Ok(m) => Ok((m.p_sat(), m.avg_visible(), m.availability())),
        Err(ChannelError::NoVisibleSatellites { .. }) => Ok((0.0, 0.0, 0.0)),
        Err(e) => Err(e),
    }
}
