//! Marked non-homogeneous binomial point process on the orbital shell.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{acos_clamped, ShellConfig, UserGeometry};
use crate::propagation::{Mark, SatellitePoint};

/// Density of the satellite polar angle. Zero outside the inclination band
/// and infinite on its edges.
pub fn phi_pdf(shell: &ShellConfig, phi: f64) -> f64 {
    let b_bar = shell.polar_inclination_rad();
    if phi < b_bar || phi > PI - b_bar {
        return 0.0;
    }
    let s = phi.sin();
    let c = shell.inclination_rad.cos();
    let q = s * s - c * c;
    if q <= 0.0 {
        return f64::INFINITY;
    }
    s / (PI * q.sqrt())
}

/// Distribution function of the satellite polar angle.
pub fn phi_cdf(shell: &ShellConfig, phi: f64) -> f64 {
    let b_bar = shell.polar_inclination_rad();
    if phi <= b_bar {
        return 0.0;
    }
    if phi >= PI - b_bar {
        return 1.0;
    }
    acos_clamped(phi.cos() / shell.inclination_rad.sin()) / PI
}

/// Polar angle reached at argument of latitude `omega`.
#[inline]
pub fn phi_of_omega(shell: &ShellConfig, omega: f64) -> f64 {
    acos_clamped(shell.inclination_rad.sin() * omega.sin())
}

/// Argument of latitude in `[-π/2, π/2]` at which the orbit reaches polar
/// angle `phi`; clamps to the band.
#[inline]
pub fn omega_of_phi(shell: &ShellConfig, phi: f64) -> f64 {
    (phi.cos() / shell.inclination_rad.sin()).clamp(-1.0, 1.0).asin()
}

/// How marks are attached to sampled points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MarkMode {
    /// Uniform on `{±1}`, independent of position.
    #[default]
    Independent,
    /// Ascending exactly when the drawn argument of latitude has `cos ω > 0`.
    Physical,
}

/// `N` i.i.d. marked points on one shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbppModel {
    pub shell: ShellConfig,
    pub n_points: usize,
}

impl NbppModel {
    pub fn new(shell: ShellConfig) -> Result<Self> {
        shell.validate()?;
        Ok(NbppModel { shell, n_points: shell.n_sats })
    }

    fn point_from<R: Rng + ?Sized>(&self, theta: f64, omega: f64, mode: MarkMode, rng: &mut R) -> SatellitePoint {
        let mark = match mode {
            MarkMode::Independent => {
                if rng.gen::<bool>() {
                    Mark::Ascending
                } else {
                    Mark::Descending
                }
            }
            MarkMode::Physical => Mark::from_sign(omega.cos()),
        };
        SatellitePoint {
            theta_rad: theta,
            phi_rad: FRAC_PI_2 - (self.shell.inclination_rad.sin() * omega.sin()).asin(),
            mark,
        }
    }

    /// One point of the process.
    pub fn sample_point<R: Rng + ?Sized>(&self, mode: MarkMode, rng: &mut R) -> SatellitePoint {
        let theta = rng.gen_range(0.0..TAU);
        let omega = rng.gen_range(0.0..TAU);
        self.point_from(theta, omega, mode, rng)
    }

    /// `count` i.i.d. points.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, mode: MarkMode, rng: &mut R) -> Vec<SatellitePoint> {
        (0..count).map(|_| self.sample_point(mode, rng)).collect()
    }

    /// `count` points drawn from the process conditioned on lying in the
    /// visible cap of `user`.
    ///
    /// Draws uniformly inside a `(θ, ω)` box that encloses the cap and
    /// rejects points outside it, which leaves the conditional law intact.
    pub fn sample_visible<R: Rng + ?Sized>(
        &self,
        user: &UserGeometry,
        count: usize,
        mode: MarkMode,
        rng: &mut R,
    ) -> Vec<SatellitePoint> {
        let bx = VisibleBox::new(&self.shell, user);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let theta = rng.gen_range(bx.theta.0..bx.theta.1);
            let mut omega = rng.gen_range(bx.omega.0..bx.omega.1);
            if rng.gen::<bool>() {
                // The other half period passes the same latitudes going south.
                omega = PI - omega;
            }
            let p = self.point_from(theta, omega, mode, rng);
            if user.central_angle(p.theta_rad, p.phi_rad) <= user.sigma_max_rad {
                out.push(p);
            }
        }
        out
    }
}

/// Bounding box of the visible cap in rotational angle and argument of
/// latitude (`ω ∈ [-π/2, π/2]`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct VisibleBox {
    pub theta: (f64, f64),
    pub omega: (f64, f64),
}

impl VisibleBox {
    pub(crate) fn new(shell: &ShellConfig, user: &UserGeometry) -> Self {
        let sigma = user.sigma_max_rad;
        let phi_u = user.user_polar_rad;
        let b_bar = shell.polar_inclination_rad();
        let half = if sigma >= phi_u {
            PI
        } else {
            ((sigma.sin() / phi_u.sin()).min(1.0).asin() * (1.0 + 1e-9) + 1e-12).min(PI)
        };
        let phi_lo = (phi_u - sigma).max(b_bar);
        let phi_hi = (phi_u + sigma).min(PI - b_bar);
        VisibleBox {
            theta: (FRAC_PI_2 - half, FRAC_PI_2 + half),
            omega: (omega_of_phi(shell, phi_hi), omega_of_phi(shell, phi_lo)),
        }
    }
}
