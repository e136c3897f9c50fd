//! Spherical geometry of the user and the orbital shell.
//!
//! Angles are radians, lengths meters. The user sits at rotational angle
//! `θ_u = π/2` (on the y-z plane) and polar angle `φ_u` measured from the
//! north pole; southern-hemisphere users are reflected into the north.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ChannelError, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Mean Earth radius (m).
pub const MEAN_EARTH_RADIUS: f64 = 6_371_000.0;

/// Tolerated overshoot of trigonometric arguments before they count as
/// out of domain.
pub(crate) const TRIG_GRACE: f64 = 1e-12;

#[inline]
pub(crate) fn acos_clamped(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Physical constants and parameters of one constellation shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellConfig {
    pub earth_radius_m: f64,
    pub altitude_m: f64,
    pub sat_speed_mps: f64,
    pub carrier_hz: f64,
    pub inclination_rad: f64,
    pub n_sats: usize,
    pub n_per_orbit: usize,
    pub orbit_spacing_rad: f64,
}

impl Default for ShellConfig {
    /// Starlink-like shell: 3168 satellites at 550 km, 53 deg inclination,
    /// 144 planes of 22 satellites, Ku-band downlink at 12.7 GHz.
    fn default() -> Self {
        ShellConfig {
            earth_radius_m: MEAN_EARTH_RADIUS,
            altitude_m: 550e3,
            sat_speed_mps: 7.29e3,
            carrier_hz: 12.7e9,
            inclination_rad: 53f64.to_radians(),
            n_sats: 3168,
            n_per_orbit: 22,
            orbit_spacing_rad: 2.5f64.to_radians(),
        }
    }
}

impl ShellConfig {
    /// Checks the hard invariants. The plane-count consistency of `n_sats`
    /// is only reported by [`ShellConfig::consistency_warning`].
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("earth_radius_m", self.earth_radius_m),
            ("altitude_m", self.altitude_m),
            ("sat_speed_mps", self.sat_speed_mps),
            ("carrier_hz", self.carrier_hz),
            ("orbit_spacing_rad", self.orbit_spacing_rad),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ChannelError::config(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.inclination_rad > 0.0 && self.inclination_rad < FRAC_PI_2) {
            return Err(ChannelError::config(format!(
                "inclination must lie in (0, 90) deg, got {} deg",
                self.inclination_rad.to_degrees()
            )));
        }
        if self.n_sats == 0 || self.n_per_orbit == 0 {
            return Err(ChannelError::config("satellite counts must be positive"));
        }
        Ok(())
    }

    /// Number of orbital planes implied by the node spacing.
    pub fn n_planes(&self) -> usize {
        (2.0 * PI / self.orbit_spacing_rad).round() as usize
    }

    /// `Some(message)` when `n_sats != planes * n_per_orbit`.
    pub fn consistency_warning(&self) -> Option<String> {
        let implied = self.n_planes() * self.n_per_orbit;
        (implied != self.n_sats).then(|| {
            format!(
                "n_sats = {} but {} planes x {} satellites per orbit = {}",
                self.n_sats,
                self.n_planes(),
                self.n_per_orbit,
                implied
            )
        })
    }

    pub fn shell_radius_m(&self) -> f64 {
        self.earth_radius_m + self.altitude_m
    }

    /// Polar complement of the inclination, `π/2 - b`.
    pub fn polar_inclination_rad(&self) -> f64 {
        FRAC_PI_2 - self.inclination_rad
    }

    /// Scale from normalised Doppler (m/s) to Hz.
    pub fn doppler_scale(&self) -> f64 {
        self.carrier_hz / SPEED_OF_LIGHT
    }

    /// Squared user-satellite distance at central angle `sigma`.
    #[inline]
    pub fn slant_range_sq(&self, sigma: f64) -> f64 {
        let r = self.earth_radius_m;
        let big_r = self.shell_radius_m();
        // (R - r)^2 + 4 r R sin^2(σ/2) avoids cancellation near σ = 0.
        let s = (0.5 * sigma).sin();
        (big_r - r).powi(2) + 4.0 * r * big_r * s * s
    }

    /// User-satellite distance at central angle `sigma`.
    #[inline]
    pub fn slant_range(&self, sigma: f64) -> f64 {
        self.slant_range_sq(sigma).sqrt()
    }

    /// Central angle of the horizon (zero elevation), `acos(r/R)`.
    pub fn horizon_sigma(&self) -> f64 {
        (self.earth_radius_m / self.shell_radius_m()).acos()
    }
}

/// Great-circle central angle between the user at `(π/2, φ_u)` and a
/// shell point at `(θ, φ)`.
#[inline]
pub fn central_angle(user_polar_rad: f64, theta: f64, phi: f64) -> f64 {
    let c = user_polar_rad.cos() * phi.cos() + user_polar_rad.sin() * phi.sin() * theta.sin();
    acos_clamped(c)
}

/// Slant range from the user to a satellite at central angle `sigma`.
pub fn slant_range(shell: &ShellConfig, sigma: f64) -> f64 {
    shell.slant_range(sigma)
}

/// Central angle at which a satellite is seen at elevation `psi`.
pub fn sigma_from_elevation(shell: &ShellConfig, psi: f64) -> f64 {
    // Law of sines in the centre-user-satellite triangle; same value as
    // acos((r² + R² - d²)/(2rR)) with d the slant range at elevation ψ,
    // without its cancellation near the zenith.
    let ratio = shell.earth_radius_m / shell.shell_radius_m();
    (FRAC_PI_2 - psi - (ratio * psi.cos()).asin()).max(0.0)
}

/// Elevation at which a satellite at central angle `sigma` is seen.
///
/// Inverts [`sigma_from_elevation`] by bisection on `[0, π/2]`.
pub fn elevation_from_sigma(shell: &ShellConfig, sigma: f64) -> Result<f64> {
    let horizon = shell.horizon_sigma();
    if !(sigma >= -TRIG_GRACE && sigma <= horizon + TRIG_GRACE) {
        return Err(ChannelError::domain(format!(
            "central angle {sigma} outside [0, {horizon}]"
        )));
    }
    let sigma = sigma.clamp(0.0, horizon);
    // sigma_from_elevation is decreasing in ψ.
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if sigma_from_elevation(shell, mid) > sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Range `[σ_min, σ_max]` of central angles seen inside the sliced cap.
pub fn central_angle_bounds(shell: &ShellConfig, user_polar_rad: f64, sigma1: f64) -> Result<(f64, f64)> {
    let b_bar = shell.polar_inclination_rad();
    if user_polar_rad >= b_bar {
        Ok((0.0, sigma1))
    } else if b_bar - user_polar_rad <= sigma1 {
        Ok((b_bar - user_polar_rad, sigma1))
    } else {
        Err(ChannelError::NoVisibleSatellites {
            gap_deg: (b_bar - user_polar_rad).to_degrees(),
            cap_deg: sigma1.to_degrees(),
        })
    }
}

/// Where the user stands and what it can see.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserGeometry {
    pub user_polar_rad: f64,
    pub min_elevation_rad: f64,
    pub sigma1_rad: f64,
    pub sigma_min_rad: f64,
    pub sigma_max_rad: f64,
}

impl UserGeometry {
    /// Rotational angle of the user; fixed by convention.
    pub const USER_AZIMUTH_RAD: f64 = FRAC_PI_2;

    pub fn new(shell: &ShellConfig, user_polar_rad: f64, min_elevation_rad: f64) -> Result<Self> {
        shell.validate()?;
        if !(0.0..=PI).contains(&user_polar_rad) {
            return Err(ChannelError::domain(format!(
                "user polar angle {user_polar_rad} outside [0, π]"
            )));
        }
        if !(0.0..FRAC_PI_2).contains(&min_elevation_rad) {
            return Err(ChannelError::domain(format!(
                "minimum elevation {min_elevation_rad} outside [0, π/2)"
            )));
        }
        let user_polar_rad = if user_polar_rad > FRAC_PI_2 {
            PI - user_polar_rad
        } else {
            user_polar_rad
        };
        let sigma1 = sigma_from_elevation(shell, min_elevation_rad);
        let (sigma_min, sigma_max) = central_angle_bounds(shell, user_polar_rad, sigma1)?;
        Ok(UserGeometry {
            user_polar_rad,
            min_elevation_rad,
            sigma1_rad: sigma1,
            sigma_min_rad: sigma_min,
            sigma_max_rad: sigma_max,
        })
    }

    /// Builds the geometry from geographic latitude and minimum elevation
    /// in degrees.
    pub fn from_degrees(shell: &ShellConfig, latitude_deg: f64, min_elevation_deg: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(ChannelError::domain(format!("latitude {latitude_deg} outside [-90, 90]")));
        }
        Self::new(
            shell,
            (90.0 - latitude_deg).to_radians(),
            min_elevation_deg.to_radians(),
        )
    }

    pub fn latitude_deg(&self) -> f64 {
        90.0 - self.user_polar_rad.to_degrees()
    }

    /// Central angle from the user to `(θ, φ)`.
    pub fn central_angle(&self, theta: f64, phi: f64) -> f64 {
        central_angle(self.user_polar_rad, theta, phi)
    }

    /// Unit position vector of the user.
    pub fn unit_position(&self) -> [f64; 3] {
        [0.0, self.user_polar_rad.sin(), self.user_polar_rad.cos()]
    }
}

/// Unit vector of spherical coordinates `(θ, φ)`.
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [sp * ct, sp * st, cp]
}
