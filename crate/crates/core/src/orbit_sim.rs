//! Deterministic Walker-delta constellation on circular orbits, used as a
//! baseline for the point-process model.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ChannelError, Result};
use crate::geometry::{unit_vector, ShellConfig, UserGeometry};
use crate::propagation::{delay, doppler, gain, Mark, SatellitePoint};

/// Sidereal rotation rate of the Earth (rad/s).
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_9e-5;

/// Walker-delta layout: `n_planes` planes with ascending nodes `k · s_orb`,
/// each carrying `n_per_orbit` evenly phased satellites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerConstellation {
    pub shell: ShellConfig,
    pub ascending_nodes: Vec<f64>,
    /// Initial argument of latitude of satellite `j` on plane 0.
    pub phase_offsets: Vec<f64>,
    /// Phase shift between adjacent planes (rad).
    pub inter_orbit_phase: f64,
    /// Rate (rad/s) at which the user meridian drifts east through the
    /// constellation frame. Zero keeps the user fixed in that frame.
    ///
    /// Only positions move with the drift; Doppler is always evaluated for
    /// a user at rest.
    pub user_drift_rate: f64,
}

impl WalkerConstellation {
    pub fn build(shell: ShellConfig) -> Result<Self> {
        shell.validate()?;
        if let Some(msg) = shell.consistency_warning() {
            return Err(ChannelError::config(msg));
        }
        let planes = shell.n_planes();
        let per = shell.n_per_orbit;
        Ok(WalkerConstellation {
            shell,
            ascending_nodes: (0..planes).map(|k| k as f64 * shell.orbit_spacing_rad).collect(),
            phase_offsets: (0..per).map(|j| j as f64 * TAU / per as f64).collect(),
            inter_orbit_phase: 0.0,
            user_drift_rate: 0.0,
        })
    }

    pub fn with_inter_orbit_phase(mut self, phase_rad: f64) -> Self {
        self.inter_orbit_phase = phase_rad;
        self
    }

    pub fn with_user_drift(mut self, rate_rad_s: f64) -> Self {
        self.user_drift_rate = rate_rad_s;
        self
    }

    pub fn len(&self) -> usize {
        self.ascending_nodes.len() * self.phase_offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angular rate `v / R` along the orbit.
    pub fn mean_motion(&self) -> f64 {
        self.shell.sat_speed_mps / self.shell.shell_radius_m()
    }

    pub fn period_s(&self) -> f64 {
        TAU / self.mean_motion()
    }

    /// Argument of latitude of satellite `j` on plane `k` at time `t`.
    pub fn argument_of_latitude(&self, k: usize, j: usize, t: f64) -> f64 {
        self.phase_offsets[j] + k as f64 * self.inter_orbit_phase + self.mean_motion() * t
    }

    /// Position of satellite `(k, j)` in the user frame.
    pub fn point(&self, k: usize, j: usize, t: f64) -> SatellitePoint {
        let omega = self.argument_of_latitude(k, j, t);
        let b = self.shell.inclination_rad;
        let (so, co) = omega.sin_cos();
        let theta = self.ascending_nodes[k] + (b.cos() * so).atan2(co) - self.user_drift_rate * t;
        SatellitePoint {
            theta_rad: theta.rem_euclid(TAU),
            phi_rad: (b.sin() * so).clamp(-1.0, 1.0).acos(),
            mark: Mark::from_sign(co),
        }
    }

    /// Cartesian position (m) of satellite `(k, j)` in the user frame.
    pub fn position_m(&self, k: usize, j: usize, t: f64) -> [f64; 3] {
        let p = self.point(k, j, t);
        unit_vector(p.theta_rad, p.phi_rad).map(|c| c * self.shell.shell_radius_m())
    }

    /// All satellites at time `t`, plane by plane.
    pub fn propagate(&self, t: f64) -> Vec<SatellitePoint> {
        let per = self.phase_offsets.len();
        (0..self.len()).map(|n| self.point(n / per, n % per, t)).collect()
    }
}

/// Link to the satellite picked in one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub gain: f64,
    pub delay_s: f64,
    pub doppler_hz: f64,
    pub mark: Mark,
}

/// One snapshot: how many satellites were visible and, if any, the link to
/// one of them chosen uniformly at random.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotObservation {
    pub time_s: f64,
    pub visible_count: usize,
    pub link: Option<Link>,
}

/// Visible satellites at time `t`.
pub fn visible_satellites(constellation: &WalkerConstellation, user: &UserGeometry, t: f64) -> Vec<(SatellitePoint, f64)> {
    let c = constellation;
    let cos_limit = user.sigma1_rad.cos();
    // Cheap dot-product screen; candidates then get the exact test below.
    let screen = cos_limit.max(user.sigma_max_rad.cos()) - 1e-9;
    let u = user.unit_position();
    let (sb, cb) = c.shell.inclination_rad.sin_cos();
    let per = c.phase_offsets.len();
    let mut out = Vec::new();
    for (k, node) in c.ascending_nodes.iter().enumerate() {
        let (sn, cn) = (node - c.user_drift_rate * t).sin_cos();
        for j in 0..per {
            let (so, co) = c.argument_of_latitude(k, j, t).sin_cos();
            let p = [cn * co - sn * cb * so, sn * co + cn * cb * so, sb * so];
            if p[0] * u[0] + p[1] * u[1] + p[2] * u[2] < screen {
                continue;
            }
            let point = c.point(k, j, t);
            let sigma = user.central_angle(point.theta_rad, point.phi_rad);
            if sigma.cos() >= cos_limit && sigma <= user.sigma_max_rad {
                out.push((point, sigma));
            }
        }
    }
    out
}

/// Snapshot observations at `times`. Snapshot `i` draws from its own
/// stream of the generator seeded by `seed`, so results do not depend on
/// the thread count.
pub fn snapshot_sample(
    constellation: &WalkerConstellation,
    user: &UserGeometry,
    times: &[f64],
    seed: u64,
) -> Result<Vec<SnapshotObservation>> {
    if times.is_empty() {
        return Err(ChannelError::domain("no snapshot times"));
    }
    let shell = &constellation.shell;
    times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let visible = visible_satellites(constellation, user, t);
            let link = if visible.is_empty() {
                None
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let (p, sigma) = visible[rng.gen_range(0..visible.len())];
                Some(Link {
                    gain: gain(shell, user, sigma)?,
                    delay_s: delay(shell, user, sigma)?,
                    doppler_hz: doppler(shell, user, &p),
                    mark: p.mark,
                })
            };
            Ok(SnapshotObservation { time_s: t, visible_count: visible.len(), link })
        })
        .collect()
}

/// `count` snapshot times spaced `step_s` apart from a random epoch within
/// one orbital period.
pub fn snapshot_times(constellation: &WalkerConstellation, count: usize, step_s: f64, seed: u64) -> Vec<f64> {
    let epoch = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..constellation.period_s());
    (0..count).map(|n| epoch + n as f64 * step_s).collect()
}

/// Range-rate Doppler (Hz) of satellite `(k, j)` at time `t`: the central
/// difference of the slant range over `±h`, times `f_c / c`.
///
/// Drift of the user frame enters the range, so compare with the
/// point-process Doppler only on a constellation without drift.
pub fn range_rate_doppler(constellation: &WalkerConstellation, user: &UserGeometry, k: usize, j: usize, t: f64, h: f64) -> f64 {
    let shell = &constellation.shell;
    let u = user.unit_position().map(|x| x * shell.earth_radius_m);
    let range = |t: f64| {
        let p = constellation.position_m(k, j, t);
        ((p[0] - u[0]).powi(2) + (p[1] - u[1]).powi(2) + (p[2] - u[2]).powi(2)).sqrt()
    };
    shell.doppler_scale() * (range(t + h) - range(t - h)) / (2.0 * h)
}

/// Largest relative gap between [`range_rate_doppler`] and the model
/// Doppler over `pairs` random (satellite, time) pairs with the satellite
/// inside the visible cap of `user`. Relative gaps use a 1 Hz floor.
pub fn doppler_consistency(constellation: &WalkerConstellation, user: &UserGeometry, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = constellation;
    let per = c.phase_offsets.len();
    let mut worst: f64 = 0.0;
    let mut found = 0;
    while found < pairs {
        let t = rng.gen_range(0.0..c.period_s());
        let visible: Vec<usize> = (0..c.len())
            .filter(|&n| {
                let p = c.point(n / per, n % per, t);
                user.central_angle(p.theta_rad, p.phi_rad) <= user.sigma_max_rad
            })
            .collect();
        if visible.is_empty() {
            continue;
        }
        let n = visible[rng.gen_range(0..visible.len())];
        let (k, j) = (n / per, n % per);
        let fd = range_rate_doppler(c, user, k, j, t, 1e-3);
        let model = doppler(&c.shell, user, &c.point(k, j, t));
        worst = worst.max((fd - model).abs() / model.abs().max(1.0));
        found += 1;
    }
    worst
}

/// Inter-plane phase of a Walker-delta pattern with phasing factor `f`.
pub fn walker_phase(n_sats: usize, phasing: usize) -> f64 {
    2.0 * PI * phasing as f64 / n_sats as f64
}
