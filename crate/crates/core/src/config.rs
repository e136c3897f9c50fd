//! Run configuration: flat `section.key = value` files, overridable from
//! the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::{DopplerGridSpec, JointGridSpec};
use crate::error::{ChannelError, Result};
use crate::geometry::{ShellConfig, MEAN_EARTH_RADIUS};
use crate::orbit_sim::{walker_phase, WalkerConstellation, EARTH_ROTATION_RATE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellSection {
    pub earth_radius_m: f64,
    pub altitude_m: f64,
    pub sat_speed_mps: f64,
    pub carrier_hz: f64,
    pub inclination_deg: f64,
    pub n_sats: usize,
    pub n_per_orbit: usize,
    pub orbit_spacing_deg: f64,
}

impl Default for ShellSection {
    fn default() -> Self {
        let s = ShellConfig::default();
        ShellSection {
            earth_radius_m: MEAN_EARTH_RADIUS,
            altitude_m: s.altitude_m,
            sat_speed_mps: s.sat_speed_mps,
            carrier_hz: s.carrier_hz,
            inclination_deg: s.inclination_rad.to_degrees(),
            n_sats: s.n_sats,
            n_per_orbit: s.n_per_orbit,
            orbit_spacing_deg: s.orbit_spacing_rad.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserSection {
    pub latitude_deg: f64,
    pub min_elevation_deg: f64,
    /// Latitude sweep of the coverage command.
    pub sweep_start_deg: f64,
    pub sweep_stop_deg: f64,
    pub sweep_step_deg: f64,
    /// Minimum elevations swept by the coverage command.
    pub sweep_elevations_deg: Vec<f64>,
}

impl Default for UserSection {
    fn default() -> Self {
        UserSection {
            latitude_deg: 0.0,
            min_elevation_deg: 30.0,
            sweep_start_deg: 0.0,
            sweep_stop_deg: 90.0,
            sweep_step_deg: 1.0,
            sweep_elevations_deg: vec![10.0, 20.0, 30.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Doppler step of the scattering function grid.
    pub nu_step_hz: f64,
    pub tau_step_s: f64,
    /// Doppler step of the standalone Doppler PDF.
    pub doppler_step_hz: f64,
    /// Points of each gain, delay and Doppler CDF sweep.
    pub cdf_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let j = JointGridSpec::default();
        GridSection {
            nu_step_hz: j.nu_step_hz,
            tau_step_s: j.tau_step_s,
            doppler_step_hz: DopplerGridSpec::default().nu_step_hz,
            cdf_points: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub seed: u64,
    /// Point-process samples; zero disables Monte Carlo columns.
    pub samples: usize,
    pub snapshots: usize,
    pub snapshot_step_s: f64,
    /// Walker phasing factor `F`: adjacent planes are offset by `2πF/N`.
    pub walker_phasing: usize,
    /// Drift of the user meridian through the constellation frame.
    pub user_drift_rad_s: f64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            seed: 1,
            samples: 200_000,
            snapshots: 86_164,
            snapshot_step_s: 1.0,
            walker_phasing: 1,
            user_drift_rad_s: EARTH_ROTATION_RATE,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub shell: ShellSection,
    pub user: UserSection,
    pub grid: GridSection,
    pub mc: McSection,
}

impl RunConfig {
    /// Parses `section.key = value` lines. `#` starts a comment; lists are
    /// written `[a, b]`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ChannelError::config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChannelError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn shell(&self) -> ShellConfig {
        let s = &self.shell;
        ShellConfig {
            earth_radius_m: s.earth_radius_m,
            altitude_m: s.altitude_m,
            sat_speed_mps: s.sat_speed_mps,
            carrier_hz: s.carrier_hz,
            inclination_rad: s.inclination_deg.to_radians(),
            n_sats: s.n_sats,
            n_per_orbit: s.n_per_orbit,
            orbit_spacing_rad: s.orbit_spacing_deg.to_radians(),
        }
    }

    pub fn joint_grid(&self) -> JointGridSpec {
        JointGridSpec { nu_step_hz: self.grid.nu_step_hz, tau_step_s: self.grid.tau_step_s }
    }

    pub fn doppler_grid(&self) -> DopplerGridSpec {
        DopplerGridSpec { nu_step_hz: self.grid.doppler_step_hz, ..DopplerGridSpec::default() }
    }

    pub fn constellation(&self) -> Result<WalkerConstellation> {
        let shell = self.shell();
        Ok(WalkerConstellation::build(shell)?
            .with_inter_orbit_phase(walker_phase(shell.n_sats, self.mc.walker_phasing))
            .with_user_drift(self.mc.user_drift_rad_s))
    }

    pub fn validate(&self) -> Result<()> {
        self.shell().validate()?;
        let u = &self.user;
        let bad = |msg: String| Err(ChannelError::config(msg));
        if !(-90.0..=90.0).contains(&u.latitude_deg) {
            return bad(format!("user.latitude_deg = {} outside [-90, 90]", u.latitude_deg));
        }
        for e in std::iter::once(&u.min_elevation_deg).chain(&u.sweep_elevations_deg) {
            if !(*e >= 0.0 && *e < 90.0) {
                return bad(format!("minimum elevation {e} outside [0, 90)"));
            }
        }
        if !(u.sweep_step_deg > 0.0) || !(u.sweep_start_deg <= u.sweep_stop_deg) {
            return bad("latitude sweep needs start <= stop and a positive step".into());
        }
        if u.sweep_start_deg < -90.0 || u.sweep_stop_deg > 90.0 {
            return bad("latitude sweep outside [-90, 90]".into());
        }
        self.joint_grid().validate()?;
        self.doppler_grid().validate()?;
        if self.grid.cdf_points < 2 {
            return bad("grid.cdf_points must be at least 2".into());
        }
        if self.mc.snapshots == 0 || !(self.mc.snapshot_step_s > 0.0) {
            return bad("mc.snapshots and mc.snapshot_step_s must be positive".into());
        }
        if !self.mc.user_drift_rad_s.is_finite() {
            return bad("mc.user_drift_rad_s must be finite".into());
        }
        Ok(())
    }

    /// `key=value` pairs of every setting, in a stable order.
    pub fn flat_pairs(&self) -> Vec<(String, String)> {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut out = Vec::new();
        for (section, fields) in value.as_object().expect("object") {
            for (key, v) in fields.as_object().expect("object") {
                out.push((format!("{section}.{key}"), v.to_string()));
            }
        }
        out
    }

    /// One-line rendering of [`RunConfig::flat_pairs`].
    pub fn summary_line(&self) -> String {
        self.flat_pairs().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}
