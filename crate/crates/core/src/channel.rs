//! The random linear time-varying channel: scattering function, path loss
//! and global channel parameters.

use serde::{Deserialize, Serialize};

use crate::distributions::{joint_pdf_grids, JointGridSpec};
use crate::error::{ChannelError, Result};
use crate::geometry::SPEED_OF_LIGHT;
use crate::propagation::{gain_inverse, gain_range, max_doppler, Mark};
use crate::quadrature::{integrate_open, Tolerance};
use crate::visibility::CapModel;

/// Relative gap between grid and one-dimensional path gain beyond which a grid
/// is rejected as too coarse.
pub const NORMALIZATION_LIMIT: f64 = 0.02;

/// Delay-Doppler power density `C(τ, ν)` in 1/(m²·s·Hz), row-major by delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringGrid {
    pub spec: JointGridSpec,
    pub tau_edges_s: Vec<f64>,
    pub nu_edges_hz: Vec<f64>,
    pub values: Vec<f64>,
    pub p_a: f64,
    /// Cells clamped to zero while forming the joint densities.
    pub clamped: usize,
}

impl ScatteringGrid {
    pub fn n_tau(&self) -> usize {
        self.tau_edges_s.len() - 1
    }

    pub fn n_nu(&self) -> usize {
        self.nu_edges_hz.len() - 1
    }

    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.n_nu() + i]
    }

    pub fn tau_centers_s(&self) -> Vec<f64> {
        self.tau_edges_s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn nu_centers_hz(&self) -> Vec<f64> {
        self.nu_edges_hz.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Iterates `(τ_c, ν_c, C, ΔτΔν)` over all cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let taus = self.tau_centers_s();
        let nus = self.nu_centers_hz();
        (0..self.n_tau()).flat_map(move |j| {
            let dt = self.tau_edges_s[j + 1] - self.tau_edges_s[j];
            let tau = taus[j];
            let nus = nus.clone();
            (0..self.n_nu()).map(move |i| {
                let dn = self.nu_edges_hz[i + 1] - self.nu_edges_hz[i];
                (tau, nus[i], self.at(j, i), dt * dn)
            })
        })
    }

    /// `∫∫ C dτ dν`, the grid estimate of `ρ²`.
    pub fn integral(&self) -> f64 {
        self.cells().map(|(_, _, c, a)| c * a).sum()
    }
}

/// Global channel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub path_loss_db: f64,
    pub mean_delay_s: f64,
    pub rms_delay_spread_s: f64,
    /// Zero by definition of the channel model.
    pub mean_doppler_hz: f64,
    pub rms_doppler_spread_hz: f64,
    pub channel_spread: f64,
    pub availability: f64,
    /// Doppler mean computed from the grid, for comparison.
    pub grid_mean_doppler_hz: f64,
    /// `ρ²` from the path-loss integral (1/m²).
    pub rho2: f64,
    /// `ρ²` from the scattering grid (1/m²).
    pub grid_rho2: f64,
    pub max_doppler_hz: f64,
    pub p_sat: f64,
    pub avg_visible: f64,
}

/// `(ρ², P_L)`: the average path gain `p_a E[Ḡ]` by a one-dimensional
/// integral of the cap probability, and the path loss in dB.
pub fn path_loss_proposition(model: &CapModel) -> (f64, f64) {
    let (g_min, g_max) = gain_range(&model.shell, &model.user);
    let shell = model.shell;
    let user = model.user;
    // Work in units of g_max so the absolute tolerance is meaningful.
    let integrand = |x: f64| {
        let sigma = gain_inverse(&shell, &user, (x * g_max).clamp(g_min, g_max)).expect("clamped gain");
        model.p_cap(sigma)
    };
    let tol = Tolerance { rel: 1e-10, abs: 1e-16, max_panels: 1000 };
    let tail = integrate_open(integrand, g_min / g_max, 1.0, tol) * g_max;
    // E[Ḡ] = ∫_0^∞ (1 - F) dg, with F = 0 below g_min.
    let mean_gain = g_min + tail / model.p_sat();
    let rho2 = model.availability() * mean_gain;
    (rho2, -10.0 * rho2.log10())
}

/// Scattering function on the grid of `spec`.
pub fn scattering_function(model: &CapModel, spec: &JointGridSpec) -> Result<ScatteringGrid> {
    let nu_max = max_doppler(&model.shell, &model.user);
    scattering_with_nu_max(model, spec, nu_max)
}

fn scattering_with_nu_max(model: &CapModel, spec: &JointGridSpec, nu_max: f64) -> Result<ScatteringGrid> {
    let grids = joint_pdf_grids(model, spec, &Mark::BOTH, nu_max)?;
    let (up, down) = (&grids[0], &grids[1]);
    let p_a = model.availability();
    let taus = up.tau_centers_s();
    let n_nu = up.n_nu();
    let mut values = Vec::with_capacity(up.density.len());
    for (j, &tau) in taus.iter().enumerate() {
        // 1/(cτ)² is the gain at the central angle of delay τ.
        let weight = p_a / (2.0 * (SPEED_OF_LIGHT * tau).powi(2));
        for i in 0..n_nu {
            values.push(weight * (up.at(j, i) + down.at(j, i)));
        }
    }
    Ok(ScatteringGrid {
        spec: *spec,
        tau_edges_s: up.tau_edges_s.clone(),
        nu_edges_hz: up.nu_edges_hz.clone(),
        values,
        p_a,
        clamped: up.clamped + down.clamped,
    })
}

/// Moments of the normalised scattering function `C/ρ²`.
pub fn summarize(model: &CapModel, grid: &ScatteringGrid) -> Result<ChannelSummary> {
    let (rho2, path_loss_db) = path_loss_proposition(model);
    let grid_rho2 = grid.integral();
    let gap = (grid_rho2 / rho2 - 1.0).abs();
    if !(gap <= NORMALIZATION_LIMIT) {
        return Err(ChannelError::Resolution(format!(
            "scattering grid integrates to {grid_rho2:.6e} but the path-loss integral gives {rho2:.6e} ({:.2}% apart)",
            100.0 * gap
        )));
    }
    let (mut m_tau, mut m_nu) = (0.0, 0.0);
    for (tau, nu, c, a) in grid.cells() {
        m_tau += tau * c * a;
        m_nu += nu * c * a;
    }
    let mean_delay = m_tau / rho2;
    let (mut v_tau, mut v_nu) = (0.0, 0.0);
    for (tau, nu, c, a) in grid.cells() {
        v_tau += (tau - mean_delay).powi(2) * c * a;
        v_nu += nu * nu * c * a;
    }
    let rms_delay = (v_tau / rho2).sqrt();
    let rms_doppler = (v_nu / rho2).sqrt();
    Ok(ChannelSummary {
        path_loss_db,
        mean_delay_s: mean_delay,
        rms_delay_spread_s: rms_delay,
        mean_doppler_hz: 0.0,
        rms_doppler_spread_hz: rms_doppler,
        channel_spread: 2.0 * rms_delay * rms_doppler,
        availability: model.availability(),
        grid_mean_doppler_hz: m_nu / rho2,
        rho2,
        grid_rho2,
        max_doppler_hz: max_doppler(&model.shell, &model.user),
        p_sat: model.p_sat(),
        avg_visible: model.avg_visible(),
    })
}

/// Scattering function and its global parameters.
pub fn global_params(model: &CapModel, spec: &JointGridSpec) -> Result<ChannelSummary> {
    let grid = scattering_function(model, spec)?;
    summarize(model, &grid)
}

/// Relative change of the spread parameters allowed when both grid steps
/// are doubled.
pub const CONVERGENCE_LIMIT: f64 = 0.01;

/// Recomputes the summary with both steps doubled and fails if the delay
/// mean, delay spread or Doppler spread moves by more than
/// [`CONVERGENCE_LIMIT`]. Returns the fine summary and the largest
/// relative change.
pub fn checked_global_params(model: &CapModel, spec: &JointGridSpec) -> Result<(ChannelSummary, f64)> {
    let fine = global_params(model, spec)?;
    let coarse_spec = JointGridSpec { nu_step_hz: 2.0 * spec.nu_step_hz, tau_step_s: 2.0 * spec.tau_step_s };
    let coarse = global_params(model, &coarse_spec)?;
    let change = [
        (fine.mean_delay_s, coarse.mean_delay_s),
        (fine.rms_delay_spread_s, coarse.rms_delay_spread_s),
        (fine.rms_doppler_spread_hz, coarse.rms_doppler_spread_hz),
    ]
    .iter()
    .map(|(f, c)| (c / f - 1.0).abs())
    .fold(0.0, f64::max);
    if !(change <= CONVERGENCE_LIMIT) {
        return Err(ChannelError::Resolution(format!(
            "channel parameters move by {:.2}% when the grid steps are doubled",
            100.0 * change
        )));
    }
    Ok((fine, change))
}
