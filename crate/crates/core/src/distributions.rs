//! Distributions of gain, delay and Doppler of a random visible satellite.

use serde::{Deserialize, Serialize};

use crate::doppler_engine::{joint_probability, joint_probability_grid, GridResolution};
use crate::error::{ChannelError, Result};
use crate::geometry::SPEED_OF_LIGHT;
use crate::propagation::{delay_inverse, delay_range, gain_inverse, gain_range, max_doppler, Mark};
use crate::quadrature::{integrate_open, Tolerance};
use crate::visibility::CapModel;

/// Scan points per latitude line for pointwise Doppler evaluation.
const SCAN_POINTS: usize = 512;

fn rr(model: &CapModel) -> f64 {
    model.shell.earth_radius_m * model.shell.shell_radius_m()
}

/// `P(Ḡ ≤ g)`.
pub fn gain_cdf(model: &CapModel, g: f64) -> f64 {
    let (g_min, g_max) = gain_range(&model.shell, &model.user);
    if g < g_min {
        return 0.0;
    }
    if g >= g_max {
        return 1.0;
    }
    let sigma = gain_inverse(&model.shell, &model.user, g).expect("gain within range");
    (1.0 - model.p_cap(sigma) / model.p_sat()).clamp(0.0, 1.0)
}

/// Density of `Ḡ` (m²).
pub fn gain_pdf(model: &CapModel, g: f64) -> f64 {
    let (g_min, g_max) = gain_range(&model.shell, &model.user);
    if !(g > g_min && g < g_max) {
        return 0.0;
    }
    let sigma = gain_inverse(&model.shell, &model.user, g).expect("gain within range");
    (-model.p_cap_prime(sigma) / (2.0 * g * g * rr(model) * model.p_sat())).max(0.0)
}

/// `P(T̄ ≤ tau)`.
pub fn delay_cdf(model: &CapModel, tau: f64) -> f64 {
    let (t_min, t_max) = delay_range(&model.shell, &model.user);
    if tau < t_min {
        return 0.0;
    }
    if tau >= t_max {
        return 1.0;
    }
    let sigma = delay_inverse(&model.shell, &model.user, tau).expect("delay within range");
    (model.p_cap(sigma) / model.p_sat()).clamp(0.0, 1.0)
}

/// Density of `T̄` (1/s).
pub fn delay_pdf(model: &CapModel, tau: f64) -> f64 {
    let (t_min, t_max) = delay_range(&model.shell, &model.user);
    if !(tau > t_min && tau < t_max) {
        return 0.0;
    }
    let sigma = delay_inverse(&model.shell, &model.user, tau).expect("delay within range");
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    (-c2 * tau * model.p_cap_prime(sigma) / (rr(model) * model.p_sat())).max(0.0)
}

/// `P(V̄ ≤ nu | A = mark)`, Doppler in Hz.
pub fn doppler_cdf(model: &CapModel, nu_hz: f64, mark: Mark) -> f64 {
    let p = joint_probability(model, nu_hz, model.user.sigma_max_rad, mark, SCAN_POINTS);
    (p / model.p_sat()).clamp(0.0, 1.0)
}

/// Doppler distribution with both marks equally likely.
pub fn doppler_cdf_mixed(model: &CapModel, nu_hz: f64) -> f64 {
    0.5 * doppler_cdf(model, nu_hz, Mark::Ascending) + 0.5 * doppler_cdf(model, nu_hz, Mark::Descending)
}

/// `P(V̄ ≤ nu, T̄ ≤ tau | A = mark)`, normalised by the full-cap `p_sat`.
/// Delays outside the support are clamped to its ends.
pub fn joint_cdf(model: &CapModel, nu_hz: f64, tau: f64, mark: Mark) -> f64 {
    let (t_min, t_max) = delay_range(&model.shell, &model.user);
    let tau = tau.clamp(t_min, t_max);
    let sigma = delay_inverse(&model.shell, &model.user, tau).expect("clamped delay");
    (joint_probability(model, nu_hz, sigma, mark, SCAN_POINTS) / model.p_sat()).clamp(0.0, 1.0)
}

/// Frequency grid for the Doppler density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerGridSpec {
    pub nu_step_hz: f64,
    /// Lower end of the grid; `None` means `-ν_max`.
    pub nu_min_hz: Option<f64>,
    /// Upper end of the grid; `None` means `+ν_max`.
    pub nu_max_hz: Option<f64>,
}

impl Default for DopplerGridSpec {
    fn default() -> Self {
        DopplerGridSpec { nu_step_hz: 2.65e3, nu_min_hz: None, nu_max_hz: None }
    }
}

impl DopplerGridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu_step_hz.is_finite() && self.nu_step_hz > 0.0) {
            return Err(ChannelError::config(format!("Doppler step {} must be positive", self.nu_step_hz)));
        }
        if let (Some(lo), Some(hi)) = (self.nu_min_hz, self.nu_max_hz) {
            if !(lo < hi) {
                return Err(ChannelError::config(format!("Doppler range [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }
}

/// Delay-Doppler grid for joint densities and the scattering function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointGridSpec {
    pub nu_step_hz: f64,
    pub tau_step_s: f64,
}

impl Default for JointGridSpec {
    fn default() -> Self {
        JointGridSpec { nu_step_hz: 2.61e3, tau_step_s: 2.8e-5 }
    }
}

impl JointGridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu_step_hz.is_finite() && self.nu_step_hz > 0.0) {
            return Err(ChannelError::config(format!("Doppler step {} must be positive", self.nu_step_hz)));
        }
        if !(self.tau_step_s.is_finite() && self.tau_step_s > 0.0) {
            return Err(ChannelError::config(format!("delay step {} must be positive", self.tau_step_s)));
        }
        Ok(())
    }
}

/// Grid corners `k Δν` for all integers `k` with the corners spanning
/// `[lo, hi]`.
fn nu_corners(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k0 = (lo / step).floor() as i64;
    let k1 = (hi / step).ceil() as i64;
    (k0..=k1).map(|k| k as f64 * step).collect()
}

/// Sampled Doppler density on grid cells `[ν_i, ν_{i+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DopplerDensity {
    pub nu_edges_hz: Vec<f64>,
    /// Mixed distribution function at each edge.
    pub cdf: Vec<f64>,
    /// Density (1/Hz) per cell.
    pub density: Vec<f64>,
    /// Densities conditioned on each mark, in the order of [`Mark::BOTH`].
    pub density_by_mark: [Vec<f64>; 2],
    /// Cells whose tiny negative difference was set to zero.
    pub clamped: usize,
}

impl DopplerDensity {
    pub fn centers_hz(&self) -> Vec<f64> {
        self.nu_edges_hz.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `Σ pdf Δν`.
    pub fn total_mass(&self) -> f64 {
        self.density.iter().zip(self.nu_edges_hz.windows(2)).map(|(p, w)| p * (w[1] - w[0])).sum()
    }
}

/// Doppler density of the mixed distribution by forward differences of its
/// distribution function.
pub fn doppler_pdf_grid(model: &CapModel, spec: &DopplerGridSpec) -> Result<DopplerDensity> {
    spec.validate()?;
    let nu_max = if spec.nu_min_hz.is_none() || spec.nu_max_hz.is_none() {
        max_doppler(&model.shell, &model.user)
    } else {
        0.0
    };
    let lo = spec.nu_min_hz.unwrap_or(-nu_max);
    let hi = spec.nu_max_hz.unwrap_or(nu_max);
    if !(lo < hi) {
        return Err(ChannelError::config(format!("Doppler range [{lo}, {hi}] is empty")));
    }
    let edges = nu_corners(lo, hi, spec.nu_step_hz);
    let grid = joint_probability_grid(model, &Mark::BOTH, &edges, &[model.user.sigma_max_rad], GridResolution::default());
    let p_sat = model.p_sat();
    let cdf: Vec<f64> = (0..edges.len()).map(|i| 0.5 * (grid[0][i] + grid[1][i]) / p_sat).collect();
    let mut clamped = 0;
    let mut differentiate = |f: &[f64]| -> Vec<f64> {
        f.windows(2)
            .zip(edges.windows(2))
            .map(|(f, e)| {
                let d = (f[1] - f[0]) / (e[1] - e[0]);
                if d < 0.0 && d > -1e-9 {
                    clamped += 1;
                    0.0
                } else {
                    d
                }
            })
            .collect()
    };
    let density = differentiate(&cdf);
    let by_mark = grid.iter().map(|g| g.iter().map(|p| p / p_sat).collect::<Vec<_>>()).collect::<Vec<_>>();
    let density_by_mark = [differentiate(&by_mark[0]), differentiate(&by_mark[1])];
    Ok(DopplerDensity { nu_edges_hz: edges, cdf, density, density_by_mark, clamped })
}

/// Sampled joint delay-Doppler density of one mark on cells
/// `[τ_j, τ_{j+1}) × [ν_i, ν_{i+1})`, stored row-major by delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDensity {
    pub tau_edges_s: Vec<f64>,
    pub nu_edges_hz: Vec<f64>,
    /// Density (1/(s·Hz)).
    pub density: Vec<f64>,
    pub clamped: usize,
}

impl JointDensity {
    pub fn n_tau(&self) -> usize {
        self.tau_edges_s.len() - 1
    }

    pub fn n_nu(&self) -> usize {
        self.nu_edges_hz.len() - 1
    }

    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.density[j * self.n_nu() + i]
    }

    pub fn tau_centers_s(&self) -> Vec<f64> {
        self.tau_edges_s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn nu_centers_hz(&self) -> Vec<f64> {
        self.nu_edges_hz.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn cell_area(&self, j: usize, i: usize) -> f64 {
        (self.tau_edges_s[j + 1] - self.tau_edges_s[j]) * (self.nu_edges_hz[i + 1] - self.nu_edges_hz[i])
    }

    /// `ΣΣ pdf Δτ Δν`.
    pub fn total_mass(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n_tau() {
            for i in 0..self.n_nu() {
                s += self.at(j, i) * self.cell_area(j, i);
            }
        }
        s
    }

    /// Delay marginal per row, `Σ_i pdf Δν`.
    pub fn delay_marginal(&self) -> Vec<f64> {
        (0..self.n_tau())
            .map(|j| (0..self.n_nu()).map(|i| self.at(j, i) * (self.nu_edges_hz[i + 1] - self.nu_edges_hz[i])).sum())
            .collect()
    }
}

/// Delay corners `τ_min + j Δτ`, the last one clamped to `τ_max`.
pub(crate) fn tau_corners(t_min: f64, t_max: f64, step: f64) -> Vec<f64> {
    let n = ((t_max - t_min) / step - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|j| (t_min + j as f64 * step).min(t_max)).collect()
}

/// Joint densities for the given marks on one shared grid.
pub(crate) fn joint_pdf_grids(model: &CapModel, spec: &JointGridSpec, marks: &[Mark], nu_max: f64) -> Result<Vec<JointDensity>> {
    spec.validate()?;
    let (t_min, t_max) = delay_range(&model.shell, &model.user);
    let taus = tau_corners(t_min, t_max, spec.tau_step_s);
    let nus = nu_corners(-nu_max, nu_max, spec.nu_step_hz);
    let sigmas: Vec<f64> = taus
        .iter()
        .map(|&t| delay_inverse(&model.shell, &model.user, t).expect("corner within support"))
        .collect();
    let grids = joint_probability_grid(model, marks, &nus, &sigmas, GridResolution::default());
    let (n_nu, p_sat) = (nus.len(), model.p_sat());
    Ok(grids
        .into_iter()
        .map(|g| {
            let f = |j: usize, i: usize| g[j * n_nu + i] / p_sat;
            let mut raw = Vec::with_capacity((taus.len() - 1) * (n_nu - 1));
            for j in 0..taus.len() - 1 {
                for i in 0..n_nu - 1 {
                    let mixed = f(j + 1, i + 1) - f(j + 1, i) - f(j, i + 1) + f(j, i);
                    raw.push(mixed / ((taus[j + 1] - taus[j]) * (nus[i + 1] - nus[i])));
                }
            }
            let peak = raw.iter().cloned().fold(0.0, f64::max);
            let mut clamped = 0;
            for v in raw.iter_mut() {
                if *v < 0.0 && *v > -1e-6 * peak {
                    *v = 0.0;
                    clamped += 1;
                }
            }
            JointDensity { tau_edges_s: taus.clone(), nu_edges_hz: nus.clone(), density: raw, clamped }
        })
        .collect())
}

/// Joint delay-Doppler density of one mark by mixed second differences of
/// [`joint_cdf`] over the grid.
pub fn joint_pdf_grid(model: &CapModel, spec: &JointGridSpec, mark: Mark) -> Result<JointDensity> {
    let nu_max = max_doppler(&model.shell, &model.user);
    Ok(joint_pdf_grids(model, spec, &[mark], nu_max)?.remove(0))
}

/// Distribution of the faded gain `Y = Z Ḡ` with `Z` unit-mean exponential
/// (Rayleigh amplitude).
pub fn rayleigh_gain_cdf(model: &CapModel, y: f64) -> f64 {
    if !(y > 0.0) {
        return 0.0;
    }
    if y.is_infinite() {
        return 1.0;
    }
    let (g_min, g_max) = gain_range(&model.shell, &model.user);
    let (z_lo, z_hi) = (y / g_max, y / g_min);
    let shell = model.shell;
    let user = model.user;
    let integrand = |z: f64| {
        let g = (y / z).clamp(g_min, g_max);
        let sigma = gain_inverse(&shell, &user, g).expect("clamped gain");
        (-z).exp() * model.p_cap(sigma)
    };
    let tol = Tolerance { rel: 1e-9, abs: 1e-16, max_panels: 500 };
    let tail = integrate_open(integrand, z_lo, z_hi, tol) / model.p_sat();
    (-(-z_hi).exp_m1() - tail).clamp(0.0, 1.0)
}
