//! The `coverage`, `distributions`, `scattering` and `validate` commands
//! behind the `leo-channel` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::channel::{checked_global_params, path_loss_proposition, scattering_function, summarize, ScatteringGrid};
use crate::config::RunConfig;
use crate::distributions::{
    delay_cdf, delay_pdf, doppler_cdf, doppler_cdf_mixed, doppler_pdf_grid, gain_cdf, gain_pdf,
};
use crate::error::ChannelError;
use crate::geometry::UserGeometry;
use crate::nbpp::{MarkMode, NbppModel};
use crate::orbit_sim::{doppler_consistency, snapshot_sample, snapshot_times, WalkerConstellation};
use crate::propagation::{delay, delay_range, doppler, gain, gain_range, max_doppler, Mark, SatellitePoint};
use crate::stats::{ks_distance, TabulatedCdf};
use crate::visibility::{avg_visible_or_zero, CapModel};

/// Failure of a command, with the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// The validation report was written but some check failed.
    #[error("{0} validation check(s) failed")]
    Validation(usize),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Validation(_) => 1,
            CommandError::Io { .. } => 2,
            CommandError::Channel(e) => match e {
                ChannelError::Config(_) => 2,
                ChannelError::Domain(_) | ChannelError::NoVisibleSatellites { .. } => 3,
                ChannelError::Resolution(_) => 4,
            },
        }
    }
}

type CmdResult<T> = std::result::Result<T, CommandError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Where and how a command writes its artifacts.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
}

impl Output {
    fn prepare(&self) -> CmdResult<()> {
        fs::create_dir_all(&self.dir).map_err(|source| CommandError::Io { path: self.dir.clone(), source })
    }

    fn write(&self, name: &str, text: &str) -> CmdResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| CommandError::Io { path: path.clone(), source })?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CmdResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }
}

/// CSV text: a `#` line with the resolved configuration, a header, rows.
fn csv(command: &str, cfg: &RunConfig, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# leo-channel {command} {}\n{}\n", cfg.summary_line(), header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn columns(rows: &[Vec<f64>], header: &[&str]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (c, name) in header.iter().enumerate() {
        map.insert(name.to_string(), rows.iter().map(|r| r[c]).collect::<Vec<_>>().into());
    }
    map.into()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn cap_model(cfg: &RunConfig) -> CmdResult<CapModel> {
    Ok(CapModel::from_degrees(cfg.shell(), cfg.user.latitude_deg, cfg.user.min_elevation_deg)?)
}

/// Coverage over the latitude sweep at every requested elevation mask.
pub fn coverage(cfg: &RunConfig, out: &Output) -> CmdResult<Vec<PathBuf>> {
    cfg.validate()?;
    out.prepare()?;
    let shell = cfg.shell();
    let u = &cfg.user;
    let count = ((u.sweep_stop_deg - u.sweep_start_deg) / u.sweep_step_deg + 1e-9).floor() as usize + 1;
    let lats: Vec<f64> = (0..count).map(|k| u.sweep_start_deg + k as f64 * u.sweep_step_deg).collect();
    let mut rows = Vec::new();
    for &elev in &u.sweep_elevations_deg {
        let block: Vec<CmdResult<Vec<f64>>> = lats
            .par_iter()
            .map(|&lat| {
                let (p_sat, avg, avail) = avg_visible_or_zero(&shell, lat, elev)?;
                Ok(vec![lat, elev, p_sat, avg, avail])
            })
            .collect();
        for r in block {
            rows.push(r?);
        }
    }
    let header = ["latitude_deg", "min_elevation_deg", "p_sat", "avg_visible", "availability"];
    let path = match out.format {
        Format::Csv => out.write("coverage.csv", &csv("coverage", cfg, &header, &rows))?,
        Format::Json => out.write_json("coverage.json", &json!({ "config": cfg, "coverage": columns(&rows, &header) }))?,
    };
    Ok(vec![path])
}

/// Gain, delay and Doppler of `n` point-process samples inside the cap.
fn nbpp_samples(model: &CapModel, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let nbpp = NbppModel { shell: model.shell, n_points: model.shell.n_sats };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = nbpp.sample_visible(&model.user, n, MarkMode::Independent, &mut rng);
    sample_links(model, &pts)
}

fn sample_links(model: &CapModel, pts: &[SatellitePoint]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (s, u) = (&model.shell, &model.user);
    let mut g = Vec::with_capacity(pts.len());
    let mut d = Vec::with_capacity(pts.len());
    let mut f = Vec::with_capacity(pts.len());
    for p in pts {
        let sigma = u.central_angle(p.theta_rad, p.phi_rad).min(u.sigma_max_rad);
        g.push(gain(s, u, sigma).expect("visible sample"));
        d.push(delay(s, u, sigma).expect("visible sample"));
        f.push(doppler(s, u, p));
    }
    (g, d, f)
}

fn empirical(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Analytic gain, delay and Doppler distributions, optionally with Monte
/// Carlo columns.
pub fn distributions(cfg: &RunConfig, out: &Output) -> CmdResult<Vec<PathBuf>> {
    cfg.validate()?;
    let model = cap_model(cfg)?;
    out.prepare()?;
    let n = cfg.grid.cdf_points;
    let (shell, user) = (&model.shell, &model.user);
    let mc = (cfg.mc.samples > 0).then(|| {
        let (mut g, mut d, mut f) = nbpp_samples(&model, cfg.mc.samples, cfg.mc.seed);
        for v in [&mut g, &mut d, &mut f] {
            v.sort_by(f64::total_cmp);
        }
        (g, d, f)
    });

    let (g_min, g_max) = gain_range(shell, user);
    let gain_rows: Vec<Vec<f64>> = linspace(g_min, g_max, n)
        .into_par_iter()
        .map(|x| {
            let mut r = vec![x, gain_cdf(&model, x), gain_pdf(&model, x)];
            if let Some((g, _, _)) = &mc {
                r.push(empirical(g, x));
            }
            r
        })
        .collect();
    let (t_min, t_max) = delay_range(shell, user);
    let delay_rows: Vec<Vec<f64>> = linspace(t_min, t_max, n)
        .into_par_iter()
        .map(|x| {
            let mut r = vec![x, delay_cdf(&model, x), delay_pdf(&model, x)];
            if let Some((_, d, _)) = &mc {
                r.push(empirical(d, x));
            }
            r
        })
        .collect();
    let nu_max = max_doppler(shell, user);
    let doppler_rows: Vec<Vec<f64>> = linspace(-nu_max, nu_max, n)
        .into_par_iter()
        .map(|x| {
            let up = doppler_cdf(&model, x, Mark::Ascending);
            let down = doppler_cdf(&model, x, Mark::Descending);
            let mut r = vec![x, up, down, 0.5 * (up + down)];
            if let Some((_, _, f)) = &mc {
                r.push(empirical(f, x));
            }
            r
        })
        .collect();
    let density = doppler_pdf_grid(&model, &cfg.doppler_grid())?;
    // Cell centres, closed by zero rows at the outer grid corners, which lie
    // beyond the largest Doppler shift.
    let edges = &density.nu_edges_hz;
    let mut pdf_rows = vec![vec![edges[0], 0.0, 0.0, 0.0]];
    pdf_rows.extend(
        density
            .centers_hz()
            .iter()
            .enumerate()
            .map(|(i, &x)| vec![x, density.density_by_mark[0][i], density.density_by_mark[1][i], density.density[i]]),
    );
    pdf_rows.push(vec![edges[edges.len() - 1], 0.0, 0.0, 0.0]);

    let with_mc = |cols: &[&'static str]| {
        let mut v = cols.to_vec();
        if mc.is_some() {
            v.push("empirical_cdf");
        }
        v
    };
    let gain_h = with_mc(&["gain", "cdf", "pdf"]);
    let delay_h = with_mc(&["delay_s", "cdf", "pdf"]);
    let doppler_h = with_mc(&["doppler_hz", "cdf_ascending", "cdf_descending", "cdf_mixed"]);
    let pdf_h = ["doppler_hz", "pdf_ascending", "pdf_descending", "pdf_mixed"];
    match out.format {
        Format::Csv => Ok(vec![
            out.write("gain.csv", &csv("distributions", cfg, &gain_h, &gain_rows))?,
            out.write("delay.csv", &csv("distributions", cfg, &delay_h, &delay_rows))?,
            out.write("doppler_cdf.csv", &csv("distributions", cfg, &doppler_h, &doppler_rows))?,
            out.write("doppler_pdf.csv", &csv("distributions", cfg, &pdf_h, &pdf_rows))?,
        ]),
        Format::Json => Ok(vec![out.write_json(
            "distributions.json",
            &json!({
                "config": cfg,
                "gain": columns(&gain_rows, &gain_h),
                "delay": columns(&delay_rows, &delay_h),
                "doppler_cdf": columns(&doppler_rows, &doppler_h),
                "doppler_pdf": columns(&pdf_rows, &pdf_h),
            }),
        )?]),
    }
}

fn scattering_csv(cfg: &RunConfig, grid: &ScatteringGrid) -> String {
    let mut s = format!("# leo-channel scattering {}\ntau_s", cfg.summary_line());
    for nu in grid.nu_centers_hz() {
        write!(s, ",{nu}").expect("string write");
    }
    s.push('\n');
    for (j, tau) in grid.tau_centers_s().iter().enumerate() {
        s.push_str(&tau.to_string());
        for i in 0..grid.n_nu() {
            write!(s, ",{}", grid.at(j, i)).expect("string write");
        }
        s.push('\n');
    }
    s
}

/// Scattering function on the configured grid and the channel summary.
pub fn scattering(cfg: &RunConfig, out: &Output) -> CmdResult<Vec<PathBuf>> {
    cfg.validate()?;
    let model = cap_model(cfg)?;
    out.prepare()?;
    let grid = scattering_function(&model, &cfg.joint_grid())?;
    let summary = summarize(&model, &grid)?;
    let matrix = match out.format {
        Format::Csv => out.write("scattering.csv", &scattering_csv(cfg, &grid))?,
        Format::Json => out.write_json(
            "scattering.json",
            &json!({
                "config": cfg,
                "tau_centers_s": grid.tau_centers_s(),
                "nu_centers_hz": grid.nu_centers_hz(),
                "values": (0..grid.n_tau()).map(|j| (0..grid.n_nu()).map(|i| grid.at(j, i)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        )?,
    };
    let summary_path = out.write_json(
        "summary.json",
        &json!({ "config": cfg, "n_tau": grid.n_tau(), "n_nu": grid.n_nu(), "summary": summary }),
    )?;
    Ok(vec![matrix, summary_path])
}

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed: value < threshold, value: Some(value), threshold, detail: detail.into() }
    }

    fn error(name: &str, threshold: f64, err: &ChannelError) -> Check {
        Check { name: name.into(), passed: false, value: None, threshold, detail: err.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Doppler KS threshold of the circular-orbit comparison: wider near the
/// equator, where the discrete planes leave visible clusters.
fn orbit_doppler_threshold(user: &UserGeometry) -> f64 {
    if user.latitude_deg().abs() < 45.0 {
        0.10
    } else {
        0.05
    }
}

fn validation_checks(cfg: &RunConfig, model: &CapModel) -> Vec<Check> {
    let (shell, user) = (&model.shell, &model.user);
    let mut checks = Vec::new();
    let nu_max = max_doppler(shell, user);
    let doppler_table = TabulatedCdf::new(|x| doppler_cdf_mixed(model, x), -nu_max * (1.0 + 1e-6), nu_max * (1.0 + 1e-6), 4001)
        .expect("valid table range");

    // Point-process Monte Carlo against the analytic distributions.
    let n = cfg.mc.samples.max(1000);
    let ks_limit = (1.63 / (n as f64).sqrt()).max(0.005);
    let (mut g, mut d, mut f) = nbpp_samples(model, n, cfg.mc.seed);
    let detail = format!("{n} point-process samples");
    checks.push(Check::below("nbpp_ks_gain", ks_distance(&mut g, |x| gain_cdf(model, x)).expect("samples"), ks_limit, &detail));
    checks.push(Check::below("nbpp_ks_delay", ks_distance(&mut d, |x| delay_cdf(model, x)).expect("samples"), ks_limit, &detail));
    checks.push(Check::below("nbpp_ks_doppler", ks_distance(&mut f, |x| doppler_table.eval(x)).expect("samples"), ks_limit, &detail));

    // Derivatives against central differences.
    let (lo, hi) = (user.sigma_min_rad, user.sigma_max_rad);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let sigma = lo + (hi - lo) * (0.25 + 0.7 * i as f64 / 19.0);
        let (c, h) = (sigma.cos(), 1e-5);
        let fd = (model.p_cap((c + h).acos()) - model.p_cap((c - h).acos())) / (2.0 * h);
        let exact = model.p_cap_prime(sigma);
        worst = worst.max(((fd - exact) / exact).abs());
    }
    checks.push(Check::below("p_cap_prime_fd", worst, 1e-4, "20 interior points"));
    let (g_min, g_max) = gain_range(shell, user);
    let (t_min, t_max) = delay_range(shell, user);
    let pdf_gap = |cdf: &dyn Fn(f64) -> f64, pdf: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        (0..20)
            .map(|i| {
                let x = a + (b - a) * (0.05 + 0.9 * i as f64 / 19.0);
                let h = 1e-5 * (b - a);
                let fd = (cdf(x + h) - cdf(x - h)) / (2.0 * h);
                ((fd - pdf(x)) / pdf(x)).abs()
            })
            .fold(0.0, f64::max)
    };
    let gain_gap = pdf_gap(&|x| gain_cdf(model, x), &|x| gain_pdf(model, x), g_min, g_max);
    checks.push(Check::below("gain_pdf_fd", gain_gap, 1e-3, "20 interior points"));
    let delay_gap = pdf_gap(&|x| delay_cdf(model, x), &|x| delay_pdf(model, x), t_min, t_max);
    checks.push(Check::below("delay_pdf_fd", delay_gap, 1e-3, "20 interior points"));

    // Normalization and symmetry.
    match doppler_pdf_grid(model, &cfg.doppler_grid()) {
        Ok(dens) => checks.push(Check::below("doppler_pdf_mass", (dens.total_mass() - 1.0).abs(), 1e-3, "Σ pdf Δν")),
        Err(e) => checks.push(Check::error("doppler_pdf_mass", 1e-3, &e)),
    }
    let sweep = linspace(-nu_max, nu_max, 400);
    let cdf_up: Vec<f64> = sweep.par_iter().map(|&x| doppler_cdf(model, x, Mark::Ascending)).collect();
    let decreases = [
        cdf_up.windows(2).filter(|w| w[1] < w[0]).count(),
        linspace(g_min, g_max, 400).windows(2).filter(|w| gain_cdf(model, w[1]) < gain_cdf(model, w[0])).count(),
        linspace(t_min, t_max, 400).windows(2).filter(|w| delay_cdf(model, w[1]) < delay_cdf(model, w[0])).count(),
    ];
    checks.push(Check::below("cdf_monotone", decreases.iter().sum::<usize>() as f64, 0.5, "decreasing steps in 400-point sweeps"));
    let asym = sweep
        .par_iter()
        .step_by(20)
        .map(|&x| (doppler_cdf(model, x, Mark::Ascending) - (1.0 - doppler_cdf(model, -x, Mark::Descending))).abs())
        .reduce(|| 0.0, f64::max);
    checks.push(Check::below("mark_symmetry", asym, 1e-6, "F(ν|+1) against 1 - F(-ν|-1)"));

    // Path loss two ways, and grid convergence.
    let (rho2, _) = path_loss_proposition(model);
    match checked_global_params(model, &cfg.joint_grid()) {
        Ok((summary, change)) => {
            checks.push(Check::below("path_loss_dual", (summary.grid_rho2 / rho2 - 1.0).abs(), 0.01, "grid against path-loss integral"));
            checks.push(Check::below("grid_convergence", change, 0.01, "parameters at doubled steps"));
        }
        Err(e) => {
            checks.push(Check::error("path_loss_dual", 0.01, &e));
            checks.push(Check::error("grid_convergence", 0.01, &e));
        }
    }

    // Circular orbits.
    match cfg.constellation() {
        Ok(constellation) => {
            let static_frame = WalkerConstellation { user_drift_rate: 0.0, ..constellation.clone() };
            checks.push(Check::below(
                "orbit_doppler_fd",
                doppler_consistency(&static_frame, user, 100, cfg.mc.seed),
                1e-3,
                "100 (satellite, time) pairs",
            ));
            let times = snapshot_times(&constellation, cfg.mc.snapshots, cfg.mc.snapshot_step_s, cfg.mc.seed);
            match snapshot_sample(&constellation, user, &times, cfg.mc.seed) {
                Ok(obs) => {
                    let links: Vec<_> = obs.iter().filter_map(|o| o.link).collect();
                    let detail = format!("{} snapshots with a visible satellite", links.len());
                    if links.is_empty() {
                        checks.push(Check::error("orbit_ks", 0.03, &ChannelError::domain("no visible satellite in any snapshot")));
                    } else {
                        let mut g: Vec<f64> = links.iter().map(|l| l.gain).collect();
                        let mut d: Vec<f64> = links.iter().map(|l| l.delay_s).collect();
                        let mut f: Vec<f64> = links.iter().map(|l| l.doppler_hz).collect();
                        checks.push(Check::below("orbit_ks_gain", ks_distance(&mut g, |x| gain_cdf(model, x)).expect("samples"), 0.03, &detail));
                        checks.push(Check::below("orbit_ks_delay", ks_distance(&mut d, |x| delay_cdf(model, x)).expect("samples"), 0.03, &detail));
                        checks.push(Check::below(
                            "orbit_ks_doppler",
                            ks_distance(&mut f, |x| doppler_table.eval(x)).expect("samples"),
                            orbit_doppler_threshold(user),
                            &detail,
                        ));
                    }
                }
                Err(e) => checks.push(Check::error("orbit_ks", 0.03, &e)),
            }
        }
        Err(e) => checks.push(Check::error("orbit_doppler_fd", 1e-3, &e)),
    }
    checks
}

/// Runs every oracle check and writes `report.json`. Fails with
/// [`CommandError::Validation`] after writing if any check fails.
pub fn validate(cfg: &RunConfig, out: &Output) -> CmdResult<(ValidationReport, PathBuf)> {
    cfg.validate()?;
    let model = cap_model(cfg)?;
    out.prepare()?;
    let checks = validation_checks(cfg, &model);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let report = ValidationReport { config: cfg.clone(), passed: failed == 0, checks };
    let path = out.write_json("report.json", &report)?;
    if failed > 0 {
        return Err(CommandError::Validation(failed));
    }
    Ok((report, path))
}
