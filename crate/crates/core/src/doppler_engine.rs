//! Measure of `{θ : V(θ, φ) ≤ ν}` along latitude lines of the cap, and its
//! integral over the argument of latitude.
//!
//! Two evaluators share the same geometry. The pointwise one brackets the
//! roots of `V - ν` by a uniform scan and bisection. The grid one splits
//! each latitude line once into monotone pieces and then serves every
//! `(ν, σ)` pair of a grid from them, so that mixed differences over the
//! grid are non-negative node by node.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::nbpp::phi_of_omega;
use crate::propagation::{LatitudeLine, Mark};
use crate::quadrature::{composite_open, integrate_panels, Tolerance};
use crate::visibility::{arc_length_at, CapModel};

const CENTER: f64 = FRAC_PI_2;

/// Bisection to `1e-12` rad of the sign change of `g` in `[a, b]`, where
/// `g(a) = ga`.
fn bisect<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let below_at_a = ga <= 0.0;
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if (g(m) <= 0.0) == below_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Length of `{θ ∈ [lo, hi] : line(θ) ≤ nu}` by a uniform `n_scan`-point
/// bracketing scan.
pub(crate) fn measure_below_scan(line: &LatitudeLine, lo: f64, hi: f64, nu: f64, n_scan: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let g = |t: f64| line.eval(t) - nu;
    let step = (hi - lo) / (n_scan - 1) as f64;
    let mut total = 0.0;
    let (mut t0, mut g0) = (lo, g(lo));
    for k in 1..n_scan {
        let t1 = if k == n_scan - 1 { hi } else { lo + k as f64 * step };
        let g1 = g(t1);
        match (g0 <= 0.0, g1 <= 0.0) {
            (true, true) => total += t1 - t0,
            (false, false) => {}
            (true, false) => total += bisect(&g, t0, t1, g0) - t0,
            (false, true) => total += t1 - bisect(&g, t0, t1, g0),
        }
        t0 = t1;
        g0 = g1;
    }
    total
}

/// Panel boundaries in `ω` for the cap of angle `sigma`: the ends of the
/// range of latitude lines that meet the cap and every point where the
/// covered arc changes form.
pub(crate) fn omega_breaks(model: &CapModel, sigma: f64) -> Vec<f64> {
    let Some((lo, hi)) = model.cap_omega_range(sigma) else {
        return Vec::new();
    };
    let phi_u = model.user.user_polar_rad;
    let mut breaks = vec![lo, hi];
    for phi in [(phi_u - sigma).abs(), phi_u + sigma] {
        let w = crate::nbpp::omega_of_phi(&model.shell, phi);
        if w > lo && w < hi {
            breaks.push(w);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks
}

/// `P(V ≤ ν, σ(Θ, Φ) ≤ sigma)` for one mark, unnormalised by `p_sat`.
pub(crate) fn joint_probability(model: &CapModel, nu_hz: f64, sigma: f64, mark: Mark, n_scan: usize) -> f64 {
    let breaks = omega_breaks(model, sigma);
    if breaks.len() < 2 {
        return 0.0;
    }
    let shell = model.shell;
    let user = model.user;
    let scale = shell.doppler_scale();
    let integrand = |w: f64| {
        let phi = phi_of_omega(&shell, w);
        let half = 0.5 * arc_length_at(user.user_polar_rad, phi, sigma);
        if half <= 0.0 {
            return 0.0;
        }
        let line = LatitudeLine::with_scale(&shell, &user, phi, mark, scale);
        measure_below_scan(&line, CENTER - half, CENTER + half, nu_hz, n_scan)
    };
    let tol = Tolerance { rel: model.quadrature_tol, abs: 1e-13, max_panels: 4000 };
    integrate_panels(integrand, &breaks, tol) / (2.0 * PI * PI)
}

/// Quadrature resolution of the grid evaluator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GridResolution {
    /// Gauss-Legendre order per sub-panel.
    pub order: usize,
    /// Lower bound on the total number of `ω` nodes.
    pub min_nodes: usize,
    /// Samples per latitude line used to locate extrema.
    pub line_samples: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution { order: 8, min_nodes: 4000, line_samples: 96 }
    }
}

/// `ω` nodes and weights shared by all rows of a grid.
fn shared_nodes(model: &CapModel, sigmas: &[f64], res: GridResolution) -> Vec<(f64, f64)> {
    let mut breaks: Vec<f64> = sigmas.iter().flat_map(|&s| omega_breaks(model, s)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let panels = breaks.len().saturating_sub(1).max(1);
    let sub = res.min_nodes.div_ceil(panels * 2 * res.order).max(1);
    breaks.windows(2).flat_map(|w| composite_open(w[0], w[1], res.order, sub)).collect()
}

/// Golden-section search for an extremum of `f` in `[a, b]`; `sign = 1`
/// looks for a maximum, `-1` for a minimum.
fn golden_extremum<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, sign: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (sign * f(x1), sign * f(x2));
    while b - a > 1e-11 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sign * f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sign * f(x1);
        }
    }
    0.5 * (a + b)
}

/// Illinois false position for the root of a monotone `g` on `[a, b]`.
fn solve_monotone<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut ga: f64, mut b: f64, mut gb: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..100 {
        if b - a <= 1e-13 {
            break;
        }
        let mut x = (a * gb - b * ga) / (gb - ga);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx < 0.0) == (ga < 0.0) {
            a = x;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Monotone pieces `(θ_start, θ_end, V_start, V_end)` of one latitude line
/// over `[lo, hi]`.
fn monotone_pieces(line: &LatitudeLine, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64, f64, f64)> {
    let n = samples.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let ts: Vec<f64> = (0..n).map(|k| if k == n - 1 { hi } else { lo + k as f64 * step }).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| line.eval(t)).collect();
    let f = |t: f64| line.eval(t);
    let mut cuts = vec![(lo, vs[0])];
    for k in 1..n - 1 {
        let (dl, dr) = (vs[k] - vs[k - 1], vs[k + 1] - vs[k]);
        if dl * dr < 0.0 || (dl != 0.0 && dr == 0.0) {
            let sign = if dl > 0.0 { 1.0 } else { -1.0 };
            let t = golden_extremum(&f, ts[k - 1], ts[k + 1], sign);
            let t = t.max(cuts.last().unwrap().0);
            cuts.push((t, f(t)));
        }
    }
    cuts.push((hi, vs[n - 1]));
    cuts.windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[0].0, w[1].0, w[0].1, w[1].1))
        .collect()
}

/// `P(V ≤ ν_i, σ(Θ, Φ) ≤ σ_j)` for every mark, `ν_i` in `nus` and `σ_j` in
/// `sigmas`, unnormalised by `p_sat`. Rows follow `sigmas`, columns `nus`.
pub(crate) fn joint_probability_grid(
    model: &CapModel,
    marks: &[Mark],
    nus: &[f64],
    sigmas: &[f64],
    res: GridResolution,
) -> Vec<Vec<f64>> {
    let (n_nu, n_sig) = (nus.len(), sigmas.len());
    let sigma_outer = sigmas.iter().cloned().fold(0.0, f64::max);
    let nodes = shared_nodes(model, sigmas, res);
    let shell = model.shell;
    let user = model.user;
    let phi_u = user.user_polar_rad;
    let scale = shell.doppler_scale();

    // Nodes go in fixed blocks whose partial sums are added in order, so the
    // result does not depend on the thread schedule.
    const BLOCK: usize = 32;
    let blocks: Vec<Vec<Vec<f64>>> = nodes
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = vec![vec![0.0; n_nu * n_sig]; marks.len()];
            let mut halves = vec![0.0; n_sig];
            for &(w, weight) in chunk {
                let phi = phi_of_omega(&shell, w);
                let outer = 0.5 * arc_length_at(phi_u, phi, sigma_outer);
                if outer <= 0.0 {
                    continue;
                }
                for (h, &s) in halves.iter_mut().zip(sigmas) {
                    *h = 0.5 * arc_length_at(phi_u, phi, s);
                }
                for (m, &mark) in marks.iter().enumerate() {
                    let line = LatitudeLine::with_scale(&shell, &user, phi, mark, scale);
                    let pieces = monotone_pieces(&line, CENTER - outer, CENTER + outer, res.line_samples);
                    let acc = &mut acc[m];
                    for &(ta, tb, va, vb) in &pieces {
                        let rising = vb >= va;
                        let (vlo, vhi) = if rising { (va, vb) } else { (vb, va) };
                        for (i, &nu) in nus.iter().enumerate() {
                            let (l, u) = if nu >= vhi {
                                (ta, tb)
                            } else if nu < vlo {
                                continue;
                            } else {
                                let g = |t: f64| line.eval(t) - nu;
                                let x = solve_monotone(&g, ta, va - nu, tb, vb - nu);
                                if rising {
                                    (ta, x)
                                } else {
                                    (x, tb)
                                }
                            };
                            for (j, &h) in halves.iter().enumerate() {
                                let len = (u.min(CENTER + h) - l.max(CENTER - h)).max(0.0);
                                acc[j * n_nu + i] += weight * len;
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let norm = 1.0 / (2.0 * PI * PI);
    let mut out = vec![vec![0.0; n_nu * n_sig]; marks.len()];
    for block in blocks {
        for (o, b) in out.iter_mut().zip(block) {
            for (x, y) in o.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    for o in &mut out {
        for x in o.iter_mut() {
            *x *= norm;
        }
    }
    out
}
