//! The circumcenter extension `F` of the boundary map and the diagnostics
//! built on it.
//!
//! For fixed `x`, `y ↦ d_M(f*ρ_x, ρ_y)` is the maximum over the sample of
//! the Busemann functions `B(y, zᵢ, ξᵢ)`, where `zᵢ` is the conjugacy foot of
//! the vector at `x` pointing at `ξᵢ`. `F(x)` minimises that maximum.

mod balance;
mod diagnostics;

pub use balance::caratheodory_balance;
pub use diagnostics::*;

use std::io::Write;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::conjugacy::{ConjugacyResult, DeformationPair};
use crate::error::Result;
use crate::hyperbolic::{h_ray, DiskPoint, IdealPoint};
use crate::manifold::solve::golden_min;
use crate::manifold::{busemann_from_rays, Ray};

/// Optimizer settings for [`circumcenter_extend`].
#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtendOptions {
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    /// Width of the near-maximal band; `None` picks
    /// `max(5e-3, 3 · limit_tol · N)`.
    pub band: Option<f64>,
    /// Smallest band the optimizer shrinks to before it stops.
    pub band_min: f64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-5,
            step_tol: 1e-8,
            max_iter: 500,
            armijo: 0.25,
            band: None,
            band_min: 1e-11,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionResult {
    pub x: DiskPoint,
    pub f_x: DiskPoint,
    pub r_x: f64,
    pub argmax_band: Vec<usize>,
    /// At most three `(sample index, weight)` atoms.
    pub balanced_weights: Vec<(usize, f64)>,
    pub balance_residual_at_x: f64,
    pub balance_residual_at_fx: f64,
    pub optimizer_iters: usize,
    /// False when the iteration cap stopped the optimizer; `f_x` is then the
    /// best iterate.
    pub converged: bool,
}

pub fn write_extension_csv<W: Write>(w: W, rows: &[ExtensionResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "x", "y", "fx", "fy", "r", "band_size", "atoms", "balance_x", "balance_fx", "iters",
        "converged",
    ])?;
    for r in rows {
        let atoms: Vec<String> = r
            .balanced_weights
            .iter()
            .map(|(i, w)| format!("{i}:{w:.6}"))
            .collect();
        out.write_record([
            format!("{:.12e}", r.x.x()),
            format!("{:.12e}", r.x.y()),
            format!("{:.12e}", r.f_x.x()),
            format!("{:.12e}", r.f_x.y()),
            format!("{:.12e}", r.r_x),
            r.argmax_band.len().to_string(),
            atoms.join(" "),
            format!("{:.6e}", r.balance_residual_at_x),
            format!("{:.6e}", r.balance_residual_at_fx),
            r.optimizer_iters.to_string(),
            r.converged.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Conjugacy feet of the vectors at `x` pointing at every sample point.
#[derive(Clone, Debug)]
pub struct Feet {
    pub x: DiskPoint,
    pub results: Vec<ConjugacyResult>,
}

impl Feet {
    pub fn new(pair: &DeformationPair, x: &DiskPoint) -> Result<Self> {
        let vs: Vec<_> = pair.sample().points().iter().map(|p| h_ray(x, p)).collect();
        Ok(Self {
            x: *x,
            results: pair.conjugate_all(&vs)?,
        })
    }

    fn ray(&self, pair: &DeformationPair, i: usize) -> Ray {
        let mut r = self.results[i].ray();
        r.target = pair.boundary_map(&pair.sample().point(i));
        r
    }
}

/// `y ↦ maxᵢ B(y, zᵢ, f(ξᵢ))` with the rays from the last evaluation kept
/// as warm starts.
struct Objective<'a> {
    pair: &'a DeformationPair,
    feet: &'a Feet,
    targets: Vec<IdealPoint>,
}

#[derive(Clone)]
struct Eval {
    y: DiskPoint,
    values: Vec<f64>,
    rays: Vec<Ray>,
    max: f64,
}

impl<'a> Objective<'a> {
    fn new(pair: &'a DeformationPair, feet: &'a Feet) -> Self {
        let targets = pair.sample().points().iter().map(|p| pair.boundary_map(p)).collect();
        Self { pair, feet, targets }
    }

    fn eval(&self, y: &DiskPoint, hint: Option<&Eval>) -> Result<Eval> {
        let s1 = self.pair.space1();
        let rays = match hint {
            Some(h) => s1.rays_from(y, &h.rays)?,
            None => s1.rays(y, &self.targets)?,
        };
        let values: Vec<f64> = rays
            .iter()
            .enumerate()
            .map(|(i, r)| busemann_from_rays(r, &self.feet.ray(self.pair, i)))
            .collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Eval { y: *y, values, rays, max })
    }
}

fn band_of(values: &[f64], max: f64, delta: f64) -> Vec<usize> {
    (0..values.len()).filter(|&i| values[i] >= max - delta).collect()
}

/// Minimum-norm combination of `-u` over the band, where `u` are the unit
/// directions (frame coordinates) of the rays towards the band members.
fn band_step(e: &Eval, band: &[usize]) -> (Vector2<f64>, Vec<f64>, f64) {
    let grads: Vec<Vector2<f64>> = band
        .iter()
        .map(|&i| -Vector2::new(e.rays[i].theta.cos(), e.rays[i].theta.sin()))
        .collect();
    let (w, r) = caratheodory_balance(&grads);
    let p: Vector2<f64> = grads.iter().zip(&w).map(|(g, w)| g * *w).sum();
    (p, w, r)
}

pub(crate) fn default_band(pair: &DeformationPair) -> f64 {
    (3.0 * pair.space1().settings().limit_tol * pair.sample().len() as f64).max(5e-3)
}

/// Minimiser over `[0, t_max]` of `t ↦ maxᵢ (aᵢ + bᵢ t)`.
fn model_step(a: &[f64], b: &[f64], t_max: f64) -> f64 {
    let phi = |t: f64| a.iter().zip(b).map(|(a, b)| a + b * t).fold(f64::NEG_INFINITY, f64::max);
    golden_min(|t| Ok(phi(t)), 0.0, t_max, 1e-12 * t_max.max(1.0))
        .map(|(t, _)| t)
        .unwrap_or(0.0)
}

/// `d_M(f*ρ_x, ρ_y)` as the largest `B(y, zᵢ, f(ξᵢ))`, with every term.
pub fn dm_pushforward(pair: &DeformationPair, x: &DiskPoint, y: &DiskPoint) -> Result<(f64, Vec<f64>)> {
    let feet = Feet::new(pair, x)?;
    dm_pushforward_with(pair, &feet, y)
}

pub fn dm_pushforward_with(pair: &DeformationPair, feet: &Feet, y: &DiskPoint) -> Result<(f64, Vec<f64>)> {
    let e = Objective::new(pair, feet).eval(y, None)?;
    Ok((e.max.max(0.0), e.values))
}

/// `F(x)`, the minimiser of `y ↦ d_M(f*ρ_x, ρ_y)`.
pub fn circumcenter_extend(pair: &DeformationPair, x: &DiskPoint, opts: &ExtendOptions) -> Result<ExtensionResult> {
    pair.gate()?;
    let feet = Feet::new(pair, x)?;
    extend_from(pair, &feet, x, opts)
}

/// As [`circumcenter_extend`] with precomputed feet, starting at `start`.
pub fn extend_from(
    pair: &DeformationPair,
    feet: &Feet,
    start: &DiskPoint,
    opts: &ExtendOptions,
) -> Result<ExtensionResult> {
    let obj = Objective::new(pair, feet);
    let s1 = pair.space1();
    let report_band = opts.band.unwrap_or_else(|| default_band(pair));
    let mut delta = report_band;
    let mut cur = obj.eval(start, None)?;
    let mut t: f64 = 1.0;
    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iter {
        let band = band_of(&cur.values, cur.max, delta);
        let (p, _, norm) = band_step(&cur, &band);
        if norm <= opts.grad_tol {
            // stationary for this band: tighten it, or stop at the floor
            if delta <= opts.band_min {
                converged = true;
                break;
            }
            delta = (0.1 * delta).max(opts.band_min);
            continue;
        }
        iters += 1;
        let [e1, e2] = s1.frame(&cur.y);
        let dir = -(e1 * p.x + e2 * p.y);
        // first trial: the minimiser of the linearised maximum along -p
        let slopes: Vec<f64> = cur
            .rays
            .iter()
            .map(|r| -Vector2::new(r.theta.cos(), r.theta.sin()).dot(&-p))
            .collect();
        let tm = model_step(&cur.values, &slopes, 1.0 / norm);
        t = if tm > 0.0 { tm } else { (2.0 * t).min(1.0 / norm) };
        let mut accepted = None;
        while t * norm >= opts.step_tol {
            let y = cur.y.offset(&(dir * t));
            let cand = obj.eval(&y, Some(&cur))?;
            if cand.max <= cur.max - opts.armijo * t * norm * norm {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(c) => cur = c,
            None => {
                t = opts.step_tol;
                if delta <= opts.band_min {
                    converged = true;
                    break;
                }
                delta = (0.1 * delta).max(opts.band_min);
            }
        }
    }
    let band = band_of(&cur.values, cur.max, report_band);
    let (_, w, res_fx) = band_step(&cur, &band);
    let mut atoms: Vec<(usize, f64)> = band
        .iter()
        .zip(&w)
        .filter(|(_, w)| **w > 0.0)
        .map(|(&i, &w)| (i, w))
        .collect();
    atoms.sort_by(|a, b| b.1.total_cmp(&a.1));
    atoms.truncate(3);
    let xdirs: Vec<Vector2<f64>> = band
        .iter()
        .map(|&i| {
            let d = h_ray(&feet.x, &pair.sample().point(i)).dir;
            d / d.norm()
        })
        .collect();
    let (_, res_x) = caratheodory_balance(&xdirs);
    Ok(ExtensionResult {
        x: feet.x,
        f_x: cur.y,
        r_x: cur.max.max(0.0),
        argmax_band: band,
        balanced_weights: atoms,
        balance_residual_at_x: res_x,
        balance_residual_at_fx: res_fx,
        optimizer_iters: iters,
        converged,
    })
}
