//! Test-side closed forms, written from the Poisson kernel and explicit
//! Moebius maps of the disk, independent of the library's formulas.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn boundary(angle: f64) -> C {
    C::from_polar(1.0, angle)
}

/// Poisson kernel `(1 - |z|²) / |ξ - z|²`.
pub fn poisson(z: C, xi: C) -> f64 {
    (1.0 - z.norm_sqr()) / (xi - z).norm_sqr()
}

pub fn distance(x: C, y: C) -> f64 {
    (1.0 + 2.0 * (x - y).norm_sqr() / ((1.0 - x.norm_sqr()) * (1.0 - y.norm_sqr()))).acosh()
}

pub fn busemann(x: C, y: C, xi: C) -> f64 {
    (poisson(y, xi) / poisson(x, xi)).ln()
}

pub fn visual(x: C, xi: C, eta: C) -> f64 {
    0.5 * (xi - eta).norm() * (poisson(x, xi) * poisson(x, eta)).sqrt()
}

pub fn gromov(x: C, xi: C, eta: C) -> f64 {
    -visual(x, xi, eta).ln()
}

/// `z ↦ (z - a) / (1 - āz)`, sending `a` to 0.
pub fn to_zero(a: C, z: C) -> C {
    (z - a) / (C::new(1.0, 0.0) - a.conj() * z)
}

pub fn from_zero(a: C, w: C) -> C {
    (w + a) / (C::new(1.0, 0.0) + a.conj() * w)
}

/// Point a distance `t` from `x` in chart direction `theta`. The map to the
/// origin has a positive real derivative at `x`, so directions carry over.
pub fn flow_point(x: C, theta: f64, t: f64) -> C {
    from_zero(x, C::from_polar((0.5 * t).tanh(), theta))
}

pub fn ray_endpoint(x: C, theta: f64) -> C {
    from_zero(x, boundary(theta))
}

/// The two ends of the geodesic through `x` and `y`.
pub fn line_ends(x: C, y: C) -> [C; 2] {
    let w = to_zero(x, y);
    let u = w / w.norm();
    [from_zero(x, u), from_zero(x, -u)]
}

fn smoothstep3(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s.powi(4) * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s.powi(3))
}

/// The twist about `c`: rotation by `α(r)` at hyperbolic radius `r`, with
/// `α = alpha0` for `r ≤ R/4` and `0` for `r ≥ R`.
pub fn twist(c: C, radius: f64, alpha0: f64, z: C) -> C {
    let w = to_zero(c, z);
    let r = 2.0 * w.norm().atanh();
    let a = alpha0 * smoothstep3((radius - r) / (0.75 * radius));
    from_zero(c, w * C::from_polar(1.0, a))
}

pub fn point_near(rng: &mut ChaCha8Rng, c: C, max_dist: f64) -> C {
    let t = rng.gen_range(0.0..max_dist);
    flow_point(c, rng.gen_range(0.0..std::f64::consts::TAU), t)
}

pub fn c(p: &moebius_rigidity::hyperbolic::DiskPoint) -> C {
    p.z()
}

pub fn d(z: C) -> moebius_rigidity::hyperbolic::DiskPoint {
    moebius_rigidity::hyperbolic::DiskPoint::from_complex(z).unwrap()
}

pub fn ideal(z: C) -> moebius_rigidity::hyperbolic::IdealPoint {
    moebius_rigidity::hyperbolic::IdealPoint::new(z.arg())
}

/// Largest gap between sample points as seen from `x`.
pub fn gap_seen_from(x: C, angles: impl IntoIterator<Item = f64>) -> f64 {
    let mut a: Vec<f64> = angles
        .into_iter()
        .map(|t| to_zero(x, boundary(t)).arg().rem_euclid(std::f64::consts::TAU))
        .collect();
    a.sort_by(f64::total_cmp);
    let wrap = a[0] + std::f64::consts::TAU - a[a.len() - 1];
    a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}
