//! Boundary-at-infinity quantities of the deformed space: bi-infinite
//! geodesics, Busemann functions, Gromov products, visual metrics, shadows
//! and angles.
//!
//! Every ray eventually leaves the support ball along a hyperbolic ray, so
//! each limit splits into a finite numerical part and a closed-form tail.

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;

use super::solve::{brent, golden_min};
use super::space::{GeodesicLine, PerturbedSpace, Ray, RayExit};
use crate::boundary::{BoundarySample, SampledMetric, DEFAULT_ANTIPODAL_TOL};
use crate::error::{Error, Result};
use crate::hyperbolic::{
    h_busemann, h_flow, h_line_closest, ideal_from_origin, ideal_to_origin, wrap_pi, DiskPoint,
    IdealPoint,
};

/// Extra distance beyond the support at which line anchors are placed.
const ANCHOR_MARGIN: f64 = 0.5;

/// `B(x, y, ξ)` from the solved rays `[x, ξ)` and `[y, ξ)`.
pub fn busemann_from_rays(rx: &Ray, ry: &Ray) -> f64 {
    rx.exit.s + h_busemann(&rx.exit.state.base, &ry.exit.state.base, &rx.target) - ry.exit.s
}

/// `B(x, a, ξ)` where `a` reaches the hyperbolic ray to `ξ` after `exit`.
fn busemann_to_exit(rx: &Ray, exit: &RayExit) -> f64 {
    rx.exit.s + h_busemann(&rx.exit.state.base, &exit.state.base, &rx.target) - exit.s
}

/// `(ξ|η)_x` from the rays `[x, ξ)`, `[x, η)` and the line from `ξ` to `η`.
pub fn gromov_from_rays(r_xi: &Ray, r_eta: &Ray, line: &GeodesicLine) -> f64 {
    let back = RayExit {
        s: 0.0,
        state: line.anchor.reversed(),
    };
    0.5 * (busemann_to_exit(r_xi, &back) + busemann_to_exit(r_eta, &line.exit))
}

pub(crate) fn max_gap(mut angles: Vec<f64>) -> f64 {
    angles.iter_mut().for_each(|a| *a = a.rem_euclid(TAU));
    angles.sort_by(f64::total_cmp);
    let mut gap = TAU - (angles[angles.len() - 1] - angles[0]);
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Antipodality tolerance for a visual metric sampled with rays whose
/// directions leave a largest angular gap `gap` at the base point.
pub fn sample_antipodal_tol(gap: f64) -> f64 {
    DEFAULT_ANTIPODAL_TOL.max(1.0 - (0.25 * gap).cos())
}

impl PerturbedSpace {
    /// The geodesic from `ξ` (at `-∞`) to `η` (at `+∞`).
    pub fn line(&self, xi: &IdealPoint, eta: &IdealPoint) -> Result<Arc<GeodesicLine>> {
        // solve each unordered pair once, in a fixed orientation, so results
        // do not depend on evaluation order
        if xi.angle() > eta.angle() {
            return Ok(Arc::new(self.line(eta, xi)?.reversed()));
        }
        let key = (xi.angle().to_bits(), eta.angle().to_bits());
        if let Some(l) = self.lines.read().expect("line cache poisoned").get(&key) {
            return Ok(l.clone());
        }
        let line = Arc::new(self.solve_line(xi, eta)?);
        let mut cache = self.lines.write().expect("line cache poisoned");
        Ok(cache.entry(key).or_insert(line).clone())
    }

    fn line_anchor(&self, xi: &IdealPoint, zeta: &IdealPoint) -> crate::hyperbolic::UnitTangent {
        let c = h_line_closest(&self.field().center, xi, zeta);
        h_flow(&c, -(self.field().radius + ANCHOR_MARGIN))
    }

    fn solve_line(&self, xi: &IdealPoint, eta: &IdealPoint) -> Result<GeodesicLine> {
        if xi == eta {
            return Err(Error::InvalidParameter(
                "a geodesic needs two distinct endpoints".into(),
            ));
        }
        let x0 = self.field().center;
        let xl = ideal_to_origin(&x0, xi).angle();
        let target = (ideal_to_origin(&x0, eta).angle() - xl).rem_euclid(TAU);
        let dr = 2.0 * (1.0 / self.field().radius.cosh()).asin();
        if target <= dr || target >= TAU - dr {
            let anchor = h_line_closest(&x0, xi, eta);
            return Ok(GeodesicLine {
                backward: *xi,
                forward: *eta,
                anchor,
                exit: RayExit {
                    s: 0.0,
                    state: anchor,
                },
            });
        }
        // lines leaving ξ, labelled by the far end ζ of the hyperbolic line
        // they follow before meeting the support
        let shot = |delta: f64| -> Result<(crate::hyperbolic::UnitTangent, RayExit, f64)> {
            let zeta = ideal_from_origin(&x0, &IdealPoint::new(xl + delta));
            let anchor = self.line_anchor(xi, &zeta);
            let exit = self.ray_exit(&anchor)?;
            let e = (ideal_to_origin(&x0, &exit.endpoint()).angle() - xl).rem_euclid(TAU);
            Ok((anchor, exit, e - target))
        };
        let (_, _, f0) = shot(target)?;
        let (lo, flo, hi, fhi) = if f0 < 0.0 {
            (target, f0, TAU - dr, TAU - dr - target)
        } else {
            (dr, dr - target, target, f0)
        };
        let delta = brent(|d| Ok(shot(d)?.2), lo, hi, flo, fhi, 1e-14, 200)?;
        let (anchor, exit, miss) = shot(delta)?;
        if miss.abs() > 1e-8 {
            return Err(Error::BvpFailure(format!(
                "line from {} to {} misses by {miss:.3e}",
                xi.angle(),
                eta.angle()
            )));
        }
        Ok(GeodesicLine {
            backward: *xi,
            forward: *eta,
            anchor,
            exit,
        })
    }

    /// Point at signed arclength `s` along a line, measured from its anchor.
    pub fn line_point(
        &self,
        line: &GeodesicLine,
        s: f64,
    ) -> Result<crate::hyperbolic::UnitTangent> {
        if s <= 0.0 {
            Ok(h_flow(&line.anchor, s))
        } else {
            self.along_ray(&line.anchor, &line.exit, s)
        }
    }

    /// Rays from `x` to each target, in order.
    pub fn rays(&self, x: &DiskPoint, targets: &[IdealPoint]) -> Result<Vec<Ray>> {
        targets.par_iter().map(|xi| self.p_ray(x, xi)).collect()
    }

    /// As [`Self::rays`], warm-starting each solve at the frame angle of a
    /// previous ray.
    pub fn rays_from(&self, x: &DiskPoint, previous: &[Ray]) -> Result<Vec<Ray>> {
        previous
            .par_iter()
            .map(|r| self.p_ray_from(x, &r.target, Some(r.theta)))
            .collect()
    }

    pub fn p_busemann(&self, x: &DiskPoint, y: &DiskPoint, xi: &IdealPoint) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        Ok(busemann_from_rays(&self.p_ray(x, xi)?, &self.p_ray(y, xi)?))
    }

    /// The Busemann function by truncating the defining limit along the ray
    /// `[x, ξ)`, with an Aitken step. Kept as an independent reference for
    /// [`Self::p_busemann`].
    pub fn p_busemann_truncated(&self, x: &DiskPoint, y: &DiskPoint, xi: &IdealPoint) -> Result<f64> {
        let ray = self.p_ray(x, xi)?;
        let mut vals: Vec<f64> = Vec::new();
        let mut t = 2.0;
        while t <= self.settings().r_max {
            let z = self.along_ray(&ray.tangent, &ray.exit, t)?.base;
            vals.push(t - self.p_distance(y, &z)?);
            let n = vals.len();
            if n >= 2 && (vals[n - 1] - vals[n - 2]).abs() <= self.settings().limit_tol {
                if n >= 3 {
                    let (a, b, c) = (vals[n - 3], vals[n - 2], vals[n - 1]);
                    let den = c - 2.0 * b + a;
                    if den.abs() > 1e-15 {
                        return Ok(c - (c - b).powi(2) / den);
                    }
                }
                return Ok(vals[n - 1]);
            }
            t += 2.0;
        }
        Err(Error::LimitNotConverged(format!(
            "Busemann limit unresolved at truncation radius {}",
            self.settings().r_max
        )))
    }

    pub fn p_gromov(&self, x: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> Result<f64> {
        if xi == eta {
            return Err(Error::InfiniteGromovProduct);
        }
        let line = self.line(xi, eta)?;
        Ok(gromov_from_rays(&self.p_ray(x, xi)?, &self.p_ray(x, eta)?, &line))
    }

    pub fn p_visual(&self, x: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> Result<f64> {
        if xi == eta {
            return Ok(0.0);
        }
        Ok((-self.p_gromov(x, xi, eta)?).exp().min(1.0))
    }

    /// The visual metric at `x` on a boundary sample.
    pub fn p_visual_sample(&self, x: &DiskPoint, sample: &BoundarySample) -> Result<SampledMetric> {
        let rays = self.rays(x, sample.points())?;
        self.visual_sample_from_rays(sample, &rays)
    }

    /// Assembles the visual metric from already solved rays to every sample
    /// point.
    pub fn visual_sample_from_rays(&self, sample: &BoundarySample, rays: &[Ray]) -> Result<SampledMetric> {
        let n = sample.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let vals: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let line = self.line(&sample.point(i), &sample.point(j))?;
                Ok((-gromov_from_rays(&rays[i], &rays[j], &line)).exp().min(1.0))
            })
            .collect::<Result<_>>()?;
        let mut dist = vec![0.0; n * n];
        for (&(i, j), v) in pairs.iter().zip(vals) {
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
        let tol = sample_antipodal_tol(max_gap(rays.iter().map(|r| r.theta).collect()));
        SampledMetric::new(sample.clone(), dist, tol)
    }

    /// `i_x(ξ)`: the far end of the geodesic leaving `x` away from `ξ`.
    pub fn p_involution(&self, x: &DiskPoint, xi: &IdealPoint) -> Result<IdealPoint> {
        let r = self.p_ray(x, xi)?;
        self.ideal_endpoint(&r.tangent.reversed())
    }

    pub fn p_angle(&self, x: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> Result<f64> {
        if xi == eta {
            return Ok(0.0);
        }
        let a = self.p_ray(x, xi)?.theta;
        let b = self.p_ray(x, eta)?.theta;
        Ok(wrap_pi(a - b).abs())
    }

    /// Whether the ray `[x, ξ)` meets the closed ball of this metric with the
    /// given center and radius.
    pub fn in_shadow(
        &self,
        x: &DiskPoint,
        xi: &IdealPoint,
        center: &DiskPoint,
        radius: f64,
    ) -> Result<bool> {
        Ok(self.ray_min_distance(x, xi, center)? <= radius)
    }

    /// Minimum distance from `center` to the ray `[x, ξ)`. The distance is
    /// convex along geodesics, so a bracketing march and a golden-section
    /// search find it.
    pub fn ray_min_distance(&self, x: &DiskPoint, xi: &IdealPoint, center: &DiskPoint) -> Result<f64> {
        let ray = self.p_ray(x, xi)?;
        let f = |s: f64| -> Result<f64> {
            let p = self.along_ray(&ray.tangent, &ray.exit, s)?.base;
            self.p_distance(center, &p)
        };
        let h = 0.5;
        let f0 = f(0.0)?;
        let mut a = 0.0;
        let (mut b, mut fb) = (h, f(h)?);
        if fb >= f0 {
            let (_, m) = golden_min(f, 0.0, h, 1e-7)?;
            return Ok(m.min(f0));
        }
        loop {
            let c = b + h;
            let fc = f(c)?;
            if fc >= fb {
                let (_, m) = golden_min(f, a, c, 1e-7)?;
                return Ok(m.min(fb));
            }
            a = b;
            (b, fb) = (c, fc);
            if b > 100.0 {
                return Err(Error::LimitNotConverged(
                    "distance to the ray kept decreasing".into(),
                ));
            }
        }
    }
}
