//! The deformed space: solver settings, geodesic shooting, ray exits and the
//! two-point boundary value problem.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, RwLock};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use super::field::MetricField;
use super::ode::{self, Control, OdeOptions, State};
use super::solve::brent;
use crate::error::{Error, Result};
use crate::hyperbolic::{
    h_distance, h_endpoint, ideal_to_origin, h_flow, h_log, h_ray, h_segment_distance,
    wrap_pi, DiskPoint, IdealPoint, Tangent, UnitTangent,
};

/// Hyperbolic distance before the support ball at which numerical
/// integration takes over from the closed-form flow.
const ENTRY_MARGIN: f64 = 0.05;
/// Longest arclength a ray may spend before it must have left the support.
const RAY_T_MAX: f64 = 200.0;
/// Angular tolerance for ray and line endpoint solves.
pub(crate) const ANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub ode_tol: f64,
    pub bvp_tol: f64,
    /// Truncation radius of the reference limit scheme.
    pub r_max: f64,
    pub limit_tol: f64,
    pub curv_tol: f64,
    /// Points per side of the polar curvature grid.
    pub curvature_grid: usize,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            ode_tol: 1e-11,
            bvp_tol: 1e-10,
            r_max: 25.0,
            limit_tol: 1e-7,
            curv_tol: 1e-3,
            curvature_grid: 100,
            max_iter: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathNode {
    pub s: f64,
    pub point: DiskPoint,
    pub velocity: Tangent,
}

/// A sampled unit-speed geodesic.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GeodesicPath {
    pub nodes: Vec<PathNode>,
    pub forward_ideal: Option<IdealPoint>,
    pub backward_ideal: Option<IdealPoint>,
}

impl GeodesicPath {
    pub fn start(&self) -> &PathNode {
        &self.nodes[0]
    }

    pub fn end(&self) -> &PathNode {
        self.nodes.last().expect("paths have at least one node")
    }

    pub fn length(&self) -> f64 {
        self.end().s - self.start().s
    }

    /// Columns `s, x, y, vx, vy`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["s", "x", "y", "vx", "vy"])?;
        for n in &self.nodes {
            wr.write_record([
                n.s.to_string(),
                n.point.x().to_string(),
                n.point.y().to_string(),
                n.velocity.x.to_string(),
                n.velocity.y.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Where a geodesic leaves the support for good: after arclength `s` the
/// forward geodesic through `state` is a hyperbolic ray that never meets
/// the support ball again.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayExit {
    pub s: f64,
    pub state: UnitTangent,
}

impl RayExit {
    pub fn endpoint(&self) -> IdealPoint {
        h_endpoint(&self.state)
    }
}

/// A solved ray `[x, ξ)`: its unit tangent, frame angle and exit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub target: IdealPoint,
    pub tangent: UnitTangent,
    pub theta: f64,
    pub exit: RayExit,
}

/// A bi-infinite geodesic from `backward` to `forward`. Before the anchor the
/// line is the hyperbolic geodesic towards `backward`; after `exit` it is
/// the hyperbolic ray towards `forward`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicLine {
    pub backward: IdealPoint,
    pub forward: IdealPoint,
    pub anchor: UnitTangent,
    pub exit: RayExit,
}

impl GeodesicLine {
    pub fn reversed(&self) -> GeodesicLine {
        GeodesicLine {
            backward: self.forward,
            forward: self.backward,
            anchor: self.exit.state.reversed(),
            exit: RayExit {
                s: self.exit.s,
                state: self.anchor.reversed(),
            },
        }
    }
}

/// The disk with a deformed metric and everything needed to solve for its
/// geodesics. Immutable apart from an idempotent cache of bi-infinite
/// geodesics.
#[derive(Debug)]
pub struct PerturbedSpace {
    field: MetricField,
    settings: SolverSettings,
    curvature: (f64, f64),
    pinching_b: f64,
    pub(crate) lines: RwLock<HashMap<(u64, u64), Arc<GeodesicLine>>>,
}

impl PerturbedSpace {
    /// Builds the space, rejecting metrics whose curvature exceeds
    /// `-1 + curv_tol` anywhere on the validation grid.
    pub fn new(field: MetricField, settings: SolverSettings) -> Result<Self> {
        let s = Self::new_unchecked(field, settings)?;
        let bound = -1.0 + settings.curv_tol;
        if s.curvature.1 > bound {
            return Err(Error::CurvatureBound {
                max_curvature: s.curvature.1,
                bound,
            });
        }
        Ok(s)
    }

    /// Builds the space without enforcing the upper curvature bound.
    pub fn new_unchecked(field: MetricField, settings: SolverSettings) -> Result<Self> {
        field.validate()?;
        if !(settings.r_max > field.radius + 5.0) {
            return Err(Error::InvalidParameter(format!(
                "r_max = {} must exceed the support radius plus 5",
                settings.r_max
            )));
        }
        if !(settings.ode_tol > 0.0 && settings.bvp_tol > 0.0 && settings.limit_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        let curvature = if field.is_deformed() {
            field.curvature_range(settings.curvature_grid.max(1))
        } else {
            (-1.0, -1.0)
        };
        let pinching_b = (-curvature.0).max(1.0).sqrt();
        Ok(Self {
            field,
            settings,
            curvature,
            pinching_b,
            lines: RwLock::new(HashMap::new()),
        })
    }

    pub fn pure(center: DiskPoint, radius: f64) -> Self {
        Self::new(MetricField::pure(center, radius), SolverSettings::default())
            .expect("the hyperbolic metric satisfies every construction check")
    }

    pub fn field(&self) -> &MetricField {
        &self.field
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Curvature minimum and maximum over the validation grid.
    pub fn curvature_range(&self) -> (f64, f64) {
        self.curvature
    }

    pub fn pinching_b(&self) -> f64 {
        self.pinching_b
    }

    pub(crate) fn ode_options(&self) -> OdeOptions {
        let mut o = OdeOptions::with_tol(self.settings.ode_tol);
        o.h_max = 0.25;
        o
    }

    pub fn norm(&self, v: &UnitTangent) -> f64 {
        self.field.norm(&v.base, &v.dir)
    }

    /// Rescales `v` to unit length for this metric.
    pub fn normalize(&self, v: &UnitTangent) -> UnitTangent {
        UnitTangent::new(v.base, v.dir / self.norm(v))
    }

    /// Orthonormal frame at `p` from Gram–Schmidt on the coordinate basis.
    pub fn frame(&self, p: &DiskPoint) -> [Tangent; 2] {
        let ex = Tangent::new(1.0, 0.0);
        let ey = Tangent::new(0.0, 1.0);
        let e1 = ex / self.field.norm(p, &ex);
        let e2 = ey - e1 * self.field.inner(p, &ey, &e1);
        [e1, e2 / self.field.norm(p, &e2)]
    }

    pub fn frame_direction(&self, p: &DiskPoint, theta: f64) -> UnitTangent {
        let [e1, e2] = self.frame(p);
        UnitTangent::new(*p, e1 * theta.cos() + e2 * theta.sin())
    }

    pub fn frame_angle(&self, p: &DiskPoint, v: &Tangent) -> f64 {
        let [e1, e2] = self.frame(p);
        self.field.inner(p, v, &e2).atan2(self.field.inner(p, v, &e1))
    }

    /// Riemannian angle at `p` between two tangent vectors, in `[0, π]`.
    pub fn angle_between(&self, p: &DiskPoint, v: &Tangent, w: &Tangent) -> f64 {
        wrap_pi(self.frame_angle(p, v) - self.frame_angle(p, w)).abs()
    }

    fn rhs(&self, y: &State) -> State {
        let p = DiskPoint {
            z: Complex64::new(y[0], y[1]),
        };
        let g = self.field.christoffel(&p);
        let v = [y[2], y[3]];
        let mut a = [0.0; 2];
        for (k, ak) in a.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    s += g[k][i][j] * v[i] * v[j];
                }
            }
            *ak = -s;
        }
        [y[2], y[3], a[0], a[1]]
    }

    /// Arclength until the hyperbolic geodesic through `v` first enters the
    /// open support ball, `None` if it never does.
    pub(crate) fn pure_entry(&self, v: &UnitTangent) -> Option<f64> {
        let x0 = &self.field.center;
        let r = self.field.radius;
        let d = h_distance(x0, &v.base);
        if d < r {
            return Some(0.0);
        }
        let inward = h_log(&v.base, x0);
        let cos_in = inward.dot(&v.dir) / (inward.norm() * v.dir.norm());
        if !(cos_in > 0.0) {
            return None;
        }
        let sin_in = (1.0 - cos_in * cos_in).max(0.0).sqrt();
        let dmin = (d.sinh() * sin_in).asinh();
        if dmin >= r {
            return None;
        }
        let to_foot = (d.tanh() * cos_in).atanh();
        let half = (r.cosh() / dmin.cosh()).acosh();
        Some((to_foot - half).max(0.0))
    }

    fn pure_segment(
        &self,
        v: &UnitTangent,
        s0: f64,
        t: f64,
        nodes: &mut Option<&mut Vec<PathNode>>,
    ) -> UnitTangent {
        if let Some(out) = nodes.as_deref_mut() {
            let n = (t / 0.5).ceil().max(1.0) as usize;
            for k in 1..n {
                let tk = t * k as f64 / n as f64;
                let u = h_flow(v, tk);
                out.push(PathNode {
                    s: s0 + tk,
                    point: u.base,
                    velocity: u.dir,
                });
            }
        }
        let u = h_flow(v, t);
        if let Some(out) = nodes.as_deref_mut() {
            out.push(PathNode {
                s: s0 + t,
                point: u.base,
                velocity: u.dir,
            });
        }
        u
    }

    /// Follows the geodesic through unit `v` for arclength up to `t_max`.
    /// With `stop_on_escape` it stops as soon as the forward geodesic is a
    /// hyperbolic ray missing the support. Returns the arclength reached,
    /// the state there and whether it escaped.
    pub(crate) fn advance(
        &self,
        v: &UnitTangent,
        t_max: f64,
        stop_on_escape: bool,
        mut nodes: Option<&mut Vec<PathNode>>,
    ) -> Result<(f64, UnitTangent, bool)> {
        let mut s = 0.0;
        let mut cur = *v;
        if let Some(out) = nodes.as_deref_mut() {
            out.push(PathNode {
                s,
                point: cur.base,
                velocity: cur.dir,
            });
        }
        let opts = self.ode_options();
        loop {
            if s >= t_max {
                return Ok((s, cur, false));
            }
            if !self.field.in_region(&cur.base) {
                match self.pure_entry(&cur) {
                    None => {
                        if stop_on_escape {
                            return Ok((s, cur, true));
                        }
                        let next = self.pure_segment(&cur, s, t_max - s, &mut nodes);
                        return Ok((t_max, next, true));
                    }
                    Some(tau) => {
                        let jump = (tau - ENTRY_MARGIN).max(0.0);
                        if s + jump >= t_max {
                            let next = self.pure_segment(&cur, s, t_max - s, &mut nodes);
                            return Ok((t_max, next, false));
                        }
                        if jump > 0.0 {
                            cur = self.pure_segment(&cur, s, jump, &mut nodes);
                            s += jump;
                        }
                    }
                }
            }
            let y0 = [cur.base.x(), cur.base.y(), cur.dir.x, cur.dir.y];
            let mut escaped = false;
            let (s1, y1) = ode::integrate(
                |_, y| self.rhs(y),
                s,
                y0,
                t_max,
                &opts,
                |t, y| {
                    let u = UnitTangent::new(
                        DiskPoint {
                            z: Complex64::new(y[0], y[1]),
                        },
                        Tangent::new(y[2], y[3]),
                    );
                    if let Some(out) = nodes.as_deref_mut() {
                        out.push(PathNode {
                            s: t,
                            point: u.base,
                            velocity: u.dir,
                        });
                    }
                    if !self.field.in_region(&u.base) && self.pure_entry(&u).is_none() {
                        escaped = true;
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                },
            )?;
            if !(y1[0] * y1[0] + y1[1] * y1[1] < 1.0) {
                return Err(Error::IntegrationFailure("geodesic left the disk chart".into()));
            }
            cur = self.normalize(&UnitTangent::new(
                DiskPoint {
                    z: Complex64::new(y1[0], y1[1]),
                },
                Tangent::new(y1[2], y1[3]),
            ));
            s = s1;
            if !escaped {
                return Ok((s, cur, false));
            }
            if stop_on_escape {
                return Ok((s, cur, true));
            }
        }
    }

    /// Geodesic of arclength `t` (negative runs backwards) starting at `v`,
    /// which is rescaled to unit speed.
    pub fn shoot(&self, v: &UnitTangent, t: f64) -> Result<GeodesicPath> {
        let v = self.normalize(v);
        if t < 0.0 {
            let mut p = self.shoot(&v.reversed(), -t)?;
            for n in &mut p.nodes {
                n.s = -n.s;
                n.velocity = -n.velocity;
            }
            return Ok(p);
        }
        let mut nodes = Vec::new();
        self.advance(&v, t, false, Some(&mut nodes))?;
        Ok(GeodesicPath {
            nodes,
            forward_ideal: None,
            backward_ideal: None,
        })
    }

    /// State after arclength `t` along the geodesic through `v`.
    pub fn flow(&self, v: &UnitTangent, t: f64) -> Result<UnitTangent> {
        let v = self.normalize(v);
        if t < 0.0 {
            return Ok(self.flow(&v.reversed(), -t)?.reversed());
        }
        Ok(self.advance(&v, t, false, None)?.1)
    }

    pub fn ray_exit(&self, v: &UnitTangent) -> Result<RayExit> {
        let v = self.normalize(v);
        let (s, state, escaped) = self.advance(&v, RAY_T_MAX, true, None)?;
        if !escaped {
            return Err(Error::IntegrationFailure(
                "geodesic did not leave the support".into(),
            ));
        }
        Ok(RayExit { s, state })
    }

    /// Point at arclength `t ≥ 0` along a ray whose exit is known.
    pub fn along_ray(&self, v: &UnitTangent, exit: &RayExit, t: f64) -> Result<UnitTangent> {
        if t >= exit.s {
            Ok(h_flow(&exit.state, t - exit.s))
        } else {
            self.flow(v, t)
        }
    }

    pub fn ideal_endpoint(&self, v: &UnitTangent) -> Result<IdealPoint> {
        Ok(self.ray_exit(v)?.endpoint())
    }

    /// The ray through `v` up to its exit, with its ideal endpoint.
    pub fn ray_path(&self, v: &UnitTangent) -> Result<GeodesicPath> {
        let v = self.normalize(v);
        let mut nodes = Vec::new();
        let (_, state, escaped) = self.advance(&v, RAY_T_MAX, true, Some(&mut nodes))?;
        if !escaped {
            return Err(Error::IntegrationFailure(
                "geodesic did not leave the support".into(),
            ));
        }
        Ok(GeodesicPath {
            nodes,
            forward_ideal: Some(h_endpoint(&state)),
            backward_ideal: None,
        })
    }

    /// Unit tangent at `x` of the geodesic towards `y`, and the distance.
    pub fn connect_tangent(&self, x: &DiskPoint, y: &DiskPoint) -> Result<(UnitTangent, f64)> {
        if x == y {
            return Err(Error::InvalidParameter("connect needs distinct points".into()));
        }
        if h_segment_distance(&self.field.center, x, y) >= self.field.radius {
            let log = h_log(x, y);
            let dir = log / (log.norm() * x.conformal_factor());
            return Ok((UnitTangent::new(*x, dir), h_distance(x, y)));
        }
        match (self.field.in_region(x), self.field.in_region(y)) {
            (true, true) => self.connect_inside(x, y),
            (_, false) => {
                let (v, _, len, _) = self.connect_outward(x, y)?;
                Ok((v, len))
            }
            (false, true) => {
                // solve from y and read the arrival direction at x
                let (_, exit, len, offset) = self.connect_outward(y, x)?;
                let arrive = h_flow(&exit.state, offset);
                let v = self.normalize(&UnitTangent::new(*x, -arrive.dir));
                Ok((v, len))
            }
        }
    }

    /// Both points inside the support: Newton on the exponential map with a
    /// residual measured by the hyperbolic logarithm at `y`.
    fn connect_inside(&self, x: &DiskPoint, y: &DiskPoint) -> Result<(UnitTangent, f64)> {
        let [e1, e2] = self.frame(x);
        let end = |w: &Vector2<f64>| -> Result<Vector2<f64>> {
            let len = w.norm();
            let v = UnitTangent::new(*x, (e1 * w.x + e2 * w.y) / len);
            let p = self.advance(&v, len, false, None)?.1.base;
            Ok(h_log(y, &p) * y.conformal_factor())
        };
        let d0 = h_distance(x, y);
        let th0 = self.frame_angle(x, &h_log(x, y));
        let mut w = Vector2::new(th0.cos(), th0.sin()) * d0;
        let mut r = end(&w)?;
        for _ in 0..self.settings.max_iter {
            if r.norm() <= self.settings.bvp_tol {
                break;
            }
            let h = 1e-6 * w.norm().max(1.0);
            let mut jac = Matrix2::zeros();
            for k in 0..2 {
                let mut dw = Vector2::zeros();
                dw[k] = h;
                jac.set_column(k, &((end(&(w + dw))? - end(&(w - dw))?) / (2.0 * h)));
            }
            let Some(inv) = jac.try_inverse() else { break };
            let step = -(inv * r);
            let mut lam = 1.0;
            let mut accepted = false;
            while lam > 1e-4 {
                let cand = w + step * lam;
                if cand.norm() > 1e-14 {
                    let rc = end(&cand)?;
                    if rc.norm() < r.norm() {
                        (w, r) = (cand, rc);
                        accepted = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if r.norm() > self.settings.bvp_tol * w.norm().exp() {
            return Err(Error::BvpFailure(format!(
                "no geodesic found from {:?} to {:?} (miss {:.3e})",
                x.coords(),
                y.coords(),
                r.norm()
            )));
        }
        let len = w.norm();
        Ok((UnitTangent::new(*x, (e1 * w.x + e2 * w.y) / len), len))
    }

    /// Target outside the support: a geodesic leaving the support never
    /// returns, so `t` must lie on the hyperbolic line through the exit state.
    /// The residual is the signed distance from `t` to that line. Escape is
    /// detected a little past the boundary, so `t` may sit just behind the
    /// exit point. Returns the initial direction, the exit, the length and
    /// the signed offset of `t` from the exit point along the line.
    fn connect_outward(&self, s: &DiskPoint, t: &DiskPoint) -> Result<(UnitTangent, RayExit, f64, f64)> {
        let eval = |theta: f64| -> Result<(UnitTangent, RayExit, f64)> {
            let v = self.frame_direction(s, theta);
            let exit = self.ray_exit(&v)?;
            let to_t = h_log(&exit.state.base, t);
            let ang = to_t.y.atan2(to_t.x) - exit.state.dir.y.atan2(exit.state.dir.x);
            let miss = (h_distance(&exit.state.base, t).sinh() * ang.sin()).asinh();
            Ok((v, exit, miss))
        };
        let fail = |detail: String| {
            Error::BvpFailure(format!(
                "no geodesic found from {:?} to {:?}{detail}",
                s.coords(),
                t.coords()
            ))
        };
        let finish = |(v, exit, miss): (UnitTangent, RayExit, f64)| -> Result<(UnitTangent, RayExit, f64, f64)> {
            let to_t = h_log(&exit.state.base, t);
            let rest = h_distance(&exit.state.base, t);
            let offset = if to_t.dot(&exit.state.dir) >= 0.0 { rest } else { -rest };
            let len = exit.s + offset;
            let tol = self.settings.bvp_tol * exit.s.max(len).exp();
            if miss.abs() > tol {
                return Err(fail(format!(" (miss {:.3e})", miss.abs())));
            }
            if offset < 0.0 {
                // t has to be on the ray itself, not on its backward extension
                if len <= 0.0 {
                    return Err(fail(" (target behind the start)".into()));
                }
                let p = self.along_ray(&v, &exit, len)?.base;
                if h_distance(&p, t) > tol + miss.abs() {
                    return Err(fail(format!(" (ray passes {:.3e} away)", h_distance(&p, t))));
                }
            }
            Ok((v, exit, len, offset))
        };
        let th0 = self.frame_angle(s, &h_log(s, t));
        let mut a = (th0, eval(th0)?);
        let th1 = th0 + 1e-3;
        let mut b = (th1, eval(th1)?);
        for _ in 0..self.settings.max_iter {
            let fb = b.1 .2;
            if fb.abs() <= ANGLE_TOL {
                if let Ok(r) = finish(b.1) {
                    return Ok(r);
                }
                break;
            }
            let denom = fb - a.1 .2;
            if denom == 0.0 {
                break;
            }
            let step = (-fb * (b.0 - a.0) / denom).clamp(-0.3, 0.3);
            if step.abs() < 1e-15 {
                if let Ok(r) = finish(b.1) {
                    return Ok(r);
                }
                break;
            }
            let c = b.0 + step;
            a = b;
            b = (c, eval(c)?);
        }
        // bracket every sign change and keep the first verified root
        let n = 128;
        let th = |k: usize| th0 + std::f64::consts::TAU * k as f64 / n as f64;
        let mut prev = eval(th(0))?.2;
        for k in 1..=n {
            let cur = eval(th(k))?.2;
            if prev.signum() != cur.signum() {
                let root = brent(|u| Ok(eval(u)?.2), th(k - 1), th(k), prev, cur, 1e-15, 200)?;
                if let Ok(r) = finish(eval(root)?) {
                    return Ok(r);
                }
            }
            prev = cur;
        }
        Err(fail(String::new()))
    }

    /// The geodesic segment from `x` to `y`.
    pub fn connect(&self, x: &DiskPoint, y: &DiskPoint) -> Result<GeodesicPath> {
        let (v, len) = self.connect_tangent(x, y)?;
        self.shoot(&v, len)
    }

    pub fn p_distance(&self, x: &DiskPoint, y: &DiskPoint) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        Ok(self.connect_tangent(x, y)?.1)
    }

    fn ray_from_angle(&self, x: &DiskPoint, xi: &IdealPoint, theta: f64) -> Result<(Ray, f64)> {
        let tangent = self.frame_direction(x, theta);
        let exit = self.ray_exit(&tangent)?;
        // compare endpoints as seen from x, where the map is nearly the identity
        let f = wrap_pi(ideal_to_origin(x, &exit.endpoint()).angle() - ideal_to_origin(x, xi).angle());
        Ok((
            Ray {
                target: *xi,
                tangent,
                theta,
                exit,
            },
            f,
        ))
    }

    /// The ray `[x, ξ)`.
    pub fn p_ray(&self, x: &DiskPoint, xi: &IdealPoint) -> Result<Ray> {
        self.p_ray_from(x, xi, None)
    }

    /// As [`Self::p_ray`], starting the angle search at `hint` if given.
    pub fn p_ray_from(&self, x: &DiskPoint, xi: &IdealPoint, hint: Option<f64>) -> Result<Ray> {
        let pure = h_ray(x, xi);
        if !self.field.in_region(x) && self.pure_entry(&pure).is_none() {
            return Ok(Ray {
                target: *xi,
                tangent: pure,
                theta: self.frame_angle(x, &pure.dir),
                exit: RayExit { s: 0.0, state: pure },
            });
        }
        let th0 = hint.unwrap_or_else(|| self.frame_angle(x, &pure.dir));
        let (mut ra, mut fa) = self.ray_from_angle(x, xi, th0)?;
        if fa.abs() <= ANGLE_TOL {
            return Ok(ra);
        }
        let (mut rb, mut fb) = self.ray_from_angle(x, xi, th0 - fa.clamp(-0.3, 0.3))?;
        for _ in 0..self.settings.max_iter {
            if fb.abs() <= ANGLE_TOL {
                return Ok(rb);
            }
            let denom = fb - fa;
            if denom == 0.0 {
                break;
            }
            let step = (-fb * (rb.theta - ra.theta) / denom).clamp(-0.5, 0.5);
            if step.abs() < 1e-15 {
                return Ok(rb);
            }
            let (rc, fc) = self.ray_from_angle(x, xi, rb.theta + step)?;
            (ra, fa) = (rb, fb);
            (rb, fb) = (rc, fc);
        }
        self.p_ray_scan(x, xi)
    }

    fn p_ray_scan(&self, x: &DiskPoint, xi: &IdealPoint) -> Result<Ray> {
        let n = 128;
        let th = |k: usize| std::f64::consts::TAU * k as f64 / n as f64;
        let mut prev = self.ray_from_angle(x, xi, th(0))?.1;
        for k in 1..=n {
            let cur = self.ray_from_angle(x, xi, th(k))?.1;
            if prev < 0.0 && cur >= 0.0 && cur - prev < std::f64::consts::PI {
                let root = brent(
                    |t| Ok(self.ray_from_angle(x, xi, t)?.1),
                    th(k - 1),
                    th(k),
                    prev,
                    cur,
                    1e-15,
                    200,
                )?;
                return Ok(self.ray_from_angle(x, xi, root)?.0);
            }
            prev = cur;
        }
        Err(Error::BvpFailure(format!(
            "no ray from {:?} reaches angle {}",
            x.coords(),
            xi.angle()
        )))
    }
}
