//! Closed-form geometry of the Poincaré disk model of the hyperbolic plane.
//!
//! Everything here is exact: these functions are the reference every
//! numerically integrated quantity in [`crate::manifold`] is checked against.
//! Points are Euclidean coordinates in the open unit disk, ideal points are
//! angles on the unit circle, and tangent vectors are coordinate vectors
//! (the metric is `λ(z)² |dz|²` with `λ(z) = 2 / (1 - |z|²)`).

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coordinate tangent vector.
pub type Tangent = Vector2<f64>;

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint {
    pub(crate) z: Complex64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint {
        z: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(x, y))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() >= 1.0 {
            return Err(Error::OutsideDisk(z.re, z.im));
        }
        Ok(Self { z })
    }

    /// Polar constructor: the point at hyperbolic distance `radius` from the
    /// origin in direction `angle`.
    pub fn polar(radius: f64, angle: f64) -> Self {
        let r = (0.5 * radius).tanh().min(1.0 - 1e-15);
        Self {
            z: Complex64::from_polar(r, angle),
        }
    }

    pub(crate) fn clamp(z: Complex64) -> Self {
        let n = z.norm();
        if n < 1.0 - 1e-15 {
            Self { z }
        } else {
            Self {
                z: z * ((1.0 - 1e-15) / n),
            }
        }
    }

    pub fn x(&self) -> f64 {
        self.z.re
    }

    pub fn y(&self) -> f64 {
        self.z.im
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.z.re, self.z.im]
    }

    /// `λ(z) = 2 / (1 - |z|²)`.
    pub fn conformal_factor(&self) -> f64 {
        2.0 / (1.0 - self.z.norm_sqr())
    }

    /// Euclidean displacement in the chart, clamped back into the disk.
    pub fn offset(&self, v: &Tangent) -> DiskPoint {
        DiskPoint::clamp(self.z + Complex64::new(v.x, v.y))
    }
}

/// A point of the boundary circle, stored as an angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct IdealPoint(f64);

impl IdealPoint {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        IdealPoint(a)
    }

    pub fn angle(&self) -> f64 {
        self.0
    }

    pub fn unit(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }

    pub(crate) fn from_unit(w: Complex64) -> Self {
        IdealPoint::new(w.arg())
    }

    /// Length of the shorter arc between the two points, in `[0, π]`.
    pub fn circular_distance(&self, other: &IdealPoint) -> f64 {
        wrap_pi(self.0 - other.0).abs()
    }
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let mut r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r += TAU;
    }
    r
}

/// A tangent vector of unit length for whichever metric produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitTangent {
    pub base: DiskPoint,
    pub dir: Tangent,
}

impl UnitTangent {
    pub fn new(base: DiskPoint, dir: Tangent) -> Self {
        Self { base, dir }
    }

    pub fn reversed(&self) -> Self {
        Self {
            base: self.base,
            dir: -self.dir,
        }
    }

    /// Unit vector for the hyperbolic metric pointing along the Euclidean
    /// direction `angle`.
    pub fn pure_from_angle(base: DiskPoint, angle: f64) -> Self {
        let l = base.conformal_factor();
        Self {
            base,
            dir: Tangent::new(angle.cos(), angle.sin()) / l,
        }
    }

    /// Norm of `dir` for the hyperbolic metric.
    pub fn pure_norm(&self) -> f64 {
        self.base.conformal_factor() * self.dir.norm()
    }
}

pub(crate) fn to_c(v: &Tangent) -> Complex64 {
    Complex64::new(v.x, v.y)
}

pub(crate) fn from_c(z: Complex64) -> Tangent {
    Tangent::new(z.re, z.im)
}

/// Disk isometry `z ↦ (z - a) / (1 - ā z)` sending `a` to the origin.
pub fn to_origin(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// Inverse of [`to_origin`]: `w ↦ (w + a) / (1 + ā w)`.
pub fn from_origin(a: Complex64, w: Complex64) -> Complex64 {
    (w + a) / (Complex64::new(1.0, 0.0) + a.conj() * w)
}

/// Complex derivative of [`to_origin`] at `z`.
pub fn to_origin_derivative(a: Complex64, z: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) - a.conj() * z;
    Complex64::new(1.0 - a.norm_sqr(), 0.0) / (d * d)
}

/// Complex derivative of [`from_origin`] at `w`.
pub fn from_origin_derivative(a: Complex64, w: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) + a.conj() * w;
    Complex64::new(1.0 - a.norm_sqr(), 0.0) / (d * d)
}

pub fn h_distance(x: &DiskPoint, y: &DiskPoint) -> f64 {
    let w = to_origin(x.z, y.z).norm();
    2.0 * w.min(1.0 - 1e-16).atanh()
}

/// `B(x, y, ξ) = lim (d(x, z) - d(y, z))` as `z → ξ`.
pub fn h_busemann(x: &DiskPoint, y: &DiskPoint, xi: &IdealPoint) -> f64 {
    horofunction(x, xi) - horofunction(y, xi)
}

fn horofunction(z: &DiskPoint, xi: &IdealPoint) -> f64 {
    ((xi.unit() - z.z).norm_sqr() / (1.0 - z.z.norm_sqr())).ln()
}

/// Unit directions at the origin, after moving `x` there, of the two ideal
/// points.
fn view_from(x: &DiskPoint, xi: &IdealPoint) -> Complex64 {
    let w = to_origin(x.z, xi.unit());
    w / w.norm()
}

/// Gromov product `(ξ|η)_x`.
pub fn h_gromov(x: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> Result<f64> {
    let v = h_visual(x, xi, eta);
    if v <= 0.0 {
        return Err(Error::InfiniteGromovProduct);
    }
    Ok(-v.ln())
}

/// Visual metric `ρ_x(ξ, η) = exp(-(ξ|η)_x)`, which in the disk equals the
/// sine of half the angle subtended at `x`.
pub fn h_visual(x: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> f64 {
    if xi.0 == eta.0 {
        return 0.0;
    }
    (0.5 * (view_from(x, xi) - view_from(x, eta)).norm()).min(1.0)
}

/// Image of `ξ` under the isometry moving `a` to the origin.
pub fn ideal_to_origin(a: &DiskPoint, xi: &IdealPoint) -> IdealPoint {
    IdealPoint::from_unit(to_origin(a.z, xi.unit()))
}

/// Inverse of [`ideal_to_origin`].
pub fn ideal_from_origin(a: &DiskPoint, xi: &IdealPoint) -> IdealPoint {
    IdealPoint::from_unit(from_origin(a.z, xi.unit()))
}

/// Unit tangent at `x` of the ray `[x, ξ)`.
pub fn h_ray(x: &DiskPoint, xi: &IdealPoint) -> UnitTangent {
    let w = view_from(x, xi);
    UnitTangent::new(*x, from_c(w) / x.conformal_factor())
}

/// Point at distance `t` from `x` on the ray `[x, ξ)`.
pub fn h_geodesic_point(x: &DiskPoint, xi: &IdealPoint, t: f64) -> DiskPoint {
    let w = view_from(x, xi) * (0.5 * t).tanh();
    DiskPoint::clamp(from_origin(x.z, w))
}

/// The involution `i_x` fixed by `x i_x(ξ) = -x ξ`.
pub fn h_involution(x: &DiskPoint, xi: &IdealPoint) -> IdealPoint {
    IdealPoint::from_unit(from_origin(x.z, -view_from(x, xi)))
}

/// Riemannian angle at `x` between the rays to `ξ` and `η`, in `[0, π]`.
pub fn h_angle(x: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> f64 {
    let a = view_from(x, xi);
    let b = view_from(x, eta);
    (a * b.conj()).arg().abs()
}

/// Riemannian logarithm: the coordinate vector at `x` pointing to `y` whose
/// hyperbolic length is `d(x, y)`.
pub fn h_log(x: &DiskPoint, y: &DiskPoint) -> Tangent {
    let w = to_origin(x.z, y.z);
    let n = w.norm();
    if n == 0.0 {
        return Tangent::zeros();
    }
    let d = 2.0 * n.min(1.0 - 1e-16).atanh();
    from_c(w / n) * (d / x.conformal_factor())
}

/// Geodesic flow of the hyperbolic metric: position and velocity after
/// arclength `t` (negative `t` flows backwards).
pub fn h_flow(v: &UnitTangent, t: f64) -> UnitTangent {
    let p = v.base.z;
    let n = v.dir.norm();
    if n == 0.0 {
        return *v;
    }
    let u = to_c(&v.dir) / n;
    let th = (0.5 * t).tanh();
    let w = u * th;
    let pos = from_origin(p, w);
    let speed = 0.5 * (1.0 - th * th);
    let vel = from_origin_derivative(p, w) * u * speed;
    let base = DiskPoint::clamp(pos);
    // renormalise against rounding near the boundary
    let dir = from_c(vel);
    let scale = 1.0 / (base.conformal_factor() * dir.norm());
    UnitTangent::new(base, dir * scale)
}

/// Forward ideal endpoint `γ(+∞)` of the hyperbolic geodesic through `v`.
pub fn h_endpoint(v: &UnitTangent) -> IdealPoint {
    let u = to_c(&v.dir);
    IdealPoint::from_unit(from_origin(v.base.z, u / u.norm()))
}

/// Distance from `c` to the bi-infinite geodesic `(ξ, η)`.
pub fn h_line_distance(c: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> f64 {
    let a = view_from(c, xi);
    let b = view_from(c, eta);
    let chord = (a - b).norm();
    if chord <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 / chord).max(1.0).acosh()
}

/// Closest point of the geodesic `(ξ, η)` to `c`, with the unit tangent
/// pointing towards `η`.
pub fn h_line_closest(c: &DiskPoint, xi: &IdealPoint, eta: &IdealPoint) -> UnitTangent {
    let a = view_from(c, xi);
    let b = view_from(c, eta);
    let s = a + b;
    let chord = (a - b).norm();
    let w = if s.norm() < 1e-14 || chord <= 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let ch = (2.0 / chord).max(1.0);
        let r = ((ch - 1.0) / (ch + 1.0)).sqrt();
        s / s.norm() * r
    };
    let p = DiskPoint::clamp(from_origin(c.z, w));
    h_ray(&p, eta)
}

/// Minimum distance from `c` to the forward hyperbolic ray through `v`.
pub fn h_ray_min_distance(c: &DiskPoint, v: &UnitTangent) -> f64 {
    let d = h_distance(c, &v.base);
    if d < 1e-14 {
        return 0.0;
    }
    let inward = h_log(&v.base, c);
    let cos_phi = -inward.dot(&v.dir) / (inward.norm() * v.dir.norm());
    if cos_phi >= 0.0 {
        return d;
    }
    let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
    (d.sinh() * sin_phi).asinh()
}

/// Distance from `c` to the geodesic segment `[x, y]`.
pub fn h_segment_distance(c: &DiskPoint, x: &DiskPoint, y: &DiskPoint) -> f64 {
    let len = h_distance(x, y);
    if len < 1e-14 {
        return h_distance(c, x);
    }
    let dir = h_log(x, y);
    let fwd = UnitTangent::new(*x, dir / (dir.norm() * x.conformal_factor()));
    let front = h_endpoint(&fwd);
    let back = h_endpoint(&fwd.reversed());
    let foot = h_line_closest(c, &back, &front).base;
    let along = h_log(x, &foot).dot(&dir);
    let s = if along >= 0.0 { h_distance(x, &foot) } else { -h_distance(x, &foot) };
    if (0.0..=len).contains(&s) {
        h_distance(c, &foot)
    } else {
        h_distance(c, x).min(h_distance(c, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn radial_distance_is_twice_artanh() {
        let p = DiskPoint::new((0.5f64).tanh(), 0.0).unwrap();
        assert_abs_diff_eq!(h_distance(&DiskPoint::ORIGIN, &p), 1.0, epsilon = 1e-14);
        assert_eq!(h_distance(&p, &p), 0.0);
    }

    #[test]
    fn busemann_along_ray_is_arclength() {
        let x = DiskPoint::new(0.2, -0.3).unwrap();
        let xi = IdealPoint::new(1.1);
        let y = h_geodesic_point(&x, &xi, 2.5);
        assert_abs_diff_eq!(h_busemann(&x, &y, &xi), 2.5, epsilon = 1e-12);
        assert_eq!(h_busemann(&x, &x, &xi), 0.0);
    }

    #[test]
    fn visual_at_origin_is_half_angle_sine() {
        let o = DiskPoint::ORIGIN;
        assert_abs_diff_eq!(
            h_visual(&o, &IdealPoint::new(0.0), &IdealPoint::new(PI)),
            1.0,
            epsilon = 1e-15
        );
        let v = h_visual(&o, &IdealPoint::new(0.3), &IdealPoint::new(1.7));
        assert_abs_diff_eq!(v, (0.7f64).sin(), epsilon = 1e-15);
        assert!(matches!(
            h_gromov(&o, &IdealPoint::new(0.3), &IdealPoint::new(0.3)),
            Err(Error::InfiniteGromovProduct)
        ));
    }

    #[test]
    fn involution_at_origin_is_antipode() {
        let i = h_involution(&DiskPoint::ORIGIN, &IdealPoint::new(0.0));
        assert_abs_diff_eq!(i.angle(), PI, epsilon = 1e-15);
        let x = DiskPoint::new(-0.4, 0.5).unwrap();
        let xi = IdealPoint::new(4.0);
        let back = h_involution(&x, &h_involution(&x, &xi));
        assert!(back.circular_distance(&xi) < 1e-12);
    }

    #[test]
    fn flow_stays_unit_and_reaches_endpoint() {
        let x = DiskPoint::new(0.1, 0.6).unwrap();
        let xi = IdealPoint::new(2.2);
        let v = h_ray(&x, &xi);
        assert_abs_diff_eq!(v.pure_norm(), 1.0, epsilon = 1e-14);
        let w = h_flow(&v, 3.0);
        assert_abs_diff_eq!(w.pure_norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h_distance(&x, &w.base), 3.0, epsilon = 1e-10);
        assert!(h_endpoint(&w).circular_distance(&xi) < 1e-12);
        assert!(h_endpoint(&v.reversed()).circular_distance(&h_involution(&x, &xi)) < 1e-12);
    }

    #[test]
    fn line_distance_matches_right_triangle() {
        let o = DiskPoint::ORIGIN;
        let d = h_line_distance(&o, &IdealPoint::new(0.0), &IdealPoint::new(1.0));
        assert_abs_diff_eq!(d.cosh(), 1.0 / (0.5f64).sin(), epsilon = 1e-12);
        let foot = h_line_closest(&o, &IdealPoint::new(0.0), &IdealPoint::new(1.0));
        assert_abs_diff_eq!(h_distance(&o, &foot.base), d, epsilon = 1e-12);
        assert!(h_endpoint(&foot).circular_distance(&IdealPoint::new(1.0)) < 1e-12);
    }

    #[test]
    fn ray_min_distance_cases() {
        let c = DiskPoint::ORIGIN;
        let p = DiskPoint::polar(2.0, 0.0);
        // heading outward: closest point is the base
        let out = UnitTangent::pure_from_angle(p, 0.0);
        assert_abs_diff_eq!(h_ray_min_distance(&c, &out), 2.0, epsilon = 1e-12);
        // heading straight in: passes through c
        let inw = UnitTangent::pure_from_angle(p, PI);
        assert!(h_ray_min_distance(&c, &inw) < 1e-12);
        // tangential: sinh(dist) = sinh(2) sin(π/2)
        let tang = UnitTangent::pure_from_angle(p, 0.5 * PI);
        assert_abs_diff_eq!(h_ray_min_distance(&c, &tang), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn segment_distance_interior_and_endpoint() {
        let c = DiskPoint::ORIGIN;
        let a = DiskPoint::polar(1.0, 0.5 * PI + 0.3);
        let b = DiskPoint::polar(1.0, -0.5 * PI - 0.3);
        // segment passes on the far side of c, foot lies inside the segment
        let seg = h_segment_distance(&c, &a, &b);
        let line = h_line_distance(&c, &h_endpoint(&h_ray(&a, &IdealPoint::new(0.0))), &IdealPoint::new(0.0));
        assert!(seg <= h_distance(&c, &a) + 1e-12);
        assert!(line.is_finite());
        let far = DiskPoint::polar(3.0, 0.0);
        let farther = DiskPoint::polar(4.0, 0.0);
        assert_abs_diff_eq!(h_segment_distance(&c, &far, &farther), 3.0, epsilon = 1e-10);
    }
}
