//! Analytic metric fields on the disk chart: the hyperbolic metric and two
//! compactly supported deformations of it.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Matrix3};
use num_dual::{Dual64, DualNum, HyperDual64};

use crate::error::{Error, Result};
use crate::hyperbolic::{from_origin, to_origin, DiskPoint, Tangent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Pure,
    ConformalBump,
    PullbackTwist,
}

/// Metric components `[g11, g12, g22]` together with their first partials
/// `dg[k]` along coordinate `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricJet {
    pub g: [f64; 3],
    pub dg: [[f64; 3]; 2],
}

/// Christoffel symbols `gamma[k][i][j] = Γ^k_ij`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

/// A metric on the disk equal to the hyperbolic metric outside the closed
/// hyperbolic ball `B(center, radius)`.
///
/// For `Pure` the ball only marks where solvers integrate numerically.
/// `amplitude` is the bump height `a` or the total twist angle `α0`;
/// `order` is the bump exponent or the smoothstep order of the twist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricField {
    pub kind: MetricKind,
    pub center: DiskPoint,
    pub radius: f64,
    pub amplitude: f64,
    pub order: u32,
}

#[derive(Clone, Copy)]
struct Cx<D> {
    re: D,
    im: D,
}

impl<D: DualNum<Primitive = f64> + Copy> Cx<D> {
    fn mul(self, o: Self) -> Self {
        Cx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn div(self, o: Self) -> Self {
        let d = o.re * o.re + o.im * o.im;
        Cx {
            re: (self.re * o.re + self.im * o.im) / d,
            im: (self.im * o.re - self.re * o.im) / d,
        }
    }

    fn norm_sqr(self) -> D {
        self.re * self.re + self.im * self.im
    }
}

/// `artanh(√m)/√m`, smooth in `m` including at zero.
fn artanh_ratio<D: DualNum<Primitive = f64> + Copy>(m: D) -> D {
    if m.re() < 1e-3 {
        let mut term = D::from(1.0);
        let mut acc = D::from(1.0);
        for k in 1..12 {
            term *= m;
            acc += term / (2 * k + 1) as f64;
        }
        acc
    } else {
        let s = m.sqrt();
        s.atanh() / s
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Smoothstep of order `n`: a polynomial rising from 0 to 1 on `[0, 1]`
/// with `n` vanishing derivatives at both ends.
pub fn smoothstep<D: DualNum<Primitive = f64> + Copy>(n: u32, x: D) -> D {
    let mut acc = D::from(0.0);
    for k in 0..=n {
        let c = binomial(n + k, k) * binomial(2 * n + 1, n - k);
        let s = if k % 2 == 0 { c } else { -c };
        acc += x.powi(k as i32) * s;
    }
    acc * x.powi(n as i32 + 1)
}

/// Derivative of [`smoothstep`]: `c_n xⁿ (1 - x)ⁿ`.
pub fn smoothstep_derivative<D: DualNum<Primitive = f64> + Copy>(n: u32, x: D) -> D {
    let c = (2 * n + 1) as f64 * binomial(2 * n, n);
    (x * (-x + 1.0)).powi(n as i32) * c
}

/// The twist diffeomorphism `(r, θ) ↦ (r, θ + α(r))` in hyperbolic polar
/// coordinates about `center`, with `α ≡ α0` on `r ≤ radius/4` and
/// `α ≡ 0` on `r ≥ radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistMap {
    pub center: DiskPoint,
    pub radius: f64,
    pub alpha0: f64,
    pub order: u32,
}

impl TwistMap {
    pub fn plateau(&self) -> f64 {
        0.25 * self.radius
    }

    fn ramp<D: DualNum<Primitive = f64> + Copy>(&self, r: D) -> D {
        (-r + self.radius) / (self.radius - self.plateau())
    }

    /// `α(r)` for a hyperbolic radius `r`.
    pub fn alpha<D: DualNum<Primitive = f64> + Copy>(&self, r: D) -> D {
        if r.re() >= self.radius {
            D::from(0.0)
        } else if r.re() <= self.plateau() {
            D::from(self.alpha0)
        } else {
            smoothstep(self.order, self.ramp(r)) * self.alpha0
        }
    }

    /// `dα/dr`.
    pub fn alpha_prime<D: DualNum<Primitive = f64> + Copy>(&self, r: D) -> D {
        if r.re() >= self.radius || r.re() <= self.plateau() {
            D::from(0.0)
        } else {
            smoothstep_derivative(self.order, self.ramp(r))
                * (-self.alpha0 / (self.radius - self.plateau()))
        }
    }

    fn rotate<D: DualNum<Primitive = f64> + Copy>(&self, x: D, y: D, sign: f64) -> (D, D) {
        let a = Cx {
            re: D::from(self.center.x()),
            im: D::from(self.center.y()),
        };
        let p = Cx { re: x, im: y };
        let w = mobius_to(a, p);
        let m = w.norm_sqr();
        if m.re() >= (0.5 * self.radius).tanh().powi(2) {
            return (x, y);
        }
        let r2 = m * artanh_ratio(m).powi(2) * 4.0;
        let r = if r2.re() > 0.0 { r2.sqrt() } else { r2 };
        let th = self.alpha(r) * sign;
        let rot = Cx {
            re: th.cos(),
            im: th.sin(),
        };
        let q = mobius_from(a, w.mul(rot));
        (q.re, q.im)
    }

    /// `ψ(p)`.
    pub fn psi(&self, p: &DiskPoint) -> DiskPoint {
        let (x, y) = self.rotate(p.x(), p.y(), 1.0);
        DiskPoint::clamp(num_complex::Complex64::new(x, y))
    }

    /// `ψ⁻¹(p)`.
    pub fn psi_inv(&self, p: &DiskPoint) -> DiskPoint {
        let (x, y) = self.rotate(p.x(), p.y(), -1.0);
        DiskPoint::clamp(num_complex::Complex64::new(x, y))
    }

    /// Chart Jacobian of `ψ` (`sign = 1`) or `ψ⁻¹` (`sign = -1`) at `p`.
    pub fn jacobian(&self, p: &DiskPoint, sign: f64) -> Matrix2<f64> {
        let (ax, ay) = self.rotate(Dual64::new(p.x(), 1.0), Dual64::new(p.y(), 0.0), sign);
        let (bx, by) = self.rotate(Dual64::new(p.x(), 0.0), Dual64::new(p.y(), 1.0), sign);
        Matrix2::new(ax.eps, bx.eps, ay.eps, by.eps)
    }

    /// Pushes a tangent vector forward by `dψ`.
    pub fn push(&self, p: &DiskPoint, v: &Tangent) -> Tangent {
        self.jacobian(p, 1.0) * v
    }
}

fn mobius_to<D: DualNum<Primitive = f64> + Copy>(a: Cx<D>, p: Cx<D>) -> Cx<D> {
    let num = Cx {
        re: p.re - a.re,
        im: p.im - a.im,
    };
    // 1 - ā p
    let den = Cx {
        re: -(a.re * p.re + a.im * p.im) + 1.0,
        im: -(a.re * p.im - a.im * p.re),
    };
    num.div(den)
}

fn mobius_from<D: DualNum<Primitive = f64> + Copy>(a: Cx<D>, w: Cx<D>) -> Cx<D> {
    let num = Cx {
        re: w.re + a.re,
        im: w.im + a.im,
    };
    let den = Cx {
        re: a.re * w.re + a.im * w.im + 1.0,
        im: a.re * w.im - a.im * w.re,
    };
    num.div(den)
}

impl MetricField {
    pub fn pure(center: DiskPoint, radius: f64) -> Self {
        Self {
            kind: MetricKind::Pure,
            center,
            radius,
            amplitude: 0.0,
            order: 3,
        }
    }

    pub fn conformal_bump(center: DiskPoint, radius: f64, amplitude: f64, order: u32) -> Self {
        Self {
            kind: MetricKind::ConformalBump,
            center,
            radius,
            amplitude,
            order,
        }
    }

    pub fn pullback_twist(center: DiskPoint, radius: f64, alpha0: f64, order: u32) -> Self {
        Self {
            kind: MetricKind::PullbackTwist,
            center,
            radius,
            amplitude: alpha0,
            order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support radius must be positive, got {}",
                self.radius
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        match self.kind {
            MetricKind::ConformalBump if self.order < 2 => Err(Error::InvalidParameter(
                "bump order must be at least 2".into(),
            )),
            MetricKind::PullbackTwist if self.order < 1 => Err(Error::InvalidParameter(
                "twist smoothstep order must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn twist_map(&self) -> Option<TwistMap> {
        (self.kind == MetricKind::PullbackTwist).then_some(TwistMap {
            center: self.center,
            radius: self.radius,
            alpha0: self.amplitude,
            order: self.order,
        })
    }

    /// `|T_{x0}(p)|²` below which `p` lies in the open support ball.
    pub fn region_m(&self) -> f64 {
        (0.5 * self.radius).tanh().powi(2)
    }

    pub fn in_region(&self, p: &DiskPoint) -> bool {
        to_origin(self.center.z, p.z).norm_sqr() < self.region_m()
    }

    /// True if the metric differs from the hyperbolic one anywhere.
    pub fn is_deformed(&self) -> bool {
        self.kind != MetricKind::Pure && self.amplitude != 0.0
    }

    /// Metric components at a chart point, generic over dual numbers.
    pub fn components<D: DualNum<Primitive = f64> + Copy>(&self, x: D, y: D) -> [D; 3] {
        let pure = || {
            let l = (-(x * x + y * y) + 1.0).recip() * 2.0;
            let l2 = l * l;
            [l2, D::from(0.0), l2]
        };
        if self.kind == MetricKind::Pure {
            return pure();
        }
        let a = Cx {
            re: D::from(self.center.x()),
            im: D::from(self.center.y()),
        };
        let p = Cx { re: x, im: y };
        let w = mobius_to(a, p);
        let m = w.norm_sqr();
        if m.re() >= self.region_m() {
            return pure();
        }
        let r2 = m * artanh_ratio(m).powi(2) * 4.0;
        match self.kind {
            MetricKind::Pure => unreachable!(),
            MetricKind::ConformalBump => {
                let s = -r2 / (self.radius * self.radius) + 1.0;
                let u = s.powi(self.order as i32) * self.amplitude;
                let [l2, z, _] = pure();
                let f = (u * 2.0).exp() * l2;
                [f, z, f]
            }
            MetricKind::PullbackTwist => {
                let tw = self.twist_map().unwrap();
                let r = r2.sqrt();
                if r.re() <= tw.plateau() {
                    return pure();
                }
                let beta = tw.alpha_prime(r) * 2.0 / ((-m + 1.0) * m.sqrt());
                let lw = (-m + 1.0).recip() * 2.0;
                let lw2 = lw * lw;
                let (u, v) = (w.re, w.im);
                let bm = beta * beta * m;
                let h11 = (beta * u * v * 2.0 + bm * u * u + 1.0) * lw2;
                let h12 = (-beta * (u * u - v * v) + bm * u * v) * lw2;
                let h22 = (-beta * u * v * 2.0 + bm * v * v + 1.0) * lw2;
                // T'(p) = (1 - |a|²)/(1 - ā p)² acting as a 2x2 matrix
                let den = Cx {
                    re: -(a.re * p.re + a.im * p.im) + 1.0,
                    im: -(a.re * p.im - a.im * p.re),
                };
                let one = Cx {
                    re: -(a.re * a.re + a.im * a.im) + 1.0,
                    im: D::from(0.0),
                };
                let c = one.div(den.mul(den));
                // K = [[c.re, -c.im], [c.im, c.re]], g = Kᵀ h K
                let k = [[c.re, -c.im], [c.im, c.re]];
                let h = [[h11, h12], [h12, h22]];
                let hk = |i: usize, j: usize| h[i][0] * k[0][j] + h[i][1] * k[1][j];
                let g = |i: usize, j: usize| k[0][i] * hk(0, j) + k[1][i] * hk(1, j);
                [g(0, 0), g(0, 1), g(1, 1)]
            }
        }
    }

    pub fn metric(&self, p: &DiskPoint) -> Matrix2<f64> {
        let [a, b, c] = self.components(p.x(), p.y());
        Matrix2::new(a, b, b, c)
    }

    pub fn inner(&self, p: &DiskPoint, v: &Tangent, w: &Tangent) -> f64 {
        let [a, b, c] = self.components(p.x(), p.y());
        a * v.x * w.x + b * (v.x * w.y + v.y * w.x) + c * v.y * w.y
    }

    pub fn norm(&self, p: &DiskPoint, v: &Tangent) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    pub fn jet(&self, p: &DiskPoint) -> MetricJet {
        let gx = self.components(Dual64::new(p.x(), 1.0), Dual64::new(p.y(), 0.0));
        let gy = self.components(Dual64::new(p.x(), 0.0), Dual64::new(p.y(), 1.0));
        MetricJet {
            g: [gx[0].re, gx[1].re, gx[2].re],
            dg: [
                [gx[0].eps, gx[1].eps, gx[2].eps],
                [gy[0].eps, gy[1].eps, gy[2].eps],
            ],
        }
    }

    pub fn christoffel(&self, p: &DiskPoint) -> Christoffel {
        if self.kind == MetricKind::Pure || !self.in_region(p) {
            return pure_christoffel(p);
        }
        christoffel_from_jet(&self.jet(p))
    }

    /// Gaussian curvature by the Brioschi formula with exact second
    /// derivatives.
    pub fn curvature(&self, p: &DiskPoint) -> f64 {
        let (x, y) = (p.x(), p.y());
        let uu = self.components(HyperDual64::new(x, 1.0, 1.0, 0.0), HyperDual64::from_re(y));
        let vv = self.components(HyperDual64::from_re(x), HyperDual64::new(y, 1.0, 1.0, 0.0));
        let uv = self.components(
            HyperDual64::new(x, 1.0, 0.0, 0.0),
            HyperDual64::new(y, 0.0, 1.0, 0.0),
        );
        let (e, f, g) = (uu[0].re, uu[1].re, uu[2].re);
        let (eu, fu, gu) = (uu[0].eps1, uu[1].eps1, uu[2].eps1);
        let (ev, fv, gv) = (vv[0].eps1, vv[1].eps1, vv[2].eps1);
        let guu = uu[2].eps1eps2;
        let evv = vv[0].eps1eps2;
        let fuv = uv[1].eps1eps2;
        let m1 = Matrix3::new(
            -0.5 * evv + fuv - 0.5 * guu,
            0.5 * eu,
            fu - 0.5 * ev,
            fv - 0.5 * gu,
            e,
            f,
            0.5 * gv,
            f,
            g,
        );
        let m2 = Matrix3::new(0.0, 0.5 * ev, 0.5 * gu, 0.5 * ev, e, f, 0.5 * gu, f, g);
        let det = e * g - f * f;
        (m1.determinant() - m2.determinant()) / (det * det)
    }

    /// Curvature extremes over a polar grid of `n × n` points covering the
    /// support ball.
    pub fn curvature_range(&self, n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = self.radius * (i as f64 + 0.5) / n as f64;
            let rho = (0.5 * r).tanh();
            for j in 0..n {
                let th = TAU * j as f64 / n as f64;
                let w = num_complex::Complex64::from_polar(rho, th);
                let p = DiskPoint::clamp(from_origin(self.center.z, w));
                let k = self.curvature(&p);
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
        (lo, hi)
    }
}


pub fn christoffel_from_jet(j: &MetricJet) -> Christoffel {
    let [a, b, c] = j.g;
    let det = a * c - b * b;
    let inv = [[c / det, -b / det], [-b / det, a / det]];
    let gij = |i: usize, k: usize, d: &[f64; 3]| match (i, k) {
        (0, 0) => d[0],
        (1, 1) => d[2],
        _ => d[1],
    };
    // ∂_l g_ij
    let dg = |l: usize, i: usize, k: usize| gij(i, k, &j.dg[l]);
    let mut out = [[[0.0; 2]; 2]; 2];
    #[allow(clippy::needless_range_loop)]
    for (k, row) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for jj in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += inv[k][l] * (dg(i, jj, l) + dg(jj, i, l) - dg(l, i, jj));
                }
                row[i][jj] = 0.5 * s;
            }
        }
    }
    out
}

/// Christoffel symbols of `λ² δ` with `λ = 2/(1 - |p|²)`.
pub fn pure_christoffel(p: &DiskPoint) -> Christoffel {
    let s = 2.0 / (1.0 - p.z.norm_sqr());
    let phi = [s * p.x(), s * p.y()];
    let mut out = [[[0.0; 2]; 2]; 2];
    #[allow(clippy::needless_range_loop)]
    for (k, row) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let dik = if i == k { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                row[i][j] = dik * phi[j] + djk * phi[i] - dij * phi[k];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn twist() -> MetricField {
        MetricField::pullback_twist(DiskPoint::new(0.1, -0.05).unwrap(), 1.0, 0.3, 3)
    }

    #[test]
    fn smoothstep_endpoints_and_derivative() {
        for n in 1..5 {
            assert_abs_diff_eq!(smoothstep(n, 0.0), 0.0);
            assert_abs_diff_eq!(smoothstep(n, 1.0), 1.0, epsilon = 1e-12);
            let x = 0.37;
            let h = 1e-6;
            let fd = (smoothstep(n, x + h) - smoothstep(n, x - h)) / (2.0 * h);
            assert_abs_diff_eq!(fd, smoothstep_derivative(n, x), epsilon = 1e-7);
        }
    }

    #[test]
    fn pure_christoffel_matches_jet() {
        let f = MetricField::pure(DiskPoint::ORIGIN, 1.0);
        let p = DiskPoint::new(0.3, -0.2).unwrap();
        let a = pure_christoffel(&p);
        let b = christoffel_from_jet(&f.jet(&p));
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_abs_diff_eq!(a[k][i][j], b[k][i][j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn pure_curvature_is_minus_one() {
        let f = MetricField::pure(DiskPoint::ORIGIN, 1.0);
        for p in [DiskPoint::ORIGIN, DiskPoint::new(0.5, 0.3).unwrap()] {
            assert_abs_diff_eq!(f.curvature(&p), -1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn twist_is_flat_hyperbolic() {
        let (lo, hi) = twist().curvature_range(40);
        assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(hi, -1.0, epsilon = 1e-8);
    }

    #[test]
    fn twist_round_trip() {
        let t = twist().twist_map().unwrap();
        for (x, y) in [(0.1, 0.0), (0.3, 0.2), (-0.2, -0.3), (0.6, 0.1)] {
            let p = DiskPoint::new(x, y).unwrap();
            let q = t.psi_inv(&t.psi(&p));
            assert!((q.z - p.z).norm() < 1e-12);
        }
    }

    #[test]
    fn twist_metric_is_pushforward() {
        let f = twist();
        let t = f.twist_map().unwrap();
        let p = DiskPoint::new(0.35, 0.1).unwrap();
        let q = t.psi_inv(&p);
        let j = t.jacobian(&p, -1.0);
        let g0 = MetricField::pure(DiskPoint::ORIGIN, 1.0).metric(&q);
        let expect = j.transpose() * g0 * j;
        let g1 = f.metric(&p);
        assert!((expect - g1).abs().max() < 1e-10);
    }

    #[test]
    fn bump_is_conformal_inside_only() {
        let f = MetricField::conformal_bump(DiskPoint::ORIGIN, 1.0, 0.2, 3);
        let l2 = 4.0;
        assert_abs_diff_eq!(f.metric(&DiskPoint::ORIGIN)[(0, 0)], l2 * 0.4f64.exp(), epsilon = 1e-12);
        let out = DiskPoint::new(0.9, 0.0).unwrap();
        assert_eq!(f.christoffel(&out), pure_christoffel(&out));
    }
}
