//! Checks of the properties of `F` and `r`: constancy, the Lipschitz
//! surrogate, the quasi-isometry sandwich, the adjoint identity for `dF`
//! and the cone picture far from the support.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Vector2;

use super::{dm_pushforward_with, extend_from, ExtendOptions, ExtensionResult, Feet};
use crate::conjugacy::DeformationPair;
use crate::error::{Error, Result};
use crate::hyperbolic::{
    h_angle, h_distance, h_endpoint, h_flow, h_ray, h_ray_min_distance, h_visual, DiskPoint,
    IdealPoint, UnitTangent,
};

/// `F` and `r` over a grid.
#[derive(Clone, Debug)]
pub struct RProfile {
    pub results: Vec<ExtensionResult>,
    pub spread: f64,
    pub max: f64,
}

pub fn r_profile(pair: &DeformationPair, grid: &[DiskPoint], opts: &ExtendOptions) -> Result<RProfile> {
    pair.gate()?;
    let mut results = Vec::with_capacity(grid.len());
    for x in grid {
        let feet = Feet::new(pair, x)?;
        results.push(extend_from(pair, &feet, x, opts)?);
    }
    let max = results.iter().map(|r| r.r_x).fold(0.0, f64::max);
    let min = results.iter().map(|r| r.r_x).fold(f64::INFINITY, f64::min);
    Ok(RProfile {
        spread: max - min,
        max,
        results,
    })
}

/// One pair of the Lipschitz surrogate: `|d_M(f*ρ_x, ρ_y₀) - d_M(f*ρ_x', ρ_y₀)|`
/// against `d(x, x')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzRow {
    pub x: DiskPoint,
    pub x_prime: DiskPoint,
    pub lhs: f64,
    pub distance: f64,
}

impl LipschitzRow {
    pub fn excess(&self) -> f64 {
        self.lhs - self.distance
    }
}

pub fn lipschitz_surrogate(
    pair: &DeformationPair,
    y0: &DiskPoint,
    pairs: &[(DiskPoint, DiskPoint)],
) -> Result<Vec<LipschitzRow>> {
    pair.gate()?;
    pairs
        .iter()
        .map(|(x, xp)| {
            let a = dm_pushforward_with(pair, &Feet::new(pair, x)?, y0)?.0;
            let b = dm_pushforward_with(pair, &Feet::new(pair, xp)?, y0)?.0;
            Ok(LipschitzRow {
                x: *x,
                x_prime: *xp,
                lhs: (a - b).abs(),
                distance: h_distance(x, xp),
            })
        })
        .collect()
}

/// Worst violations of the quasi-isometry and bi-Lipschitz bounds over all
/// pairs of extended points. Positive values are violations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QisomReport {
    pub m_hat: f64,
    pub pairs: usize,
    pub lower_excess: f64,
    pub upper_excess: f64,
    pub bilipschitz_excess: f64,
    /// `max |d₁(F(x), F(y)) - d₀(x, y)|`.
    pub isometry_defect: f64,
}

impl QisomReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower_excess <= tol && self.upper_excess <= tol && self.bilipschitz_excess <= tol
    }
}

pub fn qisom_check(pair: &DeformationPair, results: &[ExtensionResult]) -> Result<QisomReport> {
    let m_hat = results.iter().map(|r| r.r_x).fold(0.0, f64::max);
    let sb = pair.space1().pinching_b().sqrt();
    let mut rep = QisomReport {
        m_hat,
        pairs: 0,
        lower_excess: f64::NEG_INFINITY,
        upper_excess: f64::NEG_INFINITY,
        bilipschitz_excess: f64::NEG_INFINITY,
        isometry_defect: 0.0,
    };
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let d0 = h_distance(&a.x, &b.x);
            let d1 = pair.space1().p_distance(&a.f_x, &b.f_x)?;
            rep.pairs += 1;
            rep.lower_excess = rep.lower_excess.max(d0 - 2.0 * m_hat - d1);
            rep.upper_excess = rep.upper_excess.max(d1 - d0 - 2.0 * m_hat);
            rep.bilipschitz_excess = rep.bilipschitz_excess.max((d1 - sb * d0).max(d0 / sb - d1));
            rep.isometry_defect = rep.isometry_defect.max((d1 - d0).abs());
        }
    }
    Ok(rep)
}

/// Finite-difference check of `⟨dF_x(v), F(x)f(ξ)⟩ = ⟨v, xξ⟩` over the band.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointReport {
    pub h: f64,
    /// Columns are `dF_x` applied to the two unit coordinate vectors at `x`.
    pub df: [Vector2<f64>; 2],
    pub residual: f64,
    pub center: ExtensionResult,
}

pub fn df_adjoint_check(
    pair: &DeformationPair,
    x: &DiskPoint,
    h: f64,
    opts: &ExtendOptions,
) -> Result<AdjointReport> {
    pair.gate()?;
    let center = extend_from(pair, &Feet::new(pair, x)?, x, opts)?;
    let not_converged = |r: &ExtensionResult| Error::MaxIterations {
        iterations: r.optimizer_iters,
        value: r.r_x,
    };
    if !center.converged {
        return Err(not_converged(&center));
    }
    let lam = x.conformal_factor();
    let axes = [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
    let mut df = [Vector2::zeros(); 2];
    for (k, e) in axes.iter().enumerate() {
        let step = e * (h / lam);
        let mut ends = [center.f_x; 2];
        for (s, sign) in [1.0, -1.0].iter().enumerate() {
            let p = x.offset(&(step * *sign));
            let start = center.f_x.offset(&(step * *sign));
            let r = extend_from(pair, &Feet::new(pair, &p)?, &start, opts)?;
            if !r.converged {
                return Err(not_converged(&r));
            }
            ends[s] = r.f_x;
        }
        df[k] = (ends[0].z() - ends[1].z()).into_vector2() / (2.0 * h);
    }
    let s1 = pair.space1();
    let mut residual: f64 = 0.0;
    for &i in &center.argmax_band {
        let xi = pair.sample().point(i);
        let u = s1.p_ray(&center.f_x, &pair.boundary_map(&xi))?.tangent.dir;
        let w = h_ray(x, &xi).dir;
        for (k, e) in axes.iter().enumerate() {
            let lhs = s1.field().inner(&center.f_x, &df[k], &u);
            let rhs = lam * e.dot(&w);
            residual = residual.max((lhs - rhs).abs());
        }
    }
    Ok(AdjointReport { h, df, residual, center })
}

trait IntoVector2 {
    fn into_vector2(self) -> Vector2<f64>;
}

impl IntoVector2 for num_complex::Complex64 {
    fn into_vector2(self) -> Vector2<f64> {
        Vector2::new(self.re, self.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeClass {
    InC,
    InD,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::Case3 => "case3",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub t: f64,
    pub x_t: DiskPoint,
    pub xi0: IdealPoint,
    pub eps_t: f64,
    /// Angle at `x_t` between each sample point and `ξ₀`.
    pub angles: Vec<f64>,
    pub classes: Vec<ConeClass>,
    pub case_label: CaseLabel,
    pub extension: ExtensionResult,
}

impl ConeReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "eps_t", "index", "angle", "class", "case"])?;
        for (i, (a, c)) in self.angles.iter().zip(&self.classes).enumerate() {
            out.write_record([
                format!("{}", self.t),
                format!("{:.12e}", self.eps_t),
                i.to_string(),
                format!("{a:.12e}"),
                format!("{c:?}"),
                self.case_label.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// The cones `C_t`, `D_t` at the point `x_t` a distance `t` from `x₀` on the
/// geodesic leaving `ξ₀`, where `ξ₀` is the endpoint of the ray from `x₀`
/// with chart direction `θ₀`. `ε_t` is the widest angle from `ξ₀` of a
/// sample point shadowed by `B(x₀, R)`.
pub fn cone_analysis(
    pair: &DeformationPair,
    x0: &DiskPoint,
    radius: f64,
    theta0: f64,
    t: f64,
    opts: &ExtendOptions,
) -> Result<ConeReport> {
    if t <= radius {
        return Err(Error::InvalidParameter(format!(
            "cone analysis needs t > R, got t = {t}, R = {radius}"
        )));
    }
    let v0 = UnitTangent::pure_from_angle(*x0, theta0);
    let xi0 = h_endpoint(&v0);
    let x_t = h_flow(&v0.reversed(), t).base;
    let pts = pair.sample().points();
    let angles: Vec<f64> = pts.iter().map(|p| h_angle(&x_t, p, &xi0)).collect();
    let mut eps_t: f64 = 0.0;
    for (p, a) in pts.iter().zip(&angles) {
        if h_ray_min_distance(x0, &h_ray(&x_t, p)) <= radius {
            eps_t = eps_t.max(*a);
        }
    }
    let classes = angles
        .iter()
        .map(|a| {
            if a.cos() >= eps_t.cos() {
                ConeClass::InC
            } else if (-a.cos()) >= eps_t.cos() {
                ConeClass::InD
            } else {
                ConeClass::Outside
            }
        })
        .collect::<Vec<_>>();
    pair.gate()?;
    let extension = extend_from(pair, &Feet::new(pair, &x_t)?, &x_t, opts)?;
    let atoms: Vec<usize> = extension.balanced_weights.iter().map(|(i, _)| *i).collect();
    let tol = pair.visual0(&x_t)?.antipodal_tol();
    let case_label = if atoms.len() == 2 && h_visual(&x_t, &pts[atoms[0]], &pts[atoms[1]]) >= 1.0 - tol {
        CaseLabel::Case1
    } else if atoms.len() == 2 && atoms.iter().all(|&i| classes[i] == ConeClass::Outside) {
        CaseLabel::Case2
    } else {
        CaseLabel::Case3
    };
    debug_assert!(eps_t <= PI);
    Ok(ConeReport {
        t,
        x_t,
        xi0,
        eps_t,
        angles,
        classes,
        case_label,
        extension,
    })
}
