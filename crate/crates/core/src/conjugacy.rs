//! The boundary map between the hyperbolic disk and a deformation of it, its
//! Moebius defect, and the geodesic conjugacy it induces.
//!
//! Both spaces share the disk chart and agree outside a compact set, so the
//! boundary map is the identity on circle parameters. The undeformed side is
//! evaluated in closed form.

use std::f64::consts::TAU;
use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::boundary::{
    derivative_function_with, dm_distance_with, moebius_defect, triple_derivative,
    BoundarySample, DerivativeOptions, SampledMetric, DEFAULT_TOL_MOEBIUS,
};
use crate::error::{Error, Result};
use crate::hyperbolic::{
    h_endpoint, h_involution, h_ray, h_visual, DiskPoint, IdealPoint, UnitTangent,
};
use crate::manifold::solve::golden_min;
use crate::manifold::{
    gromov_from_rays, max_gap, sample_antipodal_tol, GeodesicLine, MetricKind, PerturbedSpace,
    Ray, RayExit,
};

/// The undeformed disk, its deformation and a shared boundary sample.
#[derive(Debug)]
pub struct DeformationPair {
    space0: PerturbedSpace,
    space1: PerturbedSpace,
    sample: BoundarySample,
    tol_moebius: f64,
    defect: OnceLock<f64>,
}

/// The image `φ(v)` of a unit vector under the geodesic conjugacy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugacyResult {
    pub input: UnitTangent,
    pub output: UnitTangent,
    pub foot: DiskPoint,
    /// `|log|` of the derivative at the forward endpoint, measured at the foot.
    pub derivative_residual: f64,
    /// Where the forward ray from the foot leaves the support.
    pub exit: RayExit,
}

impl ConjugacyResult {
    /// The forward ray from the foot, in the deformed metric.
    pub fn ray(&self) -> Ray {
        Ray {
            target: self.exit.endpoint(),
            tangent: self.output,
            theta: 0.0,
            exit: self.exit,
        }
    }
}

pub fn write_conjugacy_csv<W: Write>(w: W, rows: &[ConjugacyResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "base_x", "base_y", "dir_x", "dir_y", "foot_x", "foot_y", "out_dir_x", "out_dir_y",
        "residual",
    ])?;
    for r in rows {
        out.write_record(
            [
                r.input.base.x(),
                r.input.base.y(),
                r.input.dir.x,
                r.input.dir.y,
                r.foot.x(),
                r.foot.y(),
                r.output.dir.x,
                r.output.dir.y,
                r.derivative_residual,
            ]
            .iter()
            .map(|v| format!("{v:.12e}")),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Outcome of the max/min flip check at a pair of base points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipReport {
    /// Sample indices of the maximum and minimum of `dρ_x / df*ρ_y`.
    pub argmax: usize,
    pub argmin: usize,
    /// The maximiser refined off the sample.
    pub xi_star: IdealPoint,
    /// `max log dρ_x / df*ρ_y` at the refined maximiser.
    pub dm: f64,
    /// The same from the sampled metrics.
    pub dm_sampled: f64,
    pub argmin_is_nearest: bool,
    /// Circular distance between `i_x(ξ*)` and `i_y(ξ*)`.
    pub involution_residual: f64,
    /// `|d(y, z) - d_M|` for the conjugacy foot `z` of the vector at `x` towards `ξ*`.
    pub foot_distance_residual: f64,
    /// Distance from `z` to the point of `[y, ξ*)` at distance `d_M` from `y`.
    pub on_ray_residual: f64,
}

impl FlipReport {
    pub fn worst(&self) -> f64 {
        self.involution_residual
            .max(self.foot_distance_residual)
            .max(self.on_ray_residual)
    }
}

impl DeformationPair {
    pub fn new(space0: PerturbedSpace, space1: PerturbedSpace, sample: BoundarySample) -> Result<Self> {
        if space0.field().kind != MetricKind::Pure {
            return Err(Error::InvalidParameter(
                "the reference space of a deformation pair must be undeformed".into(),
            ));
        }
        Ok(Self {
            space0,
            space1,
            sample,
            tol_moebius: DEFAULT_TOL_MOEBIUS,
            defect: OnceLock::new(),
        })
    }

    pub fn with_tol_moebius(mut self, tol: f64) -> Self {
        self.tol_moebius = tol;
        self
    }

    pub fn space0(&self) -> &PerturbedSpace {
        &self.space0
    }

    pub fn space1(&self) -> &PerturbedSpace {
        &self.space1
    }

    pub fn sample(&self) -> &BoundarySample {
        &self.sample
    }

    pub fn tol_moebius(&self) -> f64 {
        self.tol_moebius
    }

    /// `f`, the identity on circle parameters.
    pub fn boundary_map(&self, xi: &IdealPoint) -> IdealPoint {
        *xi
    }

    /// `f⁻¹`.
    pub fn boundary_map_inv(&self, xi: &IdealPoint) -> IdealPoint {
        *xi
    }

    /// `ρ_x` of the undeformed disk on the sample.
    pub fn visual0(&self, x: &DiskPoint) -> Result<SampledMetric> {
        let pts = self.sample.points();
        let dirs: Vec<f64> = pts
            .iter()
            .map(|p| {
                let d = h_ray(x, p).dir;
                d.y.atan2(d.x)
            })
            .collect();
        let tol = sample_antipodal_tol(max_gap(dirs));
        SampledMetric::from_fn(self.sample.clone(), tol, |i, j| Ok(h_visual(x, &pts[i], &pts[j])))
    }

    /// `f*ρ_y` of the deformed space on the sample.
    pub fn visual1(&self, y: &DiskPoint) -> Result<SampledMetric> {
        let pulled: Vec<IdealPoint> = self.sample.points().iter().map(|p| self.boundary_map(p)).collect();
        let sample = BoundarySample::new(pulled.iter().map(|p| p.angle()))?;
        let m = self.space1.p_visual_sample(y, &sample)?;
        SampledMetric::new(self.sample.clone(), m.matrix().to_vec(), m.antipodal_tol())
    }

    /// `ρ_x` and `f*ρ_y` on the shared sample.
    pub fn pair_visuals(&self, x: &DiskPoint, y: &DiskPoint) -> Result<(SampledMetric, SampledMetric)> {
        Ok((self.visual0(x)?, self.visual1(y)?))
    }

    /// Largest Moebius defect between `ρ_x` and `f*ρ_x` over the probes.
    pub fn deformation_moebius_defect(&self, probes: &[DiskPoint]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in probes {
            let (m0, m1) = self.pair_visuals(x, x)?;
            worst = worst.max(moebius_defect(&m0, &m1)?);
        }
        Ok(worst)
    }

    /// The Moebius defect measured once at the support center.
    pub fn moebius_defect(&self) -> Result<f64> {
        if let Some(d) = self.defect.get() {
            return Ok(*d);
        }
        let d = self.deformation_moebius_defect(&[self.space1.field().center])?;
        Ok(*self.defect.get_or_init(|| d))
    }

    /// Fails unless the boundary map is Moebius within `tol_moebius`.
    pub fn gate(&self) -> Result<f64> {
        let defect = self.moebius_defect()?;
        if defect > self.tol_moebius {
            return Err(Error::NotMoebiusEquivalent {
                defect,
                tol: self.tol_moebius,
            });
        }
        Ok(defect)
    }

    pub(crate) fn derivative_options(&self) -> DerivativeOptions {
        DerivativeOptions {
            tol_moebius: self.tol_moebius,
            ..DerivativeOptions::default()
        }
    }

    /// `ρ_y(a, b)` in the deformed space from solved rays.
    fn visual1_from_rays(&self, ra: &Ray, rb: &Ray) -> Result<f64> {
        let line = self.space1.line(&ra.target, &rb.target)?;
        Ok((-gromov_from_rays(ra, rb, &line)).exp().min(1.0))
    }

    /// `log d(f*ρ_y)/dρ_x` at `ξ`, from the triple `ξ, a, b`; `ray_xi` is
    /// the deformed ray `[y, ξ)`.
    fn log_derivative(
        &self,
        x: &DiskPoint,
        ray_xi: &Ray,
        aux: (&IdealPoint, &IdealPoint),
    ) -> Result<f64> {
        let y = ray_xi.tangent.base;
        let xi = self.boundary_map_inv(&ray_xi.target);
        let (a, b) = aux;
        let ra = self.space1.p_ray(&y, &self.boundary_map(a))?;
        let rb = self.space1.p_ray(&y, &self.boundary_map(b))?;
        let d = triple_derivative(
            h_visual(x, &xi, a),
            h_visual(x, &xi, b),
            h_visual(x, a, b),
            self.visual1_from_rays(ray_xi, &ra)?,
            self.visual1_from_rays(ray_xi, &rb)?,
            self.visual1_from_rays(&ra, &rb)?,
        );
        Ok(d.ln())
    }

    fn auxiliary(&self, xi: &IdealPoint, eta: &IdealPoint) -> (IdealPoint, IdealPoint) {
        let sep = TAU / self.sample.len() as f64;
        let (j, k) = self.sample.auxiliary_pair(xi, sep);
        let (pj, pk) = (self.sample.point(j), self.sample.point(k));
        // the backward end must stay out of the triple
        let clash = |p: &IdealPoint| p.circular_distance(eta) < 1e-9;
        if clash(&pj) || clash(&pk) {
            let mut others: Vec<usize> = (0..self.sample.len())
                .filter(|&i| {
                    let p = self.sample.point(i);
                    p.circular_distance(xi) >= sep - 1e-12 && !clash(&p)
                })
                .collect();
            others.sort_by(|&i, &k| {
                self.sample
                    .point(i)
                    .circular_distance(xi)
                    .total_cmp(&self.sample.point(k).circular_distance(xi))
            });
            return (self.sample.point(others[0]), self.sample.point(others[1]));
        }
        (pj, pk)
    }

    /// State on `line` at arclength `s` from its anchor, with the forward exit
    /// measured from there.
    fn on_line(&self, line: &GeodesicLine, s: f64) -> Result<Ray> {
        let tangent = self.space1.line_point(line, s)?;
        let exit = if s < line.exit.s {
            RayExit {
                s: line.exit.s - s,
                state: line.exit.state,
            }
        } else {
            RayExit { s: 0.0, state: tangent }
        };
        Ok(Ray {
            target: line.forward,
            tangent,
            theta: 0.0,
            exit,
        })
    }

    /// `φ(v)` for a hyperbolic unit vector `v`.
    pub fn conjugate(&self, v: &UnitTangent) -> Result<ConjugacyResult> {
        self.gate()?;
        self.conjugate_ungated(v)
    }

    pub(crate) fn conjugate_ungated(&self, v: &UnitTangent) -> Result<ConjugacyResult> {
        if (v.pure_norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "conjugacy input has norm {}",
                v.pure_norm()
            )));
        }
        let x = v.base;
        let xi = h_endpoint(v);
        let eta = h_endpoint(&v.reversed());
        let line = self.space1.line(&self.boundary_map(&eta), &self.boundary_map(&xi))?;
        let (a, b) = self.auxiliary(&xi, &eta);
        // moving a distance s towards f(ξ) scales the derivative at ξ by e^s,
        // so a single step lands on the foot; the loop only absorbs round-off
        let mut s = 0.0;
        let mut ray = self.on_line(&line, s)?;
        let mut c = self.log_derivative(&x, &ray, (&a, &b))?;
        for _ in 0..3 {
            s -= c;
            ray = self.on_line(&line, s)?;
            c = self.log_derivative(&x, &ray, (&a, &b))?;
            if c.abs() <= 1e-10 {
                break;
            }
        }
        Ok(ConjugacyResult {
            input: *v,
            output: ray.tangent,
            foot: ray.tangent.base,
            derivative_residual: c.abs(),
            exit: ray.exit,
        })
    }

    /// [`Self::conjugate`] over a batch, in input order.
    pub fn conjugate_all(&self, vs: &[UnitTangent]) -> Result<Vec<ConjugacyResult>> {
        self.gate()?;
        vs.par_iter().map(|v| self.conjugate_ungated(v)).collect()
    }

    /// Checks both parts of the max/min flip lemma for `dρ_x / df*ρ_y`.
    pub fn maxmin_flip_check(&self, x: &DiskPoint, y: &DiskPoint) -> Result<FlipReport> {
        self.gate()?;
        let (m0, m1) = self.pair_visuals(x, y)?;
        // the sampled extremes only seed the refinement below
        let opts = DerivativeOptions {
            product_tol: f64::INFINITY,
            ..self.derivative_options()
        };
        let d = derivative_function_with(&m1, &m0, &opts)?;
        let dm_sampled = dm_distance_with(&m1, &m0, &opts)?;
        let (argmax, argmin) = (d.argmax(), d.argmin());
        let n = self.sample.len();
        let center = self.sample.point(argmax).angle();
        let step = TAU / n as f64;
        // log dρ_x/df*ρ_y at an arbitrary angle, from a fixed far triple
        let far = (
            self.sample.point((argmax + n / 3) % n),
            self.sample.point((argmax + 2 * n / 3) % n),
        );
        let neg_log = |t: f64| -> Result<f64> {
            let xi = IdealPoint::new(t);
            let ray = self.space1.p_ray(y, &self.boundary_map(&xi))?;
            self.log_derivative(x, &ray, (&far.0, &far.1))
        };
        let (t_star, v) = golden_min(neg_log, center - step, center + step, 1e-7)?;
        let xi_star = IdealPoint::new(t_star);
        let dm = (-v).max(0.0);
        let ix = h_involution(x, &xi_star);
        let argmin_is_nearest = self.sample.nearest(&ix) == argmin;
        let iy = self.space1.p_involution(y, &self.boundary_map(&xi_star))?;
        let involution_residual = self.boundary_map(&ix).circular_distance(&iy);
        let z = self.conjugate_ungated(&h_ray(x, &xi_star))?.foot;
        let foot_distance_residual = (self.space1.p_distance(y, &z)? - dm).abs();
        let r = self.space1.p_ray(y, &self.boundary_map(&xi_star))?;
        let target = self.space1.along_ray(&r.tangent, &r.exit, dm)?.base;
        let on_ray_residual = self.space1.p_distance(&target, &z)?;
        Ok(FlipReport {
            argmax,
            argmin,
            xi_star,
            dm,
            dm_sampled,
            argmin_is_nearest,
            involution_residual,
            foot_distance_residual,
            on_ray_residual,
        })
    }
}
