//! Diameter-one antipodal metrics on a finite sample of the boundary circle:
//! cross-ratios, Moebius equivalence, derivatives and the `d_M` distance.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hyperbolic::IdealPoint;

/// Default tolerance for approximate antipodality of sampled metrics.
pub const DEFAULT_ANTIPODAL_TOL: f64 = 1e-3;
/// Default gate on the Moebius defect for derivative computations.
pub const DEFAULT_TOL_MOEBIUS: f64 = 1e-3;

/// Ordered set of distinct ideal points, at least four of them.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySample {
    points: Vec<IdealPoint>,
}

impl BoundarySample {
    pub fn new(angles: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut points: Vec<IdealPoint> = angles.into_iter().map(IdealPoint::new).collect();
        if points.iter().any(|p| !p.angle().is_finite()) {
            return Err(Error::InvalidSample("non-finite angle".into()));
        }
        points.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        if points.len() < 4 {
            return Err(Error::InsufficientSample(points.len()));
        }
        for w in points.windows(2) {
            if w[1].angle() - w[0].angle() <= 0.0 {
                return Err(Error::InvalidSample(format!(
                    "repeated angle {}",
                    w[0].angle()
                )));
            }
        }
        Ok(Self { points })
    }

    /// `n` equally spaced angles starting at `offset`.
    pub fn uniform(n: usize, offset: f64) -> Result<Self> {
        Self::new((0..n).map(|k| offset + TAU * k as f64 / n as f64))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[IdealPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> IdealPoint {
        self.points[i]
    }

    /// Index of the sample point closest to `p` along the circle
    /// (lowest index on ties).
    pub fn nearest(&self, p: &IdealPoint) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = q.circular_distance(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// The two sample points nearest to `p` that are at least `min_sep` away
    /// along the circle, one on each side when possible.
    pub fn auxiliary_pair(&self, p: &IdealPoint, min_sep: f64) -> (usize, usize) {
        let mut cand: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, q)| (q.circular_distance(p), i))
            .filter(|(d, _)| *d >= min_sep * (1.0 - 1e-9))
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let first = cand[0].1;
        let side = |i: usize| crate::hyperbolic::wrap_pi(self.points[i].angle() - p.angle()) > 0.0;
        let second = cand[1..]
            .iter()
            .find(|(_, i)| side(*i) != side(first))
            .or_else(|| cand.get(1))
            .map(|(_, i)| *i)
            .unwrap_or(first);
        (first, second)
    }
}

/// A diameter-one, approximately antipodal metric on a boundary sample,
/// stored as a dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMetric {
    sample: BoundarySample,
    dist: Vec<f64>,
    antipodal_tol: f64,
}

impl SampledMetric {
    pub fn new(sample: BoundarySample, dist: Vec<f64>, antipodal_tol: f64) -> Result<Self> {
        let n = sample.len();
        if dist.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "expected {} entries, got {}",
                n * n,
                dist.len()
            )));
        }
        if !(antipodal_tol > 0.0) {
            return Err(Error::InvalidMetric("antipodal tolerance must be positive".into()));
        }
        let mut global_max: f64 = 0.0;
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            let mut row_max: f64 = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = dist[i * n + j];
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidMetric(format!("entry ({i}, {j}) = {v}")));
                }
                if v > 1.0 + 1e-12 {
                    return Err(Error::InvalidMetric(format!(
                        "entry ({i}, {j}) = {v} exceeds the diameter"
                    )));
                }
                if (v - dist[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i}, {j})")));
                }
                row_max = row_max.max(v);
            }
            if row_max < 1.0 - antipodal_tol {
                return Err(Error::NotAntipodalAtPoint { index: i, row_max });
            }
            global_max = global_max.max(row_max);
        }
        if global_max < 1.0 - antipodal_tol {
            return Err(Error::InvalidMetric(format!("diameter {global_max} is not one")));
        }
        Ok(Self {
            sample,
            dist,
            antipodal_tol,
        })
    }

    /// Builds the metric from a distance function evaluated on every pair.
    pub fn from_fn(
        sample: BoundarySample,
        antipodal_tol: f64,
        mut f: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        let n = sample.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j)?;
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Self::new(sample, dist, antipodal_tol)
    }

    pub fn sample(&self) -> &BoundarySample {
        &self.sample
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    pub fn antipodal_tol(&self) -> f64 {
        self.antipodal_tol
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Writes the header row of angles followed by the matrix rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.sample.points().iter().map(|p| p.angle().to_string()))?;
        let n = self.len();
        for i in 0..n {
            wr.write_record(self.dist[i * n..(i + 1) * n].iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, antipodal_tol: f64) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut rows = rd.records();
        let parse = |rec: csv::StringRecord| -> Result<Vec<f64>> {
            rec.iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidMetric(format!("bad number {s:?}: {e}")))
                })
                .collect()
        };
        let header = rows
            .next()
            .ok_or_else(|| Error::InvalidMetric("empty csv".into()))??;
        let angles = parse(header)?;
        let n = angles.len();
        let sample = BoundarySample::new(angles.iter().copied())?;
        if sample
            .points()
            .iter()
            .zip(&angles)
            .any(|(p, a)| p.angle() != *a)
        {
            return Err(Error::InvalidMetric("header angles must be canonical and increasing".into()));
        }
        let mut dist = Vec::with_capacity(n * n);
        for rec in rows {
            let row = parse(rec?)?;
            if row.len() != n {
                return Err(Error::InvalidMetric("ragged matrix row".into()));
            }
            dist.extend(row);
        }
        Self::new(sample, dist, antipodal_tol)
    }
}

/// `ρ(i,k) ρ(j,l) / (ρ(i,l) ρ(j,k))`.
pub fn cross_ratio(m: &SampledMetric, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
    for idx in [i, j, k, l] {
        m.check_index(idx)?;
    }
    if i == j || i == k || i == l || j == k || j == l || k == l {
        return Err(Error::InvalidQuadruple(i, j, k, l));
    }
    Ok(m.get(i, k) * m.get(j, l) / (m.get(i, l) * m.get(j, k)))
}

/// How many quadruples a defect computation may look at.
#[derive(Clone, Copy, Debug)]
pub struct QuadrupleBudget {
    pub cap: usize,
    pub seed: u64,
}

impl Default for QuadrupleBudget {
    fn default() -> Self {
        Self { cap: 20_000, seed: 0x5eed }
    }
}

fn binomial4(n: usize) -> u128 {
    let n = n as u128;
    if n < 4 {
        0
    } else {
        n * (n - 1) * (n - 2) * (n - 3) / 24
    }
}

fn for_each_quadruple(n: usize, budget: QuadrupleBudget, mut f: impl FnMut([usize; 4])) {
    if binomial4(n) <= budget.cap as u128 {
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        f([a, b, c, d]);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for _ in 0..budget.cap {
            let mut q = [0usize; 4];
            let mut k = 0;
            while k < 4 {
                let c = rng.gen_range(0..n);
                if !q[..k].contains(&c) {
                    q[k] = c;
                    k += 1;
                }
            }
            f(q);
        }
    }
}

/// Largest `|log CR₁ - log CR₂|` over quadruples, using the default budget.
pub fn moebius_defect(m1: &SampledMetric, m2: &SampledMetric) -> Result<f64> {
    moebius_defect_with(m1, m2, QuadrupleBudget::default())
}

pub fn moebius_defect_with(
    m1: &SampledMetric,
    m2: &SampledMetric,
    budget: QuadrupleBudget,
) -> Result<f64> {
    if m1.sample != m2.sample {
        return Err(Error::SampleMismatch);
    }
    let n = m1.len();
    // log ratio of the two metrics; every log cross-ratio difference is a
    // difference of two of the three pair sums below
    let mut lr = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                lr[i * n + j] = (m2.get(i, j) / m1.get(i, j)).ln();
            }
        }
    }
    let mut worst: f64 = 0.0;
    for_each_quadruple(n, budget, |[a, b, c, d]| {
        let p1 = lr[a * n + b] + lr[c * n + d];
        let p2 = lr[a * n + c] + lr[b * n + d];
        let p3 = lr[a * n + d] + lr[b * n + c];
        let hi = p1.max(p2).max(p3);
        let lo = p1.min(p2).min(p3);
        worst = worst.max(hi - lo);
    });
    Ok(worst)
}

/// Three-point derivative `D(ξ)` from the six distances among `ξ`, `j`, `k`
/// under both metrics. It solves `ρ₂² = D(ξ) D(η) ρ₁²` exactly on the triple.
pub fn triple_derivative(
    r1_ij: f64,
    r1_ik: f64,
    r1_jk: f64,
    r2_ij: f64,
    r2_ik: f64,
    r2_jk: f64,
) -> f64 {
    (r2_ij * r2_ik * r1_jk) / (r1_ij * r1_ik * r2_jk)
}

/// Options shared by the derivative family of operations.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeOptions {
    pub tol_moebius: f64,
    pub budget: QuadrupleBudget,
    /// Allowed `|log max + log min|` in [`derivative_function`].
    pub product_tol: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self {
            tol_moebius: DEFAULT_TOL_MOEBIUS,
            budget: QuadrupleBudget::default(),
            product_tol: 1e-2,
        }
    }
}

fn gate(m1: &SampledMetric, m2: &SampledMetric, opts: &DerivativeOptions) -> Result<()> {
    let defect = moebius_defect_with(m1, m2, opts.budget)?;
    if defect > opts.tol_moebius {
        return Err(Error::NotMoebiusEquivalent {
            defect,
            tol: opts.tol_moebius,
        });
    }
    Ok(())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Log-derivatives over every admissible auxiliary pair; returns the median
/// and the largest deviation from it.
fn log_derivative_at(m1: &SampledMetric, m2: &SampledMetric, i: usize) -> (f64, f64) {
    let n = m1.len();
    let mut logs = Vec::with_capacity((n - 1) * (n - 2) / 2);
    for j in 0..n {
        if j == i {
            continue;
        }
        for k in (j + 1)..n {
            if k == i {
                continue;
            }
            let d = triple_derivative(
                m1.get(i, j),
                m1.get(i, k),
                m1.get(j, k),
                m2.get(i, j),
                m2.get(i, k),
                m2.get(j, k),
            );
            logs.push(d.ln());
        }
    }
    let med = median(&mut logs);
    let spread = logs.iter().map(|l| (l - med).abs()).fold(0.0, f64::max);
    (med, spread)
}

/// Derivative `dρ₂/dρ₁` at sample index `i`, using the default options.
pub fn derivative(
    m1: &SampledMetric,
    m2: &SampledMetric,
    i: usize,
    aux: Option<(usize, usize)>,
) -> Result<f64> {
    derivative_with(m1, m2, i, aux, &DerivativeOptions::default())
}

pub fn derivative_with(
    m1: &SampledMetric,
    m2: &SampledMetric,
    i: usize,
    aux: Option<(usize, usize)>,
    opts: &DerivativeOptions,
) -> Result<f64> {
    if m1.sample != m2.sample {
        return Err(Error::SampleMismatch);
    }
    if m1.len() < 3 {
        return Err(Error::InsufficientSample(m1.len()));
    }
    m1.check_index(i)?;
    gate(m1, m2, opts)?;
    match aux {
        Some((j, k)) => {
            m1.check_index(j)?;
            m1.check_index(k)?;
            if j == k || j == i || k == i {
                return Err(Error::InvalidParameter(format!(
                    "auxiliary pair ({j}, {k}) must avoid {i} and be distinct"
                )));
            }
            Ok(triple_derivative(
                m1.get(i, j),
                m1.get(i, k),
                m1.get(j, k),
                m2.get(i, j),
                m2.get(i, k),
                m2.get(j, k),
            ))
        }
        None => Ok(log_derivative_at(m1, m2, i).0.exp()),
    }
}

/// The derivative on every sample point.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeFunction {
    pub values: Vec<f64>,
    /// Largest spread of the log-derivative across auxiliary pairs.
    pub consistency_residual: f64,
}

impl DerivativeFunction {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the maximum, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let m = self.max();
        self.values.iter().position(|v| *v == m).unwrap_or(0)
    }

    pub fn argmin(&self) -> usize {
        let m = self.min();
        self.values.iter().position(|v| *v == m).unwrap_or(0)
    }
}

pub fn derivative_function(m1: &SampledMetric, m2: &SampledMetric) -> Result<DerivativeFunction> {
    derivative_function_with(m1, m2, &DerivativeOptions::default())
}

pub fn derivative_function_with(
    m1: &SampledMetric,
    m2: &SampledMetric,
    opts: &DerivativeOptions,
) -> Result<DerivativeFunction> {
    if m1.sample != m2.sample {
        return Err(Error::SampleMismatch);
    }
    gate(m1, m2, opts)?;
    let mut values = Vec::with_capacity(m1.len());
    let mut residual: f64 = 0.0;
    for i in 0..m1.len() {
        let (l, s) = log_derivative_at(m1, m2, i);
        values.push(l.exp());
        residual = residual.max(s);
    }
    let f = DerivativeFunction {
        values,
        consistency_residual: residual,
    };
    let product = f.max().ln() + f.min().ln();
    if product.abs() > opts.product_tol {
        return Err(Error::InvalidMetric(format!(
            "max·min of the derivative is {} (log {product:.3e})",
            product.exp()
        )));
    }
    Ok(f)
}

/// `d_M(ρ₁, ρ₂) = max log dρ₂/dρ₁` over the sample.
pub fn dm_distance(m1: &SampledMetric, m2: &SampledMetric) -> Result<f64> {
    dm_distance_with(m1, m2, &DerivativeOptions::default())
}

pub fn dm_distance_with(
    m1: &SampledMetric,
    m2: &SampledMetric,
    opts: &DerivativeOptions,
) -> Result<f64> {
    let f = derivative_function_with(m1, m2, opts)?;
    Ok(f.max().ln().max(0.0))
}

/// Index `j` maximising `ρ(i, j)`, which must be within the antipodal
/// tolerance of one.
pub fn antipode_of(m: &SampledMetric, i: usize) -> Result<usize> {
    m.check_index(i)?;
    let mut best = usize::MAX;
    let mut best_v = f64::NEG_INFINITY;
    for j in 0..m.len() {
        if j != i && m.get(i, j) > best_v {
            best_v = m.get(i, j);
            best = j;
        }
    }
    if best_v < 1.0 - m.antipodal_tol {
        return Err(Error::NotAntipodalAtPoint {
            index: i,
            row_max: best_v,
        });
    }
    Ok(best)
}

/// Residuals of the max/min antipodal lemma for a Moebius pair: for the
/// sampled antipode `j` of the argmax under `ρ₁` (resp. of the argmin under
/// `ρ₂`), how far `D(j)` is from the minimum (resp. maximum) and how far the
/// opposite metric is from distance one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxMinResiduals {
    pub forward_derivative: f64,
    pub forward_distance: f64,
    pub reverse_derivative: f64,
    pub reverse_distance: f64,
}

impl MaxMinResiduals {
    pub fn worst(&self) -> f64 {
        self.forward_derivative
            .max(self.forward_distance)
            .max(self.reverse_derivative)
            .max(self.reverse_distance)
    }
}

/// Row maximiser, without the antipodal check of [`antipode_of`].
fn farthest(m: &SampledMetric, i: usize) -> usize {
    (0..m.len())
        .filter(|&j| j != i)
        .max_by(|&a, &b| m.get(i, a).total_cmp(&m.get(i, b)))
        .expect("a sample has at least four points")
}

pub fn maxmin_antipodal_residuals(
    m1: &SampledMetric,
    m2: &SampledMetric,
    d: &DerivativeFunction,
) -> MaxMinResiduals {
    let (imax, imin) = (d.argmax(), d.argmin());
    let (jf, jr) = (farthest(m1, imax), farthest(m2, imin));
    MaxMinResiduals {
        forward_derivative: d.values[jf] - d.min(),
        forward_distance: 1.0 - m2.get(imax, jf),
        reverse_derivative: d.max() - d.values[jr],
        reverse_distance: 1.0 - m1.get(imin, jr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{h_visual, DiskPoint};
    use approx::assert_abs_diff_eq;

    fn visual(x: &DiskPoint, s: &BoundarySample) -> SampledMetric {
        SampledMetric::from_fn(s.clone(), 0.2, |i, j| {
            Ok(h_visual(x, &s.point(i), &s.point(j)))
        })
        .unwrap()
    }

    #[test]
    fn sample_is_canonical() {
        let s = BoundarySample::new([3.0, 1.0, 7.0, 2.0]).unwrap();
        let a: Vec<f64> = s.points().iter().map(|p| p.angle()).collect();
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a[0] >= 0.0 && a[3] < TAU);
        assert!(matches!(BoundarySample::new([1.0, 2.0, 3.0]), Err(Error::InsufficientSample(3))));
        assert!(BoundarySample::new([1.0, 2.0, 3.0, 1.0 + TAU]).is_err());
    }

    #[test]
    fn cross_ratio_of_square_at_origin() {
        let s = BoundarySample::uniform(4, 0.0).unwrap();
        let m = visual(&DiskPoint::ORIGIN, &s);
        assert_abs_diff_eq!(cross_ratio(&m, 0, 1, 2, 3).unwrap(), 2.0, epsilon = 1e-14);
        assert!(matches!(cross_ratio(&m, 0, 0, 2, 3), Err(Error::InvalidQuadruple(..))));
    }

    #[test]
    fn rejects_bad_matrices() {
        let s = BoundarySample::uniform(4, 0.0).unwrap();
        let m = visual(&DiskPoint::ORIGIN, &s);
        let half: Vec<f64> = m.matrix().iter().map(|v| v * 0.5).collect();
        assert!(matches!(
            SampledMetric::new(s.clone(), half, 1e-3),
            Err(Error::NotAntipodalAtPoint { .. })
        ));
        let mut asym = m.matrix().to_vec();
        asym[1] *= 0.99;
        assert!(SampledMetric::new(s, asym, 1e-3).is_err());
    }

    #[test]
    fn antipode_on_uniform_octagon() {
        let s = BoundarySample::uniform(8, 0.0).unwrap();
        let m = visual(&DiskPoint::ORIGIN, &s);
        for i in 0..8 {
            assert_eq!(antipode_of(&m, i).unwrap(), (i + 4) % 8);
        }
    }

    #[test]
    fn identical_metrics_have_unit_derivative() {
        let s = BoundarySample::uniform(12, 0.1).unwrap();
        let m = visual(&DiskPoint::new(0.2, 0.1).unwrap(), &s);
        assert_eq!(moebius_defect(&m, &m).unwrap(), 0.0);
        let f = derivative_function(&m, &m).unwrap();
        assert!(f.values.iter().all(|v| (*v - 1.0).abs() < 1e-14));
        assert!(f.consistency_residual < 1e-14);
        assert!(dm_distance(&m, &m).unwrap() < 1e-14);
        assert_abs_diff_eq!(derivative(&m, &m, 3, Some((0, 5))).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn perturbed_entry_breaks_equivalence() {
        let s = BoundarySample::uniform(10, 0.0).unwrap();
        let m = visual(&DiskPoint::ORIGIN, &s);
        let mut d = m.matrix().to_vec();
        d[1] *= 0.9;
        d[10] *= 0.9;
        let m2 = SampledMetric::new(s, d, 0.05).unwrap();
        assert!(moebius_defect(&m, &m2).unwrap() > 0.05);
        assert!(matches!(
            derivative(&m, &m2, 0, None),
            Err(Error::NotMoebiusEquivalent { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = BoundarySample::uniform(6, 0.3).unwrap();
        let m = visual(&DiskPoint::new(-0.1, 0.25).unwrap(), &s);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = SampledMetric::read_csv(buf.as_slice(), 0.2).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn auxiliary_pair_respects_separation() {
        let s = BoundarySample::uniform(16, 0.0).unwrap();
        let p = IdealPoint::new(0.0);
        let (j, k) = s.auxiliary_pair(&p, TAU / 16.0);
        assert_ne!(j, k);
        assert!(s.point(j).circular_distance(&p) >= TAU / 16.0 - 1e-12);
        assert!(s.point(k).circular_distance(&p) >= TAU / 16.0 - 1e-12);
    }
}
