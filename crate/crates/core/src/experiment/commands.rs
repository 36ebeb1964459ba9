//! The five subcommands. Each returns its report after writing
//! `report.csv` and `results.csv` into the output directory.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;

use super::config::{build_twist, random_ideal, Scenario, ScenarioConfig};
use super::report::RunReport;
use crate::boundary::{
    derivative_function_with, dm_distance_with, maxmin_antipodal_residuals, BoundarySample,
    DerivativeOptions,
};
use crate::circumcenter::{
    dm_pushforward_with, qisom_check, r_profile, write_extension_csv, ExtensionResult, Feet,
};
use crate::conjugacy::DeformationPair;
use crate::error::{Error, Result};
use crate::hyperbolic::{
    h_angle, h_busemann, h_distance, h_flow, h_gromov, h_ray_min_distance, h_visual,
    DiskPoint, IdealPoint, UnitTangent,
};
use crate::manifold::{MetricField, PerturbedSpace};

fn rows_csv(out: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<std::path::PathBuf> {
    let path = out.join("results.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}

fn finish(mut report: RunReport, out: &Path, results: std::path::PathBuf) -> Result<RunReport> {
    report.outputs.push(results);
    report.write_csv(out)?;
    Ok(report)
}

fn e(v: f64) -> String {
    format!("{v:.12e}")
}

fn seeded_point(rng: &mut impl Rng, center: &DiskPoint, max_dist: f64) -> DiskPoint {
    let d = rng.gen_range(0.0..max_dist);
    let a = rng.gen_range(0.0..TAU);
    h_flow(&UnitTangent::pure_from_angle(*center, a), d).base
}

/// Curvature and pinching of the configured field, the twist construction
/// checks, and the undeformed solver against closed forms.
pub fn cmd_validate(config: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let mut rep = RunReport::new("validate", config.hash(), config.seed);
    let space = config.space()?;
    let (_, kmax) = space.curvature_range();
    rep.at_most("curvature_max", kmax, -1.0 + config.solver.curv_tol);
    rep.at_least("pinching_b", space.pinching_b(), 1.0);
    let (c, radius) = config.support()?;
    if config.scenario == Scenario::PullbackTwist {
        let (field, psi) = build_twist(config)?;
        let mut inv: f64 = 0.0;
        let mut fd: f64 = 0.0;
        for p in config.grid()? {
            inv = inv.max(h_distance(&psi.psi(&psi.psi_inv(&p)), &p));
            fd = fd.max(pushforward_fd_error(&field, &psi, &p));
        }
        rep.at_most("twist.psi_round_trip", inv, 1e-10);
        rep.at_most("twist.pushforward_vs_fd", fd, 1e-6);
    }
    let pure = PerturbedSpace::new(MetricField::pure(c, radius), config.solver)?;
    let mut rng = config.rng(1);
    let mut rows = Vec::new();
    let mut worst = [0.0f64; 4];
    for i in 0..50 {
        let x = seeded_point(&mut rng, &c, radius + 1.0);
        let y = seeded_point(&mut rng, &c, radius + 1.0);
        let (xi, eta) = (random_ideal(&mut rng), random_ideal(&mut rng));
        let pairs = [
            ("distance", pure.p_distance(&x, &y)?, h_distance(&x, &y)),
            ("busemann", pure.p_busemann(&x, &y, &xi)?, h_busemann(&x, &y, &xi)),
            ("gromov", pure.p_gromov(&x, &xi, &eta)?, h_gromov(&x, &xi, &eta)?),
            ("visual", pure.p_visual(&x, &xi, &eta)?, h_visual(&x, &xi, &eta)),
        ];
        for (k, (name, num, exact)) in pairs.iter().enumerate() {
            let err = (num - exact).abs();
            worst[k] = worst[k].max(err);
            rows.push(vec![name.to_string(), i.to_string(), e(*num), e(*exact), e(err)]);
        }
    }
    for (k, name) in ["distance", "busemann", "gromov", "visual"].iter().enumerate() {
        rep.at_most(format!("pure_oracle.{name}"), worst[k], 1e-6);
    }
    let path = rows_csv(out, &["quantity", "case", "numeric", "closed_form", "error"], &rows)?;
    finish(rep, out, path)
}

/// Largest component error of `g₁ = (ψ⁻¹)*g₀` against a finite-difference
/// Jacobian of `ψ⁻¹`.
fn pushforward_fd_error(field: &MetricField, psi: &crate::manifold::TwistMap, p: &DiskPoint) -> f64 {
    let h = 1e-5;
    let col = |dx: f64, dy: f64| {
        let a = psi.psi_inv(&DiskPoint::from_complex(p.z() + num_complex::Complex64::new(dx, dy)).unwrap());
        let b = psi.psi_inv(&DiskPoint::from_complex(p.z() - num_complex::Complex64::new(dx, dy)).unwrap());
        [(a.x() - b.x()) / (2.0 * h), (a.y() - b.y()) / (2.0 * h)]
    };
    let (c0, c1) = (col(h, 0.0), col(0.0, h));
    let q = psi.psi_inv(p);
    let l2 = q.conformal_factor().powi(2);
    let g = [
        l2 * (c0[0] * c0[0] + c0[1] * c0[1]),
        l2 * (c0[0] * c1[0] + c0[1] * c1[1]),
        l2 * (c1[0] * c1[0] + c1[1] * c1[1]),
    ];
    let m = field.metric(p);
    let m = [m[(0, 0)], m[(0, 1)], m[(1, 1)]];
    (0..3).map(|i| (g[i] - m[i]).abs()).fold(0.0, f64::max)
}

/// Endpoints of the deformed geodesic through `x` and `y`.
fn extremal_endpoints(space: &PerturbedSpace, x: &DiskPoint, y: &DiskPoint) -> Result<[IdealPoint; 2]> {
    let (v, _) = space.connect_tangent(x, y)?;
    Ok([space.ideal_endpoint(&v)?, space.ideal_endpoint(&v.reversed())?])
}

/// A uniform sample with the two given points added.
fn augmented_sample(config: &ScenarioConfig, extra: &[IdealPoint]) -> Result<BoundarySample> {
    let base = config.sample_with(config.sample.n)?;
    let mut angles: Vec<f64> = base
        .points()
        .iter()
        .filter(|p| extra.iter().all(|q| p.circular_distance(q) > 1e-3))
        .map(|p| p.angle())
        .collect();
    angles.extend(extra.iter().map(|p| p.angle()));
    BoundarySample::new(angles)
}

/// Every invariant suite against the configured scenario. Suites that need a
/// Moebius boundary map are skipped when the gate fails.
pub fn cmd_lemmas(config: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let mut rep = RunReport::new("lemmas", config.hash(), config.seed);
    let pair = config.pair()?;
    let s1 = pair.space1();
    let (c, radius) = config.support()?;
    let mut rng = config.rng(2);
    let mut rows: Vec<Vec<String>> = Vec::new();

    // Busemann and Gromov invariants of the deformed space
    let (mut bound, mut cocycle, mut invol, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..8 {
        let x = seeded_point(&mut rng, &c, radius + 0.5);
        let y = seeded_point(&mut rng, &c, radius + 0.5);
        let z = seeded_point(&mut rng, &c, radius + 0.5);
        let (xi, eta) = (random_ideal(&mut rng), random_ideal(&mut rng));
        let bxy = s1.p_busemann(&x, &y, &xi)?;
        bound = bound.max(bxy.abs() - s1.p_distance(&x, &y)?);
        cocycle = cocycle.max((bxy + s1.p_busemann(&y, &z, &xi)? - s1.p_busemann(&x, &z, &xi)?).abs());
        invol = invol.max(s1.p_involution(&x, &s1.p_involution(&x, &xi)?)?.circular_distance(&xi));
        sym = sym.max((s1.p_gromov(&x, &xi, &eta)? - s1.p_gromov(&x, &eta, &xi)?).abs());
    }
    rep.at_most("manifold.busemann_bound_excess", bound, 1e-8);
    rep.at_most("manifold.busemann_cocycle", cocycle, 1e-8);
    rep.at_most("manifold.involution", invol, 1e-8);
    rep.at_most("manifold.gromov_symmetry", sym, 1e-8);

    // angle comparison needs curvature at most -1
    let (_, kmax) = s1.curvature_range();
    if kmax <= -1.0 + config.solver.curv_tol {
        let b = s1.pinching_b();
        let mut excess: f64 = f64::NEG_INFINITY;
        for _ in 0..10 {
            let x = seeded_point(&mut rng, &c, radius + 0.5);
            let (xi, eta) = (random_ideal(&mut rng), random_ideal(&mut rng));
            let rho = s1.p_visual(&x, &xi, &eta)?;
            let s = (0.5 * s1.p_angle(&x, &xi, &eta)?).sin();
            excess = excess.max(rho.powf(b) - s).max(s - rho);
        }
        rep.at_most("manifold.angle_comparison_excess", excess, 1e-4);
    } else {
        rep.skip("manifold.angle_comparison_excess", 1e-4);
    }

    // metric calculus on deformed visual metrics
    let x = seeded_point(&mut rng, &c, radius);
    let y = seeded_point(&mut rng, &c, radius);
    let ends = extremal_endpoints(s1, &x, &y)?;
    let sample = augmented_sample(config, &ends)?;
    let mx = s1.p_visual_sample(&x, &sample)?;
    let my = s1.p_visual_sample(&y, &sample)?;
    let opts = DerivativeOptions {
        product_tol: f64::INFINITY,
        ..DerivativeOptions::default()
    };
    let d = derivative_function_with(&mx, &my, &opts)?;
    rep.at_most("boundary.max_times_min", (d.max().ln() + d.min().ln()).abs(), 1e-4);
    let dm = dm_distance_with(&mx, &my, &opts)?;
    let dist = s1.p_distance(&x, &y)?;
    rep.at_most("boundary.dm_vs_distance", (dm - dist).abs(), 2e-3);
    rep.at_most("boundary.maxmin_antipodal", maxmin_antipodal_residuals(&mx, &my, &d).worst(), 5e-3);
    rows.push(vec!["dm_vs_distance".into(), e(dm), e(dist)]);

    match pair.gate() {
        Ok(defect) => {
            rep.at_most("conjugacy.moebius_defect", defect, config.gates.tol_moebius);
            conjugacy_suite(config, &pair, &mut rep, &mut rng, &mut rows)?;
            circumcenter_suite(config, &pair, &mut rep, &mut rows)?;
        }
        Err(Error::NotMoebiusEquivalent { .. }) => {
            for (name, b) in [
                ("conjugacy.moebius_defect", config.gates.tol_moebius),
                ("conjugacy.derivative_residual", 1e-5),
                ("conjugacy.identity_outside_support", 1e-5),
                ("conjugacy.flow_equivariance", 1e-4),
                ("conjugacy.flip_foot_distance", 5e-3),
                ("circumcenter.r_spread", 5e-3),
                ("circumcenter.balance_residual", 1e-3),
                ("circumcenter.qisom_excess", 1e-2),
                ("circumcenter.dm_two_paths", 1e-4),
            ] {
                rep.skip(name, b);
            }
        }
        Err(e) => return Err(e),
    }
    let path = rows_csv(out, &["quantity", "value", "reference"], &rows)?;
    finish(rep, out, path)
}

fn conjugacy_suite(
    config: &ScenarioConfig,
    pair: &DeformationPair,
    rep: &mut RunReport,
    rng: &mut impl Rng,
    rows: &mut Vec<Vec<String>>,
) -> Result<()> {
    let s1 = pair.space1();
    let (c, radius) = config.support()?;
    let mut residual: f64 = 0.0;
    let mut equivariance: f64 = 0.0;
    for _ in 0..6 {
        let v = UnitTangent::pure_from_angle(seeded_point(rng, &c, radius), rng.gen_range(0.0..TAU));
        let r = pair.conjugate(&v)?;
        residual = residual.max(r.derivative_residual);
        let moved = pair.conjugate(&h_flow(&v, 1.0))?;
        let flowed = s1.flow(&r.output, 1.0)?;
        equivariance = equivariance.max(s1.p_distance(&moved.foot, &flowed.base)?);
    }
    rep.at_most("conjugacy.derivative_residual", residual, 1e-5);
    rep.at_most("conjugacy.flow_equivariance", equivariance, 1e-4);

    let mut identity: f64 = 0.0;
    for x in config.far_points()? {
        for k in 0..16 {
            let v = UnitTangent::pure_from_angle(x, TAU * k as f64 / 16.0);
            let clear = h_ray_min_distance(&c, &v) > radius && h_ray_min_distance(&c, &v.reversed()) > radius;
            if clear {
                let r = pair.conjugate(&v)?;
                identity = identity.max(h_distance(&r.foot, &x)).max((r.output.dir - v.dir).norm() * x.conformal_factor());
            }
        }
    }
    rep.at_most("conjugacy.identity_outside_support", identity, 1e-5);

    // the flip lemma at twice the sample size
    let fine = config.pair_with(2 * config.sample.n)?;
    let x = seeded_point(rng, &c, radius);
    let y = seeded_point(rng, &c, radius);
    let flip = fine.maxmin_flip_check(&x, &y)?;
    rep.at_most("conjugacy.flip_foot_distance", flip.foot_distance_residual, 5e-3);
    rep.at_most("conjugacy.flip_on_ray", flip.on_ray_residual, 5e-3);
    rep.at_most("conjugacy.flip_involution", flip.involution_residual, 5e-3);
    rows.push(vec!["flip_dm".into(), e(flip.dm), e(flip.dm_sampled)]);

    let probes = config.grid()?;
    let d0 = pair.deformation_moebius_defect(&probes[..1])?;
    let d1 = pair.deformation_moebius_defect(&probes[probes.len() - 1..])?;
    rep.at_most("conjugacy.defect_basepoint_independence", (d0 - d1).abs(), 5e-6);
    Ok(())
}

fn circumcenter_suite(
    config: &ScenarioConfig,
    pair: &DeformationPair,
    rep: &mut RunReport,
    rows: &mut Vec<Vec<String>>,
) -> Result<()> {
    let grid = config.grid()?;
    let prof = r_profile(pair, &grid, &config.circumcenter)?;
    rep.at_most("circumcenter.r_spread", prof.spread, 5e-3);
    let balance = prof.results.iter().map(|r| r.balance_residual_at_fx).fold(0.0, f64::max);
    rep.at_most("circumcenter.balance_residual", balance, 1e-3);
    let q = qisom_check(pair, &prof.results)?;
    rep.at_most("circumcenter.qisom_excess", q.lower_excess.max(q.upper_excess), 1e-2);
    rep.at_most("circumcenter.bilipschitz_excess", q.bilipschitz_excess, 1e-2);
    let case1: f64 = prof
        .results
        .iter()
        .filter(|r| is_antipodal_pair(pair, r))
        .map(|r| r.r_x)
        .fold(0.0, f64::max);
    rep.at_most("circumcenter.case1_r", case1, 5e-3);

    let (x, y) = (grid[0], grid[grid.len() - 1]);
    let (busemann_route, _) = dm_pushforward_with(pair, &Feet::new(pair, &x)?, &y)?;
    let (m0, m1) = pair.pair_visuals(&x, &y)?;
    let opts = DerivativeOptions {
        product_tol: f64::INFINITY,
        ..pair_options(pair)
    };
    let derivative_route = dm_distance_with(&m1, &m0, &opts)?;
    rep.at_most("circumcenter.dm_two_paths", (busemann_route - derivative_route).abs(), 1e-4);
    rows.push(vec!["dm_pushforward".into(), e(busemann_route), e(derivative_route)]);
    Ok(())
}

fn pair_options(pair: &DeformationPair) -> DerivativeOptions {
    DerivativeOptions {
        tol_moebius: pair.tol_moebius(),
        ..DerivativeOptions::default()
    }
}

fn is_antipodal_pair(pair: &DeformationPair, r: &ExtensionResult) -> bool {
    if r.balanced_weights.len() != 2 {
        return false;
    }
    let (a, b) = (r.balanced_weights[0].0, r.balanced_weights[1].0);
    let s = pair.sample();
    h_angle(&r.x, &s.point(a), &s.point(b)) > std::f64::consts::PI - TAU / s.len() as f64
}

fn refuse_non_moebius(pair: &DeformationPair) -> Result<f64> {
    pair.gate()
}

/// `F` at the given points, or at the probes when none are given.
pub fn cmd_extend(config: &ScenarioConfig, points: Option<&[DiskPoint]>, out: &Path) -> Result<RunReport> {
    let mut rep = RunReport::new("extend", config.hash(), config.seed);
    let pair = config.pair()?;
    refuse_non_moebius(&pair)?;
    let pts = match points {
        Some(p) => p.to_vec(),
        None => config.probes()?,
    };
    let prof = r_profile(&pair, &pts, &config.circumcenter)?;
    for (i, r) in prof.results.iter().enumerate() {
        rep.at_most(format!("extend.{i}.balance_residual"), r.balance_residual_at_fx, 1e-3);
        rep.at_most(format!("extend.{i}.iterations"), r.optimizer_iters as f64, config.circumcenter.max_iter as f64 - 1.0);
    }
    let path = out.join("results.csv");
    write_extension_csv(std::fs::File::create(&path)?, &prof.results)?;
    finish(rep, out, path)
}

/// The rigidity checks: `F` is an isometry onto the deformed space, and for
/// the twist it is the twist.
pub fn cmd_rigidity(config: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    if config.scenario == Scenario::ConformalBump {
        return Err(Error::InvalidParameter(
            "rigidity needs a scenario with a Moebius boundary map (trivial or pullback_twist)".into(),
        ));
    }
    let mut rep = RunReport::new("rigidity", config.hash(), config.seed);
    let pair = config.pair()?;
    let defect = pair.gate()?;
    rep.at_most("moebius_defect", defect, config.gates.tol_moebius);
    let probes = config.probes()?;
    let prof = r_profile(&pair, &probes, &config.circumcenter)?;
    if config.scenario == Scenario::Trivial {
        rep.at_most("trivial.r_max", prof.max, 1e-6);
        let moved = prof.results.iter().map(|r| h_distance(&r.f_x, &r.x)).fold(0.0, f64::max);
        rep.at_most("trivial.f_displacement", moved, 1e-6);
    }
    rep.at_most("r_spread", prof.spread, 5e-3);
    let q = qisom_check(&pair, &prof.results)?;
    rep.at_most("isometry_defect", q.isometry_defect, 1e-2);
    rep.at_most("qisom_lower_excess", q.lower_excess, 1e-2);
    rep.at_most("qisom_upper_excess", q.upper_excess, 1e-2);
    if config.scenario == Scenario::PullbackTwist {
        let (_, psi) = build_twist(config)?;
        let mut worst: f64 = 0.0;
        for r in &prof.results {
            worst = worst.max(pair.space1().p_distance(&r.f_x, &psi.psi(&r.x))?);
        }
        rep.at_most("twist.f_vs_psi", worst, 1e-2);
    }
    let balance = prof.results.iter().map(|r| r.balance_residual_at_fx).fold(0.0, f64::max);
    rep.at_most("balance_residual", balance, 1e-3);
    let path = out.join("results.csv");
    write_extension_csv(std::fs::File::create(&path)?, &prof.results)?;
    finish(rep, out, path)
}

/// Moebius defect, curvature and (when the gate allows) isometry defect of
/// conformal bumps over a range of amplitudes.
pub fn cmd_sweep(config: &ScenarioConfig, amplitudes: &[f64], out: &Path) -> Result<RunReport> {
    let mut rep = RunReport::new("sweep", config.hash(), config.seed);
    let mut rows = Vec::new();
    for &a in amplitudes {
        let mut c = config.clone();
        c.scenario = Scenario::ConformalBump;
        c.bump.amplitude = a;
        let pair = c.pair()?;
        let defect = pair.moebius_defect()?;
        let (_, kmax) = pair.space1().curvature_range();
        let iso = if defect <= c.gates.tol_moebius {
            let pts = c.grid()?;
            let prof = r_profile(&pair, &pts[..pts.len().min(5)], &c.circumcenter)?;
            e(qisom_check(&pair, &prof.results)?.isometry_defect)
        } else {
            String::new()
        };
        if a == 0.0 {
            rep.at_most("sweep.zero_amplitude_defect", defect, 1e-5);
        }
        rows.push(vec![e(a), e(defect), e(kmax), iso]);
    }
    rep.at_least("sweep.rows", rows.len() as f64, amplitudes.len() as f64);
    let path = rows_csv(out, &["amplitude", "moebius_defect", "curvature_max", "isometry_defect"], &rows)?;
    finish(rep, out, path)
}
