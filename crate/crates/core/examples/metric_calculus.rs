//! Sampled visual metrics: cross-ratios, the derivative and d_M.

use moebius_rigidity::boundary::{
    cross_ratio, derivative_function, dm_distance, moebius_defect, BoundarySample, SampledMetric,
};
use std::f64::consts::TAU;

use moebius_rigidity::hyperbolic::{h_distance, h_visual, DiskPoint};
use moebius_rigidity::manifold::sample_antipodal_tol;

fn visual(x: &DiskPoint, s: &BoundarySample) -> moebius_rigidity::error::Result<SampledMetric> {
    SampledMetric::from_fn(s.clone(), sample_antipodal_tol(TAU / s.len() as f64), |i, j| Ok(h_visual(x, &s.point(i), &s.point(j))))
}

fn main() -> moebius_rigidity::error::Result<()> {
    let sample = BoundarySample::uniform(128, 0.01)?;
    let x = DiskPoint::new(0.1, -0.2)?;
    let y = DiskPoint::new(-0.3, 0.4)?;
    let (mx, my) = (visual(&x, &sample)?, visual(&y, &sample)?);

    println!("cross ratio at x  {:.12}", cross_ratio(&mx, 0, 30, 60, 90)?);
    println!("cross ratio at y  {:.12}", cross_ratio(&my, 0, 30, 60, 90)?);
    println!("moebius defect    {:.3e}", moebius_defect(&mx, &my)?);

    let d = derivative_function(&mx, &my)?;
    println!("max * min         {:.12}", d.max() * d.min());
    println!("d_M(rho_x, rho_y) {:.9}", dm_distance(&mx, &my)?);
    println!("d(x, y)           {:.9}", h_distance(&x, &y));
    Ok(())
}
