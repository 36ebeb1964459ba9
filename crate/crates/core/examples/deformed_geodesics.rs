//! Geodesics of a compactly supported bump: shooting, connecting points and
//! Busemann functions against the flat values.

use moebius_rigidity::hyperbolic::{h_busemann, h_distance, DiskPoint, IdealPoint, UnitTangent};
use moebius_rigidity::manifold::{MetricField, PerturbedSpace, SolverSettings};

fn main() -> moebius_rigidity::error::Result<()> {
    let center = DiskPoint::new(0.0, 0.0)?;
    let field = MetricField::conformal_bump(center, 1.0, -0.1, 3);
    // a conformal bump raises the curvature above -1 somewhere, so the
    // pinching check is skipped
    let space = PerturbedSpace::new_unchecked(field, SolverSettings::default())?;
    let (kmin, kmax) = space.curvature_range();
    println!("curvature in [{kmin:.4}, {kmax:.4}], pinching b = {:.4}", space.pinching_b());

    let v = UnitTangent::pure_from_angle(DiskPoint::new(-0.6, 0.2)?, 0.1);
    let v = space.normalize(&v);
    println!("endpoint of v     {:.9}", space.ideal_endpoint(&v)?.angle());

    let x = DiskPoint::new(-0.5, 0.0)?;
    let y = DiskPoint::new(0.5, 0.1)?;
    println!("d1(x, y) = {:.9}   d0(x, y) = {:.9}", space.p_distance(&x, &y)?, h_distance(&x, &y));
    let xi = IdealPoint::new(1.0);
    println!(
        "B1(x, y, xi) = {:.9}   B0 = {:.9}",
        space.p_busemann(&x, &y, &xi)?,
        h_busemann(&x, &y, &xi)
    );
    space.connect(&x, &y)?.write_csv(std::io::stdout().lock())?;
    Ok(())
}
