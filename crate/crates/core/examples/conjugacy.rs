//! The geodesic conjugacy of the twist deformation, and the max/min flip.

use moebius_rigidity::conjugacy::DeformationPair;
use moebius_rigidity::experiment::ScenarioConfig;
use moebius_rigidity::hyperbolic::{DiskPoint, UnitTangent};

fn main() -> moebius_rigidity::error::Result<()> {
    let config = ScenarioConfig::default();
    let pair: DeformationPair = config.pair()?;
    println!("moebius defect {:.3e}", pair.moebius_defect()?);

    let vs: Vec<UnitTangent> = (0..4)
        .map(|k| UnitTangent::pure_from_angle(DiskPoint::polar(0.3, k as f64), 0.7 * k as f64))
        .collect();
    for r in pair.conjugate_all(&vs)? {
        println!(
            "v at ({:+.4}, {:+.4}) -> foot ({:+.6}, {:+.6}), residual {:.1e}",
            r.input.base.x(),
            r.input.base.y(),
            r.foot.x(),
            r.foot.y(),
            r.derivative_residual
        );
    }

    let flip = pair.maxmin_flip_check(&DiskPoint::new(0.2, 0.0)?, &DiskPoint::new(-0.1, 0.3)?)?;
    println!("flip: dM = {:.6}, worst residual {:.2e}", flip.dm, flip.worst());
    Ok(())
}
