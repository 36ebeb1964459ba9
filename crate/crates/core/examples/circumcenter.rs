//! The circumcenter extension of the twist's boundary map at a few points,
//! compared with the twist itself.

use moebius_rigidity::circumcenter::{circumcenter_extend, ExtendOptions};
use moebius_rigidity::experiment::{build_twist, ScenarioConfig};
use moebius_rigidity::hyperbolic::DiskPoint;

fn main() -> moebius_rigidity::error::Result<()> {
    let config = ScenarioConfig::default();
    let pair = config.pair()?;
    let (_, psi) = build_twist(&config)?;
    for (x, y) in [(0.0, 0.0), (0.2, 0.1), (-0.3, 0.25)] {
        let x = DiskPoint::new(x, y)?;
        let r = circumcenter_extend(&pair, &x, &ExtendOptions::default())?;
        let target = psi.psi(&x);
        println!(
            "F({:+.3}, {:+.3}) = ({:+.9}, {:+.9})  psi = ({:+.9}, {:+.9})  r = {:.2e}  atoms {}",
            x.x(),
            x.y(),
            r.f_x.x(),
            r.f_x.y(),
            target.x(),
            target.y(),
            r.r_x,
            r.balanced_weights.len()
        );
    }
    Ok(())
}
