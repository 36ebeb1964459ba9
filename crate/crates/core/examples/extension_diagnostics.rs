//! Adjoint identity for dF and the cone picture far from the support.

use moebius_rigidity::circumcenter::{cone_analysis, df_adjoint_check, ExtendOptions};
use moebius_rigidity::experiment::ScenarioConfig;
use moebius_rigidity::hyperbolic::DiskPoint;

fn main() -> moebius_rigidity::error::Result<()> {
    let config = ScenarioConfig::default();
    let pair = config.pair()?;
    let opts = ExtendOptions::default();
    let x = DiskPoint::new(0.15, -0.1)?;
    for h in [1e-3, 5e-4] {
        let rep = df_adjoint_check(&pair, &x, h, &opts)?;
        println!("h = {h:.0e}: adjoint residual {:.3e}", rep.residual);
    }
    let x0 = DiskPoint::new(0.0, 0.0)?;
    for t in [5.0, 10.0, 15.0] {
        let cone = cone_analysis(&pair, &x0, 1.0, 0.4, t, &opts)?;
        println!("t = {t:>4}: eps_t = {:.3e}, {}", cone.eps_t, cone.case_label);
    }
    Ok(())
}
