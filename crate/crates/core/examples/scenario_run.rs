//! Loads a scenario file and runs the rigidity command into a temporary
//! directory, as the CLI does.

use moebius_rigidity::experiment::{cmd_rigidity, ScenarioConfig};

fn main() -> moebius_rigidity::error::Result<()> {
    let config = ScenarioConfig::from_toml(
        "scenario = \"pullback_twist\"\nsample.n = 32\nprobes.k = 3\nprobes.far_count = 2\n",
    )?;
    let out = std::env::temp_dir().join("moebius-lab-example");
    std::fs::create_dir_all(&out)?;
    let report = cmd_rigidity(&config, &out)?;
    for c in &report.checks {
        println!("{:<24} {:>12.3e} <= {:.0e}  {}", c.name, c.value, c.bound, c.status);
    }
    println!("{}", report.summary());
    Ok(())
}
