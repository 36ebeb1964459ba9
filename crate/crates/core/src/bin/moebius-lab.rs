use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use moebius_rigidity::error::{Error, Result};
use moebius_rigidity::experiment::{
    cmd_extend, cmd_lemmas, cmd_rigidity, cmd_sweep, cmd_validate, error_exit_code, RunReport,
    ScenarioConfig,
};
use moebius_rigidity::hyperbolic::DiskPoint;

#[derive(Parser)]
#[command(name = "moebius-lab", version, about = "Deformed hyperbolic planes, boundary maps and circumcenter extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML with dotted sections). Defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature, pinching and closed-form checks of the solver
    Validate,
    /// Every invariant suite against the scenario
    Lemmas,
    /// Circumcenter extension at given points
    Extend {
        /// Chart points, e.g. "0.1,0.2;-0.3,0"
        #[arg(long)]
        points: Option<String>,
    },
    /// The isometry checks (trivial and pullback_twist only)
    Rigidity,
    /// Moebius defect over conformal bump amplitudes
    Sweep,
}

fn parse_points(s: &str) -> Result<Vec<DiskPoint>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let c: Vec<&str> = p.split(',').collect();
            if c.len() != 2 {
                return Err(Error::Config(format!("bad point {p:?}, expected x,y")));
            }
            let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("{t:?}: {e}")));
            DiskPoint::new(num(c[0])?, num(c[1])?)
        })
        .collect()
}

fn run(cli: &Cli) -> Result<RunReport> {
    let mut config = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    config.validate()?;
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Validate => cmd_validate(&config, &cli.out),
        Command::Lemmas => cmd_lemmas(&config, &cli.out),
        Command::Extend { points } => {
            let pts = points.as_deref().map(parse_points).transpose()?;
            cmd_extend(&config, pts.as_deref(), &cli.out)
        }
        Command::Rigidity => cmd_rigidity(&config, &cli.out),
        Command::Sweep => cmd_sweep(&config, &config.sweep.amplitudes.clone(), &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for c in report.checks.iter().filter(|c| c.status.to_string() == "fail") {
                eprintln!("FAIL {}: {:.3e} (bound {:.1e})", c.name, c.value, c.bound);
            }
            println!("{}", report.summary());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
