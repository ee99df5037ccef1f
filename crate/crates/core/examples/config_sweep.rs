//! Runs an experiment from a TOML config and prints CSV, as the CLI does.
//! Pass a config path to run that instead of the built-in sweep.

use nakamoto_sim::cli::{emit_results, run_experiment, ExperimentConfig, Format};

const SWEEP: &str = r#"
experiment = "phase-diagram"
delta = 1.0
horizon = 3000.0
n_trials = 100
root_seed = 12

[[block_types]]
score = 1.0
honest_rate = 1.0

[params]
ratios = [0.5, 0.8, 1.2, 1.5, 2.0]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::from_toml(SWEEP)?,
    };
    let rows = run_experiment(&cfg)?;
    emit_results(&rows, &cfg.hash(), Format::Csv, std::io::stdout().lock())?;
    Ok(())
}
