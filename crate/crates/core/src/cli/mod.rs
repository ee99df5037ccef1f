//! Command-line front end: `run`, `validate`, `replay` and `capture`.

mod config;
mod experiment;
mod output;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

pub use config::{Experiment, ExperimentConfig, Params};
pub use experiment::run_experiment;
pub use output::{emit_results, fmt_g9, read_json, write_csv, write_json, Format, ResultRow, CSV_HEADER};

use crate::adversary::{run_with_strategy, RunParams, StrategyKind};
use crate::analysis::{estimate_lambda_h, full_tiling, montecarlo::with_threads, scan_windows, stats::z_value, TrialData};
use crate::arrivals::{generate_trial_traces, read_trace, write_trace, ArrivalTrace, Origin, ScoreTable};
use crate::blocktree::{build_fully_delayed_chain_with, write_tree};
use crate::error::{Result, SimError};
use crate::rng::trial_seed;

#[derive(Debug, Parser)]
#[command(name = "nakamoto-sim", version, about = "Nakamoto consensus security simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file and print its hash.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Replay a captured arrival trace through an attack strategy.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Takes block scores, Δ and miner count from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value = "full-delay")]
        strategy: StrategyKind,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the resulting block tree here.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Write the arrival trace of one trial of a config.
    Capture {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            format,
            out,
            threads,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let started = Instant::now();
            eprintln!("running {} with {} trials", cfg.experiment.as_str(), cfg.n_trials);
            let rows = with_threads(threads, || run_experiment(&cfg))??;
            let mut w = open_out(out.as_deref())?;
            emit_results(&rows, &cfg.hash(), format, &mut w)?;
            w.flush()?;
            eprintln!("done in {:.2}s", started.elapsed().as_secs_f64());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("ok {} {}", cfg.experiment.as_str(), cfg.hash());
            Ok(())
        }
        Command::Replay {
            trace,
            config,
            delta,
            strategy,
            format,
            out,
            tree,
        } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let bytes = std::fs::read(&trace)?;
            let merged = read_trace(BufReader::new(bytes.as_slice()))?;
            let delta = delta
                .or(cfg.as_ref().map(|c| c.delta))
                .ok_or_else(|| SimError::param("delta", "replay needs --delta or --config"))?;
            let mut hasher = Sha256::new();
            hasher.update(&bytes);
            hasher.update(format!("delta={delta};strategy={}", strategy.as_str()).as_bytes());
            if let Some(c) = &cfg {
                hasher.update(c.hash().as_bytes());
            }
            let hash = hex::encode(hasher.finalize())[..16].to_string();
            let (rows, built) = replay(&merged, cfg.as_ref(), delta, strategy)?;
            if let Some(path) = tree {
                let mut w = BufWriter::new(File::create(path)?);
                write_tree(&built, &mut w)?;
                w.flush()?;
            }
            let rows: Vec<ResultRow> = rows
                .into_iter()
                .map(|mut r| {
                    r.config_hash = hash.clone();
                    r.seed = merged.seed();
                    r
                })
                .collect();
            let mut w = open_out(out.as_deref())?;
            emit_results(&rows, &hash, format, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Capture { config, trial, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (honest, adversary) =
                generate_trial_traces(&cfg.block_types, cfg.n_miners, cfg.horizon, trial_seed(cfg.root_seed, trial))?;
            let mut w = BufWriter::new(File::create(out)?);
            write_trace(&honest.merged(&adversary)?, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Splits a mixed trace into its honest and adversary parts.
pub fn split_trace(trace: &ArrivalTrace) -> Result<(ArrivalTrace, ArrivalTrace)> {
    let part = |o: Origin| {
        let arrivals = trace.arrivals().iter().filter(|a| a.origin == o).copied().collect();
        ArrivalTrace::from_arrivals(arrivals, trace.horizon(), trace.seed())
    };
    Ok((part(Origin::Honest)?, part(Origin::Adversary)?))
}

fn replay(
    merged: &ArrivalTrace,
    cfg: Option<&ExperimentConfig>,
    delta: f64,
    strategy: StrategyKind,
) -> Result<(Vec<ResultRow>, crate::blocktree::BlockTree)> {
    let (honest, adversary) = split_trace(merged)?;
    let scores = match cfg {
        Some(c) => ScoreTable::new(&c.block_types),
        None => ScoreTable::unit(merged.arrivals().iter().map(|a| a.type_id as usize + 1).max().unwrap_or(1)),
    };
    let seen_miners = honest.arrivals().iter().map(|a| a.miner_id + 1).max().unwrap_or(1);
    let n_miners = cfg.map_or(seen_miners, |c| c.n_miners.max(seen_miners));
    let params = RunParams {
        delta,
        horizon: merged.horizon(),
        n_miners,
        scores: scores.clone(),
    };
    let mut strat = strategy.build(cfg.and_then(|c| c.params.restart_at_reveal).unwrap_or(false));
    let (tree, outcome) = run_with_strategy(strat.as_mut(), &honest, &adversary, &params)?;

    let pt = format!("strategy={}", strategy.as_str());
    let mut rows = vec![
        ResultRow::point(&pt, "honest_arrivals", honest.len() as f64, 1),
        ResultRow::point(&pt, "adversary_arrivals", adversary.len() as f64, 1),
    ];
    let chain = build_fully_delayed_chain_with(&honest, delta, &scores)?;
    rows.push(ResultRow::point(&pt, "fully_delayed_score", chain.final_score(), 1));
    if let Ok(r) = estimate_lambda_h(&chain, &[]) {
        let hw = z_value(cfg.map_or(0.95, |c| c.confidence)) * r.lambda_h_stderr;
        rows.push(
            ResultRow::point(&pt, "lambda_h", r.lambda_h, r.n_renewals as u64).with_ci(r.lambda_h - hw, r.lambda_h + hw),
        );
    }
    let q = cfg.map_or(delta, |c| c.q());
    if q > 0.0 {
        let data = TrialData::new(&honest, &adversary, &scores, delta)?;
        let tiling = full_tiling(q, delta, merged.horizon());
        let flagged = scan_windows(&tiling, &data)?.into_iter().flatten().count();
        rows.push(ResultRow::point(&pt, "nakamoto_intervals", flagged as f64, tiling.count as u64));
    }
    let tip = tree.block(tree.final_tip());
    rows.push(ResultRow::point(&pt, "final_chain_score", tip.chain_score, 1));
    rows.push(ResultRow::point(&pt, "honest_blocks_in_chain", outcome.final_honest_blocks_in_chain as f64, 1));
    rows.push(ResultRow::point(&pt, "dominated", outcome.dominated_at.is_some() as u8 as f64, 1));
    Ok((rows, tree))
}

/// Entry point of the binary. Errors go to stderr with a nonzero exit code.
pub fn main() -> std::process::ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
