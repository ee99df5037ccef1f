//! Captures a trial's arrivals as text, replays it under each strategy and
//! dumps the resulting block tree.

use nakamoto_sim::adversary::{run_with_strategy, RunParams, StrategyKind};
use nakamoto_sim::arrivals::{generate_trial_traces, read_trace, write_trace, BlockTypeSpec, ScoreTable};
use nakamoto_sim::blocktree::{canonical_score, write_tree, View};
use nakamoto_sim::cli::split_trace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [BlockTypeSpec::unit(1.0, 0.4)];
    let (honest, adversary) = generate_trial_traces(&specs, 4, 20.0, 11)?;
    let mut text = Vec::new();
    write_trace(&honest.merged(&adversary)?, &mut text)?;
    println!("{}", String::from_utf8_lossy(&text).lines().take(6).collect::<Vec<_>>().join("\n"));

    let (honest, adversary) = split_trace(&read_trace(text.as_slice())?)?;
    let params = RunParams { delta: 1.0, horizon: 20.0, n_miners: 4, scores: ScoreTable::new(&specs) };
    for kind in [StrategyKind::None, StrategyKind::FullDelay, StrategyKind::PrivateMining] {
        let (tree, outcome) = run_with_strategy(kind.build(false).as_mut(), &honest, &adversary, &params)?;
        println!(
            "{:>14}: canonical score {} at the horizon, {} honest blocks on the final chain",
            kind.as_str(),
            canonical_score(&tree, 20.0, View::All),
            outcome.final_honest_blocks_in_chain
        );
        if kind == StrategyKind::PrivateMining {
            write_tree(&tree, std::io::stdout().lock())?;
        }
    }
    Ok(())
}
