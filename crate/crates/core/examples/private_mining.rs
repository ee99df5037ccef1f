//! The private-mining attack below and above the honest growth rate, and a
//! persistence check of Nakamoto blocks against it.

use nakamoto_sim::adversary::{run_with_strategy, PrivateMining, RunParams, StrategyKind};
use nakamoto_sim::analysis::{phase_diagram, run_persistence_check};
use nakamoto_sim::arrivals::{generate_trial_traces, BlockTypeSpec, ScoreTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [BlockTypeSpec::unit(1.0, 0.7)];
    let table = ScoreTable::new(&specs);
    let (honest, adversary) = generate_trial_traces(&specs, 10, 2000.0, 3)?;
    let params = RunParams { delta: 1.0, horizon: 2000.0, n_miners: 10, scores: table };
    let (tree, outcome) = run_with_strategy(&mut PrivateMining::new(false), &honest, &adversary, &params)?;
    println!(
        "b=0.7 (above lambda_h=0.5): {} blocks, {} reveals, dominated at {:?}, {} honest blocks survive",
        tree.len(),
        outcome.reveal_times.len(),
        outcome.dominated_at,
        outcome.final_honest_blocks_in_chain
    );

    for p in phase_diagram(1.0, 1.0, &[0.5, 0.9, 1.1, 2.0], 5000.0, 100, 4, 10, false, 0.95)? {
        println!(
            "ratio {:>3}: success {:.2}  dominated {:.2}  zero survivors {:.2}",
            p.ratio, p.stats.success.estimate, p.stats.dominated.estimate, p.stats.zero_survivors.estimate
        );
    }

    let weak = [BlockTypeSpec::unit(1.0, 0.3)];
    for kind in [StrategyKind::PrivateMining, StrategyKind::FullDelay] {
        let r = run_persistence_check(&weak, 0.5, 0.5, kind, 500, 300.0, 8, 10, false)?;
        println!("{:>14}: {} flagged blocks, {} left the chain", kind.as_str(), r.flagged_intervals, r.violations);
    }
    Ok(())
}
