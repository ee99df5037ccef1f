//! Attack strategies and the runner that plays them against honest miners.

mod private_mining;
mod strategies;

pub use crate::blocktree::{AttackStrategy, Delays, Release, RunParams, SimState};
pub use private_mining::{private_mining_on, run_private_mining};
pub use strategies::{FullDelay, NullStrategy, PrivateMining, RandomStrategy};

use serde::{Deserialize, Serialize};

use crate::arrivals::ArrivalTrace;
use crate::blocktree::{run_engine, BlockTree, GENESIS};
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    /// First time some honest miner switched to an adversary block whose chain
    /// does not contain that miner's previous tip.
    pub dominated_at: Option<f64>,
    pub reveal_times: Vec<f64>,
    /// Honest blocks on the final chain at the horizon.
    pub final_honest_blocks_in_chain: usize,
    /// Mine time of the oldest honest block on the final chain.
    pub earliest_surviving_honest: Option<f64>,
}

impl AttackOutcome {
    /// No honest block mined before `t` is on the final chain.
    pub fn erased_before(&self, t: f64) -> bool {
        self.earliest_surviving_honest.is_none_or(|e| e >= t)
    }
}

/// Shipped strategies, selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    None,
    FullDelay,
    PrivateMining,
}

impl StrategyKind {
    pub fn build(self, restart_at_reveal: bool) -> Box<dyn AttackStrategy> {
        match self {
            StrategyKind::None => Box::new(NullStrategy),
            StrategyKind::FullDelay => Box::<FullDelay>::default(),
            StrategyKind::PrivateMining => Box::new(PrivateMining::new(restart_at_reveal)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::FullDelay => "full-delay",
            StrategyKind::PrivateMining => "private-mining",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(StrategyKind::None),
            "full-delay" => Ok(StrategyKind::FullDelay),
            "private-mining" => Ok(StrategyKind::PrivateMining),
            other => Err(SimError::param("strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

/// Plays `strategy` against the honest miners and summarises the attack.
pub fn run_with_strategy(
    strategy: &mut dyn AttackStrategy,
    honest: &ArrivalTrace,
    adversary: &ArrivalTrace,
    params: &RunParams,
) -> Result<(BlockTree, AttackOutcome)> {
    let run = run_engine(strategy, honest, adversary, params)?;
    check_schedule_legality(&run.tree)?;
    let outcome = outcome_of(&run.tree, run.dominated_at, run.reveal_times);
    Ok((run.tree, outcome))
}

fn outcome_of(tree: &BlockTree, dominated_at: Option<f64>, reveal_times: Vec<f64>) -> AttackOutcome {
    let mut surviving = 0;
    let mut earliest = None;
    for b in tree.ancestors(tree.final_tip()).filter(|b| b.is_honest()) {
        surviving += 1;
        earliest = Some(b.mine_time);
    }
    AttackOutcome {
        dominated_at,
        reveal_times,
        final_honest_blocks_in_chain: surviving,
        earliest_surviving_honest: earliest,
    }
}

/// Verifies the realised delays: every miner sees every broadcast block within
/// `Δ` of its first broadcast, and honest blocks are broadcast when mined.
pub fn check_schedule_legality(tree: &BlockTree) -> Result<()> {
    let delta = tree.delta();
    let horizon = tree.horizon();
    let slack = 1e-9 * (1.0 + horizon);
    for b in tree.blocks().iter().filter(|b| b.id != GENESIS) {
        let release = tree.release_time(b.id);
        if b.is_honest() && release != b.mine_time {
            return Err(SimError::InvalidSchedule(format!("honest block {} broadcast late", b.id)));
        }
        for m in 0..tree.n_miners() {
            let seen = tree.visible_time(b.id, m);
            if seen < b.mine_time || seen < release {
                return Err(SimError::InvalidSchedule(format!("block {} seen by miner {m} before broadcast", b.id)));
            }
            let due = release + delta;
            let late = if seen.is_finite() { seen > due + slack } else { due <= horizon };
            if late {
                return Err(SimError::InvalidSchedule(format!(
                    "block {} reached miner {m} at {seen}, more than Δ after broadcast at {release}",
                    b.id
                )));
            }
            if b.is_honest() && b.miner_id as usize == m && seen != b.mine_time {
                return Err(SimError::InvalidSchedule(format!("block {} not visible to its own miner", b.id)));
            }
        }
    }
    Ok(())
}
