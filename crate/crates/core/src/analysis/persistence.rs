use super::interval::{IntervalVerdict, TrialData};
use crate::blocktree::BlockTree;
use crate::error::{Result, SimError};

/// Whether the Nakamoto block of `verdict` is on every honest miner's
/// fork-choice chain at every moment from `τ_j + Δ` (when all miners are
/// guaranteed to have it) up to `horizon`.
pub fn verify_persistence(tree: &BlockTree, verdict: &IntervalVerdict, data: &TrialData, horizon: f64) -> Result<bool> {
    let j = match (verdict.is_nakamoto_at_horizon, verdict.nakamoto_arrival) {
        (true, Some(j)) => j,
        _ => return Err(SimError::InvalidInput("verdict does not flag a Nakamoto block".into())),
    };
    if tree.honest_block_ids().len() != data.honest_times.len() {
        return Err(SimError::InvalidInput(format!(
            "tree has {} honest blocks but the trace has {} honest arrivals",
            tree.honest_block_ids().len(),
            data.honest_times.len()
        )));
    }
    let block = tree.honest_block(j);
    let tau = tree.block(block).mine_time;
    if tau != data.honest_times[j] {
        return Err(SimError::InvalidInput(format!(
            "honest arrival {j} mined at {tau} in the tree but {} in the trace",
            data.honest_times[j]
        )));
    }
    Ok(persists_from(tree, block, tau + tree.delta(), horizon))
}

/// Whether `block` is an ancestor of every miner's tip throughout `[from, until]`.
pub fn persists_from(tree: &BlockTree, block: usize, from: f64, until: f64) -> bool {
    let mut desc = vec![false; tree.len()];
    desc[block] = true;
    for b in tree.blocks().iter().skip(block + 1) {
        if let Some(p) = b.parent {
            desc[b.id] = desc[p];
        }
    }
    (0..tree.n_miners()).all(|m| {
        desc[tree.tip_at(m, from)]
            && tree
                .tip_log(m)
                .iter()
                .filter(|&&(t, _)| t > from && t <= until)
                .all(|&(_, tip)| desc[tip])
    })
}
