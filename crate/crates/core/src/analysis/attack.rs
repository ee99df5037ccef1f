//! Success rates of the private-mining attack across rate ratios.

use serde::{Deserialize, Serialize};

use super::montecarlo::run_trials;
use super::rate::single_type_lambda_h;
use super::stats::Proportion;
use crate::adversary::{private_mining_on, AttackOutcome};
use crate::arrivals::{generate_trial_traces, validate_specs, BlockTypeSpec, ScoreTable};
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackStats {
    /// No honest block mined in the first half of the horizon is on the final chain.
    pub success: Proportion,
    /// Some honest miner adopted a revealed adversary chain that dropped its tip.
    pub dominated: Proportion,
    /// The final chain holds no honest block at all.
    pub zero_survivors: Proportion,
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_attack_success(
    specs: &[BlockTypeSpec],
    delta: f64,
    horizon: f64,
    n_trials: u64,
    seed: u64,
    n_miners: u32,
    restart_at_reveal: bool,
    conf: f64,
) -> Result<AttackStats> {
    validate_specs(specs)?;
    let table = ScoreTable::new(specs);
    let outcomes = run_trials(n_trials, seed, |_, s| {
        let (honest, adversary) = generate_trial_traces(specs, n_miners, horizon, s)?;
        private_mining_on(&honest, &adversary, delta, &table, n_miners, restart_at_reveal)
    })?;
    let count = |f: &dyn Fn(&AttackOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    Ok(AttackStats {
        success: Proportion::wilson(count(&|o| o.erased_before(horizon / 2.0)), n_trials, conf),
        dominated: Proportion::wilson(count(&|o| o.dominated_at.is_some()), n_trials, conf),
        zero_survivors: Proportion::wilson(count(&|o| o.final_honest_blocks_in_chain == 0), n_trials, conf),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub ratio: f64,
    pub adversary_rate: f64,
    pub stats: AttackStats,
}

/// Attack statistics for a unit-score type with honest rate `h` and
/// adversary rate `ratio · λ_h` at each ratio. Every point reuses the same
/// trial seeds, so the honest traces are shared across the sweep.
#[allow(clippy::too_many_arguments)]
pub fn phase_diagram(
    h: f64,
    delta: f64,
    ratios: &[f64],
    horizon: f64,
    n_trials: u64,
    seed: u64,
    n_miners: u32,
    restart_at_reveal: bool,
    conf: f64,
) -> Result<Vec<PhasePoint>> {
    if ratios.is_empty() {
        return Err(SimError::param("ratios", "sweep grid is empty"));
    }
    let lambda_h = single_type_lambda_h(1.0, h, delta);
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio.is_finite() && ratio >= 0.0) {
                return Err(SimError::param("ratios", format!("ratio must be finite and >= 0, got {ratio}")));
            }
            let b = ratio * lambda_h;
            let specs = [BlockTypeSpec::new(0, 1.0, h, b)?];
            Ok(PhasePoint {
                ratio,
                adversary_rate: b,
                stats: estimate_attack_success(&specs, delta, horizon, n_trials, seed, n_miners, restart_at_reveal, conf)?,
            })
        })
        .collect()
}

/// Whether `values` never decrease by more than the sum of neighbouring
/// half-widths, the CI-aware reading of "nondecreasing".
pub fn nondecreasing_within_ci(points: &[Proportion]) -> bool {
    points
        .windows(2)
        .all(|w| w[1].estimate >= w[0].estimate - (w[0].half_width() + w[1].half_width()))
}
