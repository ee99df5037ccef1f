//! Monte Carlo estimates of Nakamoto-interval probabilities and the
//! persistence check of flagged blocks under shipped attacks.

use serde::{Deserialize, Serialize};

use super::interval::{check_interval, scan_windows, NakamotoIntervalQuery, TrialData, WindowTiling};
use super::montecarlo::run_trials;
use super::persistence::persists_from;
use super::stats::{z_value, Proportion};
use crate::adversary::{run_with_strategy, RunParams, StrategyKind};
use crate::arrivals::{generate_trial_traces, validate_specs, BlockTypeSpec, ScoreTable};
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NakamotoEstimate {
    pub tau_q: f64,
    pub joint: Proportion,
    pub l_q: Proportion,
    pub e1: Proportion,
    pub e2: Proportion,
    /// `p̂_L · p̂_E1 · p̂_E2`.
    pub product: f64,
    /// Delta-method half-width of `product`, treating the marginals as independent.
    pub product_half_width: f64,
}

impl NakamotoEstimate {
    pub fn independence_gap(&self) -> f64 {
        (self.joint.estimate - self.product).abs()
    }

    /// Whether the joint estimate and the product of marginals agree within
    /// the sum of their half-widths.
    pub fn factorizes(&self) -> bool {
        self.independence_gap() <= self.joint.half_width() + self.product_half_width
    }
}

fn product_half_width(parts: &[Proportion], conf: f64) -> f64 {
    let var: f64 = (0..parts.len())
        .map(|k| {
            let others: f64 = parts.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, p)| p.estimate).product();
            let p = &parts[k];
            let n = p.n as f64;
            // The binomial variance vanishes at 0 and 1; fall back to 1/n² there.
            let v = (p.estimate * (1.0 - p.estimate) / n).max(1.0 / (n * n));
            others * others * v
        })
        .sum();
    z_value(conf) * var.sqrt()
}

/// Joint and marginal frequencies of `L_q`, `E1` and `E2` for a window
/// centred at `horizon / 3`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_nakamoto_probability(
    specs: &[BlockTypeSpec],
    delta: f64,
    q: f64,
    n_trials: u64,
    horizon: f64,
    seed: u64,
    n_miners: u32,
    conf: f64,
) -> Result<NakamotoEstimate> {
    estimate_nakamoto_probability_at(specs, delta, q, horizon / 3.0, n_trials, horizon, seed, n_miners, conf)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_nakamoto_probability_at(
    specs: &[BlockTypeSpec],
    delta: f64,
    q: f64,
    tau_q: f64,
    n_trials: u64,
    horizon: f64,
    seed: u64,
    n_miners: u32,
    conf: f64,
) -> Result<NakamotoEstimate> {
    validate_specs(specs)?;
    let query = NakamotoIntervalQuery::new(tau_q, q, delta)?;
    if horizon.is_nan() || horizon <= query.guard_end() {
        return Err(SimError::InvalidQuery(format!(
            "horizon {horizon} must exceed τ_q + q + 2Δ = {}",
            query.guard_end()
        )));
    }
    let table = ScoreTable::new(specs);
    let verdicts = run_trials(n_trials, seed, |_, s| {
        let (honest, adversary) = generate_trial_traces(specs, n_miners, horizon, s)?;
        let data = TrialData::new(&honest, &adversary, &table, delta)?;
        check_interval(&query, &data)
    })?;
    let count = |f: fn(&super::interval::IntervalVerdict) -> bool| verdicts.iter().filter(|v| f(v)).count() as u64;
    let joint = Proportion::wilson(count(|v| v.is_nakamoto_at_horizon), n_trials, conf);
    let l_q = Proportion::wilson(count(|v| v.l_q), n_trials, conf);
    let e1 = Proportion::wilson(count(|v| v.e1), n_trials, conf);
    let e2 = Proportion::wilson(count(|v| v.e2_up_to_horizon), n_trials, conf);
    let parts = [l_q, e1, e2];
    Ok(NakamotoEstimate {
        tau_q,
        joint,
        l_q,
        e1,
        e2,
        product: l_q.estimate * e1.estimate * e2.estimate,
        product_half_width: product_half_width(&parts, conf),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub strategy: StrategyKind,
    pub n_trials: u64,
    /// Nakamoto windows found over all trials.
    pub flagged_intervals: u64,
    pub trials_with_flag: u64,
    /// Flagged blocks that left some miner's chain before the horizon.
    pub violations: u64,
    /// `(trial, honest arrival index)` of the first violation.
    pub first_violation: Option<(u64, usize)>,
}

/// Tiling of all `2q` windows whose guard bands fit inside `(0, horizon)`.
pub fn full_tiling(q: f64, delta: f64, horizon: f64) -> WindowTiling {
    WindowTiling::covering(2.0 * delta + q, horizon - 2.0 * delta - q, q, delta)
}

/// Plays `strategy` in every trial and checks that each block flagged by a
/// Nakamoto window stays on every miner's chain from `τ_j + Δ` to the horizon.
#[allow(clippy::too_many_arguments)]
pub fn run_persistence_check(
    specs: &[BlockTypeSpec],
    delta: f64,
    q: f64,
    strategy: StrategyKind,
    n_trials: u64,
    horizon: f64,
    seed: u64,
    n_miners: u32,
    restart_at_reveal: bool,
) -> Result<PersistenceReport> {
    validate_specs(specs)?;
    let table = ScoreTable::new(specs);
    let tiling = full_tiling(q, delta, horizon);
    let params = RunParams {
        delta,
        horizon,
        n_miners,
        scores: table.clone(),
    };
    let per_trial = run_trials(n_trials, seed, |_, s| {
        let (honest, adversary) = generate_trial_traces(specs, n_miners, horizon, s)?;
        let data = TrialData::new(&honest, &adversary, &table, delta)?;
        let flagged: Vec<usize> = scan_windows(&tiling, &data)?.into_iter().flatten().collect();
        if flagged.is_empty() {
            return Ok((0u64, None));
        }
        let mut strat = strategy.build(restart_at_reveal);
        let (tree, _) = run_with_strategy(strat.as_mut(), &honest, &adversary, &params)?;
        let failed = flagged.iter().copied().find(|&j| {
            let id = tree.honest_block(j);
            !persists_from(&tree, id, tree.block(id).mine_time + delta, horizon)
        });
        Ok((flagged.len() as u64, failed))
    })?;
    let mut report = PersistenceReport {
        strategy,
        n_trials,
        flagged_intervals: 0,
        trials_with_flag: 0,
        violations: 0,
        first_violation: None,
    };
    for (i, (n, failed)) in per_trial.into_iter().enumerate() {
        report.flagged_intervals += n;
        report.trials_with_flag += (n > 0) as u64;
        if let Some(j) = failed {
            report.violations += 1;
            report.first_violation.get_or_insert((i as u64, j));
        }
    }
    Ok(report)
}
