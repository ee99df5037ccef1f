//! Stay-positive probabilities of punctured honest walks and the mirrored
//! adversary walk.

use serde::{Deserialize, Serialize};

use super::montecarlo::run_trials;
use super::rate::pilot_lambda_h;
use super::stats::Proportion;
use crate::arrivals::{
    adversary_score_rate, generate_typed_trace, puncture_trace, validate_specs, BlockTypeSpec, CumulativeScore, Origin,
    ScoreTable,
};
use crate::blocktree::fully_delayed_score;
use crate::error::{Result, SimError};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub probability: Proportion,
    /// Rate the walk is centred on (`λ_h` for honest walks, `λ_a` for the mirror).
    pub rate: f64,
    /// Per-segment drift subtracted from (or added to) each segment score.
    pub threshold: f64,
    /// Mean segment score in the pilot run.
    pub mean_segment_score: f64,
    pub segments_per_trial: usize,
}

/// True if every partial sum of `increments` is strictly positive.
pub fn stays_positive(increments: impl IntoIterator<Item = f64>) -> bool {
    let mut z = 0.0;
    for x in increments {
        z += x;
        if z <= 0.0 {
            return false;
        }
    }
    true
}

/// Default segment length `20/λ_h`.
pub fn default_segment_length(lambda_h: f64) -> f64 {
    20.0 / lambda_h
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(SimError::param(name, format!("must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// Mean of `scores`, or `SegmentTooShort` unless it exceeds `threshold`.
fn require_segment_mean(b: f64, scores: &[f64], threshold: f64) -> Result<f64> {
    let mean = scores.iter().sum::<f64>() / scores.len().max(1) as f64;
    if scores.is_empty() || mean <= threshold {
        return Err(SimError::SegmentTooShort {
            segment_length: b,
            mean_score: mean,
            threshold,
        });
    }
    Ok(mean)
}

fn segment_scores(specs: &[BlockTypeSpec], table: &ScoreTable, delta: f64, b: f64, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    let honest = generate_typed_trace(specs, Origin::Honest, 1, horizon, seed)?;
    let punctured = puncture_trace(&honest, b, delta, |seg| fully_delayed_score(seg, delta, table))?;
    let n = punctured.complete_segments();
    Ok(punctured.segment_scores[..n].to_vec())
}

/// Fraction of trials in which the punctured walk
/// `Z[n] = Σ_{i<n} (S_{B,i} − B(λ_h − ε))` stays strictly positive for every
/// complete segment up to `horizon`.
///
/// `λ_h` comes from a pilot run on an independent stream. The pilot also
/// checks that the mean segment score exceeds the threshold; if not, `B` is
/// too short for the puncture loss and the estimate is refused.
#[allow(clippy::too_many_arguments)]
pub fn estimate_stay_above_probability(
    specs: &[BlockTypeSpec],
    delta: f64,
    b: f64,
    epsilon: f64,
    n_trials: u64,
    horizon: f64,
    seed: u64,
    conf: f64,
) -> Result<WalkEstimate> {
    validate_specs(specs)?;
    check_positive("B", b)?;
    check_positive("horizon", horizon)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(SimError::param("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    let table = ScoreTable::new(specs);
    let pilot_horizon = (2000.0 * (b + delta)).max(horizon);
    let lambda_h = pilot_lambda_h(specs, delta, pilot_horizon, seed)?.lambda_h;
    let threshold = b * (lambda_h - epsilon);

    let pilot = segment_scores(specs, &table, delta, b, pilot_horizon, derive_seed(seed, &[stream::PILOT, 1]))?;
    let mean = require_segment_mean(b, &pilot, threshold)?;

    let segments_per_trial = (horizon / (b + delta)).floor() as usize;
    if segments_per_trial == 0 {
        return Err(SimError::param("horizon", "shorter than one segment plus its puncture"));
    }
    let outcomes = run_trials(n_trials, seed, |_, s| {
        let scores = segment_scores(specs, &table, delta, b, horizon, s)?;
        Ok(stays_positive(scores.into_iter().map(|x| x - threshold)))
    })?;
    let wins = outcomes.iter().filter(|&&w| w).count() as u64;
    Ok(WalkEstimate {
        probability: Proportion::wilson(wins, n_trials, conf),
        rate: lambda_h,
        threshold,
        mean_segment_score: mean,
        segments_per_trial,
    })
}

/// Fraction of trials in which the adversary score stays strictly below
/// `(λ_a + ε)·t` at every segment boundary `t = nB` up to `horizon`. This is
/// the same walk with increments `B(λ_a + ε) − A_i`.
pub fn estimate_adversary_stay_below_probability(
    specs: &[BlockTypeSpec],
    b: f64,
    epsilon: f64,
    n_trials: u64,
    horizon: f64,
    seed: u64,
    conf: f64,
) -> Result<WalkEstimate> {
    validate_specs(specs)?;
    check_positive("B", b)?;
    check_positive("horizon", horizon)?;
    check_positive("epsilon", epsilon)?;
    let table = ScoreTable::new(specs);
    let lambda_a = adversary_score_rate(specs);
    let threshold = b * (lambda_a + epsilon);
    let segments_per_trial = (horizon / b).floor() as usize;
    if segments_per_trial == 0 {
        return Err(SimError::param("horizon", "shorter than one segment"));
    }
    let outcomes = run_trials(n_trials, seed, |_, s| {
        let adv = generate_typed_trace(specs, Origin::Adversary, 1, horizon, s)?;
        let cum = CumulativeScore::new(&adv, &table);
        let increments = (0..segments_per_trial).map(|k| threshold - cum.between(k as f64 * b, (k + 1) as f64 * b));
        Ok(stays_positive(increments))
    })?;
    let wins = outcomes.iter().filter(|&&w| w).count() as u64;
    Ok(WalkEstimate {
        probability: Proportion::wilson(wins, n_trials, conf),
        rate: lambda_a,
        threshold,
        mean_segment_score: lambda_a * b,
        segments_per_trial,
    })
}
