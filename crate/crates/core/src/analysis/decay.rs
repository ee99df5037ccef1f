//! Log-linear tail fits for the no-Nakamoto and overtake probabilities.

use serde::{Deserialize, Serialize};

use super::classify::longest_overtake;
use super::interval::{first_nakamoto_window, TrialData, WindowTiling};
use super::montecarlo::run_trials;
use super::stats::{ols, Proportion};
use crate::arrivals::{generate_trial_traces, validate_specs, BlockTypeSpec, ScoreTable, DEFAULT_MINERS};
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Lengths (or `t′` values) that entered the fit.
    pub tprimes: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_ci: (f64, f64),
    /// Estimates at every requested length, including dropped ones.
    pub points: Vec<(f64, Proportion)>,
    /// Lengths whose estimate was exactly 0 and were left out of the fit.
    pub dropped: Vec<f64>,
}

impl DecayFit {
    pub fn decays(&self) -> bool {
        self.slope_ci.1 < 0.0
    }
}

/// Fits `log p = intercept + slope·t` to the nonzero estimates.
pub fn fit_decay(points: Vec<(f64, Proportion)>, conf: f64) -> Result<DecayFit> {
    let mut tprimes = Vec::new();
    let mut log_probs = Vec::new();
    let mut dropped = Vec::new();
    for &(t, p) in &points {
        if p.successes == 0 {
            dropped.push(t);
        } else {
            tprimes.push(t);
            log_probs.push(p.estimate.ln());
        }
    }
    if tprimes.len() < 3 {
        return Err(SimError::InsufficientData(format!(
            "decay fit needs >= 3 nonzero estimates, got {} ({} dropped)",
            tprimes.len(),
            dropped.len()
        )));
    }
    let fit = ols(&tprimes, &log_probs)?;
    Ok(DecayFit {
        slope_ci: fit.slope_ci(conf),
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        tprimes,
        log_probs,
        points,
        dropped,
    })
}

/// Trial layout around the measured stretch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    /// Time before the measured stretch, so that past dominance has history.
    pub lead_in: f64,
    /// Time after it, so that future dominance and overtakes have room.
    pub tail: f64,
    pub n_miners: u32,
    pub conf: f64,
}

impl DecayOptions {
    pub fn no_nakamoto() -> Self {
        DecayOptions {
            lead_in: 20.0,
            tail: 100.0,
            n_miners: DEFAULT_MINERS,
            conf: 0.95,
        }
    }

    /// Lead-in and tail of twice the longest `t′`.
    pub fn overtake(tprimes: &[f64]) -> Self {
        let span = 2.0 * tprimes.iter().copied().fold(0.0, f64::max);
        DecayOptions {
            lead_in: span,
            tail: span,
            n_miners: DEFAULT_MINERS,
            conf: 0.95,
        }
    }
}

fn check_lengths(name: &'static str, xs: &[f64], min_points: usize) -> Result<()> {
    if xs.len() < min_points {
        return Err(SimError::param(name, format!("need at least {min_points} points, got {}", xs.len())));
    }
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::param(name, "must be finite, nonnegative and strictly increasing"));
    }
    Ok(())
}

/// For each length `t`, the probability that none of the `2q` windows tiling
/// `[s, s + t]` is a Nakamoto interval, with `s` the lead-in.
pub fn estimate_no_nakamoto_decay(
    specs: &[BlockTypeSpec],
    delta: f64,
    q: f64,
    interval_lengths: &[f64],
    n_trials: u64,
    seed: u64,
    opts: &DecayOptions,
) -> Result<DecayFit> {
    validate_specs(specs)?;
    check_lengths("interval_lengths", interval_lengths, 4)?;
    if !(q.is_finite() && q > 0.0) {
        return Err(SimError::param("q", format!("must be finite and > 0, got {q}")));
    }
    if !(opts.lead_in > 2.0 * delta && opts.tail > 2.0 * delta) {
        return Err(SimError::param("lead_in", "lead-in and tail must exceed 2Δ"));
    }
    let table = ScoreTable::new(specs);
    let longest = interval_lengths[interval_lengths.len() - 1];
    let start = opts.lead_in;
    let horizon = start + longest + opts.tail;
    let tiling = WindowTiling::covering(start, start + longest, q, delta);
    let counts: Vec<usize> = interval_lengths
        .iter()
        .map(|&t| WindowTiling::covering(start, start + t, q, delta).count)
        .collect();

    let firsts = run_trials(n_trials, seed, |_, s| {
        let (honest, adversary) = generate_trial_traces(specs, opts.n_miners, horizon, s)?;
        let data = TrialData::new(&honest, &adversary, &table, delta)?;
        first_nakamoto_window(&tiling, &data)
    })?;
    let points = interval_lengths
        .iter()
        .zip(&counts)
        .map(|(&t, &c)| {
            let none = firsts.iter().filter(|f| f.is_none_or(|w| w >= c)).count() as u64;
            (t, Proportion::wilson(none, n_trials, opts.conf))
        })
        .collect();
    fit_decay(points, opts.conf)
}

/// For each `t′`, the probability that some honest block mined in a
/// `window`-long stretch is overtaken by an adversary chain spanning at least `t′`.
pub fn estimate_overtake_decay(
    specs: &[BlockTypeSpec],
    delta: f64,
    window: f64,
    tprimes: &[f64],
    n_trials: u64,
    seed: u64,
    opts: &DecayOptions,
) -> Result<DecayFit> {
    validate_specs(specs)?;
    check_lengths("tprimes", tprimes, 4)?;
    if !(window.is_finite() && window > 0.0) {
        return Err(SimError::param("window", format!("must be finite and > 0, got {window}")));
    }
    let table = ScoreTable::new(specs);
    let from = opts.lead_in;
    let to = from + window;
    let horizon = to + opts.tail;
    let longest = run_trials(n_trials, seed, |_, s| {
        let (honest, adversary) = generate_trial_traces(specs, opts.n_miners, horizon, s)?;
        let data = TrialData::new(&honest, &adversary, &table, delta)?;
        Ok(longest_overtake(&data, from, to))
    })?;
    let points = tprimes
        .iter()
        .map(|&t| {
            let hits = longest.iter().filter(|l| l.is_some_and(|l| l >= t)).count() as u64;
            (t, Proportion::wilson(hits, n_trials, opts.conf))
        })
        .collect();
    fit_decay(points, opts.conf)
}
