//! Renewal-based estimation of the fully-delayed growth rate.

use serde::{Deserialize, Serialize};

use super::stats::ratio_estimate;
use crate::arrivals::{adversary_score_rate, generate_typed_trace, validate_specs, BlockTypeSpec, Origin};
use crate::blocktree::{build_fully_delayed_chain, FullyDelayedChain};
use crate::error::{Result, SimError};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub lambda_h: f64,
    pub lambda_a: f64,
    pub lambda_h_stderr: f64,
    /// Renewal segments used, segment 0 excluded.
    pub n_renewals: usize,
}

/// `λ_h` from the renewal segments of `chain`, and `λ_a = Σ c_i b_i` from `specs`.
pub fn estimate_lambda_h(chain: &FullyDelayedChain, specs: &[BlockTypeSpec]) -> Result<RateSummary> {
    let mut summary = estimate_from_renewals(&chain.renewal_times, &chain.renewal_scores)?;
    summary.lambda_a = adversary_score_rate(specs);
    Ok(summary)
}

/// Ratio estimate over renewal segments `1..n`. Segment 0 starts at time 0
/// rather than at a renewal point and is dropped.
pub fn estimate_from_renewals(times: &[f64], scores: &[f64]) -> Result<RateSummary> {
    if times.len() != scores.len() {
        return Err(SimError::InvalidInput("renewal times and scores differ in length".into()));
    }
    if times.len() < 2 {
        return Err(SimError::InsufficientData(format!(
            "need at least 2 renewal segments, got {}",
            times.len()
        )));
    }
    let (lambda_h, se) = ratio_estimate(&scores[1..], &times[1..])?;
    Ok(RateSummary {
        lambda_h,
        lambda_a: 0.0,
        lambda_h_stderr: if se.is_nan() { 0.0 } else { se },
        n_renewals: times.len() - 1,
    })
}

/// Growth rate of a single block type with score `c`, honest rate `h` and delay `Δ`.
pub fn single_type_lambda_h(score: f64, h: f64, delta: f64) -> f64 {
    score * h / (1.0 + delta * h)
}

/// Estimates `λ_h` from one long honest trace drawn on the pilot stream.
pub fn pilot_lambda_h(specs: &[BlockTypeSpec], delta: f64, horizon: f64, seed: u64) -> Result<RateSummary> {
    validate_specs(specs)?;
    let honest = generate_typed_trace(specs, Origin::Honest, 1, horizon, derive_seed(seed, &[stream::PILOT]))?;
    let chain = build_fully_delayed_chain(&honest, delta, specs)?;
    estimate_lambda_h(&chain, specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_segments() {
        let r = estimate_from_renewals(&[5.0, 2.0, 2.0, 2.0], &[9.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.lambda_h, 0.5);
        assert_eq!(r.lambda_h_stderr, 0.0);
        assert_eq!(r.n_renewals, 3);
    }

    #[test]
    fn too_few_renewals() {
        assert!(matches!(estimate_from_renewals(&[1.0], &[1.0]), Err(SimError::InsufficientData(_))));
    }

    #[test]
    fn pilot_matches_closed_form() {
        let specs = [BlockTypeSpec::unit(1.0, 0.25)];
        let r = pilot_lambda_h(&specs, 1.0, 2e5, 3).unwrap();
        assert!((r.lambda_h - 0.5).abs() < 4.0 * r.lambda_h_stderr, "{r:?}");
        assert_eq!(r.lambda_a, 0.25);
    }
}
