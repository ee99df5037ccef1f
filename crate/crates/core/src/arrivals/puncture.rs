use super::{Arrival, ArrivalTrace};
use crate::error::{Result, SimError};

/// A trace with every `Δ`-long stretch after each `B`-long segment deleted.
#[derive(Clone, Debug)]
pub struct PuncturedTrace {
    pub base: ArrivalTrace,
    pub segment_length: f64,
    pub delay: f64,
    pub kept_arrivals: Vec<Arrival>,
    /// Score of segment `i` computed from its kept arrivals alone.
    pub segment_scores: Vec<f64>,
    /// Running sums of `segment_scores`.
    pub cumulative_scores: Vec<f64>,
}

impl PuncturedTrace {
    pub fn period(&self) -> f64 {
        self.segment_length + self.delay
    }

    /// Segments whose pass region and trailing puncture both end by the horizon.
    pub fn complete_segments(&self) -> usize {
        (self.base.horizon() / self.period()).floor() as usize
    }

    pub fn segment_start(&self, k: usize) -> f64 {
        k as f64 * self.period()
    }
}

/// Keeps arrivals in `[k(B+Δ), k(B+Δ)+B)` for every `k` and scores each
/// segment with `score_segment`, normally the fully-delayed final score.
pub fn puncture_trace<F>(honest: &ArrivalTrace, b: f64, delta: f64, score_segment: F) -> Result<PuncturedTrace>
where
    F: Fn(&[Arrival]) -> f64,
{
    if !(b.is_finite() && b > 0.0) {
        return Err(SimError::param("B", format!("segment length must be finite and > 0, got {b}")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(SimError::param("delta", format!("must be finite and >= 0, got {delta}")));
    }
    let period = b + delta;
    let n_segments = (honest.horizon() / period).ceil().max(1.0) as usize;

    let mut buckets: Vec<Vec<Arrival>> = vec![Vec::new(); n_segments];
    for a in honest.arrivals() {
        let k = (a.time / period).floor() as usize;
        let start = k as f64 * period;
        if a.time >= start && a.time < start + b && k < n_segments {
            buckets[k].push(*a);
        }
    }

    let segment_scores: Vec<f64> = buckets.iter().map(|seg| if seg.is_empty() { 0.0 } else { score_segment(seg) }).collect();
    let cumulative_scores = segment_scores
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    let kept_arrivals = buckets.into_iter().flatten().collect();

    Ok(PuncturedTrace {
        base: honest.clone(),
        segment_length: b,
        delay: delta,
        kept_arrivals,
        segment_scores,
        cumulative_scores,
    })
}
