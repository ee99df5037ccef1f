//! Loner intervals, the past/future dominance events, and Nakamoto intervals.

use serde::{Deserialize, Serialize};

use crate::arrivals::{ArrivalTrace, CumulativeScore, ScoreTable};
use crate::blocktree::{build_fully_delayed_chain_with, fresh_growth, FreshCursor, FullyDelayedChain};
use crate::error::{Result, SimError};

/// Arrival data of one trial in the form the detectors consume.
#[derive(Clone, Debug)]
pub struct TrialData {
    pub delta: f64,
    pub horizon: f64,
    pub honest_times: Vec<f64>,
    pub honest_scores: Vec<f64>,
    pub adversary: CumulativeScore,
    chain: FullyDelayedChain,
}

impl TrialData {
    pub fn new(honest: &ArrivalTrace, adversary: &ArrivalTrace, scores: &ScoreTable, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(SimError::param("delta", format!("must be finite and >= 0, got {delta}")));
        }
        if !scores.covers(honest) || !scores.covers(adversary) {
            return Err(SimError::InvalidInput("trace references a block type with no score".into()));
        }
        let chain = build_fully_delayed_chain_with(honest, delta, scores)?;
        Ok(TrialData {
            chain,
            delta,
            horizon: honest.horizon(),
            honest_times: honest.times(),
            honest_scores: honest.scores(scores),
            adversary: CumulativeScore::new(adversary, scores),
        })
    }

    /// Fully-delayed growth of a tree rooted at `a`, over honest arrivals in `(a, b]`.
    ///
    /// Past the first Δ-gap end `g ≥ a` every later arrival sees the whole
    /// fresh tree, so the growth splits as `fresh(a, g) + S(b) − S(g)`.
    pub fn fresh(&self, a: f64, b: f64) -> f64 {
        let gaps = &self.chain.gap_ends;
        match gaps.get(gaps.partition_point(|&g| g < a)) {
            Some(&g) if g <= b => self.fresh_direct(a, g) + self.chain.score_at(b) - self.chain.score_at(g),
            _ => self.fresh_direct(a, b),
        }
    }

    fn fresh_direct(&self, a: f64, b: f64) -> f64 {
        fresh_growth(&self.honest_times, &self.honest_scores, self.delta, a, b)
    }

    pub fn fresh_cursor(&self, a: f64) -> FreshCursor<'_> {
        FreshCursor::new(&self.honest_times, &self.honest_scores, self.delta, a)
    }

    fn honest_in(&self, a: f64, b: f64) -> (usize, usize) {
        let lo = self.honest_times.partition_point(|&x| x < a);
        let hi = self.honest_times.partition_point(|&x| x <= b);
        (lo, hi)
    }
}

/// A window `[τ_q − q, τ_q + q]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NakamotoIntervalQuery {
    pub tau_q: f64,
    pub q: f64,
    pub delta: f64,
}

impl NakamotoIntervalQuery {
    pub fn new(tau_q: f64, q: f64, delta: f64) -> Result<Self> {
        let query = NakamotoIntervalQuery { tau_q, q, delta };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(SimError::InvalidQuery(format!("q must be finite and > 0, got {}", self.q)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(SimError::InvalidQuery(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        if self.tau_q.is_nan() || self.tau_q <= self.q + 2.0 * self.delta {
            return Err(SimError::InvalidQuery(format!(
                "center {} must exceed q + 2Δ = {}",
                self.tau_q,
                self.q + 2.0 * self.delta
            )));
        }
        Ok(())
    }

    /// Last time an adversary block may matter: `τ_q + q + 2Δ`.
    pub fn guard_end(&self) -> f64 {
        self.tau_q + self.q + 2.0 * self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalVerdict {
    pub l_q: bool,
    pub e1: bool,
    pub e2_up_to_horizon: bool,
    pub is_nakamoto_at_horizon: bool,
    /// Honest arrival index of the Nakamoto block.
    pub nakamoto_arrival: Option<usize>,
}

/// The single honest arrival of a loner window, if the three loner clauses hold.
fn loner_block(data: &TrialData, q: &NakamotoIntervalQuery) -> Option<usize> {
    let (t, h, d) = (q.tau_q, q.q, q.delta);
    let (lo, hi) = data.honest_in(t - h, t + h);
    if hi - lo != 1 {
        return None;
    }
    let (wlo, whi) = data.honest_in(t - h - d, t + h + d);
    if whi - wlo != 1 {
        return None;
    }
    if data.adversary.count_closed(t - h - 2.0 * d, t + h + 2.0 * d) != 0 {
        return None;
    }
    Some(lo)
}

/// Past dominance: for every honest block `i` mined before `τ_q − q − 2Δ`,
/// and for genesis at time 0, the fully-delayed growth over
/// `(τ_i + Δ, τ_q − q − Δ]` is at least the adversary growth over `(τ_i, τ_q − q − 2Δ]`.
fn past_dominates(data: &TrialData, q: &NakamotoIntervalQuery) -> bool {
    let d = q.delta;
    let honest_end = q.tau_q - q.q - d;
    let adv_end = q.tau_q - q.q - 2.0 * d;
    let n_before = data.honest_times.partition_point(|&x| x < adv_end);
    let roots = data.honest_times[..n_before].iter().rev().copied().chain(std::iter::once(0.0));
    for tau_i in roots {
        let adv = data.adversary.between(tau_i, adv_end);
        if adv > 0.0 && data.fresh(tau_i + d, honest_end) < adv {
            return false;
        }
    }
    true
}

/// Future dominance up to the horizon: the fully-delayed growth over
/// `(τ_q + q + Δ, t − Δ]` is at least the adversary growth over
/// `(τ_q + q + 2Δ, t]` for every `t` in `(τ_q + q + 2Δ, horizon]`. Only
/// adversary arrival times need checking since the left side never decreases.
fn future_dominates(data: &TrialData, q: &NakamotoIntervalQuery) -> bool {
    let d = q.delta;
    let start = q.guard_end();
    let mut cursor = data.fresh_cursor(q.tau_q + q.q + d);
    let times = data.adversary.times();
    let first = times.partition_point(|&x| x <= start);
    for &t in &times[first..] {
        if t > data.horizon {
            break;
        }
        let adv = data.adversary.between(start, t);
        if cursor.advance_to(t - d) < adv {
            return false;
        }
    }
    true
}

/// Evaluates all three events for one window.
pub fn check_interval(query: &NakamotoIntervalQuery, data: &TrialData) -> Result<IntervalVerdict> {
    query.validate()?;
    if (query.delta - data.delta).abs() > 0.0 {
        return Err(SimError::InvalidQuery(format!("query Δ = {} but trial Δ = {}", query.delta, data.delta)));
    }
    if data.horizon.is_nan() || data.horizon <= query.guard_end() {
        return Err(SimError::InvalidQuery(format!(
            "horizon {} must exceed τ_q + q + 2Δ = {}",
            data.horizon,
            query.guard_end()
        )));
    }
    let loner = loner_block(data, query);
    let l_q = loner.is_some();
    let e1 = past_dominates(data, query);
    let e2 = future_dominates(data, query);
    let is_nakamoto = l_q && e1 && e2;
    Ok(IntervalVerdict {
        l_q,
        e1,
        e2_up_to_horizon: e2,
        is_nakamoto_at_horizon: is_nakamoto,
        nakamoto_arrival: if is_nakamoto { loner } else { None },
    })
}

/// Nakamoto block of one window, evaluating the cheap clauses first.
pub fn nakamoto_block(query: &NakamotoIntervalQuery, data: &TrialData) -> Option<usize> {
    let j = loner_block(data, query)?;
    (future_dominates(data, query) && past_dominates(data, query)).then_some(j)
}

/// Consecutive `2q` windows starting at `start`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowTiling {
    pub start: f64,
    pub q: f64,
    pub delta: f64,
    pub count: usize,
}

impl WindowTiling {
    /// As many windows as fit in `[start, end]`.
    pub fn covering(start: f64, end: f64, q: f64, delta: f64) -> Self {
        let count = ((end - start) / (2.0 * q)).floor().max(0.0) as usize;
        WindowTiling { start, q, delta, count }
    }

    pub fn query(&self, w: usize) -> NakamotoIntervalQuery {
        NakamotoIntervalQuery {
            tau_q: self.start + self.q + 2.0 * self.q * w as f64,
            q: self.q,
            delta: self.delta,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        if self.count == 0 {
            return Ok(());
        }
        self.query(0).validate()?;
        let last = self.query(self.count - 1);
        if horizon.is_nan() || horizon <= last.guard_end() {
            return Err(SimError::InvalidQuery(format!(
                "last window needs horizon > {}, got {horizon}",
                last.guard_end()
            )));
        }
        Ok(())
    }
}

/// Nakamoto block (if any) of every window in the tiling.
pub fn scan_windows(tiling: &WindowTiling, data: &TrialData) -> Result<Vec<Option<usize>>> {
    tiling.validate(data.horizon)?;
    Ok((0..tiling.count).map(|w| nakamoto_block(&tiling.query(w), data)).collect())
}

/// Index of the first Nakamoto window in the tiling.
pub fn first_nakamoto_window(tiling: &WindowTiling, data: &TrialData) -> Result<Option<usize>> {
    tiling.validate(data.horizon)?;
    Ok((0..tiling.count).find(|&w| nakamoto_block(&tiling.query(w), data).is_some()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrivals::{Arrival, Origin, ADVERSARY_MINER};

    fn trace(times: &[f64], origin: Origin, horizon: f64) -> ArrivalTrace {
        let arrivals = times
            .iter()
            .map(|&time| Arrival {
                time,
                type_id: 0,
                origin,
                miner_id: if origin == Origin::Honest { 0 } else { ADVERSARY_MINER },
            })
            .collect();
        ArrivalTrace::from_arrivals(arrivals, horizon, 0).unwrap()
    }

    fn data(h: &[f64], a: &[f64], delta: f64, horizon: f64) -> TrialData {
        TrialData::new(
            &trace(h, Origin::Honest, horizon),
            &trace(a, Origin::Adversary, horizon),
            &ScoreTable::unit(1),
            delta,
        )
        .unwrap()
    }

    #[test]
    fn split_fresh_growth_matches_direct() {
        use crate::arrivals::{generate_typed_trace, BlockTypeSpec};
        let specs = [BlockTypeSpec::new(0, 1.0, 1.2, 0.0).unwrap(), BlockTypeSpec::new(1, 4.0, 0.4, 0.0).unwrap()];
        for seed in 0..20 {
            let honest = generate_typed_trace(&specs, Origin::Honest, 3, 200.0, seed).unwrap();
            let empty = ArrivalTrace::empty(200.0, 0).unwrap();
            let d = TrialData::new(&honest, &empty, &ScoreTable::new(&specs), 0.6).unwrap();
            for k in 0..50 {
                let a = (seed as f64 * 7.3 + k as f64 * 3.1) % 150.0;
                let b = a + (k as f64 * 1.7) % 50.0;
                assert_eq!(d.fresh(a, b), d.fresh_direct(a, b), "seed {seed} ({a}, {b}]");
            }
        }
    }

    #[test]
    fn lone_block_without_adversary_is_nakamoto() {
        let d = data(&[1.0, 3.0, 10.0, 15.0, 18.0], &[], 1.0, 30.0);
        let v = check_interval(&NakamotoIntervalQuery::new(10.0, 1.0, 1.0).unwrap(), &d).unwrap();
        assert!(v.l_q && v.e1 && v.e2_up_to_horizon && v.is_nakamoto_at_horizon);
        assert_eq!(v.nakamoto_arrival, Some(2));
    }

    #[test]
    fn two_blocks_in_window_fail_loner() {
        let d = data(&[1.0, 9.5, 10.5, 18.0], &[], 1.0, 30.0);
        let v = check_interval(&NakamotoIntervalQuery::new(10.0, 1.0, 1.0).unwrap(), &d).unwrap();
        assert!(!v.l_q && !v.is_nakamoto_at_horizon);
        assert_eq!(v.nakamoto_arrival, None);
    }

    #[test]
    fn guard_band_clauses() {
        let q = NakamotoIntervalQuery::new(10.0, 1.0, 1.0).unwrap();
        // Honest block inside the honest guard band.
        assert!(!check_interval(&q, &data(&[8.5, 10.0], &[], 1.0, 30.0)).unwrap().l_q);
        // Adversary block inside the wider adversary guard band.
        assert!(!check_interval(&q, &data(&[10.0], &[7.5], 1.0, 30.0)).unwrap().l_q);
        // Closed boundaries.
        assert!(!check_interval(&q, &data(&[10.0], &[7.0], 1.0, 30.0)).unwrap().l_q);
        assert!(check_interval(&q, &data(&[10.0], &[6.999], 1.0, 30.0)).unwrap().l_q);
    }

    #[test]
    fn early_adversary_burst_breaks_past_dominance() {
        // Honest blocks at 1, 3, 5 grow the delayed chain by 2 after τ_1 + Δ,
        // while three adversary blocks land in (1, 7].
        let h = [1.0, 3.0, 5.0, 12.0, 20.0, 25.0];
        let a = [1.5, 2.0, 2.5];
        let q = NakamotoIntervalQuery::new(12.0, 1.0, 1.0).unwrap();
        let v = check_interval(&q, &data(&h, &a, 1.0, 40.0)).unwrap();
        assert!(v.l_q);
        assert!(!v.e1);
        assert!(v.e2_up_to_horizon);
        assert!(!v.is_nakamoto_at_horizon);
        let v2 = check_interval(&q, &data(&h, &a[..1], 1.0, 40.0)).unwrap();
        assert!(v2.e1 && v2.is_nakamoto_at_horizon);
    }

    #[test]
    fn late_adversary_burst_breaks_future_dominance() {
        let h = [1.0, 10.0, 20.0];
        let a = [14.5, 15.0, 15.5];
        let v = check_interval(&NakamotoIntervalQuery::new(10.0, 1.0, 1.0).unwrap(), &data(&h, &a, 1.0, 30.0)).unwrap();
        assert!(v.l_q && v.e1 && !v.e2_up_to_horizon);
    }

    #[test]
    fn query_preconditions() {
        assert!(matches!(NakamotoIntervalQuery::new(2.0, 1.0, 1.0), Err(SimError::InvalidQuery(_))));
        let q = NakamotoIntervalQuery::new(10.0, 1.0, 1.0).unwrap();
        assert!(check_interval(&q, &data(&[], &[], 1.0, 12.0)).is_err());
        assert!(check_interval(&q, &data(&[], &[], 0.5, 30.0)).is_err());
    }

    #[test]
    fn tiling_geometry() {
        let t = WindowTiling::covering(3.0, 13.0, 1.0, 1.0);
        assert_eq!(t.count, 5);
        assert_eq!(t.query(0).tau_q, 4.0);
        assert_eq!(t.query(4).tau_q, 12.0);
        assert!(t.validate(15.0).is_err());
        assert!(t.validate(15.5).is_ok());
    }
}
