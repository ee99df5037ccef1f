use crate::arrivals::{Arrival, ArrivalTrace, BlockTypeSpec, Origin, ScoreTable};
use crate::error::{Result, SimError};

/// The fictitious honest chain in which every honest block reaches every other
/// miner exactly `Δ` after it is mined.
///
/// Block `j` extends the highest-level block `k` with `τ_k + Δ <= τ_j` (lower
/// index on ties), so its level is `c_j` plus that block's level. The chain
/// does not depend on which miner produced each block.
#[derive(Clone, Debug)]
pub struct FullyDelayedChain {
    delta: f64,
    horizon: f64,
    times: Vec<f64>,
    scores: Vec<f64>,
    levels: Vec<f64>,
    parents: Vec<Option<usize>>,
    /// Arrival indices of the chain that ends at the highest-level block.
    pub blocks: Vec<usize>,
    step_times: Vec<f64>,
    step_scores: Vec<f64>,
    pub gap_ends: Vec<f64>,
    pub renewal_times: Vec<f64>,
    pub renewal_scores: Vec<f64>,
}

impl FullyDelayedChain {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Level (chain score in the fictitious tree) of each honest arrival.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn parent(&self, index: usize) -> Option<usize> {
        self.parents[index]
    }

    /// `S(t)`: highest level among blocks mined at or before `t`.
    pub fn score_at(&self, t: f64) -> f64 {
        let n = self.step_times.partition_point(|&x| x <= t);
        if n == 0 {
            0.0
        } else {
            self.step_scores[n - 1]
        }
    }

    pub fn final_score(&self) -> f64 {
        self.step_scores.last().copied().unwrap_or(0.0)
    }

    /// Times at which `S` jumps, with the value after each jump.
    pub fn steps(&self) -> (&[f64], &[f64]) {
        (&self.step_times, &self.step_scores)
    }
}

/// Computes fully-delayed levels and parents over `times`/`scores`.
pub(crate) fn fd_levels(times: &[f64], scores: &[f64], delta: f64) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = times.len();
    let mut levels = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    let mut visible = 0usize;
    let mut best: Option<(f64, usize)> = None;
    for j in 0..n {
        while visible < j && times[visible] + delta <= times[j] {
            let lv = levels[visible];
            if best.is_none_or(|(b, _)| lv > b) {
                best = Some((lv, visible));
            }
            visible += 1;
        }
        let (base, parent) = match best {
            Some((lv, k)) => (lv, Some(k)),
            None => (0.0, None),
        };
        levels.push(base + scores[j]);
        parents.push(parent);
    }
    (levels, parents)
}

/// Final fully-delayed score of an isolated arrival sequence.
pub fn fully_delayed_score(arrivals: &[Arrival], delta: f64, table: &ScoreTable) -> f64 {
    let times: Vec<f64> = arrivals.iter().map(|a| a.time).collect();
    let scores: Vec<f64> = arrivals.iter().map(|a| table.score(a.type_id)).collect();
    fd_levels(&times, &scores, delta).0.into_iter().fold(0.0, f64::max)
}

pub fn build_fully_delayed_chain(honest: &ArrivalTrace, delta: f64, specs: &[BlockTypeSpec]) -> Result<FullyDelayedChain> {
    build_fully_delayed_chain_with(honest, delta, &ScoreTable::new(specs))
}

pub fn build_fully_delayed_chain_with(honest: &ArrivalTrace, delta: f64, table: &ScoreTable) -> Result<FullyDelayedChain> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(SimError::param("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if honest.arrivals().iter().any(|a| a.origin != Origin::Honest) {
        return Err(SimError::InvalidInput("fully-delayed chain takes honest arrivals only".into()));
    }
    if !table.covers(honest) {
        return Err(SimError::InvalidInput("trace references a block type with no score".into()));
    }
    let times = honest.times();
    let scores = honest.scores(table);
    let (levels, parents) = fd_levels(&times, &scores, delta);

    let mut step_times = Vec::new();
    let mut step_scores = Vec::new();
    let mut top: Option<usize> = None;
    for (j, &lv) in levels.iter().enumerate() {
        if top.is_none_or(|k| lv > levels[k]) {
            top = Some(j);
            step_times.push(times[j]);
            step_scores.push(lv);
        }
    }
    let mut blocks = Vec::new();
    let mut cur = top;
    while let Some(j) = cur {
        blocks.push(j);
        cur = parents[j];
    }
    blocks.reverse();

    let horizon = honest.horizon();
    let mut gap_ends = Vec::new();
    for j in 0..times.len() {
        let end = times[j] + delta;
        let clear = times.get(j + 1).is_none_or(|&next| next > end);
        if clear && end <= horizon {
            gap_ends.push(end);
        }
    }

    let mut chain = FullyDelayedChain {
        delta,
        horizon,
        times,
        scores,
        levels,
        parents,
        blocks,
        step_times,
        step_scores,
        gap_ends,
        renewal_times: Vec::new(),
        renewal_scores: Vec::new(),
    };
    let mut prev_t = 0.0;
    let mut prev_s = 0.0;
    for &g in &chain.gap_ends {
        let s = chain.score_at(g);
        chain.renewal_times.push(g - prev_t);
        chain.renewal_scores.push(s - prev_s);
        prev_t = g;
        prev_s = s;
    }
    Ok(chain)
}

/// Incremental evaluation of the fully-delayed growth of a tree rooted at `a`,
/// that is, using only honest arrivals in `(a, b]`, for nondecreasing `b`.
#[derive(Clone, Debug)]
pub struct FreshCursor<'a> {
    times: &'a [f64],
    scores: &'a [f64],
    delta: f64,
    start: usize,
    next: usize,
    levels: Vec<f64>,
    visible: usize,
    visible_max: f64,
    best: f64,
}

impl<'a> FreshCursor<'a> {
    pub fn new(times: &'a [f64], scores: &'a [f64], delta: f64, a: f64) -> Self {
        let start = times.partition_point(|&x| x <= a);
        FreshCursor {
            times,
            scores,
            delta,
            start,
            next: start,
            levels: Vec::new(),
            visible: start,
            visible_max: 0.0,
            best: 0.0,
        }
    }

    /// Growth over `(a, b]`. Calls must use nondecreasing `b`.
    pub fn advance_to(&mut self, b: f64) -> f64 {
        while self.next < self.times.len() && self.times[self.next] <= b {
            let tj = self.times[self.next];
            while self.visible < self.next && self.times[self.visible] + self.delta <= tj {
                self.visible_max = self.visible_max.max(self.levels[self.visible - self.start]);
                self.visible += 1;
            }
            let lv = self.visible_max + self.scores[self.next];
            self.levels.push(lv);
            self.best = self.best.max(lv);
            self.next += 1;
        }
        self.best
    }

    /// Time of the next arrival that would be absorbed, if any.
    pub fn next_time(&self) -> Option<f64> {
        self.times.get(self.next).copied()
    }
}

/// Fully-delayed growth from a fresh root at `a`, counting honest arrivals in `(a, b]`.
pub fn fresh_growth(times: &[f64], scores: &[f64], delta: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    FreshCursor::new(times, scores, delta, a).advance_to(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrivals::{generate_typed_trace, TypeId};

    fn honest(times: &[f64], horizon: f64) -> ArrivalTrace {
        let arrivals = times
            .iter()
            .map(|&time| Arrival {
                time,
                type_id: 0 as TypeId,
                origin: Origin::Honest,
                miner_id: 0,
            })
            .collect();
        ArrivalTrace::from_arrivals(arrivals, horizon, 0).unwrap()
    }

    fn unit() -> Vec<BlockTypeSpec> {
        vec![BlockTypeSpec::unit(1.0, 0.0)]
    }

    #[test]
    fn single_arrival_ends_a_gap() {
        let chain = build_fully_delayed_chain(&honest(&[3.0], 10.0), 1.0, &unit()).unwrap();
        assert_eq!(chain.blocks, vec![0]);
        assert_eq!(chain.gap_ends, vec![4.0]);
        assert_eq!(chain.score_at(2.9), 0.0);
        assert_eq!(chain.score_at(3.0), 1.0);
    }

    #[test]
    fn concurrent_pair_forms_one_level() {
        let d = 2.0;
        let chain = build_fully_delayed_chain(&honest(&[0.0, d / 2.0, 3.0 * d], 20.0), d, &unit()).unwrap();
        assert_eq!(chain.final_score(), 2.0);
        assert_eq!(chain.levels(), &[1.0, 1.0, 2.0]);
        assert_eq!(chain.blocks, vec![0, 2]);
        assert_eq!(chain.gap_ends, vec![d / 2.0 + d, 4.0 * d]);
    }

    #[test]
    fn score_at_is_right_continuous_step() {
        let chain = build_fully_delayed_chain(&honest(&[1.0, 3.0, 5.0], 10.0), 1.0, &unit()).unwrap();
        assert_eq!(chain.score_at(0.0), 0.0);
        assert_eq!(chain.score_at(3.0), 2.0);
        assert_eq!(chain.score_at(4.99), 2.0);
        assert_eq!(chain.score_at(100.0), 3.0);
    }

    #[test]
    fn weighted_types_take_the_heavier_fork() {
        let arrivals = vec![
            Arrival {
                time: 0.0,
                type_id: 0,
                origin: Origin::Honest,
                miner_id: 0,
            },
            Arrival {
                time: 0.5,
                type_id: 1,
                origin: Origin::Honest,
                miner_id: 1,
            },
            Arrival {
                time: 2.0,
                type_id: 0,
                origin: Origin::Honest,
                miner_id: 0,
            },
        ];
        let trace = ArrivalTrace::from_arrivals(arrivals, 5.0, 0).unwrap();
        let specs = [BlockTypeSpec::unit(1.0, 0.0), BlockTypeSpec::new(1, 3.0, 1.0, 0.0).unwrap()];
        let chain = build_fully_delayed_chain(&trace, 1.0, &specs).unwrap();
        assert_eq!(chain.blocks, vec![1, 2]);
        assert_eq!(chain.final_score(), 4.0);
    }

    #[test]
    fn rejects_adversary_arrivals() {
        let specs = [BlockTypeSpec::unit(1.0, 1.0)];
        let adv = generate_typed_trace(&specs, Origin::Adversary, 1, 10.0, 1).unwrap();
        assert!(build_fully_delayed_chain(&adv, 1.0, &specs).is_err() || adv.is_empty());
    }

    #[test]
    fn fresh_cursor_matches_direct_recomputation() {
        let trace = generate_typed_trace(&unit(), Origin::Honest, 3, 60.0, 21).unwrap();
        let times = trace.times();
        let scores = vec![1.0; times.len()];
        let a = 7.5;
        let mut cur = FreshCursor::new(&times, &scores, 0.8, a);
        for k in 0..120 {
            let b = a + k as f64 * 0.5;
            let direct = {
                let lo = times.partition_point(|&x| x <= a);
                let hi = times.partition_point(|&x| x <= b);
                fd_levels(&times[lo..hi], &scores[lo..hi], 0.8).0.into_iter().fold(0.0, f64::max)
            };
            assert_eq!(cur.advance_to(b), direct, "b = {b}");
        }
    }

    #[test]
    fn fresh_growth_from_zero_equals_score() {
        let trace = generate_typed_trace(&unit(), Origin::Honest, 3, 80.0, 5).unwrap();
        let chain = build_fully_delayed_chain(&trace, 0.7, &unit()).unwrap();
        let scores = vec![1.0; trace.len()];
        for t in [0.0, 10.0, 33.3, 80.0] {
            assert_eq!(fresh_growth(chain.times(), &scores, 0.7, -1.0, t), chain.score_at(t));
        }
    }
}
