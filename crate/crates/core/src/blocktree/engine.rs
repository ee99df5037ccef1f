//! Event-driven construction of the mother tree under a pluggable adversary.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{better, Block, BlockId, BlockTree, GENESIS};
use crate::arrivals::{Arrival, ArrivalTrace, Origin, ScoreTable};
use crate::error::{Result, SimError};

/// Per-miner delays attached to a release, measured from the release time.
#[derive(Clone, Debug, PartialEq)]
pub enum Delays {
    Uniform(f64),
    PerMiner(Vec<f64>),
}

/// First broadcast of an adversary block at time `at`.
#[derive(Clone, Debug, PartialEq)]
pub struct Release {
    pub block: BlockId,
    pub at: f64,
    pub delays: Delays,
}

/// An adversary policy. Every call sees only the state built from past events.
pub trait AttackStrategy {
    fn name(&self) -> &str;

    /// Fills the delay, in `[0, Δ]`, with which each honest miner receives
    /// honest `block`. The miner's own entry is ignored.
    fn honest_delays(&mut self, state: &SimState, block: BlockId, delays: &mut [f64]);

    /// Parent for the block of adversary arrival `index`; `None` discards the arrival.
    fn adversary_parent(&mut self, state: &SimState, arrival: &Arrival, index: usize) -> Option<BlockId>;

    /// Called after each arrival has been processed.
    fn after_event(&mut self, state: &SimState, releases: &mut Vec<Release>);
}

#[derive(Clone, Debug)]
pub struct RunParams {
    pub delta: f64,
    pub horizon: f64,
    pub n_miners: u32,
    pub scores: ScoreTable,
}

#[derive(Clone, Copy, Debug)]
enum Recipients {
    One(usize),
    AllBut(usize),
    All,
}

#[derive(Clone, Copy, Debug)]
struct Delivery {
    time: f64,
    seq: u64,
    block: BlockId,
    to: Recipients,
}

impl PartialEq for Delivery {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Delivery {}

impl PartialOrd for Delivery {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Delivery {
    // Reversed so the max-heap pops the earliest delivery first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Tree under construction plus the bookkeeping strategies may consult.
pub struct SimState {
    tree: BlockTree,
    best: Vec<BlockId>,
    overall_best: BlockId,
    max_honest: BlockId,
    now: f64,
    pending: BinaryHeap<Delivery>,
    seq: u64,
    dominated_at: Option<f64>,
    reveal_times: Vec<f64>,
}

impl SimState {
    fn new(n_miners: usize, delta: f64, horizon: f64) -> Self {
        SimState {
            tree: BlockTree::new(n_miners, delta, horizon),
            best: vec![GENESIS; n_miners],
            overall_best: GENESIS,
            max_honest: GENESIS,
            now: 0.0,
            pending: BinaryHeap::new(),
            seq: 0,
            dominated_at: None,
            reveal_times: Vec::new(),
        }
    }

    pub fn tree(&self) -> &BlockTree {
        &self.tree
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn delta(&self) -> f64 {
        self.tree.delta
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.tree.blocks[id]
    }

    /// Current fork-choice tip of honest miner `m`.
    pub fn best_of(&self, m: usize) -> BlockId {
        self.best[m]
    }

    pub fn miner_tips(&self) -> &[BlockId] {
        &self.best
    }

    /// Highest-score block mined so far, released or not.
    pub fn overall_best(&self) -> BlockId {
        self.overall_best
    }

    /// Highest-score honest block mined so far (genesis if none).
    pub fn max_honest(&self) -> BlockId {
        self.max_honest
    }

    pub fn is_released(&self, b: BlockId) -> bool {
        self.tree.release_times[b].is_finite()
    }

    fn push(&mut self, time: f64, block: BlockId, to: Recipients) {
        self.seq += 1;
        self.pending.push(Delivery {
            time,
            seq: self.seq,
            block,
            to,
        });
    }

    fn see(&mut self, block: BlockId, m: usize, time: f64) {
        let n = self.tree.n_miners;
        let slot = &mut self.tree.visibility[block * n + m];
        if time >= *slot {
            return;
        }
        *slot = time;
        let old = self.best[m];
        if better(&self.tree.blocks, block, old) {
            if self.dominated_at.is_none() && self.tree.blocks[block].is_adversary() && !self.tree.is_ancestor(old, block) {
                self.dominated_at = Some(time);
            }
            self.best[m] = block;
            self.tree.tip_logs[m].push((time, block));
        }
    }

    fn deliver_until(&mut self, t: f64) {
        while let Some(d) = self.pending.peek().copied() {
            if d.time > t {
                break;
            }
            self.pending.pop();
            match d.to {
                Recipients::One(m) => self.see(d.block, m, d.time),
                Recipients::AllBut(skip) => {
                    for m in (0..self.tree.n_miners).filter(|&m| m != skip) {
                        self.see(d.block, m, d.time);
                    }
                }
                Recipients::All => {
                    for m in 0..self.tree.n_miners {
                        self.see(d.block, m, d.time);
                    }
                }
            }
        }
    }

    fn add_block(&mut self, parent: BlockId, arrival: &Arrival, index: usize, score: f64) -> BlockId {
        let id = self.tree.blocks.len();
        let p = &self.tree.blocks[parent];
        let block = Block {
            id,
            parent: Some(parent),
            type_id: Some(arrival.type_id),
            origin: Some(arrival.origin),
            miner_id: arrival.miner_id,
            arrival_index: Some(index),
            mine_time: arrival.time,
            chain_score: p.chain_score + score,
            height: p.height + 1,
        };
        self.tree.blocks.push(block);
        self.tree.visibility.extend(std::iter::repeat_n(f64::INFINITY, self.tree.n_miners));
        self.tree.release_times.push(f64::INFINITY);
        if better(&self.tree.blocks, id, self.overall_best) {
            self.overall_best = id;
        }
        if arrival.origin == Origin::Honest && better(&self.tree.blocks, id, self.max_honest) {
            self.max_honest = id;
        }
        id
    }

    fn release(&mut self, r: Release) -> Result<()> {
        let delta = self.tree.delta;
        let n = self.tree.n_miners;
        if r.block >= self.tree.blocks.len() || !self.tree.blocks[r.block].is_adversary() {
            return Err(SimError::InvalidSchedule(format!("block {} is not an adversary block", r.block)));
        }
        if self.is_released(r.block) {
            return Err(SimError::InvalidSchedule(format!("block {} released twice", r.block)));
        }
        if r.at.is_nan() || r.at < self.now || r.at < self.tree.blocks[r.block].mine_time {
            return Err(SimError::InvalidSchedule(format!(
                "release of block {} at {} precedes the current time {}",
                r.block, r.at, self.now
            )));
        }
        if r.at.is_infinite() {
            return Ok(());
        }
        let ok = |d: f64| (0.0..=delta).contains(&d);
        match &r.delays {
            Delays::Uniform(d) => {
                if !ok(*d) {
                    return Err(SimError::InvalidSchedule(format!("delay {d} outside [0, {delta}]")));
                }
                self.push(r.at + d, r.block, Recipients::All);
            }
            Delays::PerMiner(ds) => {
                if ds.len() != n {
                    return Err(SimError::InvalidSchedule(format!("expected {n} per-miner delays, got {}", ds.len())));
                }
                if let Some(d) = ds.iter().find(|&&d| !ok(d)) {
                    return Err(SimError::InvalidSchedule(format!("delay {d} outside [0, {delta}]")));
                }
                for (m, d) in ds.iter().enumerate() {
                    self.push(r.at + d, r.block, Recipients::One(m));
                }
            }
        }
        self.tree.release_times[r.block] = r.at;
        if self.reveal_times.last() != Some(&r.at) {
            self.reveal_times.push(r.at);
        }
        Ok(())
    }
}

/// Result of one engine run.
pub struct EngineRun {
    pub tree: BlockTree,
    pub dominated_at: Option<f64>,
    pub reveal_times: Vec<f64>,
}

/// Runs `strategy` over the merged honest and adversary arrivals.
///
/// Per arrival: deliveries due by its time are applied, the block is mined
/// (honest blocks on their miner's tip), the strategy may release adversary
/// blocks, and deliveries due by the same time are applied again.
pub fn run_engine(
    strategy: &mut dyn AttackStrategy,
    honest: &ArrivalTrace,
    adversary: &ArrivalTrace,
    params: &RunParams,
) -> Result<EngineRun> {
    let delta = params.delta;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(SimError::param("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if !(params.horizon.is_finite() && params.horizon > 0.0) {
        return Err(SimError::param("horizon", format!("must be finite and > 0, got {}", params.horizon)));
    }
    if params.n_miners == 0 {
        return Err(SimError::param("n_miners", "must be at least 1"));
    }
    let n = params.n_miners as usize;
    if let Some(a) = honest.arrivals().iter().find(|a| a.origin != Origin::Honest || a.miner_id as usize >= n) {
        return Err(SimError::InvalidInput(format!(
            "honest trace contains arrival with origin {:?} and miner {} (n_miners = {n})",
            a.origin, a.miner_id
        )));
    }
    if adversary.arrivals().iter().any(|a| a.origin != Origin::Adversary) {
        return Err(SimError::InvalidInput("adversary trace contains honest arrivals".into()));
    }
    if !params.scores.covers(honest) || !params.scores.covers(adversary) {
        return Err(SimError::InvalidInput("trace references a block type with no score".into()));
    }

    let mut st = SimState::new(n, delta, params.horizon);
    st.tree.adversary_blocks = vec![None; adversary.len()];
    st.tree.honest_blocks.reserve(honest.len());
    let mut delays = vec![0.0; n];
    let mut releases = Vec::new();
    let (h, a) = (honest.arrivals(), adversary.arrivals());
    let (mut i, mut k) = (0usize, 0usize);

    loop {
        let take_honest = match (h.get(i), a.get(k)) {
            (None, None) => break,
            (Some(x), Some(y)) => x.time <= y.time,
            (Some(_), None) => true,
            (None, Some(_)) => false,
        };
        let arrival = if take_honest { h[i] } else { a[k] };
        if arrival.time > params.horizon {
            break;
        }
        st.now = arrival.time;
        st.deliver_until(st.now);
        let score = params.scores.score(arrival.type_id);

        if take_honest {
            let m = arrival.miner_id as usize;
            let parent = st.best[m];
            let id = st.add_block(parent, &arrival, i, score);
            st.tree.honest_blocks.push(id);
            st.tree.release_times[id] = arrival.time;
            st.see(id, m, arrival.time);
            delays.fill(delta);
            strategy.honest_delays(&st, id, &mut delays);
            delays[m] = 0.0;
            if let Some(d) = delays.iter().find(|&&d| !(0.0..=delta).contains(&d)) {
                return Err(SimError::InvalidSchedule(format!("honest delay {d} outside [0, {delta}]")));
            }
            let first = delays[(m + 1) % n];
            if delays.iter().enumerate().all(|(j, &d)| j == m || d == first) {
                if n > 1 {
                    st.push(arrival.time + first, id, Recipients::AllBut(m));
                }
            } else {
                for (j, &d) in delays.iter().enumerate().filter(|&(j, _)| j != m) {
                    st.push(arrival.time + d, id, Recipients::One(j));
                }
            }
            i += 1;
        } else {
            if let Some(parent) = strategy.adversary_parent(&st, &arrival, k) {
                if parent >= st.tree.blocks.len() {
                    return Err(SimError::InvalidSchedule(format!("adversary parent {parent} does not exist yet")));
                }
                let id = st.add_block(parent, &arrival, k, score);
                st.tree.adversary_blocks[k] = Some(id);
            }
            k += 1;
        }

        releases.clear();
        strategy.after_event(&st, &mut releases);
        for r in releases.drain(..) {
            st.release(r)?;
        }
        st.deliver_until(st.now);
    }
    st.deliver_until(params.horizon);

    Ok(EngineRun {
        tree: st.tree,
        dominated_at: st.dominated_at,
        reveal_times: st.reveal_times,
    })
}
