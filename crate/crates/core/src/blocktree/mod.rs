//! The mother tree of all blocks, per-miner views, and the fictitious
//! fully-delayed honest chain.

mod dump;
pub mod engine;
mod fully_delayed;
mod schedule;

pub use dump::write_tree;
pub use engine::{run_engine, AttackStrategy, Delays, Release, RunParams, SimState};
pub use fully_delayed::{
    build_fully_delayed_chain, build_fully_delayed_chain_with, fresh_growth, fully_delayed_score, FreshCursor,
    FullyDelayedChain,
};
pub use schedule::{build_tree, AdversaryEntry, DelaySchedule, ParentRef, ScheduledStrategy};

use crate::arrivals::{ArrivalTrace, BlockTypeSpec, Origin, ScoreTable, TypeId};
use crate::error::{Result, SimError};

pub type BlockId = usize;

pub const GENESIS: BlockId = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub id: BlockId,
    pub parent: Option<BlockId>,
    /// `None` for genesis.
    pub type_id: Option<TypeId>,
    /// `None` for genesis.
    pub origin: Option<Origin>,
    pub miner_id: u32,
    /// Index into the honest or adversary trace this block came from.
    pub arrival_index: Option<usize>,
    pub mine_time: f64,
    pub chain_score: f64,
    pub height: u32,
}

impl Block {
    pub fn is_honest(&self) -> bool {
        self.origin == Some(Origin::Honest)
    }

    pub fn is_adversary(&self) -> bool {
        self.origin == Some(Origin::Adversary)
    }
}

/// Whose view a canonical score is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    /// Highest honest block visible to every honest miner.
    All,
    /// Fork-choice tip of one miner.
    Miner(u32),
}

#[derive(Clone, Debug)]
pub struct BlockTree {
    pub(crate) blocks: Vec<Block>,
    /// `n_blocks × n_miners`, first time each miner can see each block.
    pub(crate) visibility: Vec<f64>,
    pub(crate) n_miners: usize,
    pub(crate) delta: f64,
    pub(crate) horizon: f64,
    pub(crate) tip_logs: Vec<Vec<(f64, BlockId)>>,
    pub(crate) honest_blocks: Vec<BlockId>,
    pub(crate) adversary_blocks: Vec<Option<BlockId>>,
    pub(crate) release_times: Vec<f64>,
}

impl BlockTree {
    pub(crate) fn new(n_miners: usize, delta: f64, horizon: f64) -> Self {
        BlockTree {
            blocks: vec![Block {
                id: GENESIS,
                parent: None,
                type_id: None,
                origin: None,
                miner_id: u32::MAX,
                arrival_index: None,
                mine_time: 0.0,
                chain_score: 0.0,
                height: 0,
            }],
            visibility: vec![0.0; n_miners],
            n_miners,
            delta,
            horizon,
            tip_logs: vec![vec![(0.0, GENESIS)]; n_miners],
            honest_blocks: Vec::new(),
            adversary_blocks: Vec::new(),
            release_times: vec![0.0],
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.len() <= 1
    }

    pub fn n_miners(&self) -> usize {
        self.n_miners
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// First time miner `m` can see block `b`; infinite if never.
    #[inline]
    pub fn visible_time(&self, b: BlockId, m: usize) -> f64 {
        self.visibility[b * self.n_miners + m]
    }

    #[inline]
    pub fn is_visible(&self, b: BlockId, m: usize, t: f64) -> bool {
        self.visible_time(b, m) <= t
    }

    /// Time by which every honest miner can see `b`.
    pub fn all_visible_time(&self, b: BlockId) -> f64 {
        (0..self.n_miners).map(|m| self.visible_time(b, m)).fold(0.0, f64::max)
    }

    /// First broadcast time: mine time for honest blocks, infinite for unreleased adversary blocks.
    pub fn release_time(&self, b: BlockId) -> f64 {
        self.release_times[b]
    }

    pub fn honest_block(&self, arrival_index: usize) -> BlockId {
        self.honest_blocks[arrival_index]
    }

    pub fn honest_block_ids(&self) -> &[BlockId] {
        &self.honest_blocks
    }

    /// Block mined for adversary arrival `k`, if the adversary used it.
    pub fn adversary_block(&self, arrival_index: usize) -> Option<BlockId> {
        self.adversary_blocks.get(arrival_index).copied().flatten()
    }

    /// `(time, tip)` pairs recording each change of miner `m`'s fork choice.
    pub fn tip_log(&self, m: usize) -> &[(f64, BlockId)] {
        &self.tip_logs[m]
    }

    /// Fork-choice tip of miner `m` at time `t`.
    pub fn tip_at(&self, m: usize, t: f64) -> BlockId {
        let log = &self.tip_logs[m];
        let n = log.partition_point(|&(x, _)| x <= t);
        if n == 0 {
            GENESIS
        } else {
            log[n - 1].1
        }
    }

    /// Whether `a` lies on the chain from genesis to `d` (inclusive).
    pub fn is_ancestor(&self, a: BlockId, d: BlockId) -> bool {
        let target = self.blocks[a].height;
        let mut cur = d;
        while self.blocks[cur].height > target {
            cur = self.blocks[cur].parent.expect("non-genesis block has a parent");
        }
        cur == a
    }

    /// Chain from `b` back to genesis, tip first.
    pub fn ancestors(&self, b: BlockId) -> impl Iterator<Item = &Block> + '_ {
        std::iter::successors(Some(&self.blocks[b]), move |blk| blk.parent.map(|p| &self.blocks[p]))
    }

    /// Best of all miners' tips at the horizon (highest score, lower id on ties).
    pub fn final_tip(&self) -> BlockId {
        (0..self.n_miners)
            .map(|m| self.tip_at(m, self.horizon))
            .fold(GENESIS, |best, b| if better(&self.blocks, b, best) { b } else { best })
    }

    /// Step function of [`canonical_score`] with [`View::All`], for repeated queries.
    pub fn canonical_index(&self) -> CanonicalIndex {
        let mut pts: Vec<(f64, f64)> = self
            .honest_blocks
            .iter()
            .map(|&b| (self.all_visible_time(b), self.blocks[b].chain_score))
            .filter(|(t, _)| t.is_finite())
            .collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut times = Vec::with_capacity(pts.len());
        let mut best = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for (t, s) in pts {
            acc = f64::max(acc, s);
            times.push(t);
            best.push(acc);
        }
        CanonicalIndex { times, best }
    }
}

#[inline]
pub(crate) fn better(blocks: &[Block], candidate: BlockId, incumbent: BlockId) -> bool {
    let (c, i) = (blocks[candidate].chain_score, blocks[incumbent].chain_score);
    c > i || (c == i && candidate < incumbent)
}

#[derive(Clone, Debug)]
pub struct CanonicalIndex {
    times: Vec<f64>,
    best: Vec<f64>,
}

impl CanonicalIndex {
    pub fn score(&self, t: f64) -> f64 {
        let n = self.times.partition_point(|&x| x <= t);
        if n == 0 {
            0.0
        } else {
            self.best[n - 1]
        }
    }
}

/// Canonical chain score at `t`. With [`View::All`] this is the highest honest
/// block every honest miner can see; with [`View::Miner`] it is that miner's tip.
pub fn canonical_score(tree: &BlockTree, t: f64, view: View) -> f64 {
    match view {
        View::All => tree
            .honest_blocks
            .iter()
            .filter(|&&b| tree.all_visible_time(b) <= t)
            .map(|&b| tree.blocks[b].chain_score)
            .fold(0.0, f64::max),
        View::Miner(m) => tree.blocks[tree.tip_at(m as usize, t)].chain_score,
    }
}

/// `S_h(a, b) = S(b) − S(a)` on the fully-delayed chain.
pub fn score_growth(chain: &FullyDelayedChain, a: f64, b: f64) -> Result<f64> {
    if a > b {
        return Err(SimError::InvalidInterval { a, b });
    }
    Ok(chain.score_at(b) - chain.score_at(a))
}

/// `S_a(a, b)`: total adversary score mined in `(a, b]`.
pub fn adversary_score_growth(adversary: &ArrivalTrace, a: f64, b: f64, specs: &[BlockTypeSpec]) -> Result<f64> {
    if a > b {
        return Err(SimError::InvalidInterval { a, b });
    }
    let table = ScoreTable::new(specs);
    Ok(adversary
        .arrivals()
        .iter()
        .filter(|x| x.time > a && x.time <= b)
        .map(|x| table.score(x.type_id))
        .sum())
}

/// Honest arrivals with no other honest arrival strictly within `Δ` on either side.
pub fn find_loners(honest: &ArrivalTrace, delta: f64) -> Vec<usize> {
    let t = honest.times();
    (0..t.len())
        .filter(|&j| {
            let before = j == 0 || t[j - 1] + delta <= t[j];
            let after = j + 1 == t.len() || t[j] + delta <= t[j + 1];
            before && after
        })
        .collect()
}
