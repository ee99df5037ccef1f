use rand::Rng;

use crate::arrivals::Arrival;
use crate::blocktree::{AttackStrategy, BlockId, Delays, Release, SimState, GENESIS};
use crate::rng::{rng_from, SimRng};

/// Never mines and relays honest blocks instantly.
#[derive(Clone, Debug, Default)]
pub struct NullStrategy;

impl AttackStrategy for NullStrategy {
    fn name(&self) -> &str {
        "none"
    }

    fn honest_delays(&mut self, _: &SimState, _: BlockId, delays: &mut [f64]) {
        delays.fill(0.0);
    }

    fn adversary_parent(&mut self, _: &SimState, _: &Arrival, _: usize) -> Option<BlockId> {
        None
    }

    fn after_event(&mut self, _: &SimState, _: &mut Vec<Release>) {}
}

/// Delays every honest block by `Δ`, mines on the best block it knows and
/// publishes each of its blocks immediately, also with delay `Δ`.
#[derive(Clone, Debug, Default)]
pub struct FullDelay {
    just_mined: Option<usize>,
}

impl AttackStrategy for FullDelay {
    fn name(&self) -> &str {
        "full-delay"
    }

    fn honest_delays(&mut self, state: &SimState, _: BlockId, delays: &mut [f64]) {
        delays.fill(state.delta());
    }

    fn adversary_parent(&mut self, state: &SimState, _: &Arrival, index: usize) -> Option<BlockId> {
        self.just_mined = Some(index);
        Some(state.overall_best())
    }

    fn after_event(&mut self, state: &SimState, releases: &mut Vec<Release>) {
        if let Some(k) = self.just_mined.take() {
            releases.push(Release {
                block: state.tree().adversary_block(k).expect("just mined"),
                at: state.now(),
                delays: Delays::Uniform(state.delta()),
            });
        }
    }
}

/// Mines a private chain from genesis and publishes all of it, with no delay,
/// as soon as its tip outscores every honest block without containing the
/// best one. Honest blocks are delayed by `Δ`.
#[derive(Clone, Debug)]
pub struct PrivateMining {
    restart_at_reveal: bool,
    tip: BlockId,
    unreleased: Vec<BlockId>,
    restart_pending: bool,
    just_mined: Option<usize>,
}

impl PrivateMining {
    pub fn new(restart_at_reveal: bool) -> Self {
        PrivateMining {
            restart_at_reveal,
            tip: GENESIS,
            unreleased: Vec::new(),
            restart_pending: false,
            just_mined: None,
        }
    }
}

impl Default for PrivateMining {
    fn default() -> Self {
        Self::new(false)
    }
}

impl AttackStrategy for PrivateMining {
    fn name(&self) -> &str {
        "private-mining"
    }

    fn honest_delays(&mut self, state: &SimState, _: BlockId, delays: &mut [f64]) {
        delays.fill(state.delta());
    }

    fn adversary_parent(&mut self, state: &SimState, _: &Arrival, index: usize) -> Option<BlockId> {
        self.just_mined = Some(index);
        if self.restart_pending {
            self.restart_pending = false;
            Some(state.overall_best())
        } else {
            Some(self.tip)
        }
    }

    fn after_event(&mut self, state: &SimState, releases: &mut Vec<Release>) {
        if let Some(k) = self.just_mined.take() {
            self.tip = state.tree().adversary_block(k).expect("just mined");
            self.unreleased.push(self.tip);
        }
        let honest = state.max_honest();
        if !self.unreleased.is_empty()
            && state.block(self.tip).chain_score > state.block(honest).chain_score
            && !state.tree().is_ancestor(honest, self.tip)
        {
            releases.extend(self.unreleased.drain(..).map(|block| Release {
                block,
                at: state.now(),
                delays: Delays::Uniform(0.0),
            }));
            self.restart_pending = self.restart_at_reveal;
        }
    }
}

/// Arbitrary legal behaviour for property tests: random honest delays in
/// `[0, Δ]`, random parents, and random or withheld releases.
#[derive(Clone, Debug)]
pub struct RandomStrategy {
    rng: SimRng,
    release_prob: f64,
    just_mined: Option<usize>,
}

impl RandomStrategy {
    pub fn new(seed: u64, release_prob: f64) -> Self {
        RandomStrategy {
            rng: rng_from(seed),
            release_prob,
            just_mined: None,
        }
    }
}

impl AttackStrategy for RandomStrategy {
    fn name(&self) -> &str {
        "random"
    }

    fn honest_delays(&mut self, state: &SimState, _: BlockId, delays: &mut [f64]) {
        let d = state.delta();
        for x in delays.iter_mut() {
            *x = self.rng.random::<f64>() * d;
        }
    }

    fn adversary_parent(&mut self, state: &SimState, _: &Arrival, index: usize) -> Option<BlockId> {
        self.just_mined = Some(index);
        let n = state.tree().len();
        // Lean towards recent blocks so adversary chains actually compete.
        let pick = if self.rng.random_bool(0.5) {
            state.overall_best()
        } else {
            self.rng.random_range(0..n)
        };
        Some(pick)
    }

    fn after_event(&mut self, state: &SimState, releases: &mut Vec<Release>) {
        if let Some(k) = self.just_mined.take() {
            if self.rng.random_bool(self.release_prob) {
                let d = state.delta();
                let wait = self.rng.random::<f64>() * 2.0 * d;
                let per_miner = (0..state.tree().n_miners()).map(|_| self.rng.random::<f64>() * d).collect();
                releases.push(Release {
                    block: state.tree().adversary_block(k).expect("just mined"),
                    at: state.now() + wait,
                    delays: Delays::PerMiner(per_miner),
                });
            }
        }
    }
}
