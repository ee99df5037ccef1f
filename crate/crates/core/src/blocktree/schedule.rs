use super::engine::{run_engine, AttackStrategy, Delays, Release, RunParams, SimState};
use super::{BlockId, BlockTree, GENESIS};
use crate::arrivals::{Arrival, ArrivalTrace, ScoreTable};
use crate::error::{Result, SimError};

/// Where an adversary block attaches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParentRef {
    Genesis,
    /// Block of the honest arrival with this index.
    Honest(usize),
    /// Block of the adversary arrival with this index.
    Adversary(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryEntry {
    pub parent: ParentRef,
    /// Delay from mining to first broadcast; infinite keeps the block private.
    pub release_delay: f64,
    /// Per-miner delay after first broadcast, each in `[0, Δ]`.
    pub per_miner: Vec<f64>,
}

/// A fixed, fully specified set of delays and adversary decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct DelaySchedule {
    pub n_miners: u32,
    /// `honest[i][m]`: delay with which miner `m` receives honest arrival `i`.
    pub honest: Vec<Vec<f64>>,
    /// One entry per adversary arrival, in trace order.
    pub adversary: Vec<AdversaryEntry>,
}

impl DelaySchedule {
    /// Every honest block delayed `delay` to every other miner; no adversary blocks.
    pub fn uniform(n_honest: usize, n_miners: u32, delay: f64) -> Self {
        DelaySchedule {
            n_miners,
            honest: vec![vec![delay; n_miners as usize]; n_honest],
            adversary: Vec::new(),
        }
    }

    pub fn validate(&self, honest: &ArrivalTrace, adversary: &ArrivalTrace, delta: f64) -> Result<()> {
        let n = self.n_miners as usize;
        if self.honest.len() != honest.len() {
            return Err(SimError::ScheduleIncomplete(format!(
                "{} honest arrivals but {} honest schedule rows",
                honest.len(),
                self.honest.len()
            )));
        }
        if self.adversary.len() != adversary.len() {
            return Err(SimError::ScheduleIncomplete(format!(
                "{} adversary arrivals but {} adversary schedule entries",
                adversary.len(),
                self.adversary.len()
            )));
        }
        let in_bound = |d: f64| (0.0..=delta).contains(&d);
        for (i, row) in self.honest.iter().enumerate() {
            if row.len() != n {
                return Err(SimError::ScheduleIncomplete(format!("honest row {i} has {} of {n} miners", row.len())));
            }
            if let Some(d) = row.iter().find(|&&d| !in_bound(d)) {
                return Err(SimError::InvalidSchedule(format!("honest arrival {i}: delay {d} outside [0, {delta}]")));
            }
        }
        let h = honest.arrivals();
        for (k, (e, arr)) in self.adversary.iter().zip(adversary.arrivals()).enumerate() {
            if e.per_miner.len() != n {
                return Err(SimError::ScheduleIncomplete(format!(
                    "adversary entry {k} has {} of {n} miners",
                    e.per_miner.len()
                )));
            }
            if let Some(d) = e.per_miner.iter().find(|&&d| !in_bound(d)) {
                return Err(SimError::InvalidSchedule(format!("adversary entry {k}: delay {d} outside [0, {delta}]")));
            }
            if e.release_delay.is_nan() || e.release_delay < 0.0 {
                return Err(SimError::InvalidSchedule(format!("adversary entry {k}: negative release delay")));
            }
            match e.parent {
                ParentRef::Genesis => {}
                ParentRef::Honest(i) => {
                    if i >= h.len() || h[i].time > arr.time {
                        return Err(SimError::InvalidSchedule(format!(
                            "adversary entry {k}: honest parent {i} is not mined before it"
                        )));
                    }
                }
                ParentRef::Adversary(j) => {
                    if j >= k {
                        return Err(SimError::InvalidSchedule(format!(
                            "adversary entry {k}: adversary parent {j} is not mined before it"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Replays a [`DelaySchedule`] through the engine.
pub struct ScheduledStrategy<'a> {
    schedule: &'a DelaySchedule,
    just_mined: Option<usize>,
}

impl<'a> ScheduledStrategy<'a> {
    pub fn new(schedule: &'a DelaySchedule) -> Self {
        ScheduledStrategy {
            schedule,
            just_mined: None,
        }
    }
}

impl AttackStrategy for ScheduledStrategy<'_> {
    fn name(&self) -> &str {
        "scheduled"
    }

    fn honest_delays(&mut self, state: &SimState, block: BlockId, delays: &mut [f64]) {
        let i = state.block(block).arrival_index.expect("honest block has an arrival");
        delays.copy_from_slice(&self.schedule.honest[i]);
    }

    fn adversary_parent(&mut self, state: &SimState, _arrival: &Arrival, index: usize) -> Option<BlockId> {
        self.just_mined = Some(index);
        Some(match self.schedule.adversary[index].parent {
            ParentRef::Genesis => GENESIS,
            ParentRef::Honest(i) => state.tree().honest_block(i),
            ParentRef::Adversary(j) => state.tree().adversary_block(j).expect("validated"),
        })
    }

    fn after_event(&mut self, state: &SimState, releases: &mut Vec<Release>) {
        if let Some(k) = self.just_mined.take() {
            let entry = &self.schedule.adversary[k];
            let block = state.tree().adversary_block(k).expect("just mined");
            if entry.release_delay.is_finite() {
                releases.push(Release {
                    block,
                    at: state.now() + entry.release_delay,
                    delays: Delays::PerMiner(entry.per_miner.clone()),
                });
            }
        }
    }
}

/// Builds the mother tree for fixed traces and a fixed delay schedule.
pub fn build_tree(
    honest: &ArrivalTrace,
    adversary: &ArrivalTrace,
    schedule: &DelaySchedule,
    delta: f64,
    scores: &ScoreTable,
) -> Result<BlockTree> {
    schedule.validate(honest, adversary, delta)?;
    let params = RunParams {
        delta,
        horizon: honest.horizon().max(adversary.horizon()),
        n_miners: schedule.n_miners,
        scores: scores.clone(),
    };
    let mut strategy = ScheduledStrategy::new(schedule);
    Ok(run_engine(&mut strategy, honest, adversary, &params)?.tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrivals::{Origin, ADVERSARY_MINER};
    use crate::blocktree::{canonical_score, View};

    fn honest(times: &[(f64, u32)], horizon: f64) -> ArrivalTrace {
        let arrivals = times
            .iter()
            .map(|&(time, miner_id)| Arrival {
                time,
                type_id: 0,
                origin: Origin::Honest,
                miner_id,
            })
            .collect();
        ArrivalTrace::from_arrivals(arrivals, horizon, 0).unwrap()
    }

    fn adversary(times: &[f64], horizon: f64) -> ArrivalTrace {
        let arrivals = times
            .iter()
            .map(|&time| Arrival {
                time,
                type_id: 0,
                origin: Origin::Adversary,
                miner_id: ADVERSARY_MINER,
            })
            .collect();
        ArrivalTrace::from_arrivals(arrivals, horizon, 0).unwrap()
    }

    fn unit() -> ScoreTable {
        ScoreTable::unit(1)
    }

    #[test]
    fn empty_tree_is_genesis() {
        let h = honest(&[], 10.0);
        let a = adversary(&[], 10.0);
        let tree = build_tree(&h, &a, &DelaySchedule::uniform(0, 3, 1.0), 1.0, &unit()).unwrap();
        assert_eq!(tree.len(), 1);
        for m in 0..3 {
            assert_eq!(tree.tip_at(m, 10.0), GENESIS);
        }
        assert_eq!(canonical_score(&tree, 0.0, View::All), 0.0);
    }

    #[test]
    fn full_delay_hides_recent_block() {
        let d = 2.0;
        let h = honest(&[(1.0, 0), (1.0 + d / 2.0, 1)], 10.0);
        let tree = build_tree(&h, &adversary(&[], 10.0), &DelaySchedule::uniform(2, 2, d), d, &unit()).unwrap();
        assert_eq!(tree.block(tree.honest_block(1)).parent, Some(GENESIS));
    }

    #[test]
    fn full_delay_then_visible() {
        let d = 2.0;
        let h = honest(&[(1.0, 0), (1.0 + 2.0 * d, 1)], 10.0);
        let tree = build_tree(&h, &adversary(&[], 10.0), &DelaySchedule::uniform(2, 2, d), d, &unit()).unwrap();
        let second = tree.block(tree.honest_block(1));
        assert_eq!(second.parent, Some(tree.honest_block(0)));
        assert_eq!(second.chain_score, 2.0);
    }

    #[test]
    fn visibility_boundary_is_closed() {
        let d = 1.5;
        let h = honest(&[(2.0, 0), (2.0 + d, 1)], 10.0);
        let tree = build_tree(&h, &adversary(&[], 10.0), &DelaySchedule::uniform(2, 2, d), d, &unit()).unwrap();
        assert_eq!(tree.block(tree.honest_block(1)).parent, Some(tree.honest_block(0)));
        assert_eq!(canonical_score(&tree, 2.0 + d, View::All), 1.0);
        assert_eq!(canonical_score(&tree, 2.0 + d - 1e-9, View::All), 0.0);
    }

    #[test]
    fn schedule_errors() {
        let h = honest(&[(1.0, 0)], 10.0);
        let a = adversary(&[2.0], 10.0);
        let none = DelaySchedule::uniform(0, 2, 0.0);
        assert!(matches!(build_tree(&h, &a, &none, 1.0, &unit()), Err(SimError::ScheduleIncomplete(_))));

        let too_long = DelaySchedule::uniform(1, 2, 1.5);
        assert!(matches!(
            build_tree(&h, &adversary(&[], 10.0), &too_long, 1.0, &unit()),
            Err(SimError::InvalidSchedule(_))
        ));

        let mut s = DelaySchedule::uniform(1, 2, 0.5);
        s.adversary.push(AdversaryEntry {
            parent: ParentRef::Adversary(0),
            release_delay: 0.0,
            per_miner: vec![0.0, 0.0],
        });
        assert!(matches!(build_tree(&h, &a, &s, 1.0, &unit()), Err(SimError::InvalidSchedule(_))));
    }

    #[test]
    fn released_adversary_block_wins_fork_choice() {
        let h = honest(&[(1.0, 0), (5.0, 1)], 10.0);
        let a = adversary(&[2.0, 3.0], 10.0);
        let mut s = DelaySchedule::uniform(2, 2, 0.5);
        s.adversary = vec![
            AdversaryEntry {
                parent: ParentRef::Genesis,
                release_delay: f64::INFINITY,
                per_miner: vec![0.0, 0.0],
            },
            AdversaryEntry {
                parent: ParentRef::Adversary(0),
                release_delay: 1.0,
                per_miner: vec![0.0, 0.5],
            },
        ];
        let tree = build_tree(&h, &a, &s, 1.0, &unit()).unwrap();
        let a1 = tree.adversary_block(1).unwrap();
        assert_eq!(tree.release_time(a1), 4.0);
        assert_eq!(tree.visible_time(a1, 1), 4.5);
        assert_eq!(tree.tip_at(0, 4.0), a1);
        assert_eq!(tree.block(tree.honest_block(1)).parent, Some(a1));
        assert!(tree.release_time(tree.adversary_block(0).unwrap()).is_infinite());
    }
}
