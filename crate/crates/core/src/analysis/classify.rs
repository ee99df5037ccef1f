//! Overtake detection and block security classes.
//!
//! An adversary chain forked from honest block `i` (or genesis) overtakes at
//! time `t` when the adversary score mined in `(τ_i, t]` exceeds the
//! fully-delayed growth of a fresh tree over `(τ_i + Δ, t − Δ]`, which lower
//! bounds what every honest miner has built on top of `i` by `t`.

use serde::{Deserialize, Serialize};

use super::interval::TrialData;
use crate::blocktree::BlockTree;
use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SecurityClass {
    Secure,
    Conflicted,
    /// Overtaken by an adversary chain spanning at least `t_cap`.
    Overtakable,
    /// Overtaken only by adversary chains spanning less than the cap.
    LocallyInsecure(f64),
}

/// Supremum of the times `t` in `(after, horizon]` at which the chain forked
/// at `root` overtakes, or `None` if it never does.
pub fn overtake_sup(data: &TrialData, root: f64, after: f64) -> Option<f64> {
    let d = data.delta;
    let mut cursor = data.fresh_cursor(root + d);
    let adv_times = data.adversary.times();
    let mut k = adv_times.partition_point(|&x| x <= root);
    let base = data.adversary.up_to(root);

    let mut adv = 0.0;
    let mut honest = 0.0;
    let mut winning = false;
    let mut last_end: Option<f64> = None;

    loop {
        let next_adv = adv_times.get(k).copied().filter(|&t| t <= data.horizon);
        let honest_src = cursor.next_time();
        let next_honest = honest_src.map(|t| t + d).filter(|&t| t <= data.horizon);
        let t = match (next_adv, next_honest) {
            (None, None) => break,
            (Some(a), Some(h)) => a.min(h),
            (Some(a), None) => a,
            (None, Some(h)) => h,
        };
        if next_honest == Some(t) {
            honest = cursor.advance_to(honest_src.expect("set with next_honest"));
        }
        if next_adv == Some(t) {
            adv = data.adversary.up_to(t) - base;
            k = adv_times.partition_point(|&x| x <= t);
        }
        let now_winning = adv > honest;
        if winning && !now_winning && t > after {
            last_end = Some(t);
        }
        winning = now_winning;
    }
    if winning {
        last_end = Some(data.horizon);
    }
    last_end
}

/// Longest time-span of an adversary chain that overtakes some honest block
/// mined in `[from, to]`, over all fork points before that block.
pub fn longest_overtake(data: &TrialData, from: f64, to: f64) -> Option<f64> {
    let times = &data.honest_times;
    let lo = times.partition_point(|&x| x < from);
    let hi = times.partition_point(|&x| x <= to);
    if lo == hi {
        return None;
    }
    let roots = std::iter::once(0.0).chain(times[..hi].iter().copied());
    let mut best: Option<f64> = None;
    for root in roots {
        // First window block strictly after the fork point.
        let first = times[lo..hi].iter().copied().find(|&t| t > root);
        let Some(first) = first else { continue };
        if let Some(v) = overtake_sup(data, root, first) {
            let len = v - root;
            best = Some(best.map_or(len, |b: f64| b.max(len)));
        }
    }
    best
}

/// Classifies honest block `block_id`: conflicted if it is not a loner;
/// otherwise overtakable, locally insecure, or secure according to the
/// longest adversary chain that overtakes it, compared against `t_cap`.
pub fn classify_block(tree: &BlockTree, data: &TrialData, block_id: usize, t_cap: f64) -> Result<SecurityClass> {
    let block = tree
        .blocks()
        .get(block_id)
        .ok_or_else(|| SimError::InvalidInput(format!("no block {block_id}")))?;
    if !block.is_honest() {
        return Err(SimError::InvalidInput(format!("block {block_id} is not an honest block")));
    }
    let j = block.arrival_index.expect("honest blocks carry their arrival index");
    let times = &data.honest_times;
    if times.get(j) != Some(&block.mine_time) {
        return Err(SimError::InvalidInput("tree and trace disagree on honest arrivals".into()));
    }
    let d = data.delta;
    let tau = block.mine_time;
    let loner = (j == 0 || times[j - 1] + d <= tau) && (j + 1 == times.len() || tau + d <= times[j + 1]);
    if !loner {
        return Ok(SecurityClass::Conflicted);
    }
    let roots = std::iter::once(0.0).chain(times[..j].iter().copied());
    let longest = roots.filter_map(|root| overtake_sup(data, root, tau).map(|v| v - root)).fold(None, |acc: Option<f64>, len| {
        Some(acc.map_or(len, |a| a.max(len)))
    });
    Ok(match longest {
        None => SecurityClass::Secure,
        Some(len) if len >= t_cap => SecurityClass::Overtakable,
        Some(_) => SecurityClass::LocallyInsecure(t_cap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrivals::{Arrival, ArrivalTrace, Origin, ScoreTable, ADVERSARY_MINER};

    fn data(h: &[f64], a: &[f64], delta: f64, horizon: f64) -> TrialData {
        let mk = |times: &[f64], origin| {
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
        };
        TrialData::new(&mk(h, Origin::Honest), &mk(a, Origin::Adversary), &ScoreTable::unit(1), delta).unwrap()
    }

    #[test]
    fn single_adversary_block_overtakes_until_honest_catches_up() {
        // Fork at genesis; adversary block at 0.5; first fresh honest block
        // at 2 counts from 3.
        let d = data(&[2.0, 6.0], &[0.5], 1.0, 20.0);
        assert_eq!(overtake_sup(&d, 0.0, 0.0), Some(3.0));
        assert_eq!(overtake_sup(&d, 0.0, 3.0), None);
    }

    #[test]
    fn winning_at_horizon_ends_at_horizon() {
        let d = data(&[2.0], &[0.5, 1.0, 4.0], 1.0, 10.0);
        assert_eq!(overtake_sup(&d, 0.0, 5.0), Some(10.0));
    }

    #[test]
    fn longest_overtake_requires_block_in_window() {
        let d = data(&[2.0, 6.0], &[0.5], 1.0, 20.0);
        assert_eq!(longest_overtake(&d, 1.5, 2.5), Some(3.0));
        assert_eq!(longest_overtake(&d, 5.0, 7.0), None);
        assert_eq!(longest_overtake(&d, 10.0, 12.0), None);
    }
}
