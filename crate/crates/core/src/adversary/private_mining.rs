//! Direct simulation of the private-mining attack.
//!
//! With every honest block delayed by exactly `Δ`, deliveries arrive in the
//! order blocks were mined, so a FIFO queue replaces the engine's heap and
//! per-miner visibility is never materialised.

use std::collections::VecDeque;

use super::AttackOutcome;
use crate::arrivals::{generate_trial_traces, ArrivalTrace, BlockTypeSpec, Origin, ScoreTable, DEFAULT_MINERS};
use crate::error::{Result, SimError};

struct Node {
    parent: usize,
    score: f64,
    height: u32,
    honest: bool,
    time: f64,
}

struct Arena {
    nodes: Vec<Node>,
}

impl Arena {
    fn better(&self, c: usize, i: usize) -> bool {
        let (a, b) = (self.nodes[c].score, self.nodes[i].score);
        a > b || (a == b && c < i)
    }

    fn is_ancestor(&self, a: usize, mut d: usize) -> bool {
        let h = self.nodes[a].height;
        while self.nodes[d].height > h {
            d = self.nodes[d].parent;
        }
        d == a
    }

    fn push(&mut self, parent: usize, score: f64, honest: bool, time: f64) -> usize {
        let p = &self.nodes[parent];
        let node = Node {
            parent,
            score: p.score + score,
            height: p.height + 1,
            honest,
            time,
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

/// Private mining on freshly generated traces with the default miner count.
pub fn run_private_mining(specs: &[BlockTypeSpec], delta: f64, horizon: f64, seed: u64) -> Result<AttackOutcome> {
    let (honest, adversary) = generate_trial_traces(specs, DEFAULT_MINERS, horizon, seed)?;
    private_mining_on(&honest, &adversary, delta, &ScoreTable::new(specs), DEFAULT_MINERS, false)
}

/// Private mining on given traces. `restart_at_reveal` makes the first block
/// after each reveal extend the best block overall instead of the old private tip.
pub fn private_mining_on(
    honest: &ArrivalTrace,
    adversary: &ArrivalTrace,
    delta: f64,
    scores: &ScoreTable,
    n_miners: u32,
    restart_at_reveal: bool,
) -> Result<AttackOutcome> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(SimError::param("delta", format!("must be finite and >= 0, got {delta}")));
    }
    let horizon = honest.horizon();
    let n = n_miners as usize;
    if n == 0 || honest.arrivals().iter().any(|a| a.miner_id as usize >= n || a.origin != Origin::Honest) {
        return Err(SimError::InvalidInput("honest trace does not match the miner count".into()));
    }

    let mut arena = Arena {
        nodes: vec![Node {
            parent: 0,
            score: 0.0,
            height: 0,
            honest: false,
            time: 0.0,
        }],
    };
    let mut best = vec![0usize; n];
    let mut queue: VecDeque<(f64, usize, usize)> = VecDeque::new();
    let (mut overall_best, mut max_honest, mut tip) = (0usize, 0usize, 0usize);
    let mut unreleased: Vec<usize> = Vec::new();
    let mut restart_pending = false;
    let mut dominated_at = None;
    let mut reveal_times = Vec::new();

    let deliver = |queue: &mut VecDeque<(f64, usize, usize)>, best: &mut [usize], arena: &Arena, t: f64| {
        while let Some(&(time, block, skip)) = queue.front() {
            if time > t {
                break;
            }
            queue.pop_front();
            for (m, b) in best.iter_mut().enumerate() {
                if m != skip && arena.better(block, *b) {
                    *b = block;
                }
            }
        }
    };

    let (h, a) = (honest.arrivals(), adversary.arrivals());
    let (mut i, mut k) = (0usize, 0usize);
    loop {
        let take_honest = match (h.get(i), a.get(k)) {
            (None, None) => break,
            (Some(x), Some(y)) => x.time <= y.time,
            (Some(_), None) => true,
            (None, Some(_)) => false,
        };
        let arr = if take_honest { h[i] } else { a[k] };
        if arr.time > horizon {
            break;
        }
        let now = arr.time;
        deliver(&mut queue, &mut best, &arena, now);
        let c = scores.score(arr.type_id);

        if take_honest {
            let m = arr.miner_id as usize;
            let id = arena.push(best[m], c, true, now);
            best[m] = id;
            if n > 1 {
                queue.push_back((now + delta, id, m));
            }
            if arena.better(id, max_honest) {
                max_honest = id;
            }
            if arena.better(id, overall_best) {
                overall_best = id;
            }
            i += 1;
        } else {
            let parent = if restart_pending {
                restart_pending = false;
                overall_best
            } else {
                tip
            };
            tip = arena.push(parent, c, false, now);
            unreleased.push(tip);
            if arena.better(tip, overall_best) {
                overall_best = tip;
            }
            k += 1;
        }

        if !unreleased.is_empty()
            && arena.nodes[tip].score > arena.nodes[max_honest].score
            && !arena.is_ancestor(max_honest, tip)
        {
            reveal_times.push(now);
            for &p in &unreleased {
                for b in best.iter_mut() {
                    if arena.better(p, *b) {
                        if dominated_at.is_none() && !arena.is_ancestor(*b, p) {
                            dominated_at = Some(now);
                        }
                        *b = p;
                    }
                }
            }
            unreleased.clear();
            restart_pending = restart_at_reveal;
        }
        deliver(&mut queue, &mut best, &arena, now);
    }
    deliver(&mut queue, &mut best, &arena, horizon);

    let final_tip = best.iter().fold(0usize, |acc, &b| if arena.better(b, acc) { b } else { acc });
    let mut surviving = 0usize;
    let mut earliest = None;
    let mut cur = final_tip;
    while cur != 0 {
        let node = &arena.nodes[cur];
        if node.honest {
            surviving += 1;
            earliest = Some(node.time);
        }
        cur = node.parent;
    }
    Ok(AttackOutcome {
        dominated_at,
        reveal_times,
        final_honest_blocks_in_chain: surviving,
        earliest_surviving_honest: earliest,
    })
}
