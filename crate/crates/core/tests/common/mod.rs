#![allow(dead_code)]

use nakamoto_sim::arrivals::{generate_trial_traces, ArrivalTrace, BlockTypeSpec};
use nakamoto_sim::blocktree::{AdversaryEntry, DelaySchedule, ParentRef};
use nakamoto_sim::rng::{derive_seed, rng_from, stream, SimRng};
use rand::Rng;

pub struct Scenario {
    pub honest: ArrivalTrace,
    pub adversary: ArrivalTrace,
    pub schedule: DelaySchedule,
    pub delta: f64,
    pub specs: Vec<BlockTypeSpec>,
}

/// Delay in `[0, Δ]` with extra mass on both ends so closed boundaries get exercised.
pub fn delay(rng: &mut SimRng, delta: f64) -> f64 {
    match rng.random_range(0..5) {
        0 => 0.0,
        1 => delta,
        _ => rng.random::<f64>() * delta,
    }
}

pub fn random_schedule(honest: &ArrivalTrace, adversary: &ArrivalTrace, n_miners: u32, delta: f64, rng: &mut SimRng) -> DelaySchedule {
    let n = n_miners as usize;
    let honest_rows = (0..honest.len()).map(|_| (0..n).map(|_| delay(rng, delta)).collect()).collect();
    let h = honest.arrivals();
    let adversary_rows = adversary
        .arrivals()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let mined_before = h.partition_point(|x| x.time <= a.time);
            let parent = match rng.random_range(0..3) {
                1 if mined_before > 0 => ParentRef::Honest(rng.random_range(0..mined_before)),
                2 if k > 0 => ParentRef::Adversary(rng.random_range(0..k)),
                _ => ParentRef::Genesis,
            };
            let release_delay = if rng.random_bool(0.2) { f64::INFINITY } else { rng.random::<f64>() * 2.0 * delta };
            AdversaryEntry {
                parent,
                release_delay,
                per_miner: (0..n).map(|_| delay(rng, delta)).collect(),
            }
        })
        .collect();
    DelaySchedule {
        n_miners,
        honest: honest_rows,
        adversary: adversary_rows,
    }
}

/// Two block types with different scores so multi-score fork choice is exercised.
pub fn scenario(seed: u64, n_miners: u32, horizon: f64) -> Scenario {
    let mut rng = rng_from(derive_seed(seed, &[stream::SCHEDULE]));
    let delta = [0.0, 0.3, 1.0, 2.0][rng.random_range(0..4)];
    let specs = vec![
        BlockTypeSpec::new(0, 1.0, 0.8, 0.3).unwrap(),
        BlockTypeSpec::new(1, 2.5, 0.3, 0.1).unwrap(),
    ];
    let (honest, adversary) = generate_trial_traces(&specs, n_miners, horizon, seed).unwrap();
    let schedule = random_schedule(&honest, &adversary, n_miners, delta, &mut rng);
    Scenario {
        honest,
        adversary,
        schedule,
        delta,
        specs,
    }
}

/// Uniform sample times plus every arrival time and its `+Δ` shift.
pub fn sample_times(honest: &ArrivalTrace, delta: f64, n: usize, rng: &mut SimRng) -> Vec<f64> {
    let h = honest.horizon();
    let mut ts: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * h).collect();
    for a in honest.arrivals() {
        ts.push(a.time);
        if a.time + delta <= h {
            ts.push(a.time + delta);
        }
    }
    ts
}

use nakamoto_sim::adversary::{run_with_strategy, AttackStrategy, PrivateMining, RandomStrategy, RunParams};
use nakamoto_sim::adversary::FullDelay;
use nakamoto_sim::arrivals::ScoreTable;
use nakamoto_sim::blocktree::{
    build_fully_delayed_chain_with, build_tree, canonical_score, fresh_growth, BlockTree, View,
};

const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Violations {
    pub checks: u64,
    pub ordering: u64,
    pub removal: u64,
    pub additivity: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.ordering + self.removal + self.additivity
    }

    pub fn add(&mut self, o: Violations) {
        self.checks += o.checks;
        self.ordering += o.ordering;
        self.removal += o.removal;
        self.additivity += o.additivity;
    }
}

/// Every honest block is at least as high as its fully-delayed level, the best
/// honest block mined by `t` at least `S(t)`, and every view at `t` at least `S(t − Δ)`.
pub fn check_delay_ordering(tree: &BlockTree, honest: &ArrivalTrace, delta: f64, table: &ScoreTable, times: &[f64]) -> Violations {
    let chain = build_fully_delayed_chain_with(honest, delta, table).unwrap();
    let mut v = Violations::default();
    for (j, &lv) in chain.levels().iter().enumerate() {
        v.checks += 1;
        if tree.block(tree.honest_block(j)).chain_score + EPS < lv {
            v.ordering += 1;
        }
    }
    let idx = tree.canonical_index();
    let mined: Vec<(f64, f64)> = tree
        .honest_block_ids()
        .iter()
        .map(|&b| (tree.block(b).mine_time, tree.block(b).chain_score))
        .collect();
    for &t in times {
        let best_mined = mined.iter().filter(|(m, _)| *m <= t).map(|x| x.1).fold(0.0, f64::max);
        v.checks += 1;
        if best_mined + EPS < chain.score_at(t) {
            v.ordering += 1;
        }
        if t >= delta {
            let floor = chain.score_at(t - delta);
            v.checks += 1;
            if idx.score(t) + EPS < floor {
                v.ordering += 1;
            }
            for m in 0..tree.n_miners() as u32 {
                v.checks += 1;
                if canonical_score(tree, t, View::Miner(m)) + EPS < floor {
                    v.ordering += 1;
                }
            }
        }
    }
    v
}

/// Removes honest arrival `i0` from a scheduled run and checks that no view's
/// score goes up at any sampled time.
pub fn check_removal(s: &Scenario, i0: usize, times: &[f64]) -> Violations {
    let table = ScoreTable::new(&s.specs);
    let full = build_tree(&s.honest, &s.adversary, &s.schedule, s.delta, &table).unwrap();
    let mut reduced = s.schedule.clone();
    reduced.honest.remove(i0);
    for e in &mut reduced.adversary {
        e.parent = match e.parent {
            ParentRef::Honest(i) if i == i0 => ParentRef::Genesis,
            ParentRef::Honest(i) if i > i0 => ParentRef::Honest(i - 1),
            p => p,
        };
    }
    let honest = s.honest.without(i0);
    let cut = build_tree(&honest, &s.adversary, &reduced, s.delta, &table).unwrap();
    let (a, b) = (full.canonical_index(), cut.canonical_index());
    let mut v = Violations::default();
    for &t in times {
        v.checks += 1;
        if b.score(t) > a.score(t) + EPS {
            v.removal += 1;
        }
        for m in 0..s.schedule.n_miners {
            v.checks += 1;
            if canonical_score(&cut, t, View::Miner(m)) > canonical_score(&full, t, View::Miner(m)) + EPS {
                v.removal += 1;
            }
        }
    }
    v
}

/// `canonical(t₂) ≥ fresh(t₁ + Δ, t₂ − Δ) + canonical(t₁)` for every pair with `t₂ ≥ t₁ + 2Δ`.
pub fn check_additivity(tree: &BlockTree, honest: &ArrivalTrace, delta: f64, table: &ScoreTable, pairs: &[(f64, f64)]) -> Violations {
    let idx = tree.canonical_index();
    let times = honest.times();
    let scores = honest.scores(table);
    let mut v = Violations::default();
    for &(t1, t2) in pairs {
        if t2 < t1 + 2.0 * delta {
            continue;
        }
        v.checks += 1;
        let grown = fresh_growth(&times, &scores, delta, t1 + delta, t2 - delta);
        if idx.score(t2) + EPS < grown + idx.score(t1) {
            v.additivity += 1;
        }
    }
    v
}

pub fn sample_pairs(horizon: f64, delta: f64, n: usize, rng: &mut SimRng) -> Vec<(f64, f64)> {
    let span = horizon - 2.0 * delta;
    (0..n)
        .map(|_| {
            let t1 = rng.random::<f64>() * span;
            let t2 = t1 + 2.0 * delta + rng.random::<f64>() * (span - t1);
            (t1, t2)
        })
        .collect()
}

/// Runs all three tree-bound checks on `n_schedules` random schedules with at least
/// `n_times` sampled times each, plus the ordering and additivity checks under every shipped strategy.
pub fn tree_bound_suite(n_schedules: u64, n_times: usize, seed: u64) -> Violations {
    let mut total = Violations::default();
    for k in 0..n_schedules {
        let s_seed = derive_seed(seed, &[k]);
        let s = scenario(s_seed, 3, 20.0);
        let table = ScoreTable::new(&s.specs);
        let mut rng = rng_from(derive_seed(s_seed, &[stream::AUX]));
        let times = sample_times(&s.honest, s.delta, n_times, &mut rng);
        let pairs = sample_pairs(s.honest.horizon(), s.delta, n_times, &mut rng);

        let tree = build_tree(&s.honest, &s.adversary, &s.schedule, s.delta, &table).unwrap();
        total.add(check_delay_ordering(&tree, &s.honest, s.delta, &table, &times));
        total.add(check_additivity(&tree, &s.honest, s.delta, &table, &pairs));
        if !s.honest.is_empty() {
            let i0 = rng.random_range(0..s.honest.len());
            total.add(check_removal(&s, i0, &times));
        }

        let params = RunParams {
            delta: s.delta,
            horizon: s.honest.horizon(),
            n_miners: 3,
            scores: table.clone(),
        };
        let strategies: [Box<dyn AttackStrategy>; 3] = [
            Box::new(RandomStrategy::new(derive_seed(s_seed, &[stream::AUX, 1]), 0.6)),
            Box::new(PrivateMining::new(k % 2 == 0)),
            Box::new(FullDelay::default()),
        ];
        for mut strat in strategies {
            let (tree, _) = run_with_strategy(strat.as_mut(), &s.honest, &s.adversary, &params).unwrap();
            total.add(check_delay_ordering(&tree, &s.honest, s.delta, &table, &times));
            total.add(check_additivity(&tree, &s.honest, s.delta, &table, &pairs));
        }
    }
    total
}
