mod common;

use common::*;
use nakamoto_sim::arrivals::ScoreTable;
use nakamoto_sim::blocktree::{build_fully_delayed_chain_with, build_tree, find_loners, BlockTree, GENESIS};
use nakamoto_sim::rng::{derive_seed, rng_from, stream};
use proptest::prelude::*;

fn better(tree: &BlockTree, c: usize, i: usize) -> bool {
    let (x, y) = (tree.block(c).chain_score, tree.block(i).chain_score);
    x > y || (x == y && c < i)
}

/// Every honest block extends the best block its miner could see when mining it.
fn fork_choice_ok(tree: &BlockTree) -> Result<(), String> {
    for &b in tree.honest_block_ids() {
        let blk = tree.block(b);
        let (m, t) = (blk.miner_id as usize, blk.mine_time);
        let best = (0..tree.len())
            .filter(|&c| c != b && tree.is_visible(c, m, t))
            .fold(GENESIS, |acc, c| if better(tree, c, acc) { c } else { acc });
        if blk.parent != Some(best) {
            return Err(format!("block {b} of miner {m} at {t}: parent {:?}, best visible {best}", blk.parent));
        }
    }
    Ok(())
}

#[test]
fn tree_bound_suite_small() {
    let v = tree_bound_suite(150, 100, 11);
    assert!(v.checks > 100_000, "{v:?}");
    assert_eq!(v.total(), 0, "{v:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn removal_never_raises_any_view(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let s = scenario(seed, 3, 15.0);
        prop_assume!(!s.honest.is_empty());
        let mut rng = rng_from(derive_seed(seed, &[stream::AUX]));
        let times = sample_times(&s.honest, s.delta, 100, &mut rng);
        let v = check_removal(&s, pick.index(s.honest.len()), &times);
        prop_assert_eq!(v.removal, 0);
    }

    #[test]
    fn fork_choice_is_valid(seed in any::<u64>()) {
        let s = scenario(seed, 4, 15.0);
        let tree = build_tree(&s.honest, &s.adversary, &s.schedule, s.delta, &ScoreTable::new(&s.specs)).unwrap();
        prop_assert!(fork_choice_ok(&tree).is_ok(), "{:?}", fork_choice_ok(&tree));
    }

    #[test]
    fn loners_are_on_the_fully_delayed_chain(seed in any::<u64>()) {
        let s = scenario(seed, 2, 40.0);
        let chain = build_fully_delayed_chain_with(&s.honest, s.delta, &ScoreTable::new(&s.specs)).unwrap();
        for j in find_loners(&s.honest, s.delta) {
            prop_assert!(chain.blocks.contains(&j), "loner {} missing from {:?}", j, chain.blocks);
        }
    }
}

#[test]
fn zero_delay_ordering_is_tight_for_one_type() {
    // With Δ = 0 and no adversary, every view equals the fully-delayed score.
    let specs = [nakamoto_sim::arrivals::BlockTypeSpec::unit(1.0, 0.0)];
    let (honest, adversary) = nakamoto_sim::arrivals::generate_trial_traces(&specs, 3, 50.0, 4).unwrap();
    let table = ScoreTable::new(&specs);
    let sched = nakamoto_sim::blocktree::DelaySchedule::uniform(honest.len(), 3, 0.0);
    let tree = build_tree(&honest, &adversary, &sched, 0.0, &table).unwrap();
    let chain = build_fully_delayed_chain_with(&honest, 0.0, &table).unwrap();
    let idx = tree.canonical_index();
    for t in [1.0, 10.0, 25.5, 49.9] {
        assert_eq!(idx.score(t), chain.score_at(t));
    }
}
