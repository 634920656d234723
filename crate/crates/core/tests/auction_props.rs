use bmcm_core::auction::{self, level_cap, AuctionState};
use bmcm_core::graph::{generate_bnp, GraphGenSpec};
use bmcm_core::verify::{self, LevelSets};
use bmcm_core::{BipartiteGraph, SelectionPolicy, Termination};
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = BipartiteGraph> {
    (1usize..40, 0.02f64..0.6, any::<u64>())
        .prop_map(|(n, p, seed)| generate_bnp(&GraphGenSpec::new(n, p, seed).unwrap()))
}

fn arb_policy() -> impl Strategy<Value = SelectionPolicy> {
    prop_oneof![
        Just(SelectionPolicy::Fifo),
        Just(SelectionPolicy::Lifo),
        any::<u64>().prop_map(|seed| SelectionPolicy::Random { seed }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn per_step_invariants(g in arb_graph(), policy in arb_policy()) {
        let mut previous = vec![0u32; g.n()];
        let mut previous_sets = LevelSets::from_levels(&previous);
        let mut ok = true;
        let result = auction::run_with(&g, policy, |_, state| {
            let h = state.h();
            ok &= state.iteration() == h.iter().map(|&x| u64::from(x)).sum::<u64>();
            ok &= h.iter().zip(&previous).all(|(a, b)| a >= b);
            ok &= state.check_eps_cs();
            let snap = state.snapshot();
            ok &= verify::check_level_lemma(&g, &snap);
            let sets = LevelSets::from_levels(h);
            ok &= sets.is_nested() && previous_sets.is_subset_of(&sets);
            previous.copy_from_slice(h);
            previous_sets = sets;

            // every left vertex is matched, queued or unmatchable, exactly once
            let mut seen = vec![0u8; g.n()];
            for (u, _) in state.matching().pairs() { seen[u] += 1; }
            for &u in state.free_queue() { seen[u] += 1; }
            for &u in state.unmatchable() { seen[u] += 1; }
            ok &= seen.iter().all(|&c| c == 1);
        });
        prop_assert!(ok);
        prop_assert!(result.iterations <= level_cap(g.n()));
        prop_assert_eq!(result.iterations, result.h.iter().map(|&x| u64::from(x)).sum::<u64>());
        prop_assert_eq!(result.termination == Termination::Perfect, result.cardinality() == g.n());
        result.matching.validate(&g).unwrap();
    }

    #[test]
    fn same_graph_same_result(g in arb_graph()) {
        prop_assert_eq!(auction::run(&g), auction::run(&g));
    }

    #[test]
    fn agrees_with_oracle(g in arb_graph()) {
        let r = auction::run(&g);
        let oracle = verify::hopcroft_karp(&g).len();
        prop_assert!(r.cardinality() <= oracle);
        prop_assert_eq!(r.termination == Termination::Perfect, oracle == g.n());
    }

    #[test]
    fn path_length_lemma_mid_run(seed in any::<u64>()) {
        let g = generate_bnp(&GraphGenSpec::new(32, 0.3, seed).unwrap());
        let mut ok = true;
        auction::run_with(&g, SelectionPolicy::Fifo, |_, state| {
            ok &= verify::check_path_length_lemma(&g, &state.snapshot());
        });
        prop_assert!(ok);
    }
}

/// 1000 random prefixes of bid sequences, each checked for epsilon-CS at its end.
#[test]
fn eps_cs_after_random_prefixes() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000u64 {
        let n = rng.gen_range(2..48);
        let p = rng.gen_range(0.03..0.5);
        let g = generate_bnp(&GraphGenSpec::new(n, p, i).unwrap());
        let mut state = AuctionState::new(&g);
        let steps = rng.gen_range(0..4 * n);
        for _ in 0..steps {
            if state.termination().is_some() {
                break;
            }
            state.bid_step().unwrap();
        }
        assert!(state.check_eps_cs(), "instance {i}");
    }
}

#[test]
fn level_lemma_violation_detected() {
    use bmcm_core::{Matching, Snapshot};
    let g = BipartiteGraph::complete(2);
    let snap = Snapshot {
        h: vec![3, 0],
        matching: Matching::from_pairs(2, [(0, 0)]).unwrap(),
        free: vec![1],
        iteration: 3,
    };
    assert!(!verify::check_level_lemma(&g, &snap));
    assert!(!auction::check_eps_cs(&g, &snap));
}
