mod common;

use std::collections::{BTreeMap, BTreeSet};

use hyperroute::halflayer::{
    check_approx_ratio, greedy_maximal_half_layer, is_half_layer, is_r_maximal, ApproxRatio, ExplicitOracle,
    HalfLayerQuery, HalfLayerState, LayerOracle,
};
use hyperroute::{BipartiteHypergraph, EdgeId, Matching, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random hypergraph together with a random state over it.
fn instance(seed: u64, max_edges: usize) -> (BipartiteHypergraph, HalfLayerState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let na = rng.gen_range(1..=5);
    let nb = rng.gen_range(3..=10);
    let r = rng.gen_range(1..=3);
    let mut h = common::random_hypergraph(&mut rng, na, nb, r, 0..=3);
    while h.num_edges() > max_edges {
        h = common::random_hypergraph(&mut rng, na, nb, r, 0..=2);
    }
    let delta = rng.gen_range(1..=3);
    let active: Vec<usize> = (0..na).filter(|_| rng.gen_bool(0.7)).collect();
    let mut state = HalfLayerState::new(active, delta);
    state.forbidden_b.extend((0..nb).filter(|_| rng.gen_bool(0.15)));
    let mut used = vec![false; nb];
    let mut seen_a = vec![false; na];
    for (id, e) in h.edges().iter().enumerate() {
        if rng.gen_bool(0.4) && !seen_a[e.a] && e.b.iter().all(|&b| !used[b]) {
            seen_a[e.a] = true;
            e.b.iter().for_each(|&b| used[b] = true);
            state.matching.insert(id);
        }
    }
    (h, state)
}

/// `best / size` with `0/0 = 1`.
fn ratio(best: usize, size: usize) -> ApproxRatio {
    match (best, size) {
        (0, 0) => ApproxRatio::Finite(Rational::from_integer(1)),
        (_, 0) => ApproxRatio::Infinite,
        (b, s) => ApproxRatio::Finite(Rational::new(b as u64, s as u64)),
    }
}

fn matching_set(state: &HalfLayerState) -> BTreeSet<EdgeId> {
    state.matching.ids().iter().copied().collect()
}

fn budget(state: &HalfLayerState) -> BTreeMap<usize, usize> {
    state.active_a.iter().map(|&a| (a, state.delta)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn greedy_equals_reference_builder(seed in any::<u64>(), r_prime in 1usize..=3) {
        let (h, state) = instance(seed, 40);
        let r_prime = r_prime.min(h.rank_bound());
        let layer = greedy_maximal_half_layer(&h, &state, r_prime);
        let reference = common::reference_half_layer(&h, &budget(&state), &state.forbidden_b, &matching_set(&state), r_prime);
        prop_assert_eq!(&layer.x, &reference);
        prop_assert!(is_half_layer(&h, &layer.x, &state));
        prop_assert!(is_r_maximal(&h, &layer.x, &state, r_prime).unwrap());
        // Y is exactly the set of matching edges met by X.
        let expected_y: BTreeSet<EdgeId> = matching_set(&state)
            .into_iter()
            .filter(|&f| layer.x.iter().any(|&e| h.edges()[e].meets_in_b(&h.edges()[f])))
            .collect();
        prop_assert_eq!(layer.y.iter().copied().collect::<BTreeSet<_>>(), expected_y);
    }

    #[test]
    fn is_half_layer_matches_definition(seed in any::<u64>(), pick in any::<u64>()) {
        let (h, state) = instance(seed, 40);
        prop_assume!(h.num_edges() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let z: Vec<EdgeId> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..h.num_edges())).collect();
        prop_assert_eq!(
            is_half_layer(&h, &z, &state),
            common::naive_is_half_layer(&h, &z, &budget(&state), &state.forbidden_b, &matching_set(&state))
        );
    }

    #[test]
    fn largest_half_layer_matches_exhaustive(seed in any::<u64>()) {
        let (h, state) = instance(seed, 14);
        let r_prime = h.rank_bound();
        let best = common::exhaustive_best_half_layer(&h, &state, r_prime);
        let layer = greedy_maximal_half_layer(&h, &state, r_prime);
        prop_assert_eq!(check_approx_ratio(&h, &layer.x, &state, r_prime, 20).unwrap(), ratio(best, layer.x.len()));
    }

    #[test]
    fn subset_of_half_layer_is_half_layer(seed in any::<u64>(), drop in any::<u64>()) {
        let (h, state) = instance(seed, 40);
        let layer = greedy_maximal_half_layer(&h, &state, h.rank_bound());
        let z: Vec<EdgeId> = layer.x.iter().enumerate().filter(|(i, _)| drop >> (i % 64) & 1 == 0).map(|(_, &e)| e).collect();
        prop_assert!(is_half_layer(&h, &z, &state));
    }

    #[test]
    fn throttled_oracle_is_sound(seed in any::<u64>(), num in 1u64..=4) {
        let (h, state) = instance(seed, 14);
        let fraction = Rational::new(num, 4);
        let mut oracle = ExplicitOracle::throttled(&h, h.rank_bound(), fraction).measuring(20);
        let mut capacity = vec![0; h.num_a()];
        state.active_a.iter().for_each(|&a| capacity[a] = state.delta);
        let mut forbidden = vec![false; h.num_b()];
        state.forbidden_b.iter().for_each(|&b| forbidden[b] = true);
        let mut owner = vec![None; h.num_b()];
        for &f in state.matching.ids() {
            h.edges()[f].b.iter().for_each(|&b| owner[b] = Some(f));
        }
        let z = oracle.half_layer(&HalfLayerQuery { capacity: &capacity, forbidden: &forbidden, owner: &owner }).unwrap();
        prop_assert!(is_half_layer(&h, &z, &state));
        let full = greedy_maximal_half_layer(&h, &state, h.rank_bound()).x;
        prop_assert!(z.len() <= full.len());
        prop_assert_eq!(&z[..], &full[..z.len()]);
        let best = common::exhaustive_best_half_layer(&h, &state, h.rank_bound());
        let one = ApproxRatio::Finite(Rational::from_integer(1));
        prop_assert_eq!(oracle.realized_alpha(), ratio(best, z.len()).max(one));
    }
}

#[test]
fn all_disjoint_family_is_its_own_best() {
    let mut h = BipartiteHypergraph::new(3, 6, 2);
    h.add_edge(0, vec![0, 1]);
    h.add_edge(1, vec![2, 3]);
    h.add_edge(2, vec![4, 5]);
    let state = HalfLayerState::new(0..3, 1);
    assert_eq!(common::exhaustive_best_half_layer(&h, &state, 2), 3);
}

#[test]
fn single_vertex_delta_one() {
    let mut h = BipartiteHypergraph::new(1, 4, 1);
    for b in 0..4 {
        h.add_edge(0, vec![b]);
    }
    let state = HalfLayerState::new([0], 1);
    assert_eq!(common::exhaustive_best_half_layer(&h, &state, 1), 1);
    assert_eq!(greedy_maximal_half_layer(&h, &state, 1).x, vec![0]);
}

#[test]
fn matched_edge_is_never_a_layer_edge() {
    let mut h = BipartiteHypergraph::new(1, 2, 1);
    h.add_edge(0, vec![0]);
    h.add_edge(0, vec![1]);
    let mut state = HalfLayerState::new([0], 2);
    state.matching = Matching::from_iter([0]);
    assert!(!is_half_layer(&h, &[0], &state));
    assert_eq!(greedy_maximal_half_layer(&h, &state, 1).x, vec![1]);
}
