mod common;

use std::collections::VecDeque;

use hyperroute::graph::{conductance_exact, generate, remove_edges, CutReport, Family};
use hyperroute::{MultiGraph, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rebuilt_distances(g: &MultiGraph, deleted: &[bool], source: usize) -> Vec<Option<usize>> {
    let kept: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|&(e, _)| !deleted[e])
        .map(|(_, &uv)| uv)
        .collect();
    let h = MultiGraph::from_edges(g.num_vertices(), &kept).unwrap();
    let mut dist = vec![None; h.num_vertices()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &(w, _) in h.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(dist[u].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conductance_matches_naive(seed in any::<u64>(), n in 2usize..=9, m in 1usize..=24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, m);
        let (phi, cut) = conductance_exact(&g, 20).unwrap();
        prop_assert_eq!(phi, common::naive_conductance(&g));
        prop_assert_eq!(CutReport::of(&g, cut.subset.clone()).conductance, phi);
        prop_assert!(!cut.subset.is_empty() && cut.subset.len() < n);
    }

    #[test]
    fn deletion_view_matches_rebuilt_graph(seed in any::<u64>(), n in 2usize..=10, m in 0usize..=30, mask in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, m);
        let deleted: Vec<bool> = (0..g.num_edges()).map(|e| mask >> (e % 64) & 1 == 1).collect();
        let ids: Vec<usize> = (0..g.num_edges()).filter(|&e| deleted[e]).collect();
        let view = remove_edges(&g, &ids);
        for v in 0..n {
            prop_assert_eq!(view.bfs_distances(v), rebuilt_distances(&g, &deleted, v));
            let expected = g.neighbors(v).iter().filter(|&&(_, e)| !deleted[e]).count();
            prop_assert_eq!(view.degree(v), expected);
        }
    }

    #[test]
    fn random_regular_is_regular(n in 6usize..=16, d in 3usize..=5, seed in any::<u64>()) {
        prop_assume!(n * d % 2 == 0 && d < n);
        let g = generate(Family::RandomRegular { n, d, seed }).unwrap();
        prop_assert!((0..n).all(|v| g.degree(v) == d));
        prop_assert!(g.is_connected());
        prop_assert_eq!(g.clone(), generate(Family::RandomRegular { n, d, seed }).unwrap());
    }
}

#[test]
fn known_conductances() {
    let k4 = generate(Family::Complete { n: 4 }).unwrap();
    assert_eq!(conductance_exact(&k4, 20).unwrap().0, Rational::new(2, 3));
    let q3 = generate(Family::Hypercube { n: 8 }).unwrap();
    assert_eq!(conductance_exact(&q3, 20).unwrap().0, Rational::new(1, 3));
    let q4 = generate(Family::Hypercube { n: 16 }).unwrap();
    assert_eq!(
        conductance_exact(&q4, 20).unwrap().0,
        common::naive_conductance(&q4)
    );
    let ring = generate(Family::RingOfCliques { cliques: 3, size: 4 }).unwrap();
    assert_eq!(
        conductance_exact(&ring, 20).unwrap().0,
        common::naive_conductance(&ring)
    );
}

#[test]
fn conductance_over_cap_is_an_error() {
    let g = generate(Family::Complete { n: 21 }).unwrap();
    assert!(conductance_exact(&g, 20).is_err());
    assert!(conductance_exact(&MultiGraph::new(1), 20).is_err());
}

#[test]
fn hypercube_needs_power_of_two() {
    assert!(generate(Family::Hypercube { n: 12 }).is_err());
}
