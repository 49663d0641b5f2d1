mod common;

use std::fs;
use std::path::Path;

use hyperroute::cli::RunManifest;
use hyperroute::format::{
    parse_demands, parse_graph, parse_hypergraph, parse_matching, parse_solution, write_demands, write_graph,
    write_hypergraph, write_matching, write_solution,
};
use hyperroute::routing::PathSolution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hypergraph_round_trips(seed in any::<u64>(), na in 1usize..=6, nb in 1usize..=12, r in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_hypergraph(&mut rng, na, nb, r, 0..=3);
        let text = write_hypergraph(&h);
        prop_assert_eq!(parse_hypergraph(&text).unwrap(), h);
    }

    #[test]
    fn graph_round_trips(seed in any::<u64>(), n in 2usize..=12, m in 0usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, m);
        prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn lists_round_trip(
        ids in prop::collection::vec(0usize..1000, 0..20),
        pairs in prop::collection::vec((0usize..50, 0usize..50), 0..20),
        paths in prop::collection::vec(prop::collection::vec(0usize..50, 1..8), 0..10),
    ) {
        prop_assert_eq!(parse_matching(&write_matching(&ids)).unwrap(), ids);
        prop_assert_eq!(parse_demands(&write_demands(&pairs)).unwrap(), pairs);
        let sol = PathSolution { paths };
        prop_assert_eq!(parse_solution(&write_solution(&sol)).unwrap(), sol);
    }

    #[test]
    fn parsers_never_panic(text in "[0-9 \n\t-]{0,80}") {
        let _ = parse_hypergraph(&text);
        let _ = parse_matching(&text);
        let _ = parse_graph(&text);
        let _ = parse_demands(&text);
        let _ = parse_solution(&text);
    }

    #[test]
    fn errors_point_at_existing_lines(text in "[0-9 \n]{0,60}") {
        let lines = text.split('\n').count();
        for res in [parse_hypergraph(&text).err(), parse_graph(&text).err()].into_iter().flatten() {
            prop_assert!(res.line >= 1 && res.line <= lines.max(1));
        }
    }
}

#[test]
fn rejects_malformed_input() {
    assert_eq!(parse_graph("3 2\n0 1\n").unwrap_err().line, 2);
    assert_eq!(parse_graph("3 1\n0 1 2\n").unwrap_err().line, 2);
    assert_eq!(parse_graph("3 1\n0 3\n").unwrap_err().line, 2);
    assert_eq!(parse_graph("3 1\n\n0 1\n").unwrap_err().line, 2);
    assert!(parse_graph("3 1\n0 1\n\n\n").is_ok());
    assert_eq!(parse_hypergraph("1 2 1 1\n0 2 0 1\n").unwrap_err().line, 2);
    assert_eq!(parse_hypergraph("1 2 1 2\n0 2 0 0\n").unwrap_err().line, 2);
    assert_eq!(parse_hypergraph("1 2 1 0\n0 1 0\n").unwrap_err().line, 1);
    assert!(parse_hypergraph("1 99999999999 0 1\n").is_err());
    assert!(parse_demands("0 -1\n").is_err());
    assert!(parse_matching("").unwrap().is_empty());
}

/// Every checked-in fuzz seed must parse without panicking.
#[test]
fn fuzz_corpus_seeds_parse() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut seen = 0;
    for target in [
        "hypergraph",
        "matching",
        "graph",
        "demands",
        "solution",
        "manifest",
    ] {
        let dir = corpus.join(target);
        for entry in fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())) {
            let bytes = fs::read(entry.unwrap().path()).unwrap();
            let text = String::from_utf8_lossy(&bytes);
            match target {
                "hypergraph" => drop(parse_hypergraph(&text)),
                "matching" => drop(parse_matching(&text)),
                "graph" => drop(parse_graph(&text)),
                "demands" => drop(parse_demands(&text)),
                "solution" => drop(parse_solution(&text)),
                _ => drop(serde_json::from_slice::<RunManifest>(&bytes)),
            }
            seen += 1;
        }
    }
    assert!(seen >= 10);
}
