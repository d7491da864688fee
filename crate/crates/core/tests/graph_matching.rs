use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randobdd::graph::*;
use randobdd::matching::*;
use randobdd::mis::{distributed_mis_sim, distributed_mis_sim_with, verify_mis, MisRule};

fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n as u32 {
        for v in 0..u {
            if rng.random_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

fn encoded(g: &Graph) -> (randobdd::ObddManager, EncodedGraph) {
    let vars = GraphVars::for_nodes(g.num_nodes()).unwrap();
    let mut m = vars.manager().unwrap();
    let eg = encode_graph(&mut m, &vars, g).unwrap();
    (m, eg)
}

#[test]
fn random_graph_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..5 {
        let g = gnp(32, 0.2, &mut rng);
        let (m, eg) = encoded(&g);
        assert_eq!(decode_edges(&m, &eg).unwrap(), *g.edges());
        assert_eq!(eg.num_edges(&m).unwrap() as usize, g.num_edges());
    }
}

#[test]
fn matrix_market_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = gnp(20, 0.3, &mut rng);
    let mut text = format!(
        "%%MatrixMarket matrix coordinate pattern symmetric\n20 20 {}\n",
        g.num_edges()
    );
    for &(u, v) in g.edges() {
        // lower triangle, 1-based
        text.push_str(&format!("{} {}\n", v + 1, u + 1));
    }
    let parsed = parse_str(&text, Format::MatrixMarket).unwrap();
    let (m, eg) = encoded(&parsed.graph);
    assert_eq!(decode_edges(&m, &eg).unwrap(), *g.edges());
}

#[test]
fn edge_list_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = gnp(13, 0.4, &mut rng);
    let dir = std::env::temp_dir().join(format!("randobdd-el-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.el");
    std::fs::write(&path, g.to_edge_list()).unwrap();
    let parsed = parse_graph(&path, Format::EdgeList).unwrap();
    assert_eq!(parsed.graph, g);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn single_deletion_step_halves_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = gnp(64, 0.2, &mut rng);
    let (mut m, eg) = encoded(&g);
    let before = g.num_edges() as f64;
    let runs = 2000;
    let mut ratios = Vec::with_capacity(runs);
    let mut seeds = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..runs {
        let mut r = ChaCha8Rng::seed_from_u64(seeds.random());
        let f = deletion_function(&mut m, &eg.vars, &mut r).unwrap();
        let kept = m.and(eg.chi_e, f).unwrap();
        let after = m.sat_count(kept, 2 * eg.vars.n).unwrap() as f64 / 2.0;
        ratios.push(after / before);
    }
    let mean = ratios.iter().sum::<f64>() / runs as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let sigma = (var / runs as f64).sqrt();
    assert!(
        (mean - 0.5).abs() <= 3.0 * sigma,
        "mean {mean}, sigma {sigma}"
    );
}

#[test]
fn stats_are_deterministic_and_sane() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = gnp(40, 0.15, &mut rng);
    let run = |seed| {
        let (mut m, eg) = encoded(&g);
        let cfg = RmConfig {
            seed,
            sparsify: true,
            ..RmConfig::default()
        };
        maximal_matching_rm(&mut m, &eg, &cfg).unwrap()
    };
    let (a, b) = (run(5), run(5));
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.edges, b.edges);
    assert_eq!(a.stats.inner_per_outer.len(), a.stats.outer_iterations);
    assert_eq!(
        a.stats.inner_per_outer.iter().sum::<usize>(),
        a.stats.inner_iterations_total
    );
    assert!(a.stats.func_ops > 0);
    assert!(a.edges.len() <= g.num_edges());
}

#[test]
fn density_graphs_get_maximal_matchings() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for n in [3usize, 5, 7] {
        let vars = GraphVars::new(n).unwrap();
        let mut m = vars.manager().unwrap();
        let eg = random_density_graph(&mut m, &vars, 0.2, 20, &mut rng).unwrap();
        let g = Graph::from_edges(eg.num_nodes, decode_edges(&m, &eg).unwrap()).unwrap();
        for sparsify in [false, true] {
            let cfg = RmConfig {
                seed: rng.random(),
                sparsify,
                ..RmConfig::default()
            };
            let r = maximal_matching_rm(&mut m, &eg, &cfg).unwrap();
            assert_eq!(verify_matching(&g, &r.edges).unwrap(), (true, true));
        }
    }
}

#[test]
fn mis_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(256);
    let mut rounds = 0;
    for seed in 0..20 {
        let g = gnp(256, 0.05, &mut rng);
        let r = distributed_mis_sim(&g, seed);
        assert_eq!(verify_mis(&g, &r.set), (true, true));
        rounds += r.rounds;
    }
    assert!(rounds as f64 / 20.0 <= 4.0 * 8.0);
}

#[test]
fn strict_minimum_rule_is_correct_but_slow() {
    let mut rng = ChaCha8Rng::seed_from_u64(256);
    let g = gnp(128, 0.1, &mut rng);
    let max = distributed_mis_sim_with(&g, 1, MisRule::StrictMax);
    let min = distributed_mis_sim_with(&g, 1, MisRule::StrictMin);
    assert_eq!(verify_mis(&g, &min.set), (true, true));
    assert!(min.rounds > max.rounds);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encode_decode_round_trip(
        n in 1usize..20,
        raw in proptest::collection::vec((0u32..20, 0u32..20), 0..40),
    ) {
        let edges: Vec<(u32, u32)> = raw
            .into_iter()
            .map(|(u, v)| (u % n as u32, v % n as u32))
            .filter(|(u, v)| u != v)
            .collect();
        let g = Graph::from_edges(n, edges).unwrap();
        let (mut m, eg) = encoded(&g);
        prop_assert_eq!(decode_edges(&m, &eg).unwrap(), g.edges().clone());
        let swapped = eg.vars.swap_xy(&mut m, eg.chi_e).unwrap();
        prop_assert_eq!(swapped, eg.chi_e);
    }

    #[test]
    fn matchings_are_maximal(
        n in 2usize..14,
        p in 0.05f64..0.9,
        graph_seed in any::<u64>(),
        seed in any::<u64>(),
        sparsify in any::<bool>(),
    ) {
        let g = gnp(n, p, &mut ChaCha8Rng::seed_from_u64(graph_seed));
        let (mut m, eg) = encoded(&g);
        let cfg = RmConfig { seed, sparsify, ..RmConfig::default() };
        let r = maximal_matching_rm(&mut m, &eg, &cfg).unwrap();
        prop_assert_eq!(verify_matching(&g, &r.edges).unwrap(), (true, true));
        // the input handle survives collection
        prop_assert_eq!(decode_edges(&m, &eg).unwrap(), g.edges().clone());
    }

    #[test]
    fn mis_is_independent_and_maximal(
        n in 0usize..40,
        p in 0.0f64..0.6,
        seed in any::<u64>(),
    ) {
        let g = gnp(n, p, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = distributed_mis_sim(&g, seed);
        prop_assert_eq!(verify_mis(&g, &r.set), (true, true));
        let isolated: BTreeSet<u32> = (0..n as u32).filter(|&v| g.degree(v) == 0).collect();
        prop_assert!(isolated.is_subset(&r.set));
    }
}
