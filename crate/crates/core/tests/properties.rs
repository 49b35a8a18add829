use proptest::prelude::*;
use wwls::metric::GraphEmbedding;
use wwls::{
    bocs_from_multiset, l1_ted, node_subtree_hashes, pairwise_matrix, wwl_baseline_distance, wwls_distance, Execution,
    Graph, HashParams, MatrixMode, Solver, DEFAULT_MODULUS,
};

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (1..=max_nodes).prop_flat_map(|n| {
        (
            prop::collection::vec(0u64..3, n),
            prop::collection::vec((0..n, 0..n), 0..2 * n),
        )
            .prop_map(|(labels, pairs)| {
                let edges: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Graph::from_edges(labels, edges).unwrap()
            })
    })
}

fn arb_perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn node_hashes_follow_permutations(
        (g, perm) in arb_graph(9).prop_flat_map(|g| { let n = g.node_count(); (Just(g), arb_perm(n)) }),
        h in 0usize..4,
        seed in any::<u64>(),
    ) {
        let params = HashParams::new(DEFAULT_MODULUS, 2, h, seed).unwrap();
        let pg = g.permuted(&perm).unwrap();
        for (v, &pv) in perm.iter().enumerate() {
            let a = node_subtree_hashes(&g, v, &params).unwrap();
            let b = node_subtree_hashes(&pg, pv, &params).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn embeddings_match_traversal(g in arb_graph(8), h in 0usize..4) {
        let params = HashParams::new(DEFAULT_MODULUS, 2, h, 1).unwrap();
        let e = GraphEmbedding::new(&g, &params).unwrap();
        for v in 0..g.node_count() {
            let dfs = bocs_from_multiset(&node_subtree_hashes(&g, v, &params).unwrap());
            prop_assert_eq!(&e.nodes()[v], &dfs);
            prop_assert_eq!(l1_ted(&e.nodes()[v], &dfs).unwrap(), 0);
        }
    }

    #[test]
    fn distances_are_symmetric_and_bounded(g1 in arb_graph(10), g2 in arb_graph(10), h in 0usize..3) {
        let params = HashParams::new(DEFAULT_MODULUS, 2, h, 2).unwrap();
        let ab = wwls_distance(&g1, &g2, &params, &Solver::Exact).unwrap();
        let ba = wwls_distance(&g2, &g1, &params, &Solver::Exact).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!(ab >= 0.0);
        let wl = wwl_baseline_distance(&g1, &g2, h).unwrap();
        prop_assert!((0.0..=1.0).contains(&wl));
        prop_assert!((wl - wwl_baseline_distance(&g2, &g1, h).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn matrix_is_symmetric(graphs in prop::collection::vec(arb_graph(7), 1..6)) {
        let params = HashParams::new(DEFAULT_MODULUS, 2, 2, 0).unwrap();
        let m = pairwise_matrix(&graphs, &params, MatrixMode::Distance, &Solver::Exact, Execution::Parallel).unwrap();
        for i in 0..m.n {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..m.n {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }
}
