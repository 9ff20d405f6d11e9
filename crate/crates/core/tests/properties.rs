use std::collections::HashSet;

use proptest::prelude::*;

use rainbow_core::delta::{self, DeltaOptions};
use rainbow_core::generators::{color_greedily, random_proper_graph, random_square, Seed};
use rainbow_core::graph::{
    free_vertices, parse_graph, parse_matching, validate_rainbow_matching, write_graph,
    write_matching,
};
use rainbow_core::latin::{
    parse_latin, parse_transversal, serialize_latin, validate_transversal, write_transversal,
};
use rainbow_core::layered;
use rainbow_core::oracle::{
    max_cyclefree_transversal_exact, max_rainbow_matching_exact, max_transversal_exact,
    OracleBudget,
};
use rainbow_core::transversal::{
    self, greedy_linear_digraph, LayerOutcome, TransversalOptions, TransversalSearchState,
};
use rainbow_core::{ColoredGraph, Edge, ForbiddenCycles, RainbowMatching};

fn small_graph() -> impl Strategy<Value = ColoredGraph> {
    (2usize..9).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (1..=n)
            .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
            .collect();
        proptest::sample::subsequence(pairs.clone(), 0..=pairs.len().min(12))
            .prop_shuffle()
            .prop_map(move |p| color_greedily(n, &p))
    })
}

/// Quadratic reference: every pair of edges checked directly.
fn reference_valid(g: &ColoredGraph, m: &[Edge]) -> bool {
    m.iter().all(|e| g.contains(e))
        && m.iter().enumerate().all(|(i, a)| {
            m[i + 1..]
                .iter()
                .all(|b| a.color != b.color && !a.shares_vertex(b))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn validator_matches_reference(g in small_graph(), mask in any::<u32>()) {
        let m: Vec<Edge> = g.edges().iter().enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| *e)
            .collect();
        let valid = validate_rainbow_matching(&g, &RainbowMatching::new(m.clone())).is_ok();
        prop_assert_eq!(valid, reference_valid(&g, &m));
        if valid {
            let free = free_vertices(&g, &RainbowMatching::new(m.clone()));
            prop_assert_eq!(free.len(), g.vertex_count() - 2 * m.len());
        }
    }

    #[test]
    fn solvers_stay_below_the_oracle(g in small_graph()) {
        let best = max_rainbow_matching_exact(&g, OracleBudget::default()).unwrap();
        prop_assert!(validate_rainbow_matching(&g, &best).is_ok());
        let d = g.min_degree();
        match delta::find_rainbow_matching_delta(&g) {
            Ok(m) => {
                prop_assert!(g.vertex_count() + 3 >= 4 * d);
                prop_assert!(validate_rainbow_matching(&g, &m).is_ok());
                prop_assert_eq!(m.len(), d);
                prop_assert!(m.len() <= best.len());
            }
            Err(_) => prop_assert!(g.vertex_count() + 3 < 4 * d),
        }
        if let Ok(sol) = layered::solve(&g) {
            prop_assert!(validate_rainbow_matching(&g, &sol.matching).is_ok());
            prop_assert!(sol.matching.len() <= best.len());
            prop_assert!(sol.matching.len() >= sol.bound);
            prop_assert_eq!(sol.matching.len(), layered::greedy_matching(&g).len() + sol.augmentations());
        }
    }

    #[test]
    fn graph_formats_round_trip(g in small_graph()) {
        prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g.clone());
        let m = layered::greedy_matching(&g);
        prop_assert_eq!(parse_matching(&write_matching(&m)).unwrap(), m);
    }

    #[test]
    fn delta_solver_reaches_min_degree(d in 1usize..7, extra in 0usize..14, seed in any::<u64>()) {
        let g = random_proper_graph((4 * d - 3 + extra).max(2), d, Seed(seed)).unwrap();
        let sol = delta::solve(&g, DeltaOptions { check_invariants: true }).unwrap();
        prop_assert_eq!(sol.matching.len(), g.min_degree());
        prop_assert!(validate_rainbow_matching(&g, &sol.matching).is_ok());
    }

    #[test]
    fn layered_meets_bound_on_random_graphs(d in 1usize..8, extra in 0usize..10, seed in any::<u64>()) {
        let g = random_proper_graph(2 * d + extra, d, Seed(seed)).unwrap();
        let sol = layered::solve(&g).unwrap();
        prop_assert!(sol.matching.len() >= layered::size_bound(g.min_degree()));
        prop_assert!(validate_rainbow_matching(&g, &sol.matching).is_ok());
    }

    #[test]
    fn squares_are_latin_and_round_trip(n in 1usize..12, seed in any::<u64>()) {
        let sq = random_square(n, Seed(seed));
        prop_assert_eq!(parse_latin(&serialize_latin(&sq)).unwrap(), sq.clone());
        prop_assert_eq!(random_square(n, Seed(seed)), sq);
    }

    #[test]
    fn transversal_builder_output(n in 1usize..14, k in 2usize..5, seed in any::<u64>()) {
        let sq = random_square(n, Seed(seed));
        let r = transversal::solve(&sq, k, TransversalOptions { check_invariants: true }).unwrap();
        prop_assert!(validate_transversal(&sq, &r.transversal, ForbiddenCycles::UpTo(k)).is_ok());
        prop_assert!(r.transversal.len() >= transversal::theorem_bound(n, k));
        let start = greedy_linear_digraph(&sq.to_digraph_factorization(), k).arc_count();
        prop_assert_eq!(r.transversal.len(), start + r.stats.augmentations);
        let d = r.transversal.cycles();
        prop_assert_eq!(d.cell_count(), r.transversal.len());
        prop_assert!(d.cycle_lengths().iter().all(|&l| l > k));
        prop_assert_eq!(parse_transversal(&write_transversal(&r.transversal)).unwrap(), r.transversal);

        let cf = transversal::cycle_free_transversal(&sq).unwrap();
        prop_assert!(validate_transversal(&sq, &cf.transversal, ForbiddenCycles::All).is_ok());
        prop_assert!(cf.transversal.cycles().cycles.is_empty());
    }

    #[test]
    fn expansion_layers_are_disjoint(n in 2usize..16, k in 2usize..5, seed in any::<u64>()) {
        let sq = random_square(n, Seed(seed));
        let view = sq.to_digraph_factorization();
        let g1 = greedy_linear_digraph(&view, k);
        let t = g1.arc_count();
        let mut state = TransversalSearchState::new(view, k, g1);
        let mut stats = Default::default();
        while state.expand_layer(&mut stats).unwrap() == LayerOutcome::Expanded {}
        let a: Vec<usize> = state.a_layers().iter().flatten().copied().collect();
        let b: Vec<usize> = state.b_layers().iter().flatten().copied().collect();
        prop_assert_eq!(a.iter().collect::<HashSet<_>>().len(), a.len());
        prop_assert_eq!(b.iter().collect::<HashSet<_>>().len(), b.len());
        prop_assert_eq!(state.a_layers()[0].len(), n - t);
        for (al, bl) in state.a_layers().iter().zip(state.b_layers()) {
            prop_assert_eq!(al.len(), bl.len());
        }
    }

    #[test]
    fn cycle_constraints_are_monotone(n in 1usize..7, seed in any::<u64>()) {
        let sq = random_square(n, Seed(seed));
        let budget = OracleBudget::default();
        let mut sizes = vec![max_transversal_exact(&sq, budget).unwrap().len()];
        for k in 1..=n {
            let t = max_cyclefree_transversal_exact(&sq, ForbiddenCycles::UpTo(k), budget).unwrap();
            prop_assert!(validate_transversal(&sq, &t, ForbiddenCycles::UpTo(k)).is_ok());
            sizes.push(t.len());
        }
        let all = max_cyclefree_transversal_exact(&sq, ForbiddenCycles::All, budget).unwrap();
        sizes.push(all.len());
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{:?}", sizes);
        prop_assert_eq!(sizes[n], all.len());
    }

    #[test]
    fn digraph_and_bipartite_views_agree(n in 1usize..6, seed in any::<u64>()) {
        let sq = random_square(n, Seed(seed));
        let budget = OracleBudget { max_edges: 25, ..OracleBudget::default() };
        let t = max_transversal_exact(&sq, budget).unwrap();
        let m = max_rainbow_matching_exact(&sq.to_bipartite_factorization(), budget).unwrap();
        prop_assert_eq!(t.len(), m.len());
    }

    #[test]
    fn seeds_split_deterministically(master in any::<u64>(), i in any::<u64>(), j in any::<u64>()) {
        prop_assert_eq!(Seed(master).split(i), Seed(master).split(i));
        if i != j {
            prop_assert_ne!(Seed(master).split(i), Seed(master).split(j));
        }
    }
}
