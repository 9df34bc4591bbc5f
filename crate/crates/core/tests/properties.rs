use proptest::prelude::*;
use tap_core::gen::{generate, GenSpec, TreeShape};
use tap_core::leafcover::{min_weight_exact_cover, LeafWeightConfig};
use tap_core::lpbound::{build_cut_model, build_pi_model, solve_lp, solve_lp_float};
use tap_core::oracle::{exact_leaf_cover_opt, exact_opt};
use tap_core::ratio::{self, frac, int, Rational};
use tap_core::{audit_ledger, solve, Link, NodeId, TapInstance};

fn instance() -> impl Strategy<Value = TapInstance> {
    (4usize..=11, 1i64..=4, any::<u64>(), 0usize..3)
        .prop_map(|(n, d, seed, mode)| generate(&GenSpec::new(n, frac(d, 10), seed, TreeShape::ALL[mode])).unwrap())
        .prop_filter("leaf cap", |inst| inst.leaves().len() <= 8 && inst.link_count() <= 40)
}

/// Bridges of the multigraph T + links, by DFS low-links. Edges are ids so
/// that a link parallel to a tree edge counts as a second edge.
fn has_bridge(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (id, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    let mut tin = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut bridge = false;
    // (node, edge id used to enter, next adjacency index)
    let mut stack = vec![(0usize, usize::MAX, 0usize)];
    tin[0] = 0;
    low[0] = 0;
    while let Some(top) = stack.last_mut() {
        let (v, via, next) = *top;
        if next < adj[v].len() {
            top.2 += 1;
            let (w, id) = adj[v][next];
            if id == via {
                continue;
            }
            if tin[w] == usize::MAX {
                timer += 1;
                tin[w] = timer;
                low[w] = timer;
                stack.push((w, id, 0));
            } else {
                low[v] = low[v].min(tin[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[v]);
                if low[v] > tin[p] {
                    bridge = true;
                }
            }
        }
    }
    bridge || tin.contains(&usize::MAX)
}

fn tree_edges(inst: &TapInstance) -> Vec<(usize, usize)> {
    inst.tree().edges().iter().map(|e| (e.parent.index(), e.child.index())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn validation_matches_bridge_search(inst in instance(), mask in any::<u64>()) {
        let links: Vec<Link> = inst.links().collect();
        let chosen: Vec<Link> = links.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, &l)| l).collect();
        let mut edges = tree_edges(&inst);
        edges.extend(chosen.iter().map(|l| (l.u().index(), l.v().index())));
        let two_edge_connected = !has_bridge(inst.node_count(), &edges);
        prop_assert_eq!(inst.validate_solution(&chosen).unwrap(), two_edge_connected);
    }

    #[test]
    fn solve_is_feasible_and_within_bound(inst in instance()) {
        let cfg = LeafWeightConfig::default();
        let sol = solve(&inst, &cfg).unwrap();
        let mut edges = tree_edges(&inst);
        edges.extend(sol.links.iter().map(|l| (l.u().index(), l.v().index())));
        prop_assert!(!has_bridge(inst.node_count(), &edges));

        let closed = inst.shadow_completion();
        let lp = solve_lp(&build_pi_model(&closed).unwrap()).unwrap();
        prop_assert!(int(sol.size() as i64) <= frac(7, 4) * &lp.tau);
        let report = audit_ledger(&sol.trace, &closed, &lp, &sol.cover);
        prop_assert!(report.passed(), "{:?}", report.failures);
        prop_assert!(exact_opt(&inst, 1).unwrap().opt_size <= sol.size());
    }

    #[test]
    fn lp_values_are_ordered(inst in instance()) {
        let closed = inst.shadow_completion();
        let cut = solve_lp(&build_cut_model(&inst)).unwrap().tau;
        let cut_closed = solve_lp(&build_cut_model(&closed)).unwrap().tau;
        let tau = solve_lp(&build_pi_model(&closed).unwrap()).unwrap().tau;
        // shadows do not change the cut relaxation
        prop_assert_eq!(&cut, &cut_closed);
        prop_assert!(cut <= tau);
        prop_assert!(tau <= int(exact_opt(&inst, 1).unwrap().opt_size as i64));
    }

    #[test]
    fn float_solver_tracks_exact(inst in instance()) {
        let model = build_pi_model(&inst.shadow_completion()).unwrap();
        let exact = solve_lp(&model).unwrap().tau;
        let float = solve_lp_float(&model).unwrap().tau;
        prop_assert!((ratio::to_f64(&exact) - ratio::to_f64(&float)).abs() < 1e-6);
    }

    #[test]
    fn matching_cover_is_optimal(inst in instance(), rho_num in 6i64..=10) {
        let cfg = LeafWeightConfig::new(frac(rho_num, 4)).unwrap();
        let closed = inst.shadow_completion();
        let matched = min_weight_exact_cover(&cfg, &closed).unwrap();
        let brute = exact_leaf_cover_opt(&closed, &cfg).unwrap();
        prop_assert_eq!(matched.weight, brute.weight);
    }

    /// Odd-set rows are generated for leaf sets only. Every vertex set with
    /// an odd number of leaves has a left-hand side at least that of its
    /// leaf part, so the solved x satisfies the rows for all of them.
    #[test]
    fn leaf_sets_dominate_odd_vertex_sets(inst in instance().prop_filter("small", |i| i.node_count() <= 10)) {
        let closed = inst.shadow_completion();
        let lp = solve_lp(&build_pi_model(&closed).unwrap()).unwrap();
        let n = closed.node_count();
        let is_leaf: Vec<bool> = (0..n).map(|v| closed.is_leaf(NodeId(v))).collect();
        for a in 1u32..(1 << n) {
            let leaves = (0..n).filter(|&v| a >> v & 1 == 1 && is_leaf[v]).count();
            if leaves % 2 == 0 {
                continue;
            }
            let lhs: Rational = lp
                .x
                .iter()
                .filter(|(l, _)| a >> l.u().index() & 1 == 1 || a >> l.v().index() & 1 == 1)
                .fold(int(0), |acc, (_, v)| acc + v);
            prop_assert!(lhs >= int(leaves.div_ceil(2) as i64), "set {:b}", a);
        }
    }

    #[test]
    fn twin_rows_hold_in_the_optimum(inst in instance()) {
        let closed = inst.shadow_completion();
        let lp = solve_lp(&build_pi_model(&closed).unwrap()).unwrap();
        for (&e, &s) in closed.twins() {
            prop_assert_eq!(lp.value(e), lp.degree(s));
        }
        for &v in closed.leaves() {
            prop_assert_eq!(lp.degree(v), int(1));
        }
    }
}

#[test]
fn bridge_search_sanity() {
    // a path with one end-to-end link is a cycle; without it every edge is a bridge
    assert!(!has_bridge(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]));
    assert!(has_bridge(4, &[(0, 1), (1, 2), (2, 3)]));
    // a parallel link doubles the edge
    assert!(!has_bridge(2, &[(0, 1), (0, 1)]));
}
