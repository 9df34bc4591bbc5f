use super::*;
use crate::fixtures::*;
use crate::lpbound::{build_pi_model, solve_lp};
use crate::ratio::{frac, int};

fn closed(inst: TapInstance) -> TapInstance {
    inst.shadow_completion()
}

fn start(inst: &TapInstance) -> ContractionState<'_> {
    let cfg = LeafWeightConfig::default();
    let cover = min_weight_exact_cover(&cfg, inst).unwrap();
    init_state(inst, &cover, &cfg)
}

fn links(pairs: &[(usize, usize)]) -> Vec<Link> {
    pairs.iter().map(|&(u, v)| Link::new(u, v)).collect()
}

fn audit(inst: &TapInstance) -> AuditReport {
    let cfg = LeafWeightConfig::default();
    let c = closed(inst.clone());
    let sol = solve(inst, &cfg).unwrap();
    let lp = solve_lp(&build_pi_model(&c).unwrap()).unwrap();
    audit_ledger(&sol.trace, &c, &lp, &sol.cover)
}

#[test]
fn fixture_2_initial_state() {
    let inst = closed(fixture_2());
    let st = start(&inst);
    assert_eq!(st.matching_links().iter().copied().collect::<Vec<_>>(), links(&[(2, 3)]));
    let m = st.matching();
    assert!(st.is_semi_closed(NodeId(1), &m).0);
    assert!(!st.is_semi_closed(NodeId(2), &m).0);
    let minimal: Vec<NodeId> = st.minimally_semi_closed(&m).iter().map(|t| t.root).collect();
    assert_eq!(minimal, vec![NodeId(1)]);
    assert_eq!(st.up_link(NodeId(2)).unwrap(), Link::new(0, 2));
    assert_eq!(st.up_link(NodeId(3)).unwrap(), Link::new(1, 3));
    assert_eq!(st.tokens_of(&[NodeId(1), NodeId(2), NodeId(3)]).constant, frac(9, 4));
}

#[test]
fn fixture_2_trace() {
    let sol = solve(&fixture_2(), &LeafWeightConfig::default()).unwrap();
    let kinds: Vec<ContractionKind> = sol.trace.records.iter().map(|r| r.kind).collect();
    assert_eq!(kinds, vec![ContractionKind::SemiClosed, ContractionKind::SemiClosed]);
    assert_eq!(sol.trace.records[0].links, links(&[(2, 3)]));
    assert_eq!(sol.trace.records[1].links, links(&[(0, 1)]));
    assert_eq!(sol.links, links(&[(0, 2), (2, 3)]).into_iter().collect());
    assert_eq!(sol.trace.replay(), sol.closed_links);
}

#[test]
fn small_fixtures_solve() {
    let cfg = LeafWeightConfig::default();
    let s1 = solve(&fixture_1(), &cfg).unwrap();
    assert_eq!(s1.links, links(&[(0, 1)]).into_iter().collect());
    let s3 = solve(&fixture_3(), &cfg).unwrap();
    assert_eq!(s3.links, links(&[(0, 3)]).into_iter().collect());
}

#[test]
fn greedy_gadget_trace() {
    let sol = solve(&greedy_gadget(), &LeafWeightConfig::default()).unwrap();
    let kinds: Vec<ContractionKind> = sol.trace.records.iter().map(|r| r.kind).collect();
    assert_eq!(
        kinds,
        vec![ContractionKind::SemiClosed, ContractionKind::Greedy, ContractionKind::SemiClosed]
    );
    assert_eq!(sol.trace.records[1].links, links(&[(2, 5)]));
    assert_eq!(sol.size(), 3);
}

#[test]
fn dangerous_tree_detected() {
    let inst = closed(dangerous_gadget());
    let mut st = start(&inst);
    assert_eq!(
        st.matching_links().iter().copied().collect::<Vec<_>>(),
        links(&[(3, 5), (6, 7)])
    );
    let (summary, cover) = st.pick_semi_closed().unwrap().unwrap();
    assert_eq!(summary.root, NodeId(4));
    st.contract_subtree(ContractionKind::SemiClosed, summary, cover, Vec::new()).unwrap();
    assert!(st.greedy_candidates().is_empty());

    let m = st.matching();
    let minimal = st.minimally_semi_closed(&m);
    assert_eq!(minimal.len(), 1);
    let cert = st.is_dangerous(&minimal[0]).expect("dangerous");
    assert_eq!(
        (cert.root, cert.a, cert.b, cert.b_prime),
        (NodeId(1), NodeId(4), NodeId(5), NodeId(3))
    );
    assert!(st.pick_semi_closed().unwrap().is_none());

    let (tree, cover, certs) = st.find_tree().unwrap();
    assert_eq!(tree.root, NodeId(0));
    // the shadow (3,4) is the smallest live link into the compound leaf
    assert_eq!(cover, links(&[(0, 5), (3, 4)]));
    assert_eq!(inst.map_to_original(&cover), links(&[(0, 5), (3, 6)]).into_iter().collect());
    assert_eq!(certs, vec![cert]);
    assert_eq!(cover.len(), tree.m_prime.len() + tree.u_prime.len());
    assert!(st.is_dangerous(&tree).is_none());
}

#[test]
fn no_dangerous_tree_without_cross_link() {
    // the gadget without the link from the compound leaf to 3
    let text = DANGEROUS_GADGET.replace("link 3 6\n", "link 0 6\n");
    let inst = closed(crate::instance::parse_instance(&text).unwrap());
    let mut st = start(&inst);
    let (summary, cover) = st.pick_semi_closed().unwrap().unwrap();
    st.contract_subtree(ContractionKind::SemiClosed, summary, cover, Vec::new()).unwrap();
    let m = st.matching();
    assert!(st.minimally_semi_closed(&m).iter().all(|t| st.is_dangerous(t).is_none()));
}

#[test]
fn dangerous_gadget_solves_optimally() {
    for inst in [dangerous_gadget(), double_dangerous_gadget()] {
        let sol = solve(&inst, &LeafWeightConfig::default()).unwrap();
        let finds: Vec<&ContractionRecord> = sol
            .trace
            .records
            .iter()
            .filter(|r| r.kind == ContractionKind::FindTree)
            .collect();
        assert!(!finds.is_empty());
        assert!(finds.iter().all(|r| !r.rewritten.is_empty()));
        assert_eq!(sol.size(), 3 * (inst.leaves().len() / 4));
    }
}

#[test]
fn contraction_rejects_partial_cover() {
    let inst = closed(fixture_3());
    let mut st = start(&inst);
    let (_, summary) = st.is_semi_closed(NodeId(0), &st.matching());
    let err = st
        .contract_subtree(ContractionKind::SemiClosed, summary, Vec::new(), Vec::new())
        .unwrap_err();
    assert!(matches!(err, Error::Invariant { .. }));
}

#[test]
fn audits_pass_on_fixtures() {
    for inst in [fixture_1(), fixture_2(), fixture_3(), greedy_gadget(), dangerous_gadget()] {
        let report = audit(&inst);
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.record_tokens, &report.initial_tokens + int(report.steps.len() as i64 - 1));
    }
}

#[test]
fn fixture_1_tokens() {
    let report = audit(&fixture_1());
    assert_eq!(report.steps.len(), 1);
    // leaf 1 owns 5/4, the root 1 + x(δ(0))/2 with x(δ(0)) = 1
    assert_eq!(report.steps[0].tokens, frac(11, 4));
    assert_eq!(report.coupons_rhs, frac(7, 4));
}

#[test]
fn trace_lines_and_dot() {
    let opts = SolveOptions { snapshots: true };
    let sol = solve_with(&fixture_2(), &LeafWeightConfig::default(), &opts).unwrap();
    let lines = sol.trace.to_json_lines();
    assert_eq!(lines.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "semi-closed");
    assert_eq!(first["tokens"]["constant"], "9/4");
    assert_eq!(sol.snapshots.len(), 3);
    assert!(sol.snapshots[0].starts_with("graph tap {"));
    assert!(sol.snapshots[2].contains("shape=box"));
}
