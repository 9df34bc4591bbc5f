use std::fmt::Write;

use super::ContractionState;

/// Graphviz rendering of T/I: tree edges solid, live links dashed, matching
/// links bold. Compound nodes are boxes labelled with their members.
pub fn state_to_dot(state: &ContractionState<'_>) -> String {
    let matching = state.matching_links();
    let mut out = String::from("graph tap {\n  node [shape=circle];\n");
    for &s in state.super_nodes() {
        let members = state.members(s);
        if members.len() > 1 {
            let label: Vec<String> = members.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "  n{s} [shape=box, label=\"{}\"];", label.join(","));
        } else {
            let _ = writeln!(out, "  n{s} [label=\"{s}\"];");
        }
    }
    for &s in state.super_nodes() {
        if let Some(p) = state.parent(s) {
            let _ = writeln!(out, "  n{p} -- n{s};");
        }
    }
    for ll in state.live_links() {
        let style = if matching.contains(&ll.link) { "bold" } else { "dashed" };
        let _ = writeln!(
            out,
            "  n{} -- n{} [style={style}, constraint=false, label=\"{}\"];",
            ll.a, ll.b, ll.link
        );
    }
    out.push_str("}\n");
    out
}
