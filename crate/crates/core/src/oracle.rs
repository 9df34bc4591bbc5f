//! Brute-force ground truth: the optimum by exhaustive subset search, the
//! minimum exact leaf cover by enumeration, and a shadow-minimal optimum
//! with as many twin links as possible.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Link, NodeId, TapInstance};
use crate::leafcover::{cover_weight, link_weight, LeafWeightConfig};
use crate::ratio::{self, Rational};

pub const DEFAULT_WITNESS_CAP: usize = 1000;
pub const MAX_LINKS: usize = 40;
pub const MAX_EDGES: usize = 64;
pub const MAX_LEAVES: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    /// Search nodes visited, over all size rounds.
    pub nodes: u64,
    /// Sizes tried before a cover was found.
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub opt_size: usize,
    /// Optimal link sets in input links, up to the witness cap.
    pub witnesses: Vec<BTreeSet<Link>>,
    /// Set when more optimal sets exist than were kept.
    pub truncated: bool,
    pub enumeration_stats: EnumerationStats,
}

/// Per-link coverage masks over tree edges, indexed by child node.
struct Coverage {
    links: Vec<Link>,
    masks: Vec<u64>,
    full: u64,
    /// For each edge bit, the links covering it in ascending order.
    by_edge: Vec<Vec<usize>>,
}

impl Coverage {
    fn new(inst: &TapInstance, links: Vec<Link>) -> Result<Self> {
        let tree = inst.tree();
        let edges = tree.edges();
        if edges.len() > MAX_EDGES {
            return Err(Error::OracleTooLarge(format!("{} tree edges, cap {MAX_EDGES}", edges.len())));
        }
        let mut bit = vec![usize::MAX; inst.node_count()];
        for (i, e) in edges.iter().enumerate() {
            bit[e.child.index()] = i;
        }
        let masks: Vec<u64> = links
            .iter()
            .map(|l| {
                tree.path_edges(l.u(), l.v())
                    .iter()
                    .fold(0u64, |m, e| m | (1u64 << bit[e.child.index()]))
            })
            .collect();
        let full = if edges.len() == 64 { u64::MAX } else { (1u64 << edges.len()) - 1 };
        let mut by_edge = vec![Vec::new(); edges.len()];
        for (i, &m) in masks.iter().enumerate() {
            for (b, list) in by_edge.iter_mut().enumerate() {
                if m >> b & 1 == 1 {
                    list.push(i);
                }
            }
        }
        Ok(Coverage {
            links,
            masks,
            full,
            by_edge,
        })
    }

    /// Visits every cover of exactly `k` links, each once. Branches on the
    /// uncovered edge with the fewest usable links; in the i-th branch the
    /// links of branches before it are forbidden.
    fn covers_of_size(
        &self,
        k: usize,
        stats: &mut EnumerationStats,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut chosen = Vec::with_capacity(k);
        let mut forbidden = vec![false; self.links.len()];
        self.search(0, k, &mut chosen, &mut forbidden, stats, visit)
    }

    fn search(
        &self,
        covered: u64,
        k: usize,
        chosen: &mut Vec<usize>,
        forbidden: &mut Vec<bool>,
        stats: &mut EnumerationStats,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        stats.nodes += 1;
        let left = k - chosen.len();
        if covered == self.full {
            if left == 0 {
                let mut set = chosen.clone();
                set.sort_unstable();
                return visit(&set);
            }
            // only called with k at least the optimum, where a cover with
            // spare budget is reached again with other links
            return ControlFlow::Continue(());
        }
        if left == 0 {
            return ControlFlow::Continue(());
        }
        let uncovered = self.full & !covered;
        let mut best_gain = 0;
        for (i, &m) in self.masks.iter().enumerate() {
            if !forbidden[i] {
                best_gain = best_gain.max((m & uncovered).count_ones());
            }
        }
        if best_gain == 0 || (left as u32) * best_gain < uncovered.count_ones() {
            return ControlFlow::Continue(());
        }
        let edge = (0..self.by_edge.len())
            .filter(|&b| uncovered >> b & 1 == 1)
            .min_by_key(|&b| self.by_edge[b].iter().filter(|&&i| !forbidden[i]).count())
            .expect("some edge is uncovered");
        let options: Vec<usize> = self.by_edge[edge].iter().copied().filter(|&i| !forbidden[i]).collect();
        let mut flow = ControlFlow::Continue(());
        for &i in &options {
            chosen.push(i);
            forbidden[i] = true;
            flow = self.search(covered | self.masks[i], k, chosen, forbidden, stats, visit);
            chosen.pop();
            if flow.is_break() {
                break;
            }
        }
        for &i in &options {
            forbidden[i] = false;
        }
        flow
    }

    fn minimum_size(&self, stats: &mut EnumerationStats) -> Result<usize> {
        for k in 1..=self.links.len() {
            stats.rounds += 1;
            let mut found = false;
            let _ = self.covers_of_size(k, stats, &mut |_| {
                found = true;
                ControlFlow::Break(())
            });
            if found {
                return Ok(k);
            }
        }
        Err(Error::Infeasible {
            uncovered: Vec::new(),
        })
    }

    fn set(&self, idx: &[usize]) -> BTreeSet<Link> {
        idx.iter().map(|&i| self.links[i]).collect()
    }
}

fn input_coverage(inst: &TapInstance) -> Result<Coverage> {
    inst.check_feasible()?;
    let links: Vec<Link> = inst.original_links().collect();
    if links.len() > MAX_LINKS {
        return Err(Error::OracleTooLarge(format!("{} links, cap {MAX_LINKS}", links.len())));
    }
    Coverage::new(inst, links)
}

/// Minimum number of input links covering every tree edge, with up to
/// `cap` optimal witnesses.
pub fn exact_opt(inst: &TapInstance, cap: usize) -> Result<OracleResult> {
    let cov = input_coverage(inst)?;
    let mut stats = EnumerationStats::default();
    if cov.full == 0 {
        return Ok(OracleResult {
            opt_size: 0,
            witnesses: vec![BTreeSet::new()],
            truncated: false,
            enumeration_stats: stats,
        });
    }
    let k = cov.minimum_size(&mut stats)?;
    let mut witnesses = Vec::new();
    let mut truncated = false;
    let _ = cov.covers_of_size(k, &mut stats, &mut |idx| {
        if witnesses.len() == cap {
            truncated = true;
            return ControlFlow::Break(());
        }
        witnesses.push(cov.set(idx));
        ControlFlow::Continue(())
    });
    witnesses.sort();
    Ok(OracleResult {
        opt_size: k,
        witnesses,
        truncated,
        enumeration_stats: stats,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeafCoverOpt {
    #[serde(with = "ratio::serde_str")]
    pub weight: Rational,
    pub witness: BTreeSet<Link>,
}

/// Minimum weight of a link set meeting every leaf exactly once, by
/// enumerating for each leaf either a leaf-to-leaf link or an upward link.
/// Upward links all weigh the same, so the first one stands for the class.
pub fn exact_leaf_cover_opt(inst: &TapInstance, cfg: &LeafWeightConfig) -> Result<LeafCoverOpt> {
    let leaves = inst.leaves().to_vec();
    if leaves.len() > MAX_LEAVES {
        return Err(Error::TooManyLeaves {
            leaves: leaves.len(),
            cap: MAX_LEAVES,
        });
    }
    let mut options: Vec<Vec<Link>> = Vec::with_capacity(leaves.len());
    for &a in &leaves {
        let mut opts: Vec<Link> = inst.incident(a).filter(|l| inst.is_leaf(l.other(a).unwrap())).collect();
        if let Some(up) = inst.incident(a).find(|l| !inst.is_leaf(l.other(a).unwrap())) {
            opts.push(up);
        }
        if opts.is_empty() {
            return Err(Error::LeafUncovered(a));
        }
        options.push(opts);
    }

    struct Search<'a> {
        inst: &'a TapInstance,
        cfg: &'a LeafWeightConfig,
        leaves: &'a [NodeId],
        options: &'a [Vec<Link>],
        taken: Vec<bool>,
        chosen: Vec<Link>,
        best: Option<(Rational, BTreeSet<Link>)>,
    }

    impl Search<'_> {
        fn index(&self, v: NodeId) -> Option<usize> {
            self.leaves.iter().position(|&w| w == v)
        }

        fn run(&mut self) -> Result<()> {
            let Some(i) = self.taken.iter().position(|t| !t) else {
                let weight = cover_weight(self.cfg, self.inst, &self.chosen)?;
                let set: BTreeSet<Link> = self.chosen.iter().copied().collect();
                let better = match &self.best {
                    None => true,
                    Some((w, s)) => weight < *w || (weight == *w && set < *s),
                };
                if better {
                    self.best = Some((weight, set));
                }
                return Ok(());
            };
            self.taken[i] = true;
            for l in self.options[i].clone() {
                let other = l.other(self.leaves[i]).unwrap();
                let j = self.index(other);
                if let Some(j) = j {
                    if self.taken[j] {
                        continue;
                    }
                    self.taken[j] = true;
                }
                self.chosen.push(l);
                self.run()?;
                self.chosen.pop();
                if let Some(j) = j {
                    self.taken[j] = false;
                }
            }
            self.taken[i] = false;
            Ok(())
        }
    }

    let mut s = Search {
        inst,
        cfg,
        leaves: &leaves,
        options: &options,
        taken: vec![false; leaves.len()],
        chosen: Vec::new(),
        best: None,
    };
    s.run()?;
    match s.best {
        Some((weight, witness)) => {
            debug_assert_eq!(
                weight,
                witness.iter().map(|&l| link_weight(cfg, inst, l).unwrap()).sum::<Rational>()
            );
            Ok(LeafCoverOpt { weight, witness })
        }
        None => Err(Error::Precondition("no exact leaf cover exists".into())),
    }
}

/// Proper shadows of each link: other links with both ends on its path.
fn proper_shadows(closed: &TapInstance, cov: &Coverage) -> Vec<Vec<usize>> {
    cov.links
        .iter()
        .map(|l| {
            let path: BTreeSet<NodeId> = closed.tree().path_nodes(l.u(), l.v()).into_iter().collect();
            cov.links
                .iter()
                .enumerate()
                .filter(|&(_, s)| s != l && path.contains(&s.u()) && path.contains(&s.v()))
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

/// No link of the cover can be swapped for one of its proper shadows
/// without uncovering an edge.
fn is_shadow_minimal(cov: &Coverage, shadows: &[Vec<usize>], set: &[usize]) -> bool {
    set.iter().enumerate().all(|(pos, &i)| {
        let rest = set
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .fold(0u64, |m, (_, &j)| m | cov.masks[j]);
        shadows[i].iter().all(|&s| rest | cov.masks[s] != cov.full)
    })
}

/// An optimal solution over the closed link set that is shadow-minimal and
/// has the most twin links among such solutions, smallest set on ties.
/// Enumerates every optimal cover of the closed instance.
pub fn shadow_minimal_twin_max(inst: &TapInstance) -> Result<BTreeSet<Link>> {
    let closed_storage;
    let closed = if inst.is_closed() {
        inst
    } else {
        closed_storage = inst.shadow_completion();
        &closed_storage
    };
    let input = input_coverage(closed)?;
    let mut stats = EnumerationStats::default();
    if input.full == 0 {
        return Ok(BTreeSet::new());
    }
    let k = input.minimum_size(&mut stats)?;
    let all = Coverage::new(closed, closed.links().collect())?;
    let shadows = proper_shadows(closed, &all);
    let mut best: Option<(usize, BTreeSet<Link>)> = None;
    let _ = all.covers_of_size(k, &mut stats, &mut |idx| {
        if !is_shadow_minimal(&all, &shadows, idx) {
            return ControlFlow::Continue(());
        }
        let f = all.set(idx);
        let twins = f.iter().filter(|&&l| closed.is_twin(l)).count();
        let better = match &best {
            None => true,
            Some((t, s)) => twins > *t || (twins == *t && f < *s),
        };
        if better {
            best = Some((twins, f));
        }
        ControlFlow::Continue(())
    });
    best.map(|b| b.1)
        .ok_or_else(|| Error::Precondition("no shadow-minimal optimal cover".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::instance::parse_instance;
    use crate::ratio::frac;

    fn brute_force_opt(inst: &TapInstance) -> usize {
        let links: Vec<Link> = inst.original_links().collect();
        (0u32..1 << links.len())
            .filter(|m| {
                let set: Vec<Link> = (0..links.len()).filter(|i| m >> i & 1 == 1).map(|i| links[i]).collect();
                inst.validate_solution(&set).unwrap()
            })
            .map(|m| m.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn fixture_optima() {
        assert_eq!(exact_opt(&fixture_1(), 10).unwrap().opt_size, 1);
        let r2 = exact_opt(&fixture_2(), 10).unwrap();
        assert_eq!(r2.opt_size, 2);
        assert_eq!(r2.witnesses, vec![BTreeSet::from([Link::new(0, 2), Link::new(2, 3)])]);
        assert_eq!(exact_opt(&fixture_3(), 10).unwrap().opt_size, 1);
        assert_eq!(exact_opt(&dangerous_gadget(), 10).unwrap().opt_size, 3);
        assert_eq!(exact_opt(&double_dangerous_gadget(), 10).unwrap().opt_size, 6);
    }

    #[test]
    fn closed_instance_gives_input_witnesses() {
        let r = exact_opt(&fixture_2().shadow_completion(), 10).unwrap();
        assert_eq!(r.witnesses, vec![BTreeSet::from([Link::new(0, 2), Link::new(2, 3)])]);
    }

    #[test]
    fn witnesses_are_distinct_and_capped() {
        // a star: every leaf needs its own link; 3 choices for two leaves
        let inst = parse_instance(
            "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 0 2\nedge 0 3\nlink 1 2\nlink 2 3\nlink 1 3\n",
        )
        .unwrap();
        let r = exact_opt(&inst, 10).unwrap();
        assert_eq!(r.opt_size, 2);
        assert_eq!(r.witnesses.len(), 3);
        assert!(!r.truncated);
        let capped = exact_opt(&inst, 2).unwrap();
        assert_eq!(capped.witnesses.len(), 2);
        assert!(capped.truncated);
    }

    #[test]
    fn agrees_with_plain_enumeration() {
        for text in [GREEDY_GADGET, DANGEROUS_GADGET, FIXTURE_2, FIXTURE_3] {
            let inst = parse_instance(text).unwrap();
            assert_eq!(exact_opt(&inst, 1).unwrap().opt_size, brute_force_opt(&inst));
        }
    }

    #[test]
    fn infeasible_and_oversized() {
        let inst = parse_instance("tap 1\nnodes 3\nroot 0\nedge 0 1\nedge 1 2\nlink 1 2\n").unwrap();
        assert!(matches!(exact_opt(&inst, 1), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn leaf_cover_examples() {
        let cfg = LeafWeightConfig::default();
        let f2 = exact_leaf_cover_opt(&fixture_2().shadow_completion(), &cfg).unwrap();
        assert_eq!(f2.weight, frac(9, 4));
        assert_eq!(f2.witness, BTreeSet::from([Link::new(2, 3)]));
        let f1 = exact_leaf_cover_opt(&fixture_1().shadow_completion(), &cfg).unwrap();
        assert_eq!(f1.weight, frac(5, 4));
        // two leaves with only upward links
        let inst = parse_instance("tap 1\nnodes 3\nroot 0\nedge 0 1\nedge 0 2\nlink 0 1\nlink 0 2\n").unwrap();
        assert_eq!(exact_leaf_cover_opt(&inst, &cfg).unwrap().weight, frac(5, 2));
    }

    #[test]
    fn shadow_minimal_examples() {
        let f2 = shadow_minimal_twin_max(&fixture_2()).unwrap();
        assert_eq!(f2, BTreeSet::from([Link::new(0, 1), Link::new(2, 3)]));
        // a path with one link: its only proper shadows leave edges bare
        let f3 = shadow_minimal_twin_max(&fixture_3()).unwrap();
        assert_eq!(f3, BTreeSet::from([Link::new(0, 3)]));
    }

    #[test]
    fn twin_reached_through_a_shadow() {
        // shadow-minimizing the input optima never produces the twin (2,4);
        // the optimum {(2,4),(1,3)} uses the shadow (1,3) of (3,4)
        let inst = parse_instance(
            "tap 1\nnodes 5\nroot 0\nedge 0 1\nedge 0 3\nedge 1 2\nedge 1 4\nlink 0 2\nlink 2 4\nlink 3 4\n",
        )
        .unwrap();
        let f = shadow_minimal_twin_max(&inst).unwrap();
        assert_eq!(f, BTreeSet::from([Link::new(1, 3), Link::new(2, 4)]));
    }
}
