//! The contraction algorithm: greedy contractions, minimally semi-closed
//! trees, dangerous trees and the matching rewrite, with a token ledger that
//! can be audited against an LP solution.

mod audit;
mod dot;
mod state;

use std::collections::BTreeSet;

use serde::Serialize;

pub use audit::{audit_ledger, AuditFailure, AuditReport, StepAudit};
pub use dot::state_to_dot;
pub use state::{ContractionState, LeafMatching, LiveLink};

use crate::error::{Error, Result};
use crate::instance::{Link, NodeId, TapInstance};
use crate::leafcover::{min_weight_exact_cover, ExactLeafCover, LeafWeightConfig};
use crate::lpbound::LpSolution;
use crate::ratio::{self, half, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionKind {
    Greedy,
    SemiClosed,
    FindTree,
}

/// A token amount that may depend on the LP solution: a constant plus half
/// of x(δ(v)) for each listed original node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TokenAmount {
    #[serde(with = "ratio::serde_str")]
    pub constant: Rational,
    pub half_degree: Vec<NodeId>,
}

impl TokenAmount {
    pub fn zero() -> Self {
        Self::constant(ratio::int(0))
    }

    pub fn constant(c: Rational) -> Self {
        TokenAmount {
            constant: c,
            half_degree: Vec::new(),
        }
    }

    pub fn add(&mut self, other: &TokenAmount) {
        self.constant += &other.constant;
        self.half_degree.extend(other.half_degree.iter().copied());
        self.half_degree.sort();
    }

    pub fn evaluate(&self, lp: &LpSolution) -> Rational {
        self.half_degree
            .iter()
            .fold(self.constant.clone(), |acc, &v| acc + half() * lp.degree(v))
    }
}

/// Node sets of a rooted subtree of T/I, relative to some matching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubtreeSummary {
    pub root: NodeId,
    pub nodes: Vec<NodeId>,
    /// Matched pairs inside.
    pub m_prime: Vec<Link>,
    /// Unmatched leaves.
    pub u_prime: Vec<NodeId>,
    /// Unmatched leaves that are original leaves.
    pub u_prime_0: Vec<NodeId>,
    pub l_prime: Vec<NodeId>,
    /// Original stems.
    pub s_prime: Vec<NodeId>,
    /// Original nodes that are neither leaves nor stems.
    pub r_prime: Vec<NodeId>,
    /// Non-leaf compound nodes, including the root when present.
    pub c_prime: Vec<NodeId>,
    /// Live links at the nodes of `r_prime` when the summary was taken, one
    /// entry per incidence.
    pub r_prime_live: Vec<Link>,
    #[serde(with = "ratio::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Rational>,
}

impl SubtreeSummary {
    /// Σ x(δ(v)) over `r_prime`.
    pub fn sigma_with(&self, lp: &LpSolution) -> Rational {
        self.r_prime
            .iter()
            .fold(ratio::int(0), |acc, &v| acc + lp.degree(v))
    }
}

/// Witness that a semi-closed tree is dangerous: `a` is its unmatched
/// compound leaf, `b b'` its matched pair, and `link` joins `a` and `b'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DangerCertificate {
    pub root: NodeId,
    pub a: NodeId,
    pub b: NodeId,
    pub b_prime: NodeId,
    pub link: Link,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionRecord {
    pub step: usize,
    pub kind: ContractionKind,
    /// Id of the compound node created.
    pub new_node: NodeId,
    /// Super-nodes merged.
    pub nodes: Vec<NodeId>,
    /// Links added, as links of the shadow-closed instance.
    pub links: Vec<Link>,
    /// The same links mapped to the input links they came from.
    pub original_links: Vec<Link>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<SubtreeSummary>,
    /// Tokens owned by the merged nodes and matching links inside.
    pub tokens: TokenAmount,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rewritten: Vec<DangerCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    #[serde(with = "ratio::serde_str")]
    pub rho: Rational,
    pub records: Vec<ContractionRecord>,
}

impl SolveTrace {
    /// The partial solution rebuilt from the records.
    pub fn replay(&self) -> Vec<Link> {
        self.records.iter().flat_map(|r| r.links.iter().copied()).collect()
    }

    /// One JSON object per contraction.
    pub fn to_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// The solution in input links.
    pub links: BTreeSet<Link>,
    /// The partial solution as built, in links of the closed instance.
    pub closed_links: Vec<Link>,
    pub cover: ExactLeafCover,
    pub trace: SolveTrace,
    /// Graphviz renderings of T/I at the start of every round and at the
    /// end, when requested.
    pub snapshots: Vec<String>,
}

impl Solution {
    pub fn size(&self) -> usize {
        self.links.len()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub snapshots: bool,
}

/// Initial state: nothing contracted, M taken from the cover.
pub fn init_state<'a>(inst: &'a TapInstance, cover: &ExactLeafCover, cfg: &LeafWeightConfig) -> ContractionState<'a> {
    ContractionState::new(inst, cfg.rho.clone(), cover.matching_part.iter().copied())
}

pub fn solve(inst: &TapInstance, cfg: &LeafWeightConfig) -> Result<Solution> {
    solve_with(inst, cfg, &SolveOptions::default())
}

pub fn solve_with(inst: &TapInstance, cfg: &LeafWeightConfig, opts: &SolveOptions) -> Result<Solution> {
    let closed_storage;
    let closed = if inst.is_closed() {
        inst
    } else {
        closed_storage = inst.shadow_completion();
        &closed_storage
    };
    closed.check_feasible()?;
    let cover = min_weight_exact_cover(cfg, closed)?;
    let mut state = init_state(closed, &cover, cfg);
    let mut records = Vec::new();
    let mut snapshots = Vec::new();

    while state.super_count() > 1 {
        let before = state.super_count();
        if opts.snapshots {
            snapshots.push(state_to_dot(&state));
        }
        records.extend(state.greedy_contract_exhaust()?);
        if state.super_count() == 1 {
            break;
        }
        let record = match state.pick_semi_closed()? {
            Some((summary, links)) => {
                state.contract_subtree(ContractionKind::SemiClosed, summary, links, Vec::new())?
            }
            None => {
                let (summary, links, certs) = state.find_tree()?;
                state.contract_subtree(ContractionKind::FindTree, summary, links, certs)?
            }
        };
        records.push(record);
        if state.super_count() >= before {
            return Err(Error::Invariant {
                step: state.steps(),
                detail: "no progress".into(),
            });
        }
    }
    if opts.snapshots {
        snapshots.push(state_to_dot(&state));
    }

    let closed_links = state.partial_solution().to_vec();
    let links = closed.map_to_original(&closed_links);
    if !closed.validate_solution(&links)? {
        return Err(Error::Invariant {
            step: state.steps(),
            detail: "final link set does not cover the tree".into(),
        });
    }
    Ok(Solution {
        links,
        closed_links,
        cover,
        trace: SolveTrace {
            rho: cfg.rho.clone(),
            records,
        },
        snapshots,
    })
}

#[cfg(test)]
mod tests;
