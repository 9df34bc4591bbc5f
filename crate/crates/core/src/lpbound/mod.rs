//! The leaf-constrained LP relaxation and the standard cut LP, solved in
//! exact rational arithmetic.

mod simplex;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Link, NodeId, TapInstance, TreeEdge};
use crate::leafcover::ExactLeafCover;
use crate::ratio::{self, half, int, Rational};

use simplex::{ColumnMeta, DualTableau, SimplexError, Small};

/// Default cap on the number of leaves for odd-set enumeration.
pub const LEAF_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    Cut,
    OddLeafSet,
    LeafEquality,
    TwinStem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// What generated a row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowTag {
    Edge(TreeEdge),
    LeafSet(Vec<NodeId>),
    Leaf(NodeId),
    Twin(Link),
    /// Extra rows added by callers, e.g. odd sets that include internal nodes.
    Custom(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRow {
    pub kind: RowKind,
    pub coefficients: BTreeMap<Link, Rational>,
    pub sense: Sense,
    pub rhs: Rational,
    pub tag: RowTag,
}

impl ConstraintRow {
    pub fn lhs(&self, x: &BTreeMap<Link, Rational>) -> Rational {
        self.coefficients
            .iter()
            .filter_map(|(l, a)| x.get(l).map(|xl| a * xl))
            .fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn is_satisfied(&self, x: &BTreeMap<Link, Rational>) -> bool {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// Minimize the sum of all link variables subject to `rows`, `x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpModel {
    pub variables: Vec<Link>,
    pub rows: Vec<ConstraintRow>,
}

impl LpModel {
    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &ConstraintRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    /// One row per line, `<coeffs> >= <rhs>` (or `=`), followed by the kind
    /// and tag as a comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let terms: Vec<String> = row
                .coefficients
                .iter()
                .map(|(l, a)| format!("{} x{}", ratio::fmt(a), l))
                .collect();
            let sense = match row.sense {
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(
                out,
                "{} {} {}  # {:?} {}",
                terms.join(" + "),
                sense,
                ratio::fmt(&row.rhs),
                row.kind,
                tag_text(&row.tag)
            );
        }
        out
    }
}

fn tag_text(tag: &RowTag) -> String {
    match tag {
        RowTag::Edge(e) => format!("edge {e}"),
        RowTag::LeafSet(a) => {
            let ids: Vec<String> = a.iter().map(|v| v.to_string()).collect();
            format!("leaves {{{}}}", ids.join(","))
        }
        RowTag::Leaf(v) => format!("leaf {v}"),
        RowTag::Twin(l) => format!("twin {l}"),
        RowTag::Custom(s) => s.clone(),
    }
}

fn unit_row(kind: RowKind, links: impl IntoIterator<Item = Link>, sense: Sense, rhs: Rational, tag: RowTag) -> ConstraintRow {
    ConstraintRow {
        kind,
        coefficients: links.into_iter().map(|l| (l, int(1))).collect(),
        sense,
        rhs,
        tag,
    }
}

fn cut_rows(inst: &TapInstance) -> Vec<ConstraintRow> {
    let tree = inst.tree();
    tree.edges()
        .into_iter()
        .map(|e| {
            let covering = inst.links().filter(|l| tree.covers(*l, e.child));
            unit_row(RowKind::Cut, covering, Sense::Ge, int(1), RowTag::Edge(e))
        })
        .collect()
}

/// The standard cut LP: one covering row per tree edge.
pub fn build_cut_model(inst: &TapInstance) -> LpModel {
    LpModel {
        variables: inst.links().collect(),
        rows: cut_rows(inst),
    }
}

/// The full relaxation: cut rows, odd leaf-set rows for every odd subset of
/// leaves, leaf equalities and twin/stem equalities.
pub fn build_pi_model(inst: &TapInstance) -> Result<LpModel> {
    build_pi_model_with_cap(inst, LEAF_CAP)
}

pub fn build_pi_model_with_cap(inst: &TapInstance, cap: usize) -> Result<LpModel> {
    let leaves = inst.leaves();
    if leaves.len() > cap {
        return Err(Error::TooManyLeaves {
            leaves: leaves.len(),
            cap,
        });
    }
    let mut rows = cut_rows(inst);

    let k = leaves.len();
    let mut masks: Vec<u32> = (1u32..1 << k).filter(|m| m.count_ones() % 2 == 1).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let set: Vec<NodeId> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| leaves[i]).collect();
        let touching: Vec<Link> = inst
            .links()
            .filter(|l| l.endpoints().iter().any(|v| set.contains(v)))
            .collect();
        let rhs = Rational::from_integer(set.len().div_ceil(2).into());
        rows.push(unit_row(RowKind::OddLeafSet, touching, Sense::Ge, rhs, RowTag::LeafSet(set)));
    }

    for &v in leaves {
        rows.push(unit_row(RowKind::LeafEquality, inst.incident(v), Sense::Eq, int(1), RowTag::Leaf(v)));
    }

    for (&e, &s) in inst.twins() {
        let mut coefficients: BTreeMap<Link, Rational> = inst.incident(s).map(|l| (l, int(-1))).collect();
        coefficients.insert(e, int(1));
        rows.push(ConstraintRow {
            kind: RowKind::TwinStem,
            coefficients,
            sense: Sense::Eq,
            rhs: int(0),
            tag: RowTag::Twin(e),
        });
    }

    Ok(LpModel {
        variables: inst.links().collect(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub x: BTreeMap<Link, Rational>,
    pub tau: Rational,
    /// Dual multipliers, one per model row; present for exact solves and
    /// checked against `x` as an optimality certificate.
    pub duals: Option<Vec<Rational>>,
    pub exact: bool,
    pub pivots: usize,
}

impl LpSolution {
    pub fn value(&self, l: Link) -> Rational {
        self.x.get(&l).cloned().unwrap_or_else(Rational::zero)
    }

    /// x(δ(v)): total value on links incident to `v`.
    pub fn degree(&self, v: NodeId) -> Rational {
        self.x
            .iter()
            .filter(|(l, _)| l.has_endpoint(v))
            .fold(Rational::zero(), |acc, (_, xl)| acc + xl)
    }
}

struct RawSolution<S> {
    x: Vec<S>,
    y: Vec<S>,
    value: S,
    pivots: usize,
}

// Rows worth starting with; the rest are added when violated.
fn starts_active(row: &ConstraintRow) -> bool {
    !matches!(row.kind, RowKind::OddLeafSet) || matches!(&row.tag, RowTag::LeafSet(a) if a.len() == 1)
}

fn run<S: simplex::Scalar>(model: &LpModel) -> std::result::Result<RawSolution<S>, SimplexError> {
    let index: BTreeMap<Link, usize> = model.variables.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let rows: Vec<(Vec<(usize, S)>, S)> = model
        .rows
        .iter()
        .map(|r| {
            let coeffs = r
                .coefficients
                .iter()
                .map(|(l, a)| Ok((index[l], S::from_rational(a).ok_or(SimplexError::Overflow)?)))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok((coeffs, S::from_rational(&r.rhs).ok_or(SimplexError::Overflow)?))
        })
        .collect::<std::result::Result<_, SimplexError>>()?;

    let mut tableau = DualTableau::<S>::new(model.variables.len());
    let mut active = vec![false; model.rows.len()];
    let activate = |t: &mut DualTableau<S>, active: &mut Vec<bool>, i: usize| {
        active[i] = true;
        let (coeffs, b) = &rows[i];
        t.add_column(ColumnMeta { row: i, negated: false }, coeffs, b)?;
        if model.rows[i].sense == Sense::Eq {
            t.add_column(ColumnMeta { row: i, negated: true }, coeffs, b)?;
        }
        Ok::<(), SimplexError>(())
    };
    for i in 0..model.rows.len() {
        if starts_active(&model.rows[i]) {
            activate(&mut tableau, &mut active, i)?;
        }
    }
    loop {
        tableau.optimize()?;
        let x = tableau.primal();
        let mut added = false;
        for i in 0..model.rows.len() {
            if active[i] {
                continue;
            }
            let (coeffs, b) = &rows[i];
            let mut lhs = S::zero();
            for (e, a) in coeffs {
                lhs = lhs.add(&a.mul(&x[*e]).ok_or(SimplexError::Overflow)?).ok_or(SimplexError::Overflow)?;
            }
            if lhs.sub(b).ok_or(SimplexError::Overflow)?.is_neg() {
                activate(&mut tableau, &mut active, i)?;
                added = true;
            }
        }
        if !added {
            break;
        }
    }

    let mut y = vec![S::zero(); model.rows.len()];
    for (meta, v) in tableau.cols.iter().zip(tableau.dual()) {
        y[meta.row] = if meta.negated {
            y[meta.row].sub(&v)
        } else {
            y[meta.row].add(&v)
        }
        .ok_or(SimplexError::Overflow)?;
    }
    Ok(RawSolution {
        x: tableau.primal(),
        y,
        value: tableau.value(),
        pivots: tableau.pivots,
    })
}

fn to_solution<S: simplex::Scalar>(model: &LpModel, raw: RawSolution<S>, exact: bool) -> LpSolution {
    let x: BTreeMap<Link, Rational> = model
        .variables
        .iter()
        .zip(&raw.x)
        .map(|(l, v)| (*l, v.to_rational()))
        .collect();
    LpSolution {
        x,
        tau: raw.value.to_rational(),
        duals: exact.then(|| raw.y.iter().map(|v| v.to_rational()).collect()),
        exact,
        pivots: raw.pivots,
    }
}

fn map_err(e: SimplexError) -> Error {
    match e {
        SimplexError::Unbounded => Error::LpInfeasible,
        SimplexError::Overflow => unreachable!("big rationals do not overflow"),
    }
}

/// Exact optimum. Runs on 128-bit rationals and redoes the solve with
/// arbitrary precision if anything overflows. The result is checked against
/// its dual certificate before it is returned.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    let sol = match run::<Small>(model) {
        Ok(raw) => to_solution(model, raw, true),
        Err(SimplexError::Unbounded) => return Err(Error::LpInfeasible),
        Err(SimplexError::Overflow) => to_solution(model, run::<Rational>(model).map_err(map_err)?, true),
    };
    verify_certificate(model, &sol)?;
    Ok(sol)
}

/// Floating-point solve with tolerance 1e-9, for exploration beyond exact
/// scale. The returned values are rational approximations, not certified.
pub fn solve_lp_float(model: &LpModel) -> Result<LpSolution> {
    let raw = run::<f64>(model).map_err(map_err)?;
    Ok(to_solution(model, raw, false))
}

/// Checks primal feasibility, dual feasibility and equal objective values.
pub fn verify_certificate(model: &LpModel, sol: &LpSolution) -> Result<()> {
    let fail = |detail: String| Err(Error::Invariant { step: 0, detail });
    if let Some((l, v)) = sol.x.iter().find(|(_, v)| v.is_negative()) {
        return fail(format!("x{l} = {} is negative", ratio::fmt(v)));
    }
    for row in &model.rows {
        if !row.is_satisfied(&sol.x) {
            return fail(format!("row {:?} {} violated", row.kind, tag_text(&row.tag)));
        }
    }
    let total = ratio::sum(sol.x.values());
    if total != sol.tau {
        return fail("objective does not match x".into());
    }
    let Some(y) = &sol.duals else {
        return fail("no dual certificate".into());
    };
    let mut load: BTreeMap<Link, Rational> = BTreeMap::new();
    let mut dual_value = Rational::zero();
    for (row, yi) in model.rows.iter().zip(y) {
        if row.sense == Sense::Ge && yi.is_negative() {
            return fail(format!("negative dual on {}", tag_text(&row.tag)));
        }
        dual_value += &row.rhs * yi;
        for (l, a) in &row.coefficients {
            *load.entry(*l).or_insert_with(Rational::zero) += a * yi;
        }
    }
    if let Some((l, _)) = load.iter().find(|(_, v)| **v > int(1)) {
        return fail(format!("dual constraint of x{l} violated"));
    }
    if dual_value != total {
        return fail(format!(
            "duality gap: primal {} dual {}",
            ratio::fmt(&total),
            ratio::fmt(&dual_value)
        ));
    }
    Ok(())
}

/// Right-hand side of the leaf-cover/LP inequality:
/// w(F_L) + 1/2 · Σ_{v ∈ R} x(δ(v)).
pub fn coupons_rhs(inst: &TapInstance, lp: &LpSolution, cover: &ExactLeafCover) -> Rational {
    let sigma = inst
        .regular_nodes()
        .into_iter()
        .fold(Rational::zero(), |acc, v| acc + lp.degree(v));
    &cover.weight + half() * sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::leafcover::{min_weight_exact_cover, LeafWeightConfig};
    use crate::ratio::frac;

    fn closed(inst: TapInstance) -> TapInstance {
        inst.shadow_completion()
    }

    #[test]
    fn fixture_2_rows() {
        let inst = closed(fixture_2());
        let model = build_pi_model(&inst).unwrap();
        assert_eq!(model.rows_of(RowKind::Cut).count(), 3);
        let odd: Vec<&RowTag> = model.rows_of(RowKind::OddLeafSet).map(|r| &r.tag).collect();
        assert_eq!(odd, vec![&RowTag::LeafSet(vec![NodeId(2)]), &RowTag::LeafSet(vec![NodeId(3)])]);
        assert_eq!(model.rows_of(RowKind::LeafEquality).count(), 2);
        let twin: Vec<&ConstraintRow> = model.rows_of(RowKind::TwinStem).collect();
        assert_eq!(twin.len(), 1);
        let expected: BTreeMap<Link, Rational> = [
            (Link::new(2, 3), int(1)),
            (Link::new(1, 2), int(-1)),
            (Link::new(1, 3), int(-1)),
            (Link::new(0, 1), int(-1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(twin[0].coefficients, expected);
        assert_eq!(twin[0].sense, Sense::Eq);
    }

    #[test]
    fn fixture_1_rows() {
        let model = build_pi_model(&closed(fixture_1())).unwrap();
        assert_eq!(model.rows_of(RowKind::Cut).count(), 1);
        assert_eq!(model.rows_of(RowKind::LeafEquality).count(), 1);
        assert_eq!(model.rows_of(RowKind::TwinStem).count(), 0);
    }

    #[test]
    fn three_leaves_give_four_odd_rows() {
        let inst = closed(crate::instance::parse_instance(
            "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 0 2\nedge 0 3\nlink 1 2\nlink 2 3\n",
        ).unwrap());
        let model = build_pi_model(&inst).unwrap();
        let odd: Vec<&ConstraintRow> = model.rows_of(RowKind::OddLeafSet).collect();
        assert_eq!(odd.len(), 4);
        assert_eq!(odd[3].tag, RowTag::LeafSet(vec![NodeId(1), NodeId(2), NodeId(3)]));
        assert_eq!(odd[3].rhs, int(2));
    }

    #[test]
    fn leaf_cap() {
        let inst = closed(fixture_2());
        assert_eq!(
            build_pi_model_with_cap(&inst, 1),
            Err(Error::TooManyLeaves { leaves: 2, cap: 1 })
        );
    }

    #[test]
    fn fixture_values() {
        for (inst, tau) in [(fixture_1(), 1), (fixture_2(), 2), (fixture_3(), 1)] {
            let inst = closed(inst);
            let sol = solve_lp(&build_pi_model(&inst).unwrap()).unwrap();
            assert_eq!(sol.tau, int(tau));
            let cut = solve_lp(&build_cut_model(&inst)).unwrap();
            assert!(cut.tau <= sol.tau);
        }
        let f1 = closed(fixture_1());
        let sol = solve_lp(&build_pi_model(&f1).unwrap()).unwrap();
        assert_eq!(sol.value(Link::new(0, 1)), int(1));
    }

    #[test]
    fn twin_rows_hold_exactly() {
        let inst = closed(fixture_2());
        let sol = solve_lp(&build_pi_model(&inst).unwrap()).unwrap();
        let e = Link::new(2, 3);
        assert_eq!(sol.value(e), sol.degree(NodeId(1)));
    }

    #[test]
    fn float_fallback_agrees() {
        let inst = closed(dangerous_gadget());
        let model = build_pi_model(&inst).unwrap();
        let exact = solve_lp(&model).unwrap();
        let approx = solve_lp_float(&model).unwrap();
        assert!(!approx.exact);
        assert!((ratio::to_f64(&exact.tau) - ratio::to_f64(&approx.tau)).abs() < 1e-9);
    }

    #[test]
    fn coupons_on_fixtures() {
        let cfg = LeafWeightConfig::default();
        let f1 = closed(fixture_1());
        let lp = solve_lp(&build_pi_model(&f1).unwrap()).unwrap();
        let cover = min_weight_exact_cover(&cfg, &f1).unwrap();
        assert_eq!(coupons_rhs(&f1, &lp, &cover), frac(7, 4));

        let f2 = closed(fixture_2());
        let lp = solve_lp(&build_pi_model(&f2).unwrap()).unwrap();
        let cover = min_weight_exact_cover(&cfg, &f2).unwrap();
        let rhs = coupons_rhs(&f2, &lp, &cover);
        assert_eq!(rhs, frac(9, 4) + half() * lp.degree(NodeId(0)));
        assert!(&cfg.rho * &lp.tau >= rhs);
    }

    #[test]
    fn infeasible_model() {
        let inst = crate::instance::parse_instance("tap 1\nnodes 3\nroot 0\nedge 0 1\nedge 1 2\nlink 1 2\n").unwrap();
        assert_eq!(solve_lp(&build_cut_model(&inst)), Err(Error::LpInfeasible));
    }
}
