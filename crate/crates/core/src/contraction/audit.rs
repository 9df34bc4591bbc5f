use std::collections::BTreeSet;

use serde::Serialize;

use crate::instance::{Link, TapInstance};
use crate::leafcover::ExactLeafCover;
use crate::lpbound::{coupons_rhs, LpSolution};
use crate::ratio::{self, half, int, Rational};

use super::{ContractionKind, SolveTrace, SubtreeSummary};

/// Token figures of one contraction, evaluated at a fixed LP solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepAudit {
    pub step: usize,
    pub kind: ContractionKind,
    #[serde(with = "ratio::serde_str")]
    pub tokens: Rational,
    pub links: usize,
    /// Tokens needed: one per link plus one for the new node.
    pub required: usize,
    #[serde(with = "ratio::serde_str")]
    pub slack: Rational,
    /// tokens - (|M'| + |U'|) for subtree contractions.
    #[serde(with = "ratio::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub deficiency_margin: Option<Rational>,
    /// (rho-1)|M'| + 1/2|M' ∩ W| + (rho-3/2)|U'_0| + |C'| + Σ, with Σ taken
    /// in full over R'.
    #[serde(with = "ratio::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub margin_formula: Option<Rational>,
    /// rho|M'| + 1/2|M' ∩ W| + |U'| + (rho-1/2)|U'_0| + |C'| + Σ, with Σ
    /// taken in full over R'.
    #[serde(with = "ratio::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub tokens_formula: Option<Rational>,
    /// Σ x(δ(v)) over R' using every link.
    #[serde(with = "ratio::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub sigma_frozen: Option<Rational>,
    /// The same sum restricted to links still live at contraction time.
    #[serde(with = "ratio::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub sigma_live: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditFailure {
    pub step: Option<usize>,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub steps: Vec<StepAudit>,
    pub partial_size: usize,
    pub alg_size: usize,
    #[serde(with = "ratio::serde_str")]
    pub tau: Rational,
    #[serde(with = "ratio::serde_str")]
    pub coupons_rhs: Rational,
    #[serde(with = "ratio::serde_str")]
    pub rho_tau: Rational,
    #[serde(with = "ratio::serde_str")]
    pub initial_tokens: Rational,
    #[serde(with = "ratio::serde_str")]
    pub record_tokens: Rational,
    pub failures: Vec<AuditFailure>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Failures(Vec<AuditFailure>);

impl Failures {
    fn check(&mut self, ok: bool, step: Option<usize>, check: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.0.push(AuditFailure {
                step,
                check: check.to_string(),
                detail: detail(),
            });
        }
    }
}

fn count(n: usize) -> Rational {
    int(n as i64)
}

fn formulas(
    inst: &TapInstance,
    lp: &LpSolution,
    rho: &Rational,
    s: &SubtreeSummary,
) -> (Rational, Rational, Rational, Rational, Rational) {
    let m = count(s.m_prime.len());
    let mw = count(s.m_prime.iter().filter(|&&l| inst.is_twin(l)).count());
    let u = count(s.u_prime.len());
    let u0 = count(s.u_prime_0.len());
    let c = count(s.c_prime.len());
    let sigma = s.sigma_with(lp);
    let sigma_live = ratio::sum(s.r_prime_live.iter().map(|&l| lp.value(l)).collect::<Vec<_>>().iter());
    let margin = (rho - int(1)) * &m + half() * &mw + (rho - ratio::frac(3, 2)) * &u0 + &c + &sigma;
    let displayed = rho * &m + half() * &mw + &u + (rho - half()) * &u0 + &c + &sigma;
    // what the ledger actually assigns: compound leaves own 1, R' owns half
    // its degree
    let owned = rho * &m + half() * &mw + (&u - &u0) + (rho - half()) * &u0 + &c + half() * &sigma;
    (margin, displayed, owned, sigma, sigma_live)
}

/// Replays the token ledger of a solve against `lp` (a solution of the
/// tightened LP on the closed instance `inst`) and checks every step.
pub fn audit_ledger(trace: &SolveTrace, inst: &TapInstance, lp: &LpSolution, cover: &ExactLeafCover) -> AuditReport {
    let rho = &trace.rho;
    let rhs = coupons_rhs(inst, lp, cover);
    let rho_tau = rho * &lp.tau;
    let initial_tokens = &rhs + int(1);
    let mut f = Failures(Vec::new());
    let mut steps = Vec::new();
    let mut record_tokens = int(0);
    let mut partial = 0;
    let mut original: BTreeSet<Link> = BTreeSet::new();

    for r in &trace.records {
        let tokens = r.tokens.evaluate(lp);
        record_tokens += &tokens;
        partial += r.links.len();
        original.extend(r.original_links.iter().copied());
        let required = r.links.len() + 1;
        let slack = &tokens - count(required);
        f.check(slack >= int(0), Some(r.step), "legal", || {
            format!("tokens {} < |I'|+1 = {}", ratio::fmt(&tokens), required)
        });

        let mut audit = StepAudit {
            step: r.step,
            kind: r.kind,
            tokens: tokens.clone(),
            links: r.links.len(),
            required,
            slack,
            deficiency_margin: None,
            margin_formula: None,
            tokens_formula: None,
            sigma_frozen: None,
            sigma_live: None,
        };
        if let Some(s) = &r.summary {
            let expected = s.m_prime.len() + s.u_prime.len();
            f.check(r.links.len() == expected, Some(r.step), "cover-size", || {
                format!("|I'| = {} but |M'|+|U'| = {}", r.links.len(), expected)
            });
            let margin = &tokens - count(expected);
            f.check(margin >= int(1), Some(r.step), "non-deficient", || {
                format!("tokens - (|M'|+|U'|) = {}", ratio::fmt(&margin))
            });
            let (formula, displayed, owned, sigma, sigma_live) = formulas(inst, lp, rho, s);
            f.check(owned == tokens, Some(r.step), "ledger-identity", || {
                format!(
                    "recorded tokens {} but category count gives {}",
                    ratio::fmt(&tokens),
                    ratio::fmt(&owned)
                )
            });
            audit.deficiency_margin = Some(margin);
            audit.margin_formula = Some(formula);
            audit.tokens_formula = Some(displayed);
            audit.sigma_frozen = Some(sigma);
            audit.sigma_live = Some(sigma_live);
        }
        steps.push(audit);
    }

    if !trace.records.is_empty() {
        let expected = &initial_tokens + count(trace.records.len() - 1);
        f.check(record_tokens == expected, None, "conservation", || {
            format!(
                "records hold {} tokens, expected {}",
                ratio::fmt(&record_tokens),
                ratio::fmt(&expected)
            )
        });
    }
    f.check(count(partial) <= rhs, None, "partial-bound", || {
        format!("|I| = {partial} exceeds {}", ratio::fmt(&rhs))
    });
    f.check(rho_tau >= rhs, None, "lp-bound", || {
        format!("rho*tau = {} < {}", ratio::fmt(&rho_tau), ratio::fmt(&rhs))
    });
    f.check(count(original.len()) <= rho_tau, None, "ratio", || {
        format!("|F| = {} exceeds rho*tau = {}", original.len(), ratio::fmt(&rho_tau))
    });

    AuditReport {
        steps,
        partial_size: partial,
        alg_size: original.len(),
        tau: lp.tau.clone(),
        coupons_rhs: rhs,
        rho_tau,
        initial_tokens,
        record_tokens,
        failures: f.0,
    }
}
