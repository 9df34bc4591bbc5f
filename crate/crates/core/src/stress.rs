//! Randomized sweep that runs the whole pipeline on generated instances and
//! checks every guarantee exactly.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contraction::{audit_ledger, solve, ContractionKind};
use crate::error::Result;
use crate::gen::{generate, GenSpec, TreeShape};
use crate::instance::{Link, TapInstance};
use crate::leafcover::{min_weight_exact_cover, LeafWeightConfig};
use crate::lpbound::{build_cut_model, build_pi_model, solve_lp};
use crate::oracle::{self, exact_leaf_cover_opt, exact_opt, shadow_minimal_twin_max};
use crate::ratio::{self, frac, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressFailure {
    pub seed: u64,
    pub check: String,
    pub detail: String,
}

/// Counters beyond the report schema, for tests and logs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StressStats {
    pub contractions: usize,
    pub find_tree_steps: usize,
    pub pi_checked: usize,
    pub leaf_cover_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressReport {
    pub instances: usize,
    #[serde(with = "ratio::serde_str")]
    pub max_ratio_opt: Rational,
    #[serde(with = "ratio::serde_str")]
    pub max_ratio_tau: Rational,
    pub failures: Vec<StressFailure>,
    #[serde(skip)]
    pub stats: StressStats,
}

impl StressReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct StressConfig {
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Instances with more leaves are redrawn.
    pub max_leaves: usize,
    pub cfg: LeafWeightConfig,
}

impl Default for StressConfig {
    fn default() -> Self {
        StressConfig {
            count: 500,
            n_min: 4,
            n_max: 12,
            seed: 0,
            max_leaves: 8,
            cfg: LeafWeightConfig::default(),
        }
    }
}

/// Everything measured on one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceOutcome {
    pub seed: u64,
    pub opt: usize,
    pub alg: usize,
    pub tau: Rational,
    pub cut: Rational,
    pub contractions: usize,
    pub find_tree_steps: usize,
    pub pi_checked: bool,
    pub leaf_cover_checked: bool,
    pub failures: Vec<StressFailure>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator spec of sweep instance `index`; `attempt` redraws it.
pub fn sweep_spec(config: &StressConfig, index: usize, attempt: usize) -> GenSpec {
    let seed = splitmix(config.seed ^ splitmix(index as u64) ^ splitmix(attempt as u64).rotate_left(17));
    let span = config.n_max - config.n_min + 1;
    let n = config.n_min + (seed % span as u64) as usize;
    let mode = TreeShape::ALL[(seed >> 8) as usize % 3];
    let density = [frac(1, 6), frac(1, 4), frac(1, 3)][(seed >> 16) as usize % 3].clone();
    GenSpec::new(n, density, seed, mode)
}

fn sweep_instance(config: &StressConfig, index: usize) -> Result<(u64, TapInstance)> {
    let mut attempt = 0;
    loop {
        let spec = sweep_spec(config, index, attempt);
        let inst = generate(&spec)?;
        if inst.leaves().len() <= config.max_leaves && inst.link_count() <= oracle::MAX_LINKS {
            return Ok((spec.seed, inst));
        }
        attempt += 1;
    }
}

struct Checks {
    seed: u64,
    failures: Vec<StressFailure>,
}

impl Checks {
    fn check(&mut self, ok: bool, check: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.fail(check, detail());
        }
    }

    fn fail(&mut self, check: &str, detail: String) {
        self.failures.push(StressFailure {
            seed: self.seed,
            check: check.to_string(),
            detail,
        });
    }
}

fn indicator(links: impl IntoIterator<Item = Link>) -> BTreeMap<Link, Rational> {
    links.into_iter().map(|l| (l, int(1))).collect()
}

/// Runs solve, the oracles, both LPs and the ledger audit on one instance
/// and checks the guarantees. Errors become failures.
pub fn check_instance(inst: &TapInstance, cfg: &LeafWeightConfig, seed: u64) -> InstanceOutcome {
    let mut c = Checks {
        seed,
        failures: Vec::new(),
    };
    let mut out = InstanceOutcome {
        seed,
        opt: 0,
        alg: 0,
        tau: int(0),
        cut: int(0),
        contractions: 0,
        find_tree_steps: 0,
        pi_checked: false,
        leaf_cover_checked: false,
        failures: Vec::new(),
    };
    if let Err(e) = run_checks(inst, cfg, &mut c, &mut out) {
        c.fail("error", e.to_string());
    }
    out.failures = c.failures;
    out
}

fn run_checks(inst: &TapInstance, cfg: &LeafWeightConfig, c: &mut Checks, out: &mut InstanceOutcome) -> Result<()> {
    let rho = &cfg.rho;
    let closed = inst.shadow_completion();
    let sol = solve(inst, cfg)?;
    out.alg = sol.size();
    out.contractions = sol.trace.records.len();
    out.find_tree_steps = sol
        .trace
        .records
        .iter()
        .filter(|r| r.kind == ContractionKind::FindTree)
        .count();
    c.check(inst.validate_solution(&sol.links)?, "feasible", || "solution leaves an edge uncovered".into());

    let opt = exact_opt(inst, 1)?.opt_size;
    out.opt = opt;
    let pi = build_pi_model(&closed)?;
    let lp = solve_lp(&pi)?;
    let cut = solve_lp(&build_cut_model(inst))?;
    out.tau = lp.tau.clone();
    out.cut = cut.tau.clone();

    let alg = int(out.alg as i64);
    let rho_tau = rho * &lp.tau;
    c.check(alg <= rho_tau, "ratio-tau", || {
        format!("|ALG| = {} > rho*tau = {}", out.alg, ratio::fmt(&rho_tau))
    });
    c.check(alg <= rho * int(opt as i64), "ratio-opt", || {
        format!("|ALG| = {} > rho*OPT, OPT = {opt}", out.alg)
    });
    c.check(cut.tau <= lp.tau, "sandwich", || {
        format!("cut LP {} > tau {}", ratio::fmt(&cut.tau), ratio::fmt(&lp.tau))
    });
    c.check(lp.tau <= int(opt as i64), "sandwich", || {
        format!("tau {} > OPT {opt}", ratio::fmt(&lp.tau))
    });
    c.check(opt <= out.alg, "sandwich", || format!("OPT {opt} > |ALG| {}", out.alg));

    let report = audit_ledger(&sol.trace, &closed, &lp, &sol.cover);
    for f in report.failures {
        let at = f.step.map(|s| format!("step {s}: ")).unwrap_or_default();
        c.fail(&format!("audit-{}", f.check), format!("{at}{}", f.detail));
    }

    let witness = shadow_minimal_twin_max(inst)?;
    let x = indicator(witness.iter().copied());
    for row in &pi.rows {
        c.check(row.is_satisfied(&x), "pi-membership", || {
            format!("row {:?} {:?} violated by {:?}", row.kind, row.tag, witness)
        });
    }
    out.pi_checked = true;

    if closed.leaves().len() <= oracle::MAX_LEAVES {
        let matched = min_weight_exact_cover(cfg, &closed)?;
        let brute = exact_leaf_cover_opt(&closed, cfg)?;
        c.check(matched.weight == brute.weight, "leaf-cover", || {
            format!(
                "matching gives {} but enumeration gives {}",
                ratio::fmt(&matched.weight),
                ratio::fmt(&brute.weight)
            )
        });
        out.leaf_cover_checked = true;
    }
    Ok(())
}

/// Folds per-instance outcomes into a report, in the order given.
pub fn aggregate(outcomes: &[InstanceOutcome]) -> StressReport {
    let mut report = StressReport {
        instances: outcomes.len(),
        max_ratio_opt: int(0),
        max_ratio_tau: int(0),
        failures: Vec::new(),
        stats: StressStats::default(),
    };
    for o in outcomes {
        let alg = int(o.alg as i64);
        if o.opt > 0 {
            report.max_ratio_opt = report.max_ratio_opt.clone().max(&alg / int(o.opt as i64));
        }
        if o.tau > int(0) {
            report.max_ratio_tau = report.max_ratio_tau.clone().max(&alg / &o.tau);
        }
        report.failures.extend(o.failures.iter().cloned());
        report.stats.contractions += o.contractions;
        report.stats.find_tree_steps += o.find_tree_steps;
        report.stats.pi_checked += o.pi_checked as usize;
        report.stats.leaf_cover_checked += o.leaf_cover_checked as usize;
    }
    report
}

/// Per-instance outcomes of a sweep, in instance order.
pub fn sweep(config: &StressConfig) -> Result<Vec<InstanceOutcome>> {
    let instances: Vec<(u64, TapInstance)> = (0..config.count)
        .map(|i| sweep_instance(config, i))
        .collect::<Result<_>>()?;
    Ok(instances
        .par_iter()
        .map(|(seed, inst)| check_instance(inst, &config.cfg, *seed))
        .collect())
}

pub fn run_stress(config: &StressConfig) -> Result<StressReport> {
    Ok(aggregate(&sweep(config)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn fixtures_are_solved_optimally() {
        let cfg = LeafWeightConfig::default();
        let outcomes: Vec<InstanceOutcome> = [fixture_1(), fixture_2(), fixture_3()]
            .iter()
            .map(|inst| check_instance(inst, &cfg, 0))
            .collect();
        let report = aggregate(&outcomes);
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.max_ratio_opt, int(1));
        assert_eq!(report.max_ratio_tau, int(1));
    }

    #[test]
    fn small_sweep() {
        let config = StressConfig {
            count: 40,
            seed: 11,
            ..StressConfig::default()
        };
        let report = run_stress(&config).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.instances, 40);
        assert!(report.max_ratio_tau <= frac(7, 4));
    }

    #[test]
    fn report_round_trips() {
        let report = StressReport {
            instances: 3,
            max_ratio_opt: frac(4, 3),
            max_ratio_tau: frac(3, 2),
            failures: vec![StressFailure {
                seed: 9,
                check: "ratio-tau".into(),
                detail: "x".into(),
            }],
            stats: StressStats::default(),
        };
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["max_ratio_opt"], "4/3");
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["failures", "instances", "max_ratio_opt", "max_ratio_tau"]);
        let back: StressReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn sweep_is_deterministic() {
        let config = StressConfig {
            count: 5,
            seed: 3,
            ..StressConfig::default()
        };
        let a: Vec<u64> = (0..5).map(|i| sweep_instance(&config, i).unwrap().0).collect();
        let b: Vec<u64> = (0..5).map(|i| sweep_instance(&config, i).unwrap().0).collect();
        assert_eq!(a, b);
    }
}
