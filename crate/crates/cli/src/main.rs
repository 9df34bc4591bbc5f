use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use tap_core::contraction::{audit_ledger, solve_with, AuditReport, SolveOptions};
use tap_core::gen::{generate, GenSpec, TreeShape};
use tap_core::leafcover::{min_weight_exact_cover, LeafWeightConfig};
use tap_core::lpbound::{build_cut_model, build_pi_model, coupons_rhs, solve_lp, LpSolution};
use tap_core::oracle::{exact_opt, DEFAULT_WITNESS_CAP};
use tap_core::ratio::{self, Rational};
use tap_core::stress::{run_stress, StressConfig};
use tap_core::{parse_instance, Error, Link, TapInstance};

#[derive(Parser)]
#[command(name = "tap", version, about = "Tree augmentation: approximate, bound and check")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Write Graphviz snapshots of the contracted tree into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    emit_dot: Option<PathBuf>,

    /// Weight parameter rho as p/q; at least 3/2.
    #[arg(long, global = true, default_value = "7/4", value_name = "P/Q")]
    rho: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random feasible instance.
    Gen(GenArgs),
    /// Run the approximation algorithm.
    Solve(SolveArgs),
    /// Minimum-weight exact cover of the leaves.
    Leafcover(InputArgs),
    /// Solve the tightened LP and the cut LP.
    Bound(BoundArgs),
    /// Exact optimum by exhaustive search.
    Exact(ExactArgs),
    /// Solve and audit the token ledger step by step.
    Audit(InputArgs),
    /// Run the randomized sweep and check every guarantee.
    Stress(StressArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Instance file, or - for stdin.
    input: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Probability of each non-tree pair becoming a link, as p/q.
    #[arg(long, default_value = "1/4")]
    density: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// random-tree, caterpillar or star-of-paths.
    #[arg(long, default_value = "random-tree")]
    mode: String,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file, or - for stdin.
    input: PathBuf,
    /// Write the contraction trace as JSON lines.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Also audit the ledger; exit status 1 if any check fails.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// Instance file, or - for stdin.
    input: PathBuf,
    /// Dump the constraint rows; `text` is the only format.
    #[arg(long, value_name = "FORMAT")]
    lp_format: Option<String>,
}

#[derive(Args)]
struct ExactArgs {
    /// Instance file, or - for stdin.
    input: PathBuf,
    /// Maximum number of optimal witnesses to collect.
    #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
    cap: usize,
}

#[derive(Args)]
struct StressArgs {
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances with more leaves are redrawn.
    #[arg(long, default_value_t = 8)]
    max_leaves: usize,
}

enum Failure {
    /// Bad input: exit status 2.
    Input(String),
    /// A check or invariant failed: exit status 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant { .. }
            | Error::LpInfeasible
            | Error::LpUnbounded
            | Error::NoPerfectMatching
            | Error::Precondition(_) => Failure::Check(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn read_instance(path: &Path) -> Result<TapInstance, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(input_err)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?
    };
    Ok(parse_instance(&text)?)
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, Failure> {
    ratio::parse(s).ok_or_else(|| input_err(format!("{what} {s:?} is not a rational p/q")))
}

fn fmt_links<'a>(links: impl IntoIterator<Item = &'a Link>) -> String {
    links.into_iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn links_json<'a>(links: impl IntoIterator<Item = &'a Link>) -> Value {
    links
        .into_iter()
        .map(|l| json!([l.u().index(), l.v().index()]))
        .collect()
}

fn emit_dot(dir: &Path, snapshots: &[String]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))?;
    for (i, dot) in snapshots.iter().enumerate() {
        let path = dir.join(format!("step_{i:03}.dot"));
        fs::write(&path, dot).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn closed(inst: &TapInstance) -> TapInstance {
    if inst.is_closed() {
        inst.clone()
    } else {
        inst.shadow_completion()
    }
}

fn tightened_lp(inst: &TapInstance) -> Result<LpSolution, Failure> {
    Ok(solve_lp(&build_pi_model(&closed(inst))?)?)
}

fn audit_json(report: &AuditReport) -> Value {
    serde_json::to_value(report).expect("report serializes")
}

fn print_audit(report: &AuditReport) {
    println!("step  kind         tokens  |I'|  slack  margin");
    for s in &report.steps {
        println!(
            "{:>4}  {:<11}  {:>6}  {:>4}  {:>5}  {}",
            s.step,
            serde_json::to_value(s.kind).unwrap().as_str().unwrap(),
            ratio::fmt(&s.tokens),
            s.links,
            ratio::fmt(&s.slack),
            s.deficiency_margin.as_ref().map(ratio::fmt).unwrap_or_else(|| "-".into())
        );
    }
    println!(
        "tau {}  rho*tau {}  w(F_L)+sigma/2 {}  |I| {}  |F| {}",
        ratio::fmt(&report.tau),
        ratio::fmt(&report.rho_tau),
        ratio::fmt(&report.coupons_rhs),
        report.partial_size,
        report.alg_size
    );
    for f in &report.failures {
        let at = f.step.map(|s| format!(" at step {s}")).unwrap_or_default();
        println!("FAIL {}{at}: {}", f.check, f.detail);
    }
    println!("{}", if report.passed() { "audit passed" } else { "audit failed" });
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Outcome {
    let mode: TreeShape = args.mode.parse()?;
    let spec = GenSpec::new(args.n, parse_rational(&args.density, "density")?, args.seed, mode);
    let inst = generate(&spec)?;
    if cli.json {
        println!("{}", json!({ "spec": spec, "instance": inst.to_text() }));
    } else {
        print!("{}", inst.to_text());
    }
    Ok(true)
}

fn cmd_solve(cli: &Cli, cfg: &LeafWeightConfig, args: &SolveArgs) -> Outcome {
    let inst = read_instance(&args.input)?;
    let opts = SolveOptions {
        snapshots: cli.emit_dot.is_some(),
    };
    let sol = solve_with(&inst, cfg, &opts)?;
    if let Some(dir) = &cli.emit_dot {
        emit_dot(dir, &sol.snapshots)?;
    }
    if let Some(path) = &args.trace {
        fs::write(path, sol.trace.to_json_lines()).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    }
    let report = if args.audit {
        let lp = tightened_lp(&inst)?;
        Some(audit_ledger(&sol.trace, &closed(&inst), &lp, &sol.cover))
    } else {
        None
    };
    if cli.json {
        let mut out = json!({
            "rho": ratio::fmt(&cfg.rho),
            "size": sol.size(),
            "links": links_json(&sol.links),
            "cover_weight": ratio::fmt(&sol.cover.weight),
            "contractions": sol.trace.records.len(),
        });
        if let Some(r) = &report {
            out["audit"] = audit_json(r);
        }
        println!("{out}");
    } else {
        println!("size {}", sol.size());
        println!("links {}", fmt_links(&sol.links));
        if let Some(r) = &report {
            print_audit(r);
        }
    }
    Ok(report.is_none_or(|r| r.passed()))
}

fn cmd_leafcover(cli: &Cli, cfg: &LeafWeightConfig, args: &InputArgs) -> Outcome {
    let inst = closed(&read_instance(&args.input)?);
    let cover = min_weight_exact_cover(cfg, &inst)?;
    if cli.json {
        println!(
            "{}",
            json!({
                "weight": ratio::fmt(&cover.weight),
                "links": links_json(&cover.links),
                "matching": links_json(&cover.matching_part),
            })
        );
    } else {
        println!("weight {}", ratio::fmt(&cover.weight));
        println!("links {}", fmt_links(&cover.links));
        println!("matching {}", fmt_links(&cover.matching_part));
    }
    Ok(true)
}

fn cmd_bound(cli: &Cli, cfg: &LeafWeightConfig, args: &BoundArgs) -> Outcome {
    let inst = read_instance(&args.input)?;
    let closed = closed(&inst);
    let model = build_pi_model(&closed)?;
    if let Some(format) = &args.lp_format {
        if format != "text" {
            return Err(input_err(format!("unknown LP format {format:?}; expected text")));
        }
        print!("{}", model.to_text());
        return Ok(true);
    }
    let lp = solve_lp(&model)?;
    let cut = solve_lp(&build_cut_model(&inst))?;
    let cover = min_weight_exact_cover(cfg, &closed)?;
    let rhs = coupons_rhs(&closed, &lp, &cover);
    let support: Vec<(&Link, &Rational)> = lp.x.iter().filter(|(_, v)| **v != ratio::int(0)).collect();
    if cli.json {
        let x: serde_json::Map<String, Value> = support
            .iter()
            .map(|(l, v)| (l.to_string(), Value::String(ratio::fmt(v))))
            .collect();
        println!(
            "{}",
            json!({
                "tau": ratio::fmt(&lp.tau),
                "cut": ratio::fmt(&cut.tau),
                "rho_tau": ratio::fmt(&(&cfg.rho * &lp.tau)),
                "cover_bound": ratio::fmt(&rhs),
                "pivots": lp.pivots,
                "x": x,
            })
        );
    } else {
        println!("tau {}", ratio::fmt(&lp.tau));
        println!("cut {}", ratio::fmt(&cut.tau));
        println!("rho*tau {}", ratio::fmt(&(&cfg.rho * &lp.tau)));
        println!("w(F_L)+sigma/2 {}", ratio::fmt(&rhs));
        for (l, v) in support {
            println!("x{l} = {}", ratio::fmt(v));
        }
    }
    Ok(true)
}

fn cmd_exact(cli: &Cli, args: &ExactArgs) -> Outcome {
    let inst = read_instance(&args.input)?;
    let res = exact_opt(&inst, args.cap.max(1))?;
    let witness = res.witnesses.first().cloned().unwrap_or_default();
    if cli.json {
        println!(
            "{}",
            json!({
                "opt": res.opt_size,
                "witness": links_json(&witness),
                "witnesses": res.witnesses.len(),
                "truncated": res.truncated,
                "search_nodes": res.enumeration_stats.nodes,
            })
        );
    } else {
        println!("opt {}", res.opt_size);
        println!("witness {}", fmt_links(&witness));
        println!(
            "witnesses {}{}",
            res.witnesses.len(),
            if res.truncated { " (truncated)" } else { "" }
        );
    }
    Ok(true)
}

fn cmd_audit(cli: &Cli, cfg: &LeafWeightConfig, args: &InputArgs) -> Outcome {
    let inst = read_instance(&args.input)?;
    let opts = SolveOptions {
        snapshots: cli.emit_dot.is_some(),
    };
    let sol = solve_with(&inst, cfg, &opts)?;
    if let Some(dir) = &cli.emit_dot {
        emit_dot(dir, &sol.snapshots)?;
    }
    let lp = tightened_lp(&inst)?;
    let report = audit_ledger(&sol.trace, &closed(&inst), &lp, &sol.cover);
    if cli.json {
        println!("{}", audit_json(&report));
    } else {
        print_audit(&report);
    }
    Ok(report.passed())
}

fn cmd_stress(cli: &Cli, cfg: &LeafWeightConfig, args: &StressArgs) -> Outcome {
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(input_err(format!("bad size range {}..={}", args.n_min, args.n_max)));
    }
    let config = StressConfig {
        count: args.count,
        n_min: args.n_min,
        n_max: args.n_max,
        seed: args.seed,
        max_leaves: args.max_leaves,
        cfg: cfg.clone(),
    };
    let report = run_stress(&config)?;
    if cli.json {
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        println!("instances {}", report.instances);
        println!("max |ALG|/OPT {}", ratio::fmt(&report.max_ratio_opt));
        println!("max |ALG|/tau {}", ratio::fmt(&report.max_ratio_tau));
        for f in &report.failures {
            println!("FAIL seed {} {}: {}", f.seed, f.check, f.detail);
        }
    }
    Ok(report.passed())
}

fn run(cli: &Cli) -> Outcome {
    let cfg = LeafWeightConfig::parse(&cli.rho)?;
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Solve(a) => cmd_solve(cli, &cfg, a),
        Command::Leafcover(a) => cmd_leafcover(cli, &cfg, a),
        Command::Bound(a) => cmd_bound(cli, &cfg, a),
        Command::Exact(a) => cmd_exact(cli, a),
        Command::Audit(a) => cmd_audit(cli, &cfg, a),
        Command::Stress(a) => cmd_stress(cli, &cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
