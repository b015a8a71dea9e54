//! `mrl`: check, transform and search derivations of session files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mrl_core::admissible::{self, RuleArgs};
use mrl_core::checker::{check, CheckReport, LogicMode};
use mrl_core::search::{self, Prover, SearchConfig, Selftest, VerificationReport};
use mrl_core::sexpr::{self, Object, Session};
use mrl_core::transform::Engine;
use mrl_core::{Derivation, IFormula, RoleSet, Sequent};

/// Largest derivation height accepted from input files unless overridden.
const DEFAULT_MAX_DEPTH: usize = 1_000_000;
const MAX_DEPTH_VAR: &str = "MRL_MAX_DEPTH";

#[derive(Parser)]
#[command(name = "mrl", version, about = "Verifying kernel for multirole logic (MRL) and linear MRL")]
struct Cli {
    /// Emit machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every derivation of a session file.
    Check { file: PathBuf },
    /// Apply an admissible rule to derivations of a session file.
    Eliminate(EliminateArgs),
    /// Search for a cut-free derivation of a named sequent.
    Search {
        /// Name of a sequent object in the file.
        #[arg(long)]
        goal: String,
        /// Depth bound; defaults to the completeness depth of the goal.
        #[arg(long)]
        depth: Option<usize>,
        /// Contractions allowed per branch.
        #[arg(long, default_value_t = SearchConfig::DEFAULT_BUDGET)]
        budget: usize,
        file: PathBuf,
    },
    /// Run the admissibility oracle over a small exhaustive space.
    Selftest {
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        measure: usize,
        /// Core of a principal filter; adds the restricted runs.
        #[arg(long, value_delimiter = ',')]
        filter_core: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Measure bound of the construct check (default: max(measure, 2)).
        #[arg(long)]
        construct_measure: Option<usize>,
    },
    /// Print a session file in canonical form.
    Fmt { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mrl,
    Lmrl,
    Both,
}

#[derive(clap::Args)]
struct EliminateArgs {
    /// Rule name: one_cut, two_cut_spill, role_split, mp_cut, weaken, derive_full, identity_expand.
    #[arg(long)]
    op: String,
    /// Designated positions, one per input derivation.
    #[arg(long, value_delimiter = ',')]
    at: Vec<usize>,
    /// Input derivations by name (default: every derivation in file order).
    #[arg(long, value_delimiter = ',')]
    input: Vec<String>,
    /// Role sets such as `[0]`: the split parts, or the role set to expand.
    #[arg(long, num_args = 1..)]
    roles: Vec<String>,
    /// Named formula for derive_full and identity_expand.
    #[arg(long)]
    formula: Option<String>,
    /// Named sequent used as context by derive_full and identity_expand.
    #[arg(long)]
    context: Option<String>,
    /// Named i-formula added by weaken.
    #[arg(long)]
    extra: Option<String>,
    /// Print one line per induction step to stderr.
    #[arg(long)]
    trace: bool,
    /// Output file (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    file: PathBuf,
}

/// Failure of a command, with its exit code.
enum Failure {
    /// Logical rejection or verification failure.
    Rejected(String),
    /// Usage, input or parse error.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl ToString) -> Failure {
    Failure::Usage(msg.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file } => run_check(&file, cli.json),
        Command::Eliminate(args) => run_eliminate(&args, cli.json),
        Command::Search { goal, depth, budget, file } => run_search(&file, &goal, depth, budget, cli.json),
        Command::Selftest { universe, measure, filter_core, mode, construct_measure } => {
            let mut cfg = Selftest::new(universe, measure);
            cfg.filter_core = filter_core;
            cfg.modes = match mode {
                ModeArg::Mrl => vec![LogicMode::Mrl],
                ModeArg::Lmrl => vec![LogicMode::Lmrl],
                ModeArg::Both => vec![LogicMode::Mrl, LogicMode::Lmrl],
            };
            if let Some(m) = construct_measure {
                cfg.construct_measure = m;
            }
            run_selftest(&cfg, cli.json)
        }
        Command::Fmt { file } => load(&file).map(|s| print!("{s}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn max_depth() -> Result<usize, Failure> {
    match std::env::var(MAX_DEPTH_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{MAX_DEPTH_VAR} must be a number, got '{v}'"))),
        Err(_) => Ok(DEFAULT_MAX_DEPTH),
    }
}

fn load(path: &PathBuf) -> Result<Session, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let session = sexpr::parse_session(&text).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    let limit = max_depth()?;
    for (name, d) in session.derivations() {
        let h = d.height();
        if h > limit {
            return Err(usage(format!("derivation '{name}' has height {h}, above the limit {limit} ({MAX_DEPTH_VAR})")));
        }
    }
    Ok(session)
}

#[derive(Serialize)]
struct NamedReport<'a> {
    name: &'a str,
    #[serde(flatten)]
    report: CheckReport,
}

fn run_check(file: &PathBuf, json: bool) -> Outcome {
    let session = load(file)?;
    let calc = session.header.calculus();
    let mut reports = Vec::new();
    for (name, d) in session.derivations() {
        let result = check(d, &calc);
        if !json {
            match &result {
                Ok(()) => println!("{name}: accepted"),
                Err(r) => println!("{name}: {r} [{}]", r.reason.code()),
            }
        }
        reports.push(NamedReport { name, report: CheckReport::from_result(&result) });
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("serialisable"));
    }
    if reports.iter().all(|r| r.report.accepted()) {
        Ok(())
    } else {
        Err(Failure::Rejected(String::new()))
    }
}

fn object<'a>(session: &'a Session, name: &str) -> Result<&'a Object, Failure> {
    session.get(name).map(|o| &o.object).ok_or_else(|| usage(format!("no object named '{name}'")))
}

fn eliminate_args(args: &EliminateArgs, session: &Session) -> Result<RuleArgs, Failure> {
    let derivations: Vec<Derivation> = if args.input.is_empty() {
        session.derivations().map(|(_, d)| d.clone()).collect()
    } else {
        args.input
            .iter()
            .map(|n| match object(session, n)? {
                Object::Derivation(d) => Ok(d.clone()),
                other => Err(usage(format!("'{n}' is a {}, not a derivation", other.kind()))),
            })
            .collect::<Result<_, _>>()?
    };
    let universe = session.header.universe;
    let roles: Vec<RoleSet> = args
        .roles
        .iter()
        .map(|r| sexpr::parse_role_set(r, universe).map_err(usage))
        .collect::<Result<_, _>>()?;
    let formula = match &args.formula {
        None => None,
        Some(n) => match object(session, n)? {
            Object::Formula(f) => Some(f.clone()),
            other => return Err(usage(format!("'{n}' is a {}, not a formula", other.kind()))),
        },
    };
    let context = match &args.context {
        None => Sequent::empty(),
        Some(n) => match object(session, n)? {
            Object::Sequent(s) => s.clone(),
            other => return Err(usage(format!("'{n}' is a {}, not a sequent", other.kind()))),
        },
    };
    let extra: Option<IFormula> = match &args.extra {
        None => None,
        Some(n) => match object(session, n)? {
            Object::IFormula(x) => Some(x.clone()),
            other => return Err(usage(format!("'{n}' is a {}, not an i-formula", other.kind()))),
        },
    };
    let uses_derivations = !matches!(args.op.as_str(), "derive_full" | "identity_expand");
    let derivations = if uses_derivations { derivations } else { Vec::new() };
    let needed = match args.op.as_str() {
        "two_cut_spill" => Some(2),
        "mp_cut" => None,
        "derive_full" | "identity_expand" => Some(0),
        _ => Some(1),
    };
    let derivations = match needed {
        Some(k) if derivations.len() < k => {
            return Err(usage(format!("{} needs {k} input derivation(s), found {}", args.op, derivations.len())))
        }
        Some(k) => derivations.into_iter().take(k).collect(),
        None => derivations,
    };
    if uses_derivations && args.op != "weaken" && args.at.len() != derivations.len() {
        return Err(usage(format!("--at needs one position per input derivation ({})", derivations.len())));
    }
    let roles = if args.op == "derive_full" { vec![universe.full()] } else { roles };
    if args.op == "role_split" && roles.len() != 2 {
        return Err(usage("role_split needs --roles <R1> <R2>"));
    }
    if args.op == "identity_expand" && roles.len() != 1 {
        return Err(usage("identity_expand needs --roles <R>"));
    }
    if matches!(args.op.as_str(), "derive_full" | "identity_expand") && formula.is_none() {
        return Err(usage(format!("{} needs --formula <name>", args.op)));
    }
    if args.op == "weaken" && extra.is_none() {
        return Err(usage("weaken needs --extra <name>"));
    }
    let positions = if args.op == "weaken" { vec![0] } else { args.at.clone() };
    Ok(RuleArgs { derivations, positions, roles, formula, extra, context, label: args.op.clone() })
}

#[derive(Serialize)]
struct EliminateReport {
    op: String,
    status: &'static str,
    conclusion: Option<String>,
    error: Option<String>,
    height: Option<usize>,
}

fn run_eliminate(args: &EliminateArgs, json: bool) -> Outcome {
    let rule = admissible::lookup(&args.op)
        .ok_or_else(|| usage(format!("unknown --op '{}'; expected one of {}", args.op, admissible::names().join(", "))))?;
    let session = load(&args.file)?;
    let rule_args = eliminate_args(args, &session)?;
    let calc = session.header.calculus();
    let mut engine = Engine::new(calc);
    if args.trace {
        engine = engine.instrumented(true);
    }
    let result = rule.apply(&mut engine, &rule_args);
    if args.trace {
        for step in &engine.trace.steps {
            eprintln!("{step}");
        }
        for v in &engine.trace.violations {
            eprintln!("metric violation: {v}");
        }
    }
    let d = match result {
        Ok(d) => d,
        Err(e) => {
            if json {
                let r = EliminateReport { op: args.op.clone(), status: "error", conclusion: None, error: Some(e.to_string()), height: None };
                println!("{}", serde_json::to_string_pretty(&r).expect("serialisable"));
            }
            return Err(Failure::Rejected(format!("{}: {e}", args.op)));
        }
    };
    // Never write a derivation that fails to check.
    if let Err(r) = check(&d, &calc) {
        return Err(Failure::Rejected(format!("{}: output {r}", args.op)));
    }
    let mut out = Session::new(session.header);
    out.push("result", Object::Derivation(d.clone()));
    let text = out.to_string();
    match &args.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None if !json => print!("{text}"),
        None => {}
    }
    if json {
        let r = EliminateReport {
            op: args.op.clone(),
            status: "ok",
            conclusion: Some(d.conclusion.to_string()),
            error: None,
            height: Some(d.height()),
        };
        println!("{}", serde_json::to_string_pretty(&r).expect("serialisable"));
    } else if args.output.is_some() {
        println!("{}: {} (height {})", args.op, d.conclusion, d.height());
    }
    Ok(())
}

#[derive(Serialize)]
struct SearchReport {
    goal: String,
    depth: usize,
    budget: usize,
    found: bool,
    /// Whether the depth reaches the completeness bound, so that not
    /// finding a derivation means none exists within the budget.
    complete: bool,
    derivation: Option<String>,
}

fn run_search(file: &PathBuf, goal: &str, depth: Option<usize>, budget: usize, json: bool) -> Outcome {
    let session = load(file)?;
    let seq = match object(&session, goal)? {
        Object::Sequent(s) => s.clone(),
        Object::IFormula(x) => Sequent::new(vec![x.clone()]),
        other => return Err(usage(format!("'{goal}' is a {}, not a sequent", other.kind()))),
    };
    let bound = search::completeness_depth(&seq, budget);
    let depth = depth.unwrap_or(bound);
    if depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    let cfg = SearchConfig { max_depth: depth, calc: session.header.calculus(), contraction_budget: budget };
    let found = Prover::new(cfg).prove(&seq).map_err(usage)?;
    let report = SearchReport {
        goal: seq.to_string(),
        depth,
        budget,
        found: found.is_some(),
        complete: depth >= bound,
        derivation: found.as_ref().map(sexpr::print_derivation),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serialisable"));
    } else {
        match &report.derivation {
            Some(d) => println!("{d}"),
            None if report.complete => println!("not derivable (depth {depth}, contraction budget {budget})"),
            None => println!("not found within depth {depth}"),
        }
    }
    if report.found {
        Ok(())
    } else {
        Err(Failure::Rejected(String::new()))
    }
}

fn run_selftest(cfg: &Selftest, json: bool) -> Outcome {
    let reports: Vec<VerificationReport> = cfg.run().map_err(usage)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("serialisable"));
    } else {
        for r in &reports {
            println!("{r}");
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        if !json {
            println!("selftest: {} reports, zero failures", reports.len());
        }
        Ok(())
    } else {
        Err(Failure::Rejected(format!("selftest: {failed} of {} reports have failures", reports.len())))
    }
}
