use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hflz::chc::{chc_to_hfl, default_solver_command, emit_smtlib_horn, hfl_to_chc, parse_horn, SolverConfig};
use hflz::lts::{parse_lts, trivial_model, Lts};
use hflz::pipeline::{self, Decision, PipelineConfig, Timing, Verdict};
use hflz::program::{parse_program, translate_program};
use hflz::semantics::{check_pure_with_stats, eval_bounded_with, Boundary, EvalConfig};
use hflz::syntax::{dualize, order_of, parse_formula, typecheck_closed, FixKind, Formula};
use hflz::transforms::{
    abstract_predicates, eliminate_mu, parse_bound, parse_predicates, Entailment, PredicateSet,
    SmtEntailment, WindowEntailment,
};

#[derive(Parser)]
#[command(name = "hflmc", version, about = "Model and validity checking for HFL(Z) formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args)]
struct Opts {
    /// Integer window [-N, N] for bounded evaluation
    #[arg(long, global = true, default_value_t = 8)]
    window: i64,
    /// Bound schedule for μ-elimination
    #[arg(long, global = true, value_delimiter = ',', default_values_t = vec![1, 2, 4, 8])]
    bounds: Vec<i64>,
    /// Explicit μ-elimination bound, e.g. `max(i + 1, 1)`
    #[arg(long, global = true)]
    bound: Option<String>,
    /// Solver command; `{file}` is replaced by the script path
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Per-call solver timeout in seconds
    #[arg(long, global = true, default_value_t = 30)]
    timeout: u64,
    #[arg(long, global = true, default_value_t = 1 << 20)]
    table_cap: usize,
    /// Fixpoint polarity used when translating programs
    #[arg(long, global = true, value_enum, default_value_t = Polarity::Mu)]
    polarity: Polarity,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run the formula and its dual one after the other
    #[arg(long, global = true)]
    no_race: bool,
    /// Abstraction predicates file
    #[arg(long, global = true)]
    preds: Option<PathBuf>,
    /// Transition system (default: one state, no transitions)
    #[arg(long, global = true)]
    lts: Option<PathBuf>,
    /// Out-of-window policy for bounded evaluation
    #[arg(long, global = true, value_enum, default_value_t = BoundaryArg::Bottom)]
    boundary: BoundaryArg,
    /// Entailment engine for predicate abstraction
    #[arg(long, global = true, value_enum, default_value_t = EntailArg::Smt)]
    entail: EntailArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Polarity {
    Mu,
    Nu,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Bottom,
    Polarity,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntailArg {
    Smt,
    Window,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a closed formula
    Typecheck { file: PathBuf },
    /// Exact model checking of a pure formula on a transition system
    Check { lts: PathBuf, file: PathBuf },
    /// Full validity pipeline, racing the formula against its dual
    Validity { file: PathBuf },
    /// Print the De Morgan dual
    Dualize { file: PathBuf },
    /// Replace least fixpoints by bounded greatest fixpoints
    ElimMu { file: PathBuf },
    /// Predicate abstraction to a pure formula
    Abstract { file: PathBuf },
    /// Emit SMT-LIB2 Horn clauses
    ToChc { file: PathBuf },
    /// Read Horn clauses and print the equivalent formula
    FromChc { file: PathBuf },
    /// Translate a program to a formula
    Translate { file: PathBuf },
    /// Bounded evaluation over the integer window
    Eval { file: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Typecheck { .. } => "typecheck",
            Command::Check { .. } => "check",
            Command::Validity { .. } => "validity",
            Command::Dualize { .. } => "dualize",
            Command::ElimMu { .. } => "elim-mu",
            Command::Abstract { .. } => "abstract",
            Command::ToChc { .. } => "to-chc",
            Command::FromChc { .. } => "from-chc",
            Command::Translate { .. } => "translate",
            Command::Eval { .. } => "eval",
        }
    }
}

/// JSON report; every key is always present.
#[derive(Serialize, Default)]
struct Report {
    command: String,
    verdict: Option<String>,
    stage: Option<String>,
    pipeline: Option<String>,
    bound: Option<String>,
    solver: Option<String>,
    reason: Option<String>,
    output: Option<String>,
    error: Option<String>,
    timings: Vec<StageTime>,
}

#[derive(Serialize)]
struct StageTime {
    pipeline: &'static str,
    stage: String,
    ms: u128,
    result: String,
}

impl From<Timing> for StageTime {
    fn from(t: Timing) -> Self {
        StageTime { pipeline: t.pipeline, stage: t.stage, ms: t.ms, result: t.result }
    }
}

type Fallible<T> = Result<T, String>;

fn read(path: &Path) -> Fallible<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))
}

fn ext(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

impl Opts {
    fn fix_kind(&self) -> FixKind {
        match self.polarity {
            Polarity::Mu => FixKind::Mu,
            Polarity::Nu => FixKind::Nu,
        }
    }

    /// Reads a formula, translating programs (`.prog`) and Horn systems
    /// (`.smt2`) first.
    fn formula(&self, path: &Path) -> Fallible<Formula> {
        let text = read(path)?;
        let f = match ext(path) {
            "prog" => translate_program(&parse_program(&text).map_err(|e| e.to_string())?, self.fix_kind()),
            "smt2" => chc_to_hfl(&parse_horn(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?,
            _ => parse_formula(&text).map_err(|e| e.to_string())?,
        };
        typecheck_closed(&f).map_err(|e| e.to_string())?;
        Ok(f)
    }

    fn model(&self) -> Fallible<Lts> {
        match &self.lts {
            Some(p) => parse_lts(&read(p)?).map_err(|e| format!("{}: {}", p.display(), e)),
            None => Ok(trivial_model()),
        }
    }

    fn preds(&self) -> Fallible<Option<PredicateSet>> {
        self.preds
            .as_ref()
            .map(|p| parse_predicates(&read(p)?).map_err(|e| format!("{}: {}", p.display(), e)))
            .transpose()
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            command: self.solver.clone().unwrap_or_else(default_solver_command),
            timeout: Duration::from_secs(self.timeout),
        }
    }

    fn engine(&self) -> Arc<dyn Entailment> {
        match self.entail {
            EntailArg::Smt => Arc::new(SmtEntailment::new(self.solver().command, Duration::from_secs(self.timeout))),
            EntailArg::Window => Arc::new(WindowEntailment::new(self.window)),
        }
    }

    fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            window: self.window,
            boundary: match self.boundary {
                BoundaryArg::Bottom => Boundary::Bottom,
                BoundaryArg::Polarity => Boundary::Polarity,
            },
            table_cap: self.table_cap,
        }
    }

    fn validate(&self) -> Fallible<()> {
        if self.window < 0 {
            return Err("--window must be non-negative".into());
        }
        if self.bounds.is_empty() || self.bounds.iter().any(|&b| b <= 0) {
            return Err("--bounds must be a non-empty list of positive integers".into());
        }
        if self.timeout == 0 || self.table_cap == 0 {
            return Err("--timeout and --table-cap must be positive".into());
        }
        Ok(())
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Valid => "valid",
        Verdict::Invalid => "invalid",
        Verdict::Unknown => "unknown",
    }
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Valid => 0,
        Verdict::Invalid => 1,
        Verdict::Unknown => 2,
    }
}

fn from_bool(b: bool) -> Verdict {
    if b {
        Verdict::Valid
    } else {
        Verdict::Invalid
    }
}

fn run(cmd: &Command, o: &Opts, rep: &mut Report) -> Fallible<Option<Verdict>> {
    o.validate()?;
    match cmd {
        Command::Typecheck { file } => {
            let f = o.formula(file)?;
            let t = typecheck_closed(&f).map_err(|e| e.to_string())?;
            let mut order = 0;
            f.visit(&mut |g| {
                if let Formula::Fix(_, _, ty, _) = g {
                    order = order.max(order_of(ty));
                }
            });
            rep.output = Some(format!("{} (fixpoint order {})", t, order));
            Ok(None)
        }
        Command::Check { lts, file } => {
            let m = parse_lts(&read(lts)?).map_err(|e| format!("{}: {}", lts.display(), e))?;
            let f = o.formula(file)?;
            let (b, _) = check_pure_with_stats(&m, &f, o.table_cap).map_err(|e| e.to_string())?;
            rep.stage = Some("check_pure".into());
            Ok(Some(from_bool(b)))
        }
        Command::Eval { file } => {
            let f = o.formula(file)?;
            let (b, _) = eval_bounded_with(&f, &o.model()?, &o.eval_config()).map_err(|e| e.to_string())?;
            rep.stage = Some("eval-bounded".into());
            rep.bound = Some(format!("window {}", o.window));
            Ok(Some(from_bool(b)))
        }
        Command::Validity { file } => {
            let f = o.formula(file)?;
            let cfg = PipelineConfig {
                bounds: o.bounds.clone(),
                bound: o.bound.as_deref().map(parse_bound).transpose().map_err(|e| e.to_string())?,
                solver: o.solver(),
                preds: o.preds()?,
                engine: o.engine(),
                model: o.model()?,
                table_cap: o.table_cap,
            };
            let d: Decision = pipeline::validity(&f, Arc::new(cfg), !o.no_race);
            rep.stage = d.stage;
            rep.pipeline = d.pipeline.map(String::from);
            rep.bound = d.bound;
            rep.solver = d.solver;
            rep.reason = d.reason;
            rep.timings = d.timings.into_iter().map(StageTime::from).collect();
            Ok(Some(d.verdict))
        }
        Command::Dualize { file } => {
            rep.output = Some(dualize(&o.formula(file)?).to_string());
            Ok(None)
        }
        Command::ElimMu { file } => {
            let f = o.formula(file)?;
            let b = match &o.bound {
                Some(b) => parse_bound(b).map_err(|e| e.to_string())?,
                None => hflz::transforms::BoundExpr::constant(o.bounds[0]),
            };
            rep.output = Some(eliminate_mu(&f, &b).map_err(|e| e.to_string())?.to_string());
            Ok(None)
        }
        Command::Abstract { file } => {
            let f = o.formula(file)?;
            let p = o.preds()?.unwrap_or_default();
            let g = abstract_predicates(&f, &p, o.engine().as_ref()).map_err(|e| e.to_string())?;
            rep.output = Some(g.to_string());
            Ok(None)
        }
        Command::ToChc { file } => {
            let mut f = o.formula(file)?;
            if f.has_mu() {
                let b = o.bound.as_deref().ok_or("formula has least fixpoints; pass --bound to eliminate them")?;
                f = eliminate_mu(&f, &parse_bound(b).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            }
            let s = hfl_to_chc(&f).map_err(|e| e.to_string())?;
            rep.output = Some(emit_smtlib_horn(&s));
            Ok(None)
        }
        Command::FromChc { file } => {
            let s = parse_horn(&read(file)?).map_err(|e| format!("{}: {}", file.display(), e))?;
            rep.output = Some(chc_to_hfl(&s).map_err(|e| e.to_string())?.to_string());
            Ok(None)
        }
        Command::Translate { file } => {
            let p = parse_program(&read(file)?).map_err(|e| format!("{}: {}", file.display(), e))?;
            rep.output = Some(translate_program(&p, o.fix_kind()).to_string());
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut rep = Report { command: cli.command.name().to_string(), ..Report::default() };
    let code = match run(&cli.command, &cli.opts, &mut rep) {
        Ok(Some(v)) => {
            rep.verdict = Some(verdict_name(v).to_string());
            exit_code(v)
        }
        Ok(None) => 0,
        Err(e) => {
            rep.verdict = Some("error".into());
            rep.error = Some(e);
            3
        }
    };
    match cli.opts.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep).expect("serializable report")),
        Format::Text => {
            if let Some(e) = &rep.error {
                eprintln!("error: {}", e);
            } else if let Some(out) = &rep.output {
                println!("{}", out.trim_end());
            } else if let Some(v) = &rep.verdict {
                match (&rep.stage, &rep.reason) {
                    (Some(s), _) => println!("{} ({})", v, s),
                    (None, Some(r)) => println!("{} ({})", v, r),
                    (None, None) => println!("{}", v),
                }
            }
        }
    }
    ExitCode::from(code)
}
