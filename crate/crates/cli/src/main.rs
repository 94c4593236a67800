//! `mlsl`: offline monitoring of MLSL properties over recorded traffic.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlsl_monitor::checker::{CheckOptions, CheckReport, CheckerRegistry};
use mlsl_monitor::mlsl::{eval, parse_formula, Formula};
use mlsl_monitor::model::Scenario;
use mlsl_monitor::rational::{parse_rational, Rational};
use mlsl_monitor::rcf::{transform_globally, transform_globally_robust, Logic};
use mlsl_monitor::robustness::d_seq;
use mlsl_monitor::smt::{emit_smtlib, SolverConfig, SOLVER_ENV};
use mlsl_monitor::{Error, Result};

/// Exit code for usage and validation errors.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "mlsl", version, about = "Offline monitoring of Multi-Lane Spatial Logic properties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide "globally φ" on the run with an SMT solver.
    Check {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Decide "globally φ" on every run within ε in time and δ in space.
    CheckRobust {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Decide "globally φ" by direct evaluation at critical times.
    OracleCheck {
        #[command(flatten)]
        input: Input,
    },
    /// Evaluate φ at a single instant.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = rational_arg)]
        at: Rational,
    },
    /// Print the transition sequence induced by the timed word.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Stop at this time instead of the end of the word.
        #[arg(long, value_parser = rational_arg)]
        until: Option<Rational>,
        #[arg(long)]
        json: bool,
    },
    /// Distance d_seq between the runs of two scenarios.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write the SMT-LIB script of a check without solving it.
    Encode {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        robust: bool,
        #[arg(long, value_parser = rational_arg, requires = "robust")]
        eps: Option<Rational>,
        #[arg(long, value_parser = rational_arg, requires = "robust")]
        delta: Option<Rational>,
        #[arg(long, value_enum, default_value_t = LogicArg::Auto)]
        logic: LogicArg,
        /// Output file; standard output if absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Formula text, or `@FILE` to read it from a file.
    #[arg(long)]
    formula: String,
    /// Print a machine-readable report.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Bounds {
    #[arg(long, value_parser = rational_arg)]
    eps: Rational,
    #[arg(long, value_parser = rational_arg)]
    delta: Rational,
}

#[derive(Args)]
struct SolverArgs {
    /// Solver executable; defaults to z3 or cvc5 on PATH.
    #[arg(long, env = SOLVER_ENV)]
    solver: Option<PathBuf>,
    /// Solver time limit in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    #[arg(long, value_enum, default_value_t = LogicArg::Auto)]
    logic: LogicArg,
    /// Random seed passed to the solver.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Auto,
    Qf,
    Quantified,
}

impl From<LogicArg> for Logic {
    fn from(l: LogicArg) -> Logic {
        match l {
            LogicArg::Auto => Logic::Auto,
            LogicArg::Qf => Logic::QuantifierFree,
            LogicArg::Quantified => Logic::Quantified,
        }
    }
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        if self.timeout == 0 {
            return Err(Error::Solver("timeout must be positive".into()));
        }
        let base = match &self.solver {
            Some(p) => SolverConfig::new(p),
            None => SolverConfig::discover()
                .ok_or_else(|| Error::Solver(format!("no solver found; pass --solver or set {SOLVER_ENV}")))?,
        };
        let mut cfg = base.with_timeout(Duration::from_secs(self.timeout)).with_logic(self.logic.into());
        cfg.seed = self.seed;
        Ok(cfg)
    }
}

fn read_formula(arg: &str) -> Result<Formula> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    parse_formula(&text)
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path)
}

fn emit(report: &CheckReport, json: bool) -> u8 {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", render::render_report(report));
    }
    report.verdict.exit_code() as u8
}

fn run_checker(name: &str, input: &Input, opts: CheckOptions) -> Result<u8> {
    let scenario = load(&input.scenario)?;
    let phi = read_formula(&input.formula)?;
    let registry = CheckerRegistry::default();
    let report = registry.get(name)?.check(&scenario, &phi, &opts)?;
    Ok(emit(&report, input.json))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { input, solver } => {
            run_checker("exact", &input, CheckOptions { solver: Some(solver.config()?), robustness: None })
        }
        Command::CheckRobust { input, bounds, solver } => {
            let opts = CheckOptions { solver: Some(solver.config()?), robustness: Some((bounds.eps, bounds.delta)) };
            run_checker("robust", &input, opts)
        }
        Command::OracleCheck { input } => run_checker("oracle", &input, CheckOptions::default()),
        Command::Eval { input, at } => {
            let scenario = load(&input.scenario)?;
            let phi = read_formula(&input.formula)?;
            phi.ensure_closed(&scenario.valuation)?;
            let model = scenario.model_at(&at)?;
            let value = eval(&model, &phi);
            if input.json {
                let doc = serde_json::json!({
                    "formula": phi.to_string(),
                    "time": mlsl_monitor::rational::format_rational(&at),
                    "value": value,
                    "model": mlsl_monitor::checker::ModelReport::of(&model),
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                println!("{value}");
            }
            Ok(if value { 0 } else { 1 })
        }
        Command::Simulate { scenario, until, json } => {
            let scenario = load(&scenario)?;
            let word = match &until {
                Some(t) => scenario.word.time_bounded_prefix(t)?,
                None => scenario.word.clone(),
            };
            let run = scenario.with_word(word)?.transition_sequence()?;
            if json {
                let view = scenario.initial_model();
                let steps: Vec<_> = run
                    .steps
                    .iter()
                    .map(|(label, ts)| {
                        let model = mlsl_monitor::model::Model { snapshot: ts.clone(), ..view.clone() };
                        serde_json::json!({
                            "label": label.to_string(),
                            "cars": mlsl_monitor::checker::ModelReport::of(&model).cars,
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "steps": steps })).expect("json"));
            } else {
                println!("{run}");
                let view = scenario.initial_model();
                for (i, ts) in run.snapshots().into_iter().enumerate() {
                    let model = mlsl_monitor::model::Model { snapshot: ts.clone(), ..view.clone() };
                    println!("TS{}:", i + 1);
                    for (id, car) in mlsl_monitor::checker::ModelReport::of(&model).cars {
                        println!(
                            "  {id}: pos {} spd {} acc {} sf {} res {:?} clm {:?}",
                            car.pos, car.spd, car.acc, car.sf, car.res, car.clm
                        );
                    }
                }
            }
            Ok(0)
        }
        Command::Distance { a, b, json } => {
            let d = d_seq(&load(&a)?, &load(&b)?);
            if json {
                println!("{}", serde_json::json!({ "d_seq": d.to_string() }));
            } else {
                println!("{d}");
            }
            Ok(0)
        }
        Command::Encode { scenario, formula, robust, eps, delta, logic, output } => {
            let scenario = load(&scenario)?;
            let phi = read_formula(&formula)?;
            let enc = if robust {
                let (Some(eps), Some(delta)) = (eps, delta) else {
                    return Err(Error::Scenario("--robust needs --eps and --delta".into()));
                };
                transform_globally_robust(&scenario, &phi, &eps, &delta)?
            } else {
                transform_globally(&scenario, &phi)?
            };
            let script = emit_smtlib(&enc.violation_query(logic.into())?);
            match output {
                Some(path) => std::fs::write(path, script)?,
                None => print!("{script}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
