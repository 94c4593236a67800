use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::rcf::Logic;
use crate::smt::algebraic::Algebraic;
use crate::smt::sexpr::{parse_sexprs, Sexpr};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "MLSL_SOLVER";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub logic: Logic,
    pub timeout: Duration,
    pub seed: Option<u64>,
}

impl SolverConfig {
    pub fn new(path: impl Into<PathBuf>) -> SolverConfig {
        SolverConfig { path: path.into(), logic: Logic::Auto, timeout: Duration::from_secs(60), seed: None }
    }

    /// `$MLSL_SOLVER`, else `z3` or `cvc5` from `PATH`.
    pub fn discover() -> Option<SolverConfig> {
        if let Some(p) = std::env::var_os(SOLVER_ENV).filter(|p| !p.is_empty()) {
            return Some(SolverConfig::new(p));
        }
        ["z3", "cvc5"].iter().find_map(|name| find_in_path(name)).map(SolverConfig::new)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_logic(mut self, logic: Logic) -> Self {
        self.logic = logic;
        self
    }

    fn is_cvc5(&self) -> bool {
        self.path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.contains("cvc5"))
    }

    fn args(&self) -> Vec<String> {
        if self.is_cvc5() {
            let mut args = vec!["--lang".into(), "smt2".into()];
            if let Some(s) = self.seed {
                args.push(format!("--seed={s}"));
            }
            args
        } else {
            let mut args = vec!["-in".into()];
            if let Some(s) = self.seed {
                args.push(format!("smt.random_seed={s}"));
            }
            args
        }
    }
}

pub fn find_in_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(name)).find(|p| p.is_file())
}

/// A value from a model: exact, or an irrational algebraic number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Rational(Rational),
    Algebraic(Algebraic),
}

impl Value {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Value::Rational(q) => Some(q),
            Value::Algebraic(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(q) => f.write_str(&format_rational(q)),
            Value::Algebraic(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverResult {
    Sat(BTreeMap<String, Value>),
    Unsat,
    Unknown(String),
    Timeout,
}

impl SolverResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolverResult::Sat(_))
    }
}

/// Timing and size of one solver call.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverRun {
    pub elapsed: Duration,
    pub script_bytes: usize,
}

fn parse_value(e: &Sexpr) -> Result<Value> {
    if let Some(q) = e.to_rational() {
        return Ok(Value::Rational(q));
    }
    if e.head() == Some("root-obj") {
        return Algebraic::from_root_obj(e)
            .map(Value::Algebraic)
            .ok_or_else(|| Error::Solver(format!("cannot isolate {e}")));
    }
    Err(Error::Solver(format!("unsupported model value {e}")))
}

/// Interprets solver output: the status line, then an optional
/// `get-value` list.
pub fn parse_output(stdout: &str) -> Result<SolverResult> {
    let items = parse_sexprs(stdout)?;
    let Some(first) = items.first() else {
        return Err(Error::Solver("solver produced no output".into()));
    };
    match first.as_atom() {
        Some("sat") => {}
        Some("unsat") => return Ok(SolverResult::Unsat),
        Some("unknown") => return Ok(SolverResult::Unknown("solver answered unknown".into())),
        Some("timeout") => return Ok(SolverResult::Timeout),
        _ => return Err(Error::Solver(format!("unexpected solver output: {}", stdout.trim()))),
    }
    let mut values = BTreeMap::new();
    for item in &items[1..] {
        if item.head() == Some("error") {
            return Err(Error::Solver(item.to_string()));
        }
        let pairs = item.as_list().ok_or_else(|| Error::Solver(format!("unexpected `{item}` after sat")))?;
        for pair in pairs {
            match pair.as_list() {
                Some([Sexpr::Atom(name), value]) => {
                    values.insert(name.clone(), parse_value(value)?);
                }
                _ => return Err(Error::Solver(format!("malformed assignment {pair}"))),
            }
        }
    }
    Ok(SolverResult::Sat(values))
}

/// Runs the solver on `script`, killing it after the timeout.
pub fn run_solver(script: &str, cfg: &SolverConfig) -> Result<(SolverResult, SolverRun)> {
    let start = Instant::now();
    let mut child = Command::new(&cfg.path)
        .args(cfg.args())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start {}: {e}", cfg.path.display())))?;
    let mut stdin = child.stdin.take().expect("piped");
    let input = script.to_string();
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
    let mut stdout = child.stdout.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let mut stderr = child.stderr.take().expect("piped");
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let status = child.wait_timeout(cfg.timeout)?;
    let run = SolverRun { elapsed: start.elapsed(), script_bytes: script.len() };
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        return Ok((SolverResult::Timeout, run));
    }
    // A broken pipe here means the solver stopped reading early; its
    // output says why.
    let _ = writer.join();
    let out = reader.join().map_err(|_| Error::Solver("reader thread panicked".into()))??;
    let err = err_reader.join().unwrap_or_default();
    match parse_output(&out) {
        Ok(r) => Ok((r, run)),
        Err(e) if !err.trim().is_empty() => Err(Error::Solver(format!("{e}; stderr: {}", err.trim()))),
        Err(e) => Err(e),
    }
}

/// Whether `path` can be executed as a solver.
pub fn solver_available(path: &Path) -> bool {
    Command::new(path)
        .arg("--version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn outputs() {
        assert_eq!(parse_output("unsat\n(error \"line 4 column 14: model is not available\")\n").unwrap(), SolverResult::Unsat);
        let SolverResult::Sat(m) = parse_output("sat\n((x (- 2.0))\n (y (/ 1.0 3.0)))\n").unwrap() else { panic!() };
        assert_eq!(m["x"], Value::Rational(int(-2)));
        assert_eq!(m["y"], Value::Rational(rat(1, 3)));
        let SolverResult::Sat(m) = parse_output("sat\n((x (root-obj (+ (^ x 2) (- 2)) 2)))").unwrap() else { panic!() };
        assert!(matches!(m["x"], Value::Algebraic(_)));
        assert!(matches!(parse_output("unknown\n").unwrap(), SolverResult::Unknown(_)));
        assert!(parse_output("").is_err());
        assert!(parse_output("(error \"bad\")").is_err());
        assert!(parse_output("sat\n(error \"x\")").is_err());
    }

    #[test]
    fn missing_executable() {
        let cfg = SolverConfig::new("/nonexistent/solver");
        assert!(matches!(run_solver("(check-sat)", &cfg), Err(Error::Solver(_))));
    }
}
