//! Interchangeable deciders for "globally φ", looked up by name.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlsl::{eval, global_check_direct, Formula, Verdict};
use crate::model::{Model, Scenario};
use crate::rational::{format_rational, Rational};
use crate::rcf::{encode_instant, transform_globally, transform_globally_robust, MonitorEncoding};
use crate::smt::{decision_vars, extract_witness, solve_rational, Outcome, SolverConfig, SolverRun, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VerdictKind {
    Holds,
    Violated,
    Unknown,
}

impl VerdictKind {
    /// Process exit code: 0 holds, 1 violated, 2 unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictKind::Holds => 0,
            VerdictKind::Violated => 1,
            VerdictKind::Unknown => 2,
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Holds => "HOLDS",
            VerdictKind::Violated => "VIOLATED",
            VerdictKind::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckMode {
    Oracle,
    Exact,
    Robust { eps: String, delta: String },
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckMode::Oracle => f.write_str("oracle"),
            CheckMode::Exact => f.write_str("exact"),
            CheckMode::Robust { eps, delta } => write!(f, "robust(eps = {eps}, delta = {delta})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarReport {
    pub pos: String,
    pub sf: String,
    pub spd: String,
    pub acc: String,
    pub res: Vec<u32>,
    pub clm: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewReport {
    pub owner: String,
    pub lanes: [i64; 2],
    pub extension: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelReport {
    pub cars: BTreeMap<String, CarReport>,
    pub view: ViewReport,
}

impl ModelReport {
    pub fn of(model: &Model) -> ModelReport {
        let cars = model
            .snapshot
            .cars
            .iter()
            .map(|(id, c)| {
                let report = CarReport {
                    pos: format_rational(&c.pos),
                    sf: format_rational(&c.sf),
                    spd: format_rational(&c.spd),
                    acc: format_rational(&c.acc),
                    res: c.res.iter().map(|l| l.get()).collect(),
                    clm: c.clm.map(|l| l.get()),
                };
                (id.to_string(), report)
            })
            .collect();
        let v = &model.view;
        ModelReport {
            cars,
            view: ViewReport {
                owner: v.owner.to_string(),
                lanes: [v.lane_lo, v.lane_hi],
                extension: [format_rational(&v.left), format_rational(&v.right)],
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// Freeze time of the violation.
    pub time: Option<String>,
    pub model: ModelReport,
    /// Robust mode: the perturbed timed word and its distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed_word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq_distance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_distance: Option<String>,
    /// Every solver value, empty for the oracle.
    #[serde(default)]
    pub assignment: BTreeMap<String, String>,
    /// The violation was re-established by direct evaluation.
    pub replay_verified: bool,
}

impl WitnessReport {
    fn from_witness(w: &Witness) -> WitnessReport {
        WitnessReport {
            time: w.time.as_ref().map(format_rational),
            model: ModelReport::of(&w.model),
            perturbed_word: w.perturbed_word.as_ref().map(|x| x.to_string()),
            seq_distance: w.seq_distance.as_ref().map(|d| d.to_string()),
            model_distance: w.model_distance.as_ref().map(|d| d.to_string()),
            assignment: w.assignment.iter().map(|(k, v)| (k.clone(), format_rational(v))).collect(),
            replay_verified: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solver: String,
    pub logic: String,
    pub queries: usize,
    pub script_bytes: usize,
    pub solver_ms: u64,
}

impl SolverStats {
    fn new(cfg: &SolverConfig, logic: &str, runs: &[SolverRun]) -> SolverStats {
        SolverStats {
            solver: cfg.path.display().to_string(),
            logic: logic.to_string(),
            queries: runs.len(),
            script_bytes: runs.first().map_or(0, |r| r.script_bytes),
            solver_ms: runs.iter().map(|r| r.elapsed.as_millis() as u64).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    /// Instants evaluated.
    pub tested: usize,
    /// Some critical times are irrational and only bracketed.
    pub inexact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: VerdictKind,
    pub mode: CheckMode,
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<CheckReport> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Inputs a checker may need beyond the scenario and formula.
#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub solver: Option<SolverConfig>,
    /// `(ε, δ)` for the robust checker.
    pub robustness: Option<(Rational, Rational)>,
}

impl CheckOptions {
    fn solver(&self) -> Result<&SolverConfig> {
        self.solver.as_ref().ok_or_else(|| Error::Solver("no SMT solver configured".into()))
    }
}

pub trait GlobalChecker: Send + Sync {
    fn name(&self) -> &'static str;
    fn check(&self, scenario: &Scenario, phi: &Formula, opts: &CheckOptions) -> Result<CheckReport>;
}

/// Direct evaluation at critical times; no solver.
pub struct OracleChecker;

impl GlobalChecker for OracleChecker {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn check(&self, scenario: &Scenario, phi: &Formula, _opts: &CheckOptions) -> Result<CheckReport> {
        let start = Instant::now();
        let direct = global_check_direct(scenario, phi)?;
        let oracle = Some(OracleStats { tested: direct.tested, inexact: direct.inexact() });
        let (verdict, witness, note) = match &direct.verdict {
            Verdict::Holds => {
                let note = direct
                    .inexact()
                    .then(|| "some critical times are irrational; they were bracketed, not evaluated".to_string());
                (VerdictKind::Holds, None, note)
            }
            Verdict::Violated { time, model, explanation } => {
                let w = WitnessReport {
                    time: Some(format_rational(time)),
                    model: ModelReport::of(model),
                    perturbed_word: None,
                    seq_distance: None,
                    model_distance: None,
                    assignment: BTreeMap::new(),
                    replay_verified: true,
                };
                (VerdictKind::Violated, Some(w), Some(explanation.clone()))
            }
        };
        Ok(CheckReport {
            verdict,
            mode: CheckMode::Oracle,
            formula: phi.to_string(),
            witness,
            elapsed_ms: start.elapsed().as_millis() as u64,
            solver: None,
            oracle,
            note,
        })
    }
}

fn solve_encoding(
    enc: &MonitorEncoding,
    scenario: &Scenario,
    phi: &Formula,
    cfg: &SolverConfig,
    mode: CheckMode,
    start: Instant,
) -> Result<CheckReport> {
    let query = enc.violation_query(cfg.logic)?;
    let (outcome, runs) = solve_rational(&query, cfg, &decision_vars(enc))?;
    let (verdict, witness, note) = match outcome {
        Outcome::Unsat => (VerdictKind::Holds, None, None),
        Outcome::Sat(values) => {
            let w = extract_witness(enc, scenario, phi, values)?;
            (VerdictKind::Violated, Some(WitnessReport::from_witness(&w)), None)
        }
        Outcome::Unknown(why) => (VerdictKind::Unknown, None, Some(why)),
    };
    Ok(CheckReport {
        verdict,
        mode,
        formula: phi.to_string(),
        witness,
        elapsed_ms: start.elapsed().as_millis() as u64,
        solver: Some(SolverStats::new(cfg, query.logic, &runs)),
        oracle: None,
        note,
    })
}

/// The exact encoding, decided by an SMT solver.
pub struct ExactChecker;

impl GlobalChecker for ExactChecker {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn check(&self, scenario: &Scenario, phi: &Formula, opts: &CheckOptions) -> Result<CheckReport> {
        let start = Instant::now();
        let cfg = opts.solver()?;
        let enc = transform_globally(scenario, phi)?;
        solve_encoding(&enc, scenario, phi, cfg, CheckMode::Exact, start)
    }
}

/// The ε-δ-robust encoding, decided by an SMT solver.
pub struct RobustChecker;

impl GlobalChecker for RobustChecker {
    fn name(&self) -> &'static str {
        "robust"
    }

    fn check(&self, scenario: &Scenario, phi: &Formula, opts: &CheckOptions) -> Result<CheckReport> {
        let start = Instant::now();
        let (eps, delta) = opts
            .robustness
            .as_ref()
            .ok_or_else(|| Error::Scenario("the robust check needs eps and delta".into()))?;
        let cfg = opts.solver()?;
        let enc = transform_globally_robust(scenario, phi, eps, delta)?;
        let mode = CheckMode::Robust { eps: format_rational(eps), delta: format_rational(delta) };
        solve_encoding(&enc, scenario, phi, cfg, mode, start)
    }
}

/// Checkers by name.
pub struct CheckerRegistry {
    checkers: BTreeMap<&'static str, Box<dyn GlobalChecker>>,
}

impl Default for CheckerRegistry {
    fn default() -> Self {
        let mut r = CheckerRegistry::empty();
        r.register(Box::new(OracleChecker));
        r.register(Box::new(ExactChecker));
        r.register(Box::new(RobustChecker));
        r
    }
}

impl CheckerRegistry {
    pub fn empty() -> Self {
        CheckerRegistry { checkers: BTreeMap::new() }
    }

    /// Adds a checker, replacing any with the same name.
    pub fn register(&mut self, checker: Box<dyn GlobalChecker>) {
        self.checkers.insert(checker.name(), checker);
    }

    pub fn get(&self, name: &str) -> Result<&dyn GlobalChecker> {
        self.checkers.get(name).map(|c| c.as_ref()).ok_or_else(|| Error::UnknownChecker(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checkers.keys().copied().collect()
    }
}

/// Decides `M ⊨ φ` with the solver. `None` when the solver gives up.
pub fn solver_eval(model: &Model, phi: &Formula, cfg: &SolverConfig) -> Result<Option<bool>> {
    let enc = encode_instant(model, phi)?;
    let query = enc.violation_query(cfg.logic)?;
    match solve_rational(&query, cfg, &decision_vars(&enc))?.0 {
        Outcome::Unsat => Ok(Some(true)),
        Outcome::Sat(_) if eval(model, phi) => {
            Err(Error::Replay("solver found a violation that direct evaluation refutes".into()))
        }
        Outcome::Sat(_) => Ok(Some(false)),
        Outcome::Unknown(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlsl::parse_formula;
    use crate::testdata::running_example;

    #[test]
    fn registry_lookup() {
        let r = CheckerRegistry::default();
        assert_eq!(r.names(), vec!["exact", "oracle", "robust"]);
        assert_eq!(r.get("oracle").unwrap().name(), "oracle");
        assert!(matches!(r.get("bogus"), Err(Error::UnknownChecker(_))));
    }

    #[test]
    fn solver_checkers_need_configuration() {
        let s = running_example();
        let phi = parse_formula("<< re(ego) >>").unwrap();
        let r = CheckerRegistry::default();
        assert!(r.get("exact").unwrap().check(&s, &phi, &CheckOptions::default()).is_err());
        assert!(r.get("robust").unwrap().check(&s, &phi, &CheckOptions::default()).is_err());
    }

    #[test]
    fn oracle_report_round_trips() {
        let s = running_example();
        let phi = parse_formula("forall c, d . c != d -> !<< (cl(c) | re(c)) & (cl(d) | re(d)) >>").unwrap();
        let report = OracleChecker.check(&s, &phi, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, VerdictKind::Violated);
        assert_eq!(report.witness.as_ref().unwrap().time.as_deref(), Some("0"));
        let text = report.to_json();
        let back = CheckReport::from_json(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json(), text);
    }
}
