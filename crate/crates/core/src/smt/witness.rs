use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mlsl::{eval, Formula};
use crate::model::{Action, CarId, Event, LaneId, Model, Scenario, TimedWord};
use crate::rational::{format_rational, ExtRational, Rational};
use crate::rcf::{DataVars, Mode, MonitorEncoding, Query, Rcf, Term, NO_LANE};
use crate::robustness::{d_model, d_seq};
use crate::smt::emit::emit_smtlib;
use crate::smt::solver::{run_solver, SolverConfig, SolverResult, SolverRun, Value};

/// Outcome of a query whose witness, if any, is fully rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Sat(BTreeMap<String, Rational>),
    Unsat,
    Unknown(String),
}

/// Isolation widths tried when pinning irrational values.
const PIN_WIDTHS: [u32; 4] = [4, 12, 24, 48];
/// Re-queries per width while new irrational values show up.
const PIN_ROUNDS: usize = 3;

fn rational_part(values: &BTreeMap<String, Value>) -> Option<BTreeMap<String, Rational>> {
    values.iter().map(|(k, v)| v.as_rational().map(|q| (k.clone(), q.clone()))).collect()
}

/// Solves `query`. Irrational values of reported variables are replaced
/// by nearby rationals pinned in a re-query; the variables in `decisions`
/// are pinned first since the rest follows from them.
pub fn solve_rational(query: &Query, cfg: &SolverConfig, decisions: &[String]) -> Result<(Outcome, Vec<SolverRun>)> {
    let mut runs = Vec::new();
    let mut call = |q: &Query| -> Result<SolverResult> {
        let (r, run) = run_solver(&emit_smtlib(q), cfg)?;
        runs.push(run);
        Ok(r)
    };
    let first = match call(query)? {
        SolverResult::Unsat => return Ok((Outcome::Unsat, runs)),
        SolverResult::Unknown(why) => return Ok((Outcome::Unknown(why), runs)),
        SolverResult::Timeout => return Ok((Outcome::Unknown("timeout".into()), runs)),
        SolverResult::Sat(values) => values,
    };
    if let Some(exact) = rational_part(&first) {
        return Ok((Outcome::Sat(exact), runs));
    }
    let mut last_box = String::new();
    for bits in PIN_WIDTHS {
        let width = Rational::new(1.into(), num_bigint::BigInt::from(1u8) << bits);
        let mut q = query.clone();
        let mut values = first.clone();
        for _ in 0..PIN_ROUNDS {
            let irrational: Vec<String> = values
                .iter()
                .filter(|(_, v)| matches!(v, Value::Algebraic(_)))
                .map(|(k, _)| k.clone())
                .collect();
            let preferred: Vec<String> = irrational.iter().filter(|k| decisions.contains(k)).cloned().collect();
            let pin = if preferred.is_empty() { irrational } else { preferred };
            for name in &pin {
                if let Some(Value::Algebraic(a)) = values.get(name) {
                    let mut a = a.clone();
                    let sample = a.approximate(&width);
                    last_box = format!("{name} is {a}");
                    q.assert(Rcf::eq(Term::var(name), Term::Const(sample)));
                }
            }
            match call(&q)? {
                SolverResult::Sat(v) => match rational_part(&v) {
                    Some(exact) => return Ok((Outcome::Sat(exact), runs)),
                    None => values = v,
                },
                _ => break,
            }
        }
    }
    Ok((Outcome::Unknown(format!("no rational witness near the solver's algebraic one ({last_box})")), runs))
}

/// A replay-verified violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Freeze time `t_f`; absent for single-instant checks.
    pub time: Option<Rational>,
    /// The violating model: frozen, and perturbed in robust mode.
    pub model: Model,
    /// Robust mode: the perturbed timed word.
    pub perturbed_word: Option<TimedWord>,
    /// Robust mode: `d_seq` of the perturbed run to the original.
    pub seq_distance: Option<ExtRational>,
    /// Robust mode: `d_model` of the reported model to the frozen one.
    pub model_distance: Option<ExtRational>,
    pub assignment: BTreeMap<String, Rational>,
}

fn get<'a>(a: &'a BTreeMap<String, Rational>, name: &str) -> Result<&'a Rational> {
    a.get(name).ok_or_else(|| Error::Replay(format!("solver gave no value for {name}")))
}

fn lane_value(lane: Option<LaneId>) -> Rational {
    Rational::from_integer(lane.map_or(NO_LANE, |l| i64::from(l.get())).into())
}

/// Compares a data column with a simulated car.
fn check_column(
    a: &BTreeMap<String, Rational>,
    col: &DataVars,
    car: &CarId,
    model: &Model,
) -> Result<()> {
    let state = model.snapshot.car(car).ok_or_else(|| Error::Replay(format!("car {car} missing")))?;
    // The encoding keeps the reservation as an unordered pair.
    let mut lanes = state.res.iter().copied();
    let (first, second) = (lanes.next(), lanes.next());
    let mut want_res = [lane_value(first), lane_value(second)];
    let mut got_res = [get(a, &col.res)?.clone(), get(a, &col.res2)?.clone()];
    want_res.sort();
    got_res.sort();
    if got_res != want_res {
        return Err(Error::Replay(format!(
            "{}, {} = {}, {} but the simulation gives {:?}",
            col.res,
            col.res2,
            format_rational(&got_res[0]),
            format_rational(&got_res[1]),
            state.res.iter().map(|l| l.get()).collect::<Vec<_>>()
        )));
    }
    let expected = [
        (&col.pos, state.pos.clone()),
        (&col.sf, state.sf.clone()),
        (&col.spd, state.spd.clone()),
        (&col.acc, state.acc.clone()),
        (&col.clm, lane_value(state.clm)),
    ];
    for (name, want) in expected {
        let got = get(a, name)?;
        if got != &want {
            return Err(Error::Replay(format!(
                "{name} = {} but the simulation gives {}",
                format_rational(got),
                format_rational(&want)
            )));
        }
    }
    Ok(())
}

fn check_violates(model: &Model, phi: &Formula) -> Result<()> {
    if eval(model, phi) {
        Err(Error::Replay("the reconstructed model satisfies the formula".into()))
    } else {
        Ok(())
    }
}

/// Rebuilds the word with each car's letters moved to its perturbed stamps.
fn perturbed_word(enc: &MonitorEncoding, scenario: &Scenario, a: &BTreeMap<String, Rational>) -> Result<TimedWord> {
    let p = enc.layout.perturbed.as_ref().expect("robust layout");
    let mut next: BTreeMap<&CarId, usize> = BTreeMap::new();
    let mut events = Vec::new();
    for e in scenario.word.actions() {
        let car = e.action.car().expect("actions belong to cars");
        let i = next.entry(car).or_insert(0);
        *i += 1;
        let time = get(a, &p.times[car][*i])?.clone();
        events.push(Event::new(e.action.clone(), time));
    }
    events.sort_by(|x, y| x.time.cmp(&y.time));
    events.push(Event::new(Action::End, scenario.end_time().clone()));
    TimedWord::new(events).map_err(|e| Error::Replay(format!("perturbed word: {e}")))
}

/// Reconstructs and replays the violation behind a satisfying assignment.
pub fn extract_witness(
    enc: &MonitorEncoding,
    scenario: &Scenario,
    phi: &Formula,
    assignment: BTreeMap<String, Rational>,
) -> Result<Witness> {
    let layout = &enc.layout;
    let a = &assignment;
    match &enc.mode {
        Mode::Instant => {
            let model = scenario.initial_model();
            for c in layout.cars.values() {
                check_column(a, c.initial(), &c.car, &model)?;
            }
            check_violates(&model, phi)?;
            Ok(Witness { time: None, model, perturbed_word: None, seq_distance: None, model_distance: None, assignment })
        }
        Mode::Exact => {
            let t = get(a, &layout.t_f)?.clone();
            if t < Rational::zero() || &t > scenario.end_time() {
                return Err(Error::Replay(format!("t_f = {} outside the timespan", format_rational(&t))));
            }
            let model = scenario.model_at(&t)?;
            for c in layout.cars.values() {
                check_column(a, c.last(), &c.car, &model)?;
            }
            if get(a, &layout.x_l)? != &model.view.left || get(a, &layout.x_r)? != &model.view.right {
                return Err(Error::Replay("view extension differs from the simulation".into()));
            }
            check_violates(&model, phi)?;
            Ok(Witness { time: Some(t), model, perturbed_word: None, seq_distance: None, model_distance: None, assignment })
        }
        Mode::Robust { eps, delta } => {
            let p = layout.perturbed.as_ref().expect("robust layout");
            let t = get(a, &layout.t_f)?.clone();
            let word = perturbed_word(enc, scenario, a)?;
            let shaken = scenario.with_word(word.clone()).map_err(|e| Error::Replay(format!("perturbed run: {e}")))?;
            let seq = d_seq(scenario, &shaken);
            if !seq.within(eps) {
                return Err(Error::Replay(format!("perturbed run is {seq} away, more than {}", format_rational(eps))));
            }
            let frozen = shaken.model_at(&t)?;
            for c in layout.cars.values() {
                check_column(a, c.last(), &c.car, &frozen)?;
            }
            let mut model = frozen.clone();
            for (id, car) in model.snapshot.cars.iter_mut() {
                car.pos = get(a, &p.pos[id])?.clone();
                car.sf = get(a, &p.sf[id])?.clone();
            }
            model.view.left = get(a, &p.x_l)?.clone();
            model.view.right = get(a, &p.x_r)?.clone();
            let dist = d_model(&frozen, &model);
            if !dist.within(delta) {
                return Err(Error::Replay(format!("model is {dist} away, more than {}", format_rational(delta))));
            }
            check_violates(&model, phi)?;
            Ok(Witness {
                time: Some(t),
                model,
                perturbed_word: Some(word),
                seq_distance: Some(seq),
                model_distance: Some(dist),
                assignment,
            })
        }
    }
}

/// Variables whose values determine the rest of a witness.
pub fn decision_vars(enc: &MonitorEncoding) -> Vec<String> {
    let l = &enc.layout;
    let mut out = vec![l.t_f.clone(), l.x_l.clone(), l.x_r.clone()];
    if let Some(p) = &l.perturbed {
        out.extend(p.times.values().flatten().cloned());
        out.extend(p.pos.values().cloned());
        out.extend(p.sf.values().cloned());
        out.push(p.x_l.clone());
        out.push(p.x_r.clone());
    }
    out
}
