//! End-to-end runs against an external solver. Skipped when none is found.

use std::time::Duration;

use mlsl_monitor::mlsl::{parse_formula, Formula};
use mlsl_monitor::model::Scenario;
use mlsl_monitor::rational::{int, rat, Rational};
use mlsl_monitor::rcf::{transform_globally, transform_globally_robust, Logic, Query, Rcf, Term};
use mlsl_monitor::smt::{
    decision_vars, emit_smtlib, extract_witness, run_solver, solve_rational, Outcome, SolverConfig, SolverResult,
};

const NPC: &str = include_str!("../../../formulas/npc.mlsl");
const SAFE: &str = include_str!("../../../formulas/safe.mlsl");

fn running_example() -> Scenario {
    Scenario::from_json(include_str!("../../../scenarios/running_example.json")).unwrap()
}

fn solver() -> Option<SolverConfig> {
    let cfg = SolverConfig::discover();
    if cfg.is_none() {
        eprintln!("no SMT solver found; skipping");
    }
    cfg.map(|c| c.with_timeout(Duration::from_secs(120)))
}

#[test]
fn trivial_scripts() {
    let Some(cfg) = solver() else { return };
    let (r, _) = run_solver("(assert false)\n(check-sat)\n", &cfg).unwrap();
    assert_eq!(r, SolverResult::Unsat);
    let script = "(declare-const x Real)\n(assert (= x x))\n(check-sat)\n(get-value (x))\n";
    assert!(run_solver(script, &cfg).unwrap().0.is_sat());
}

#[test]
fn rationals_survive_the_round_trip() {
    let Some(cfg) = solver() else { return };
    let values = [rat(1, 10), rat(-7, 3), int(0), rat(123_456_789, 1000), int(-42)];
    let mut q = Query { logic: "QF_NRA", declared: vec![], assertions: vec![], report: vec![] };
    for (i, v) in values.iter().enumerate() {
        let name = format!("v{i}");
        q.assert(Rcf::eq(Term::var(&name), Term::Const(v.clone())));
        q.report.push(name);
    }
    let (Outcome::Sat(m), _) = solve_rational(&q, &cfg, &[]).unwrap() else { panic!("expected sat") };
    for (i, v) in values.iter().enumerate() {
        assert_eq!(&m[&format!("v{i}")], v);
    }
}

#[test]
fn irrational_values_are_pinned() {
    let Some(cfg) = solver() else { return };
    // x² = 2 forces an irrational x; y only needs to be close to it.
    let mut q = Query { logic: "QF_NRA", declared: vec![], assertions: vec![], report: vec!["y".into()] };
    let (x, y) = (Term::var("x"), Term::var("y"));
    q.assert(Rcf::eq(Term::mul(x.clone(), x.clone()), Term::int(2)));
    q.assert(Rcf::lt(Term::int(0), x.clone()));
    q.assert(Rcf::eq(Term::mul(y.clone(), y.clone()), Term::int(2)));
    q.assert(Rcf::lt(Term::int(0), y));
    let (outcome, _) = solve_rational(&q, &cfg, &["y".into()]).unwrap();
    assert!(matches!(outcome, Outcome::Unknown(_)), "{outcome:?}");

    let mut q = Query { logic: "QF_NRA", declared: vec![], assertions: vec![], report: vec!["x".into()] };
    let x = Term::var("x");
    q.assert(Rcf::lt(Term::int(2), Term::mul(x.clone(), x.clone())));
    q.assert(Rcf::lt(Term::mul(x.clone(), x.clone()), Term::constant(rat(201, 100))));
    let (Outcome::Sat(m), _) = solve_rational(&q, &cfg, &["x".into()]).unwrap() else { panic!() };
    let v = &m["x"];
    assert!(int(2) < v * v && v * v < rat(201, 100));
}

#[test]
fn npc_violation_and_frozen_values_at_four() {
    let Some(cfg) = solver() else { return };
    let s = running_example();
    let phi = parse_formula(NPC).unwrap();
    let enc = transform_globally(&s, &phi).unwrap();
    let q = enc.violation_query(Logic::Auto).unwrap();
    assert_eq!(q.logic, "QF_NRA");
    let (Outcome::Sat(m), _) = solve_rational(&q, &cfg, &decision_vars(&enc)).unwrap() else { panic!("expected sat") };
    let w = extract_witness(&enc, &s, &phi, m).unwrap();
    assert!(w.time.is_some());

    let mut pinned = q.clone();
    pinned.assert(Rcf::eq(Term::var("t_f"), Term::int(4)));
    let (Outcome::Sat(m), _) = solve_rational(&pinned, &cfg, &[]).unwrap() else { panic!("expected sat") };
    assert_eq!(m["C_2_pos"], int(84));
    assert_eq!(m["D_3_pos"], int(88));
    assert_eq!((m["x_f_l"].clone(), m["x_f_r"].clone()), (int(48), int(138)));
    let w = extract_witness(&enc, &s, &phi, m).unwrap();
    assert_eq!(w.time, Some(int(4)));
}

#[test]
fn robust_safe_violation_swaps_stamps() {
    let Some(cfg) = solver() else { return };
    let s = running_example();
    let phi = parse_formula(SAFE).unwrap();
    let (eps, delta) = (rat(1, 10), int(1));
    let enc = transform_globally_robust(&s, &phi, &eps, &delta).unwrap();
    let q = enc.violation_query(Logic::Auto).unwrap();
    let (Outcome::Sat(m), _) = solve_rational(&q, &cfg, &decision_vars(&enc)).unwrap() else { panic!("expected sat") };
    let w = extract_witness(&enc, &s, &phi, m).unwrap();
    assert!(w.seq_distance.unwrap().within(&eps));
    assert!(w.model_distance.unwrap().within(&delta));

    // The scenario from the narrative: E's reservation before D's withdrawal.
    let mut swapped = q.clone();
    swapped.assert(Rcf::le(Term::var("tp_E_2"), Term::var("tp_D_2")));
    swapped.assert(Rcf::between(Term::int(1), Term::var("t_f"), Term::constant(rat(11, 10))));
    let (Outcome::Sat(m), _) = solve_rational(&swapped, &cfg, &decision_vars(&enc)).unwrap() else { panic!() };
    assert!(m["tp_E_2"] <= m["tp_D_2"]);
    let w = extract_witness(&enc, &s, &phi, m).unwrap();
    let t = w.time.clone().unwrap();
    assert!(int(1) <= t && t <= rat(11, 10));
}

#[test]
fn reserved_lane_holds_everywhere() {
    let Some(cfg) = solver() else { return };
    let s = running_example();
    let phi = parse_formula("<< re(ego) >>").unwrap();
    let enc = transform_globally(&s, &phi).unwrap();
    let q = enc.violation_query(Logic::Auto).unwrap();
    let (outcome, _) = solve_rational(&q, &cfg, &decision_vars(&enc)).unwrap();
    assert_eq!(outcome, Outcome::Unsat);
}

#[test]
fn guards_are_exclusive_and_cover_time() {
    let Some(cfg) = solver() else { return };
    let s = running_example();
    let enc = transform_globally(&s, &Formula::tt()).unwrap();
    let tf = Term::var("t_f");
    for c in enc.layout.cars.values() {
        let stamps: Vec<Rational> = std::iter::once(int(0)).chain(c.stamps.iter().cloned()).collect();
        for i in 0..c.letters.len() {
            let (ti, tn) = (Term::Const(stamps[i].clone()), Term::Const(stamps[i + 1].clone()));
            let g1 = Rcf::and([Rcf::le(ti.clone(), tn.clone()), Rcf::le(tn.clone(), tf.clone())]);
            let g2 = Rcf::and([Rcf::le(ti.clone(), tf.clone()), Rcf::lt(tf.clone(), tn)]);
            let g3 = Rcf::lt(tf.clone(), ti);
            let none = Rcf::and([Rcf::not(g1.clone()), Rcf::not(g2.clone()), Rcf::not(g3.clone())]).nnf();
            let two = Rcf::or([
                Rcf::and([g1.clone(), g2.clone()]),
                Rcf::and([g1, g3.clone()]),
                Rcf::and([g2, g3]),
            ]);
            for bad in [none, two] {
                let mut q = Query { logic: "QF_NRA", declared: vec![], assertions: vec![], report: vec![] };
                q.assert(Rcf::and([Rcf::eq(Term::var("t_f"), Term::var("t_f")), bad]));
                let script = emit_smtlib(&q);
                assert_eq!(run_solver(&script, &cfg).unwrap().0, SolverResult::Unsat, "{script}");
            }
        }
    }
}

#[test]
fn separated_perturbations_keep_per_car_order() {
    let Some(cfg) = solver() else { return };
    let s = running_example();
    let enc = transform_globally_robust(&s, &Formula::tt(), &rat(1, 10), &int(1)).unwrap();
    let p = enc.layout.perturbed.as_ref().unwrap();
    let mut disorder = Vec::new();
    for times in p.times.values() {
        for w in times[1..].windows(2) {
            disorder.push(Rcf::lt(Term::var(&w[1]), Term::var(&w[0])));
        }
    }
    let mut q = Query { logic: "QF_NRA", declared: vec![], assertions: vec![], report: vec![] };
    q.assert(enc.premise.clone());
    q.assert(Rcf::or(disorder));
    assert_eq!(run_solver(&emit_smtlib(&q), &cfg).unwrap().0, SolverResult::Unsat);
}

#[test]
fn script_is_deterministic_and_carries_the_car_ids() {
    let s = running_example();
    let phi = parse_formula(NPC).unwrap();
    let a = emit_smtlib(&transform_globally(&s, &phi).unwrap().violation_query(Logic::Auto).unwrap());
    let b = emit_smtlib(&transform_globally(&s, &phi).unwrap().violation_query(Logic::Auto).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("(set-logic QF_NRA)\n"));
    assert!(!a.contains('.'), "decimal literal in script");
    for car in s.cars() {
        assert!(a.contains(&format!("(declare-const {}_1_pos Real)", car.as_str())));
    }
}
