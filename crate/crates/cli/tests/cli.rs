use std::process::{Command, Output};

use mlsl_monitor::checker::{CheckReport, VerdictKind};
use mlsl_monitor::smt::SolverConfig;

const RUNNING_EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/running_example.json");
const FIGURE1: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/figure1.json");
const NPC: &str = concat!("@", env!("CARGO_MANIFEST_DIR"), "/../../formulas/npc.mlsl");
const SAFE: &str = concat!("@", env!("CARGO_MANIFEST_DIR"), "/../../formulas/safe.mlsl");

fn mlsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlsl")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn have_solver() -> bool {
    let found = SolverConfig::discover().is_some();
    if !found {
        eprintln!("no SMT solver found; skipping");
    }
    found
}

#[test]
fn check_reports_violation_with_diagram() {
    if !have_solver() {
        return;
    }
    let out = mlsl(&["check", "--scenario", RUNNING_EXAMPLE, "--formula", NPC]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("VIOLATED"), "{text}");
    assert!(text.contains("replay-verified"), "{text}");
    assert!(text.contains("  lane 3 |"), "{text}");
}

#[test]
fn check_robust_reports_perturbed_word() {
    if !have_solver() {
        return;
    }
    let out = mlsl(&["check-robust", "--eps", "1/10", "--delta", "1", "--scenario", RUNNING_EXAMPLE, "--formula", SAFE]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("perturbed word: "), "{text}");
    assert!(text.contains("d_seq to the original run: "), "{text}");
}

#[test]
fn json_report_round_trips() {
    if !have_solver() {
        return;
    }
    let out = mlsl(&["check", "--scenario", RUNNING_EXAMPLE, "--formula", NPC, "--json"]);
    let text = stdout(&out);
    let report = CheckReport::from_json(&text).unwrap();
    assert_eq!(report.verdict, VerdictKind::Violated);
    assert!(report.witness.as_ref().unwrap().replay_verified);
    assert_eq!(format!("{}\n", report.to_json()), text);
}

#[test]
fn holding_property_exits_zero() {
    if !have_solver() {
        return;
    }
    let out = mlsl(&["check", "--scenario", RUNNING_EXAMPLE, "--formula", "<< re(ego) >>"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("HOLDS"));
}

#[test]
fn oracle_check_needs_no_solver() {
    let out = Command::new(env!("CARGO_BIN_EXE_mlsl"))
        .args(["oracle-check", "--scenario", RUNNING_EXAMPLE, "--formula", "<< re(ego) >>"])
        .env("PATH", "")
        .env_remove("MLSL_SOLVER")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = mlsl(&["oracle-check", "--scenario", RUNNING_EXAMPLE, "--formula", NPC]);
    assert_eq!(code(&out), 1);
}

#[test]
fn eval_prints_truth_value() {
    let out = mlsl(&["eval", "--at", "0", "--scenario", FIGURE1, "--formula", "<< free ~ re(e) ~ free >>"]);
    assert_eq!((code(&out), stdout(&out).trim()), (0, "true"));
    let out = mlsl(&["eval", "--at", "0", "--scenario", FIGURE1, "--formula", "re(e)"]);
    assert_eq!((code(&out), stdout(&out).trim()), (1, "false"));
}

#[test]
fn usage_errors_exit_three() {
    let cases: [&[&str]; 5] = [
        &["check", "--scenario", RUNNING_EXAMPLE, "--formula", "re(ego"],
        &["oracle-check", "--scenario", "/nonexistent.json", "--formula", "free"],
        &["oracle-check", "--scenario", RUNNING_EXAMPLE, "--formula", "re(nobody)"],
        &["check", "--no-such-flag"],
        &["eval", "--at", "1/0", "--scenario", FIGURE1, "--formula", "free"],
    ];
    for args in cases {
        let out = mlsl(args);
        assert_eq!(code(&out), 3, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let out = mlsl(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("check-robust"));
}

#[test]
fn overlapping_perturbations_are_rejected() {
    let out = mlsl(&["check-robust", "--eps", "3", "--delta", "1", "--scenario", RUNNING_EXAMPLE, "--formula", SAFE]);
    assert_eq!(code(&out), 3);
}

#[test]
fn forced_quantifier_free_logic_is_refused_when_impossible() {
    let out = mlsl(&["encode", "--scenario", RUNNING_EXAMPLE, "--formula", "<< re(ego) >>", "--logic", "qf"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn encode_is_deterministic() {
    let args = ["encode", "--scenario", RUNNING_EXAMPLE, "--formula", NPC];
    let (a, b) = (mlsl(&args), mlsl(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("(set-logic QF_NRA)"));
    let robust = mlsl(&["encode", "--robust", "--eps", "1/10", "--delta", "1", "--scenario", RUNNING_EXAMPLE, "--formula", SAFE]);
    assert!(stdout(&robust).contains("(declare-const tp_E_2 Real)"));
}

#[test]
fn simulate_lists_snapshots() {
    let out = mlsl(&["simulate", "--scenario", RUNNING_EXAMPLE]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("TS1:") && text.contains("  E: pos "), "{text}");
    let json: serde_json::Value = serde_json::from_slice(&mlsl(&["simulate", "--scenario", RUNNING_EXAMPLE, "--json"]).stdout).unwrap();
    assert!(json["steps"].as_array().unwrap().len() > 1);
}

#[test]
fn distance_to_itself_is_zero() {
    let out = mlsl(&["distance", RUNNING_EXAMPLE, RUNNING_EXAMPLE]);
    assert_eq!((code(&out), stdout(&out).trim()), (0, "0"));
}
