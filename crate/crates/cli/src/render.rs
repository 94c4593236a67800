use std::fmt::Write as _;

use mlsl_monitor::checker::{CheckReport, ModelReport};
use mlsl_monitor::rational::{display_rational, parse_rational, Rational};
use num_traits::{ToPrimitive, Zero};

/// Width of the lane diagram in characters.
const WIDTH: i64 = 60;

fn column(x: &Rational, left: &Rational, right: &Rational) -> i64 {
    let span = right - left;
    if span.is_zero() {
        return 0;
    }
    ((x - left) * Rational::from_integer(WIDTH.into()) / span).floor().to_integer().to_i64().unwrap_or(0)
}

/// ASCII picture of the view: one row per lane, top lane first. Reserved
/// stretches are drawn with the car's initial, claimed ones with `~`, and
/// overlaps with `#`.
pub fn lane_diagram(model: &ModelReport) -> String {
    let v = &model.view;
    let (Ok(left), Ok(right)) = (parse_rational(&v.extension[0]), parse_rational(&v.extension[1])) else {
        return String::new();
    };
    let mut out = String::new();
    let mut drawn = std::collections::BTreeSet::new();
    for lane in (v.lanes[0]..=v.lanes[1]).rev() {
        let mut row = vec![' '; WIDTH as usize];
        for (id, car) in &model.cars {
            let (Ok(pos), Ok(sf)) = (parse_rational(&car.pos), parse_rational(&car.sf)) else { continue };
            let mark = id.chars().next().unwrap_or('?');
            let reserved = car.res.iter().any(|&l| i64::from(l) == lane);
            let claimed = car.clm.is_some_and(|l| i64::from(l) == lane);
            if !reserved && !claimed {
                continue;
            }
            let fill = if reserved { mark } else { '~' };
            let from = column(&pos, &left, &right).max(0);
            let to = column(&(&pos + &sf), &left, &right).min(WIDTH);
            for c in from..to.max(from + 1).min(WIDTH) {
                let cell = &mut row[c as usize];
                *cell = if *cell == ' ' { fill } else { '#' };
            }
            drawn.insert(id);
        }
        let label = format!("lane {lane}");
        writeln!(out, "{label:>8} |{}|", row.into_iter().collect::<String>()).unwrap();
    }
    let (l, r) = (display_rational(&left), display_rational(&right));
    writeln!(out, "{:>8}  {l}{}{r}", "", " ".repeat((WIDTH as usize).saturating_sub(l.len() + r.len()).max(1))).unwrap();
    for id in drawn {
        let car = &model.cars[id];
        writeln!(out, "{:>8}  {id}: pos {}, sf {}", "", car.pos, car.sf).unwrap();
    }
    out
}

/// Human-readable report.
pub fn render_report(report: &CheckReport) -> String {
    let mut out = String::new();
    writeln!(out, "{} ({})", report.verdict, report.mode).unwrap();
    writeln!(out, "formula: {}", report.formula).unwrap();
    if let Some(w) = &report.witness {
        if let Some(t) = &w.time {
            writeln!(out, "violated at t_f = {t}").unwrap();
        }
        if let Some(word) = &w.perturbed_word {
            writeln!(out, "perturbed word: {word}").unwrap();
        }
        if let Some(d) = &w.seq_distance {
            writeln!(out, "d_seq to the original run: {d}").unwrap();
        }
        if let Some(d) = &w.model_distance {
            writeln!(out, "d_model to the frozen model: {d}").unwrap();
        }
        if w.replay_verified {
            writeln!(out, "witness replay-verified by direct evaluation").unwrap();
        }
        out.push('\n');
        out.push_str(&lane_diagram(&w.model));
    }
    if let Some(note) = &report.note {
        writeln!(out, "note: {note}").unwrap();
    }
    if let Some(s) = &report.solver {
        writeln!(out, "solver: {} ({}), {} quer{}, {} ms", s.solver, s.logic, s.queries, if s.queries == 1 { "y" } else { "ies" }, s.solver_ms)
            .unwrap();
    }
    if let Some(o) = &report.oracle {
        writeln!(out, "oracle: {} instants evaluated{}", o.tested, if o.inexact { ", irrational critical times bracketed" } else { "" })
            .unwrap();
    }
    writeln!(out, "elapsed: {} ms", report.elapsed_ms).unwrap();
    out
}
