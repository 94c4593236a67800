//! Independence of actions, causal equivalence of words, and the distances
//! used to define robust satisfaction.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::model::{Action, CarId, Model, Scenario, TimedWord};
use crate::rational::{display_rational, ExtRational, Rational};

/// Whether swapping adjacent `a` and `b` never changes the induced
/// behaviour: actions of different cars, or an acceleration change next to
/// lane bookkeeping of the same car.
pub fn independent(a: &Action, b: &Action) -> Result<bool> {
    match (a.car(), b.car()) {
        (Some(ca), Some(cb)) => Ok(ca != cb || a.is_acceleration() != b.is_acceleration()),
        _ => Err(Error::EndMarker),
    }
}

/// Lexicographically least linearisation of the trace of `letters`: among
/// the letters whose dependent predecessors are all placed, always place the
/// smallest one.
pub fn canonical_form(letters: &[Action]) -> Result<Vec<Action>> {
    let n = letters.len();
    let mut blockers = vec![0usize; n];
    let mut successors = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..j {
            if !independent(&letters[i], &letters[j])? {
                blockers[j] += 1;
                successors[i].push(j);
            }
        }
    }
    let mut placed = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&i| !placed[i] && blockers[i] == 0)
            .min_by(|&i, &j| letters[i].cmp(&letters[j]).then(i.cmp(&j)))
            .expect("dependence graph is acyclic");
        placed[next] = true;
        for &s in &successors[next] {
            blockers[s] -= 1;
        }
        out.push(letters[next].clone());
    }
    Ok(out)
}

fn strip_end(letters: &[Action]) -> &[Action] {
    match letters.split_last() {
        Some((last, rest)) if last.is_end() => rest,
        _ => letters,
    }
}

/// Same Mazurkiewicz trace. A trailing end marker on either side is
/// ignored; it never moves.
pub fn causally_equivalent(a: &[Action], b: &[Action]) -> Result<bool> {
    let (a, b) = (strip_end(a), strip_end(b));
    if a.len() != b.len() {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

/// Largest deviation of positions, reservation fronts and view edges, or
/// infinity when anything discrete differs.
pub fn d_model(m: &Model, n: &Model) -> ExtRational {
    let (a, b) = (&m.snapshot.cars, &n.snapshot.cars);
    let discrete_match = a.len() == b.len()
        && a.iter().all(|(id, ca)| {
            b.get(id).is_some_and(|cb| ca.res == cb.res && ca.clm == cb.clm)
        })
        && (m.view.lane_lo, m.view.lane_hi) == (n.view.lane_lo, n.view.lane_hi)
        && m.view.owner == n.view.owner
        && m.valuation == n.valuation;
    if !discrete_match {
        return ExtRational::Infinite;
    }
    let mut worst = (&m.view.left - &n.view.left).abs().max((&m.view.right - &n.view.right).abs());
    for (id, ca) in a {
        let cb = &b[id];
        worst = worst.max((&ca.pos - &cb.pos).abs()).max((ca.front() - cb.front()).abs());
    }
    ExtRational::Finite(worst)
}

/// Largest per-car stamp deviation of the lane actions, or infinity when
/// the words are not causally equal, disagree on acceleration events, or
/// end at different times.
pub fn d_time(w: &TimedWord, v: &TimedWord) -> ExtRational {
    let letters = |x: &TimedWord| x.events().iter().map(|e| e.action.clone()).collect::<Vec<_>>();
    match causally_equivalent(&letters(w), &letters(v)) {
        Ok(true) => {}
        _ => return ExtRational::Infinite,
    }
    if w.project_acceleration().actions() != v.project_acceleration().actions() || w.end_time() != v.end_time() {
        return ExtRational::Infinite;
    }
    let mut worst = ExtRational::zero();
    for car in w.cars() {
        let lane_events = |x: &TimedWord| {
            x.project_by(|a| a.belongs_to(&car) && !a.is_acceleration())
                .actions()
                .iter()
                .map(|e| e.time.clone())
                .collect::<Vec<_>>()
        };
        for (s, t) in lane_events(w).iter().zip(lane_events(v)) {
            worst = worst.max(ExtRational::Finite((s - t).abs()));
        }
    }
    worst
}

/// Distance of the transition sequences two scenarios induce: their words'
/// distance if they start from the same model under the same dynamics,
/// infinity otherwise.
pub fn d_seq(a: &Scenario, b: &Scenario) -> ExtRational {
    if a.initial_model() != b.initial_model() || a.max_decel != b.max_decel || a.lanes != b.lanes {
        return ExtRational::Infinite;
    }
    d_time(&a.word, &b.word)
}

/// The first pair of stamps of one car that are at most `2ε` apart.
pub fn separation_violation(word: &TimedWord, eps: &Rational) -> Option<(CarId, Rational, Rational)> {
    let mut stamps: BTreeMap<&CarId, Vec<&Rational>> = BTreeMap::new();
    for e in word.actions() {
        if let Some(car) = e.action.car() {
            stamps.entry(car).or_default().push(&e.time);
        }
    }
    let gap = eps * Rational::from_integer(2.into());
    for (car, ts) in stamps {
        // Stamps are sorted, so the closest pair is adjacent.
        for w in ts.windows(2) {
            if w[1] - w[0] <= gap {
                return Some((car.clone(), w[0].clone(), w[1].clone()));
            }
        }
    }
    None
}

/// Distinct actions of the same car are more than `2ε` apart; the end
/// marker is not counted.
pub fn check_separation(word: &TimedWord, eps: &Rational) -> bool {
    separation_violation(word, eps).is_none()
}

/// [`check_separation`] as an error carrying the offending pair.
pub fn require_separation(word: &TimedWord, eps: &Rational) -> Result<()> {
    match separation_violation(word, eps) {
        None => Ok(()),
        Some((car, s, t)) => Err(Error::Separation(format!(
            "car {car} acts at {} and {}, not more than 2*{} apart",
            display_rational(&s),
            display_rational(&t),
            display_rational(eps)
        ))),
    }
}
