//! Direct decision procedure for `M ⊨ φ`.
//!
//! The horizontal chop quantifies over a real chop point. Atom truth on a
//! subinterval only depends on how its endpoints are ordered relative to the
//! car boundaries (shifted by sums of length constants), so it suffices to
//! try those boundaries and one point strictly between each neighbouring
//! pair.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use crate::mlsl::ast::Formula;
use crate::model::{CarId, Model, Valuation};
use crate::rational::{midpoint, Rational};

/// The part of a model that changes while descending through chops.
#[derive(Clone)]
struct Frame<'a> {
    lo: i64,
    hi: i64,
    r: Rational,
    t: Rational,
    valuation: &'a Valuation,
}

type MemoKey = (usize, i64, i64, Rational, Rational, Valuation);

struct Evaluator<'m> {
    model: &'m Model,
    extra: &'m [Rational],
    /// Car rears and fronts, the same for every subview.
    bounds: BTreeSet<Rational>,
    /// Chops re-evaluate the same subformula on the same subview often.
    memo: RefCell<HashMap<MemoKey, bool>>,
}

/// Decides `model ⊨ φ`.
///
/// # Panics
/// If `φ` has a free variable the valuation does not bind; call
/// [`Formula::ensure_closed`] first on untrusted input.
pub fn eval(model: &Model, formula: &Formula) -> bool {
    eval_with_extra(model, formula, &[])
}

/// Like [`eval`], additionally trying every point of `extra` that falls
/// inside the current extension at each horizontal chop.
pub fn eval_with_extra(model: &Model, formula: &Formula, extra: &[Rational]) -> bool {
    let frame = Frame {
        lo: model.view.lane_lo,
        hi: model.view.lane_hi,
        r: model.view.left.clone(),
        t: model.view.right.clone(),
        valuation: &model.valuation,
    };
    let bounds = car_bounds(model);
    Evaluator { model, extra, bounds, memo: RefCell::default() }.holds(&frame, formula)
}

/// Chop points tried for `φ₁ ⌢ φ₂` on the model's own view, where `φ` is
/// the chop formula (its length constants widen the boundary set).
pub fn chop_candidates(model: &Model, formula: &Formula) -> Vec<Rational> {
    candidates(&car_bounds(model), &model.view.left, &model.view.right, &formula.length_constants())
}

fn car_bounds(model: &Model) -> BTreeSet<Rational> {
    model.snapshot.cars.values().flat_map(|car| [car.pos.clone(), car.front()]).collect()
}

fn candidates(bounds: &BTreeSet<Rational>, r: &Rational, t: &Rational, lengths: &[Rational]) -> Vec<Rational> {
    let mut base = bounds.clone();
    base.insert(r.clone());
    base.insert(t.clone());
    let shifts = subset_sums(lengths);
    let mut points: BTreeSet<Rational> = BTreeSet::new();
    for b in &base {
        for s in &shifts {
            for p in [b + s, b - s] {
                if &p >= r && &p <= t {
                    points.insert(p);
                }
            }
        }
    }
    with_midpoints(points)
}

/// All sums of sub-multisets of `values`, each element used at most once.
pub(crate) fn subset_sums(values: &[Rational]) -> BTreeSet<Rational> {
    let mut sums = BTreeSet::from([Rational::zero()]);
    for v in values {
        let next: Vec<Rational> = sums.iter().map(|s| s + v).collect();
        sums.extend(next);
    }
    sums
}

fn with_midpoints(points: BTreeSet<Rational>) -> Vec<Rational> {
    let sorted: Vec<Rational> = points.into_iter().collect();
    let mut out = Vec::with_capacity(2 * sorted.len());
    for (i, p) in sorted.iter().enumerate() {
        if i > 0 {
            out.push(midpoint(&sorted[i - 1], p));
        }
        out.push(p.clone());
    }
    out
}

impl<'m> Evaluator<'m> {
    fn car(&self, frame: &Frame<'_>, var: &str) -> &'m crate::model::CarState {
        let id: &CarId = frame
            .valuation
            .get(var)
            .unwrap_or_else(|| panic!("variable {var} is not bound"));
        self.model
            .snapshot
            .car(id)
            .unwrap_or_else(|| panic!("variable {var} names unknown car {id}"))
    }

    fn single_lane(frame: &Frame<'_>) -> Option<i64> {
        (frame.lo == frame.hi && frame.r < frame.t).then_some(frame.lo)
    }

    fn holds(&self, frame: &Frame<'_>, formula: &Formula) -> bool {
        match formula {
            Formula::VarEq(a, b) => frame.valuation.get(a) == frame.valuation.get(b),
            Formula::Free => match Self::single_lane(frame) {
                None => false,
                Some(lane) => self.model.snapshot.cars.values().all(|car| {
                    !on_lane(car, lane, true, true) || car.front() <= frame.r || car.pos >= frame.t
                }),
            },
            Formula::Re(v) | Formula::Cl(v) => match Self::single_lane(frame) {
                None => false,
                Some(lane) => {
                    let car = self.car(frame, v);
                    let reserved = matches!(formula, Formula::Re(_));
                    on_lane(car, lane, reserved, !reserved) && car.pos <= frame.r && frame.t <= car.front()
                }
            },
            Formula::Len(q) => &frame.t - &frame.r == *q,
            Formula::Not(f) => !self.holds(frame, f),
            Formula::And(a, b) => self.holds(frame, a) && self.holds(frame, b),
            Formula::HChop(..) | Formula::VChop(..) | Formula::Exists(..) => {
                let key = (
                    formula as *const Formula as usize,
                    frame.lo,
                    frame.hi,
                    frame.r.clone(),
                    frame.t.clone(),
                    frame.valuation.clone(),
                );
                if let Some(&known) = self.memo.borrow().get(&key) {
                    return known;
                }
                let value = self.compound(frame, formula);
                self.memo.borrow_mut().insert(key, value);
                value
            }
        }
    }

    fn compound(&self, frame: &Frame<'_>, formula: &Formula) -> bool {
        match formula {
            Formula::HChop(a, b) => {
                let mut points = candidates(&self.bounds, &frame.r, &frame.t, &formula.length_constants());
                points.extend(self.extra.iter().filter(|p| **p >= frame.r && **p <= frame.t).cloned());
                points.into_iter().any(|s| {
                    self.holds(&Frame { t: s.clone(), ..frame.clone() }, a)
                        && self.holds(&Frame { r: s, ..frame.clone() }, b)
                })
            }
            Formula::VChop(lower, upper) => {
                if frame.lo > frame.hi {
                    return self.holds(frame, lower) && self.holds(frame, upper);
                }
                (frame.lo - 1..=frame.hi).any(|m| {
                    self.holds(&Frame { hi: m, ..frame.clone() }, lower)
                        && self.holds(&Frame { lo: m + 1, ..frame.clone() }, upper)
                })
            }
            Formula::Exists(v, body) => self.model.snapshot.ids().any(|id| {
                let valuation = frame.valuation.with(v, id.clone());
                self.holds(&Frame { valuation: &valuation, ..frame.clone() }, body)
            }),
            _ => unreachable!("atoms and boolean connectives are not memoised"),
        }
    }
}

fn on_lane(car: &crate::model::CarState, lane: i64, reserved: bool, claimed: bool) -> bool {
    let hit = |l: crate::model::LaneId| i64::from(l.get()) == lane;
    (reserved && car.res.iter().any(|l| hit(*l))) || (claimed && car.clm.is_some_and(hit))
}
