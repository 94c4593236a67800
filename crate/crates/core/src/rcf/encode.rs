//! Compilation of scenarios and formulas into real arithmetic.

use std::cell::Cell;
use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mlsl::Formula;
use crate::model::{Action, CarId, CarState, Model, Scenario, TrafficSnapshot, Valuation};
use crate::rational::{half, Rational};
use crate::rcf::layout::{CarLayout, DataVars, VarLayout};
use crate::rcf::term::{Rcf, Term};
use crate::robustness::require_separation;

/// Lane placeholder for "no lane".
pub const NO_LANE: i64 = -1;

fn v(name: &str) -> Term {
    Term::var(name)
}

fn lane_term(lane: Option<u32>) -> Term {
    Term::int(lane.map_or(NO_LANE, i64::from))
}

/// Fixes the first column of every car to the snapshot.
pub fn transform_init(layout: &VarLayout, snapshot: &TrafficSnapshot) -> Rcf {
    Rcf::and(layout.cars.values().map(|c| {
        let car = snapshot.car(&c.car).expect("layout built from the snapshot's cars");
        init_column(c.initial(), car)
    }))
}

fn init_column(col: &DataVars, car: &CarState) -> Rcf {
    let mut lanes = car.res.iter().map(|l| l.get());
    let first = lanes.next();
    let second = lanes.next();
    Rcf::and([
        Rcf::eq(v(&col.pos), Term::Const(car.pos.clone())),
        Rcf::eq(v(&col.res), lane_term(first)),
        Rcf::eq(v(&col.res2), lane_term(second)),
        Rcf::eq(v(&col.spd), Term::Const(car.spd.clone())),
        Rcf::eq(v(&col.acc), Term::Const(car.acc.clone())),
        Rcf::eq(v(&col.clm), lane_term(car.clm.map(|l| l.get()))),
        Rcf::eq(v(&col.sf), Term::Const(car.sf.clone())),
    ])
}

fn same(next: &str, prev: &str) -> Rcf {
    Rcf::eq(v(next), v(prev))
}

/// Lane bookkeeping of one letter, from column `i` to `i + 1`.
pub fn transform_d_act(action: &Action, from: &DataVars, to: &DataVars) -> Rcf {
    let keep_res = || Rcf::and([same(&to.res, &from.res), same(&to.res2, &from.res2)]);
    match action {
        Action::SetClaim { lane, .. } => Rcf::and([
            Rcf::eq(v(&to.clm), Term::int(lane.get().into())),
            keep_res(),
            same(&to.acc, &from.acc),
        ]),
        Action::SetReservation { .. } => Rcf::and([
            Rcf::eq(v(&to.res2), v(&from.clm)),
            Rcf::eq(v(&to.clm), Term::int(NO_LANE)),
            same(&to.res, &from.res),
            same(&to.acc, &from.acc),
        ]),
        Action::WithdrawReservation { keep, .. } => Rcf::and([
            Rcf::eq(v(&to.res), Term::int(keep.get().into())),
            Rcf::eq(v(&to.res2), Term::int(NO_LANE)),
            same(&to.clm, &from.clm),
            same(&to.acc, &from.acc),
        ]),
        Action::WithdrawClaim { .. } => Rcf::and([
            Rcf::eq(v(&to.clm), Term::int(NO_LANE)),
            keep_res(),
            same(&to.acc, &from.acc),
        ]),
        Action::SetAcceleration { value, .. } => Rcf::and([
            Rcf::eq(v(&to.acc), Term::Const(value.clone())),
            keep_res(),
            same(&to.clm, &from.clm),
        ]),
        Action::End => Rcf::and([keep_res(), same(&to.clm, &from.clm), same(&to.acc, &from.acc)]),
    }
}

/// Motion over a delay `z` with the acceleration of column `i`. The
/// reservation length is multiplied out: `A·sf' = (spd + acc·z)² + A·L`.
pub fn transform_delay(z: Term, from: &DataVars, to: &DataVars, max_decel: &Rational, phys_len: &Rational) -> Rcf {
    let spd = v(&from.spd);
    let acc = v(&from.acc);
    let speed_after = Term::add(spd.clone(), Term::mul(acc.clone(), z.clone()));
    Rcf::and([
        Rcf::eq(
            v(&to.pos),
            Term::sum([
                v(&from.pos),
                Term::mul(spd, z.clone()),
                Term::product([Term::Const(half()), acc, Term::square(z)]),
            ]),
        ),
        Rcf::eq(v(&to.spd), speed_after.clone()),
        Rcf::eq(
            Term::scale(max_decel.clone(), v(&to.sf)),
            Term::add(Term::square(speed_after), Term::Const(max_decel * phys_len)),
        ),
    ])
}

pub fn transform_act(
    action: &Action,
    z: Term,
    from: &DataVars,
    to: &DataVars,
    max_decel: &Rational,
    phys_len: &Rational,
) -> Rcf {
    Rcf::and([transform_d_act(action, from, to), transform_delay(z, from, to, max_decel, phys_len)])
}

/// The three guarded steps per letter of one car, over the time variables
/// `times` (unperturbed or perturbed).
pub fn transform_car_word(c: &CarLayout, times: &[String], t_f: &str, max_decel: &Rational, phys_len: &Rational) -> Rcf {
    let tf = v(t_f);
    let mut parts = Vec::new();
    for (i, letter) in c.letters.iter().enumerate() {
        let (from, to) = (&c.columns[i], &c.columns[i + 1]);
        let (ti, tn) = (v(&times[i]), v(&times[i + 1]));
        parts.push(Rcf::implies(
            Rcf::and([Rcf::le(ti.clone(), tn.clone()), Rcf::le(tn.clone(), tf.clone())]),
            transform_act(letter, Term::sub(tn.clone(), ti.clone()), from, to, max_decel, phys_len),
        ));
        parts.push(Rcf::implies(
            Rcf::and([Rcf::le(ti.clone(), tf.clone()), Rcf::lt(tf.clone(), tn)]),
            transform_act(&Action::End, Term::sub(tf.clone(), ti.clone()), from, to, max_decel, phys_len),
        ));
        parts.push(Rcf::implies(
            Rcf::lt(tf.clone(), ti),
            transform_act(&Action::End, Term::zero(), from, to, max_decel, phys_len),
        ));
    }
    Rcf::and(parts)
}

pub fn transform_word(layout: &VarLayout, initial: &TrafficSnapshot, max_decel: &Rational, perturbed: bool) -> Rcf {
    Rcf::and(layout.cars.values().map(|c| {
        let phys = &initial.car(&c.car).expect("known car").phys_len;
        let times = match (&layout.perturbed, perturbed) {
            (Some(p), true) => &p.times[&c.car],
            _ => &c.times,
        };
        transform_car_word(c, times, &layout.t_f, max_decel, phys)
    }))
}

/// `t_{C,1} = 0` and `t_{C,i+1} = τ_{C,i}`.
pub fn time_bindings(layout: &VarLayout) -> Rcf {
    Rcf::and(layout.cars.values().flat_map(|c| {
        std::iter::once(Rcf::eq(v(&c.times[0]), Term::zero()))
            .chain(c.stamps.iter().zip(&c.times[1..]).map(|(s, t)| Rcf::eq(v(t), Term::Const(s.clone()))))
            .collect::<Vec<_>>()
    }))
}

/// Perturbs lane-action stamps by at most `ε`, keeps acceleration stamps
/// and the end marker fixed, and keeps every stamp inside the timespan.
pub fn shake_eps(layout: &VarLayout, eps: &Rational, end: &Rational) -> Rcf {
    let p = layout.perturbed.as_ref().expect("perturbed layout");
    let mut parts = Vec::new();
    for c in layout.cars.values() {
        let times = &p.times[&c.car];
        parts.push(Rcf::eq(v(&times[0]), Term::zero()));
        for (i, letter) in c.letters.iter().enumerate() {
            let t = v(&times[i + 1]);
            let stamp = Term::Const(c.stamps[i].clone());
            parts.push(if letter.is_end() || letter.is_acceleration() {
                Rcf::eq(t.clone(), stamp)
            } else {
                Rcf::within(t.clone(), stamp, eps)
            });
            parts.push(Rcf::between(Term::zero(), t, Term::Const(end.clone())));
        }
    }
    Rcf::and(parts)
}

/// `x = edge + (pos_{E,f} − pos_{E,1})`.
fn moved_edge(owner: &CarLayout, edge: &Rational) -> Term {
    Term::sum([Term::Const(edge.clone()), v(&owner.last().pos), Term::neg(v(&owner.initial().pos))])
}

/// Perturbs the frozen positions, fronts and view edges by at most `δ`.
pub fn shake_delta(layout: &VarLayout, scenario: &Scenario, delta: &Rational) -> Rcf {
    let p = layout.perturbed.as_ref().expect("perturbed layout");
    let owner = &layout.cars[&scenario.view.owner];
    let mut parts = Vec::new();
    for c in layout.cars.values() {
        let (pos, sf) = (v(&p.pos[&c.car]), v(&p.sf[&c.car]));
        let f = c.last();
        parts.push(Rcf::within(pos.clone(), v(&f.pos), delta));
        parts.push(Rcf::within(Term::add(pos, sf.clone()), Term::add(v(&f.pos), v(&f.sf)), delta));
        parts.push(Rcf::lt(Term::zero(), sf));
    }
    parts.push(Rcf::within(v(&p.x_l), moved_edge(owner, &scenario.view.left), delta));
    parts.push(Rcf::within(v(&p.x_r), moved_edge(owner, &scenario.view.right), delta));
    parts.push(Rcf::le(v(&p.x_l), v(&p.x_r)));
    Rcf::and(parts)
}

/// Per-car terms the spatial translation reads.
#[derive(Clone, Debug)]
pub struct SpatialVars {
    pub pos: Term,
    pub sf: Term,
    pub res: Term,
    pub res2: Term,
    pub clm: Term,
}

impl SpatialVars {
    pub fn of(col: &DataVars) -> Self {
        SpatialVars { pos: v(&col.pos), sf: v(&col.sf), res: v(&col.res), res2: v(&col.res2), clm: v(&col.clm) }
    }
}

/// The spatial part of `Υ`: cars and the column the formula is read on.
/// Lanes, extension and valuation vary during the recursion and are
/// passed along.
pub struct SpatialContext {
    pub cars: BTreeMap<CarId, SpatialVars>,
    fresh: Cell<usize>,
}

impl SpatialContext {
    pub fn new(cars: BTreeMap<CarId, SpatialVars>) -> Self {
        SpatialContext { cars, fresh: Cell::new(0) }
    }

    fn fresh(&self) -> String {
        let n = self.fresh.get() + 1;
        self.fresh.set(n);
        format!("s_{n}")
    }

    /// Chop points allocated so far.
    pub fn chop_points(&self) -> usize {
        self.fresh.get()
    }

    /// `transform_f` in negation normal form.
    pub fn transform_f(&self, lanes: (i64, i64), x_l: &Term, x_r: &Term, valuation: &Valuation, phi: &Formula) -> Result<Rcf> {
        Ok(self.raw(lanes, x_l, x_r, valuation, phi)?.nnf())
    }

    fn car<'a>(&'a self, valuation: &Valuation, var: &str) -> Result<&'a SpatialVars> {
        let id = valuation.get(var).ok_or_else(|| Error::UnboundVariable(var.to_string()))?;
        self.cars
            .get(id)
            .ok_or_else(|| Error::Scenario(format!("variable {var} names unknown car {id}")))
    }

    fn raw(&self, (l, n): (i64, i64), x_l: &Term, x_r: &Term, val: &Valuation, phi: &Formula) -> Result<Rcf> {
        let lane = Term::int(l);
        let nonempty = || Rcf::lt(x_l.clone(), x_r.clone());
        Ok(match phi {
            Formula::VarEq(a, b) => {
                let get = |x: &String| val.get(x).ok_or_else(|| Error::UnboundVariable(x.clone()));
                Rcf::bool(get(a)? == get(b)?)
            }
            Formula::Free if l != n => Rcf::False,
            Formula::Free => Rcf::and(std::iter::once(nonempty()).chain(self.cars.values().map(|c| {
                let member = Rcf::or([
                    Rcf::eq(c.res.clone(), lane.clone()),
                    Rcf::eq(c.res2.clone(), lane.clone()),
                    Rcf::eq(c.clm.clone(), lane.clone()),
                ]);
                Rcf::or([
                    Rcf::not(member),
                    Rcf::le(Term::add(c.pos.clone(), c.sf.clone()), x_l.clone()),
                    Rcf::le(x_r.clone(), c.pos.clone()),
                ])
            }))),
            Formula::Re(_) | Formula::Cl(_) if l != n => Rcf::False,
            Formula::Re(var) | Formula::Cl(var) => {
                let c = self.car(val, var)?;
                let on_lane = if matches!(phi, Formula::Re(_)) {
                    Rcf::or([Rcf::eq(c.res.clone(), lane.clone()), Rcf::eq(c.res2.clone(), lane.clone())])
                } else {
                    Rcf::eq(c.clm.clone(), lane.clone())
                };
                Rcf::and([
                    nonempty(),
                    on_lane,
                    Rcf::le(c.pos.clone(), x_l.clone()),
                    Rcf::le(x_r.clone(), Term::add(c.pos.clone(), c.sf.clone())),
                ])
            }
            Formula::Len(q) => Rcf::eq(Term::sub(x_r.clone(), x_l.clone()), Term::Const(q.clone())),
            Formula::Not(f) => Rcf::not(self.raw((l, n), x_l, x_r, val, f)?),
            Formula::And(a, b) => {
                let (fa, fb) = (self.raw((l, n), x_l, x_r, val, a)?, self.raw((l, n), x_l, x_r, val, b)?);
                // `free ∧ ¬free` and friends: contradictory by construction.
                if fb == Rcf::not(fa.clone()) || fa == Rcf::not(fb.clone()) {
                    Rcf::False
                } else {
                    Rcf::and([fa, fb])
                }
            }
            Formula::Exists(var, body) => {
                let mut branches = Vec::new();
                for id in self.cars.keys() {
                    branches.push(self.raw((l, n), x_l, x_r, &val.with(var, id.clone()), body)?);
                }
                Rcf::or(branches)
            }
            Formula::HChop(a, b) => {
                let s = self.fresh();
                let st = v(&s);
                let left = self.raw((l, n), x_l, &st, val, a)?;
                let right = self.raw((l, n), &st, x_r, val, b)?;
                Rcf::exists(
                    vec![s],
                    Rcf::and([Rcf::le(x_l.clone(), st.clone()), Rcf::le(st, x_r.clone()), left, right]),
                )
            }
            Formula::VChop(lower, upper) => {
                if l > n {
                    Rcf::and([self.raw((l, n), x_l, x_r, val, lower)?, self.raw((l, n), x_l, x_r, val, upper)?])
                } else {
                    let mut branches = Vec::new();
                    for m in l - 1..=n {
                        branches.push(Rcf::and([
                            self.raw((l, m), x_l, x_r, val, lower)?,
                            self.raw((m + 1, n), x_l, x_r, val, upper)?,
                        ]));
                    }
                    Rcf::or(branches)
                }
            }
        })
    }
}

/// Whether the negated monitoring formula can be stated without real
/// quantifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Every chop sits under an odd number of negations.
    QuantifierFreeAfterNegation,
    Quantified,
}

pub fn quantifier_polarity(phi: &Formula) -> Polarity {
    fn all_odd(f: &Formula, negations: usize) -> bool {
        match f {
            Formula::Not(g) => all_odd(g, negations + 1),
            Formula::And(a, b) | Formula::VChop(a, b) => all_odd(a, negations) && all_odd(b, negations),
            Formula::HChop(a, b) => negations % 2 == 1 && all_odd(a, negations) && all_odd(b, negations),
            Formula::Exists(_, g) => all_odd(g, negations),
            _ => true,
        }
    }
    if all_odd(phi, 0) {
        Polarity::QuantifierFreeAfterNegation
    } else {
        Polarity::Quantified
    }
}

/// Requested shape of the emitted problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Logic {
    /// Quantifier-free when the polarity allows it.
    #[default]
    Auto,
    QuantifierFree,
    Quantified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    /// A single model, view fixed to its extension.
    Instant,
    Exact,
    Robust { eps: Rational, delta: Rational },
}

/// Everything needed to decide `G φ` (or `M ⊨ φ` in instant mode).
#[derive(Clone, Debug)]
pub struct MonitorEncoding {
    pub mode: Mode,
    pub layout: VarLayout,
    /// Initial model, word semantics, freeze-time range, view motion and,
    /// in robust mode, the perturbations.
    pub premise: Rcf,
    /// `transform_f(Υ, φ)` on the frozen column.
    pub property: Rcf,
    /// `transform_f(Υ, ¬φ)`.
    pub negated_property: Rcf,
    pub polarity: Polarity,
}

/// A satisfiability problem: `premise ∧ transform_f(Υ, ¬φ)` plus any extra
/// assertions, with the symbols to declare and the values to report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub logic: &'static str,
    pub declared: Vec<String>,
    pub assertions: Vec<Rcf>,
    pub report: Vec<String>,
}

impl Query {
    /// Adds an assertion, declaring any new symbols it mentions.
    pub fn assert(&mut self, f: Rcf) {
        for var in f.free_vars() {
            if !self.declared.contains(&var) {
                self.declared.push(var);
            }
        }
        self.assertions.push(f);
    }
}

impl MonitorEncoding {
    /// `∀ vars . premise ⟹ property`; valid iff the property holds.
    pub fn validity_formula(&self) -> Rcf {
        let vars: Vec<String> = self.layout.variables();
        Rcf::forall(vars, Rcf::implies(self.premise.clone(), self.property.clone()))
    }

    /// The negated monitoring formula as a satisfiability query.
    pub fn violation_query(&self, logic: Logic) -> Result<Query> {
        let qf = match (logic, self.polarity) {
            (Logic::Quantified, _) => false,
            (Logic::Auto, p) => p == Polarity::QuantifierFreeAfterNegation,
            (Logic::QuantifierFree, Polarity::QuantifierFreeAfterNegation) => true,
            (Logic::QuantifierFree, Polarity::Quantified) => {
                return Err(Error::Solver(
                    "formula has a chop under an even number of negations; a quantifier-free query is impossible".into(),
                ))
            }
        };
        let (body, hoisted) = if qf {
            self.negated_property.clone().hoist_existentials()
        } else {
            (self.negated_property.clone(), Vec::new())
        };
        let order = self.layout.variables();
        let mut free: Vec<String> = order.iter().filter(|x| self.premise.free_vars().contains(*x) || body.free_vars().contains(*x)).cloned().collect();
        free.extend(hoisted);
        let report = self.report_vars();
        for r in &report {
            if !free.contains(r) {
                free.push(r.clone());
            }
        }
        Ok(Query {
            logic: if qf { "QF_NRA" } else { "NRA" },
            declared: free,
            assertions: vec![self.premise.clone(), body],
            report,
        })
    }

    /// Variables a witness is read from.
    pub fn report_vars(&self) -> Vec<String> {
        let l = &self.layout;
        let mut out = Vec::new();
        if self.mode != Mode::Instant {
            out.push(l.t_f.clone());
        }
        out.push(l.x_l.clone());
        out.push(l.x_r.clone());
        for c in l.cars.values() {
            let col = if self.mode == Mode::Instant { c.initial() } else { c.last() };
            out.extend(col.all().into_iter().cloned());
        }
        if let Some(p) = &l.perturbed {
            for ts in p.times.values() {
                out.extend(ts.iter().cloned());
            }
            out.extend(p.pos.values().cloned());
            out.extend(p.sf.values().cloned());
            out.push(p.x_l.clone());
            out.push(p.x_r.clone());
        }
        out
    }
}

fn spatial_context(layout: &VarLayout, column: impl Fn(&CarLayout) -> SpatialVars) -> SpatialContext {
    SpatialContext::new(layout.cars.iter().map(|(id, c)| (id.clone(), column(c))).collect())
}

fn properties(ctx: &SpatialContext, model_lanes: (i64, i64), x_l: &Term, x_r: &Term, val: &Valuation, phi: &Formula) -> Result<(Rcf, Rcf)> {
    let property = ctx.transform_f(model_lanes, x_l, x_r, val, phi)?;
    let negated = ctx.transform_f(model_lanes, x_l, x_r, val, &Formula::not(phi.clone()))?;
    Ok((property, negated))
}

/// `transform_init ⟹ transform_f` on the initial column with the view
/// fixed to the model's extension.
pub fn encode_instant(model: &Model, phi: &Formula) -> Result<MonitorEncoding> {
    phi.ensure_closed(&model.valuation)?;
    let cars: Vec<CarId> = model.snapshot.ids().cloned().collect();
    let word = crate::model::TimedWord::closed(vec![])?;
    let layout = VarLayout::new(&word, &cars);
    let (x_l, x_r) = (v(&layout.x_l), v(&layout.x_r));
    let premise = Rcf::and([
        transform_init(&layout, &model.snapshot),
        Rcf::eq(x_l.clone(), Term::Const(model.view.left.clone())),
        Rcf::eq(x_r.clone(), Term::Const(model.view.right.clone())),
    ]);
    let ctx = spatial_context(&layout, |c| SpatialVars::of(c.initial()));
    let lanes = (model.view.lane_lo, model.view.lane_hi);
    let (property, negated_property) = properties(&ctx, lanes, &x_l, &x_r, &model.valuation, phi)?;
    Ok(MonitorEncoding { mode: Mode::Instant, layout, premise, property, negated_property, polarity: quantifier_polarity(phi) })
}

/// `transform_G(ω, M, φ)`.
pub fn transform_globally(scenario: &Scenario, phi: &Formula) -> Result<MonitorEncoding> {
    phi.ensure_closed(&scenario.valuation)?;
    let layout = VarLayout::new(&scenario.word, &scenario.cars());
    let owner = &layout.cars[&scenario.view.owner];
    let (x_l, x_r) = (v(&layout.x_l), v(&layout.x_r));
    let premise = Rcf::and([
        transform_init(&layout, &scenario.initial),
        time_bindings(&layout),
        transform_word(&layout, &scenario.initial, &scenario.max_decel, false),
        Rcf::between(Term::zero(), v(&layout.t_f), Term::Const(scenario.end_time().clone())),
        Rcf::eq(x_l.clone(), moved_edge(owner, &scenario.view.left)),
        Rcf::eq(x_r.clone(), moved_edge(owner, &scenario.view.right)),
    ]);
    let ctx = spatial_context(&layout, |c| SpatialVars::of(c.last()));
    let lanes = (scenario.view.lane_lo, scenario.view.lane_hi);
    let (property, negated_property) = properties(&ctx, lanes, &x_l, &x_r, &scenario.valuation, phi)?;
    Ok(MonitorEncoding { mode: Mode::Exact, layout, premise, property, negated_property, polarity: quantifier_polarity(phi) })
}

/// `transform_G^{ε,δ}(ω, M, φ)`. Fails if the word violates the separation
/// assumption for `ε`.
pub fn transform_globally_robust(scenario: &Scenario, phi: &Formula, eps: &Rational, delta: &Rational) -> Result<MonitorEncoding> {
    if eps <= &Rational::zero() || delta <= &Rational::zero() {
        return Err(Error::Scenario("robustness bounds must be positive".into()));
    }
    require_separation(&scenario.word, eps)?;
    phi.ensure_closed(&scenario.valuation)?;
    let layout = VarLayout::new(&scenario.word, &scenario.cars()).with_perturbation();
    let p = layout.perturbed.clone().expect("just added");
    let premise = Rcf::and([
        transform_init(&layout, &scenario.initial),
        shake_eps(&layout, eps, scenario.end_time()),
        shake_delta(&layout, scenario, delta),
        transform_word(&layout, &scenario.initial, &scenario.max_decel, true),
        Rcf::between(Term::zero(), v(&layout.t_f), Term::Const(scenario.end_time().clone())),
    ]);
    let ctx = spatial_context(&layout, |c| {
        let f = c.last();
        SpatialVars { pos: v(&p.pos[&c.car]), sf: v(&p.sf[&c.car]), res: v(&f.res), res2: v(&f.res2), clm: v(&f.clm) }
    });
    let lanes = (scenario.view.lane_lo, scenario.view.lane_hi);
    let (property, negated_property) = properties(&ctx, lanes, &v(&p.x_l), &v(&p.x_r), &scenario.valuation, phi)?;
    Ok(MonitorEncoding {
        mode: Mode::Robust { eps: eps.clone(), delta: delta.clone() },
        layout,
        premise,
        property,
        negated_property,
        polarity: quantifier_polarity(phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlsl::parse_formula;
    use crate::model::LaneId;
    use crate::rational::{int, rat};
    use crate::testdata::running_example;
    use proptest::prelude::*;

    const NPC: &str = "forall c, d . c != d -> !<< (cl(c) | re(c)) & (cl(d) | re(d)) >>";
    const SAFE: &str = "forall c, d . c != d -> !<< re(c) & re(d) >>";

    fn env_from<'a>(values: &'a BTreeMap<String, Rational>) -> impl Fn(&str) -> Option<Rational> + 'a {
        move |x| values.get(x).cloned()
    }

    /// Solves the premise by forward simulation: with all stamps and `t_f`
    /// known, every equation defines its left-hand side.
    fn simulate_premise(s: &Scenario, layout: &VarLayout, t_f: &Rational) -> BTreeMap<String, Rational> {
        let mut values = BTreeMap::new();
        values.insert(layout.t_f.clone(), t_f.clone());
        let at = s.snapshot_at(t_f).unwrap();
        for c in layout.cars.values() {
            for (i, t) in c.times.iter().enumerate() {
                values.insert(t.clone(), if i == 0 { int(0) } else { c.stamps[i - 1].clone() });
            }
            // Column k holds the state after the letters stamped ≤ t_f,
            // advanced to t_f; earlier columns are checked by the guards.
            let prefix = s.word.project(&c.car);
            for (k, col) in c.columns.iter().enumerate() {
                let stop = if k == 0 { int(0) } else { c.stamps[k - 1].clone().min(t_f.clone()) };
                let applied: Vec<_> = prefix.events()[..k]
                    .iter()
                    .filter(|e| &e.time <= t_f && !e.action.is_end())
                    .cloned()
                    .collect();
                let w = crate::model::TimedWord::new(
                    applied.into_iter().chain([crate::model::Event::new(Action::End, stop.clone())]).collect(),
                )
                .unwrap();
                let snap = crate::model::snapshot_at(&w, &s.initial, &stop, &s.max_decel).unwrap();
                let st = snap.car(&c.car).unwrap();
                let mut lanes = st.res.iter().map(|l| l.get());
                let (a, b) = (lanes.next(), lanes.next());
                values.insert(col.res.clone(), lane_term(a).as_const().unwrap().clone());
                values.insert(col.res2.clone(), lane_term(b).as_const().unwrap().clone());
                values.insert(col.clm.clone(), lane_term(st.clm.map(LaneId::get)).as_const().unwrap().clone());
                values.insert(col.pos.clone(), st.pos.clone());
                values.insert(col.sf.clone(), st.sf.clone());
                values.insert(col.spd.clone(), st.spd.clone());
                values.insert(col.acc.clone(), st.acc.clone());
            }
            let last = c.last();
            let car = at.car(&c.car).unwrap();
            assert_eq!(values[&last.pos], car.pos, "frozen column matches the replay");
        }
        let owner = &layout.cars[&s.view.owner];
        let moved = &values[&owner.last().pos] - &values[&owner.initial().pos];
        values.insert(layout.x_l.clone(), &s.view.left + &moved);
        values.insert(layout.x_r.clone(), &s.view.right + &moved);
        values
    }

    #[test]
    fn init_constraints() {
        let s = running_example();
        let layout = VarLayout::new(&s.word, &s.cars());
        let f = transform_init(&layout, &s.initial).to_string();
        for needle in ["E_1_pos = 6", "E_1_res = 1", "E_1_res2 = (-1)", "E_1_clm = 2", "E_1_sf = 15", "D_1_res = 2", "D_1_res2 = 3", "C_1_clm = 3"] {
            assert!(f.contains(needle), "{needle} missing from {f}");
        }
    }

    #[test]
    fn action_cases() {
        let s = running_example();
        let layout = VarLayout::new(&s.word, &s.cars());
        let d = &layout.cars[&CarId::from("D")];
        let wr = transform_d_act(&d.letters[0], &d.columns[0], &d.columns[1]).to_string();
        assert!(wr.contains("D_2_res = 3") && wr.contains("D_2_res2 = (-1)"), "{wr}");
        let delay = transform_delay(Term::int(3), &d.columns[1], &d.columns[2], &s.max_decel, &int(3));
        let mut env = BTreeMap::new();
        for (k, val) in [("D_2_pos", 34), ("D_2_spd", 18), ("D_2_acc", 0), ("D_3_pos", 88), ("D_3_spd", 18), ("D_3_sf", 30)] {
            env.insert(k.to_string(), int(val));
        }
        assert_eq!(delay.evaluate(&env_from(&env)), Some(true));
        env.insert("D_3_pos".into(), int(87));
        assert_eq!(delay.evaluate(&env_from(&env)), Some(false));
    }

    #[test]
    fn freeze_at_four() {
        let s = running_example();
        let enc = transform_globally(&s, &parse_formula(NPC).unwrap()).unwrap();
        let values = simulate_premise(&s, &enc.layout, &int(4));
        let env = env_from(&values);
        assert_eq!(enc.premise.evaluate(&env), Some(true));
        assert_eq!(values["C_2_pos"], int(84));
        assert_eq!(values["D_3_pos"], int(88));
        assert_eq!((values["x_f_l"].clone(), values["x_f_r"].clone()), (int(48), int(138)));
        // Any other value for a frozen variable breaks the premise.
        let mut wrong = values.clone();
        wrong.insert("D_3_pos".into(), int(89));
        assert_eq!(enc.premise.evaluate(&env_from(&wrong)), Some(false));
    }

    #[test]
    fn freeze_at_zero_keeps_initial_columns() {
        let s = running_example();
        let enc = transform_globally(&s, &Formula::tt()).unwrap();
        let values = simulate_premise(&s, &enc.layout, &int(0));
        assert_eq!(enc.premise.evaluate(&env_from(&values)), Some(true));
        for c in enc.layout.cars.values() {
            for (a, b) in c.initial().all().iter().zip(c.last().all()) {
                assert_eq!(values[*a], values[b]);
            }
        }
    }

    #[test]
    fn guards_partition_time() {
        let s = running_example();
        let layout = VarLayout::new(&s.word, &s.cars());
        for c in layout.cars.values() {
            let stamps: Vec<Rational> = std::iter::once(int(0)).chain(c.stamps.iter().cloned()).collect();
            for i in 0..c.letters.len() {
                for tf in [int(0), int(1), rat(21, 20), rat(11, 10), int(4), rat(61, 10)] {
                    let (ti, tn) = (&stamps[i], &stamps[i + 1]);
                    let g1 = ti <= tn && tn <= &tf;
                    let g2 = ti <= &tf && &tf < tn;
                    let g3 = &tf < ti;
                    assert_eq!(u8::from(g1) + u8::from(g2) + u8::from(g3), 1);
                }
            }
        }
    }

    #[test]
    fn length_and_static_lanes() {
        let s = running_example();
        let m = s.initial_model();
        let ctx = spatial_context(&VarLayout::new(&s.word, &s.cars()), |c| SpatialVars::of(c.initial()));
        let (xl, xr) = (v("xl"), v("xr"));
        let len = ctx.transform_f((1, 3), &xl, &xr, &m.valuation, &Formula::Len(int(90))).unwrap();
        assert_eq!(len.to_string(), "(xr - xl) = 90");
        assert_eq!(ctx.transform_f((1, 2), &xl, &xr, &m.valuation, &Formula::Free).unwrap(), Rcf::False);
        assert!(ctx.transform_f((2, 2), &xl, &xr, &m.valuation, &Formula::re("zz")).is_err());
    }

    #[test]
    fn polarity() {
        assert_eq!(quantifier_polarity(&parse_formula(NPC).unwrap()), Polarity::QuantifierFreeAfterNegation);
        assert_eq!(quantifier_polarity(&parse_formula(SAFE).unwrap()), Polarity::QuantifierFreeAfterNegation);
        assert_eq!(quantifier_polarity(&parse_formula("<< free >>").unwrap()), Polarity::Quantified);
        assert_eq!(quantifier_polarity(&parse_formula("free & re(ego)").unwrap()), Polarity::QuantifierFreeAfterNegation);
    }

    #[test]
    fn quantifier_free_queries() {
        let s = running_example();
        let enc = transform_globally(&s, &parse_formula(SAFE).unwrap()).unwrap();
        let q = enc.violation_query(Logic::Auto).unwrap();
        assert_eq!(q.logic, "QF_NRA");
        assert!(q.assertions.iter().all(|a| !a.has_quantifiers()));
        let enc = transform_globally(&s, &parse_formula("<< re(ego) >>").unwrap()).unwrap();
        assert!(enc.violation_query(Logic::QuantifierFree).is_err());
        let q = enc.violation_query(Logic::Auto).unwrap();
        assert_eq!(q.logic, "NRA");
        assert!(q.assertions[1].has_forall());
    }

    #[test]
    fn robust_requires_separation() {
        let s = running_example();
        let phi = parse_formula(SAFE).unwrap();
        assert!(transform_globally_robust(&s, &phi, &int(3), &int(1)).is_err());
        let enc = transform_globally_robust(&s, &phi, &rat(1, 10), &int(1)).unwrap();
        let q = enc.violation_query(Logic::Auto).unwrap();
        for name in ["tp_D_2", "tp_E_2", "D_f_pos_p", "E_f_sf_p", "x_f_l_p"] {
            assert!(q.declared.iter().any(|d| d == name), "{name}");
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Free),
            Just(Formula::re("ego")),
            Just(Formula::cl("x")),
            (1i64..6).prop_map(|q| Formula::Len(int(q))),
            Just(Formula::var_eq("x", "ego")),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::hchop(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::vchop(a, b)),
                inner.prop_map(|b| Formula::exists("x", b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn negation_commutes(phi in arb_formula()) {
            let s = running_example();
            let m = s.initial_model().clone();
            let val = m.valuation.with("x", CarId::from("C"));
            let layout = VarLayout::new(&s.word, &s.cars());
            let (xl, xr) = (v("xl"), v("xr"));
            let a = spatial_context(&layout, |c| SpatialVars::of(c.last()))
                .transform_f((1, 3), &xl, &xr, &val, &Formula::not(phi.clone())).unwrap();
            let b = spatial_context(&layout, |c| SpatialVars::of(c.last()))
                .transform_f((1, 3), &xl, &xr, &val, &phi).unwrap();
            prop_assert_eq!(a, Rcf::not(b).nnf());
        }
    }
}
