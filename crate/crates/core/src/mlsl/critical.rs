//! Time points at which the truth of a formula can change.
//!
//! Between two word events every boundary (car rear, reservation front,
//! view edges) is a quadratic in `t`. Truth can only flip where two of
//! them, possibly shifted by a sum of length constants, meet.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Result;
use crate::mlsl::ast::Formula;
use crate::mlsl::eval::subset_sums;
use crate::model::Scenario;
use crate::rational::{half, midpoint, Rational};

/// Bisection stops once a bracket is narrower than this.
fn bracket_width() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(1u64 << 20))
}

/// `a·t² + b·t + c` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Quadratic {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

/// A zero of a quadratic inside an open interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Root {
    Exact(Rational),
    /// An irrational zero lies strictly between the two bounds.
    Bracket(Rational, Rational),
}

impl Quadratic {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Self {
        Quadratic { a, b, c }
    }

    pub fn constant(c: Rational) -> Self {
        Quadratic::new(Rational::zero(), Rational::zero(), c)
    }

    /// `a·u² + b·u + c` with `u = t − s`, rewritten as a polynomial in `t`.
    pub fn shifted(a: Rational, b: Rational, c: Rational, s: &Rational) -> Self {
        let b_t = &b - &a * s * Rational::from_integer(2.into());
        let c_t = &c - &b * s + &a * s * s;
        Quadratic::new(a, b_t, c_t)
    }

    pub fn at(&self, t: &Rational) -> Rational {
        (&self.a * t + &self.b) * t + &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    /// Scaled so the leading nonzero coefficient is 1.
    pub fn monic(&self) -> Quadratic {
        let lead = [&self.a, &self.b, &self.c].into_iter().find(|x| !x.is_zero()).cloned();
        match lead {
            Some(l) => Quadratic::new(&self.a / &l, &self.b / &l, &self.c / &l),
            None => self.clone(),
        }
    }

    /// Zeros strictly inside `(lo, hi)`, ascending. The zero polynomial has
    /// none (it never changes sign).
    pub fn roots_in(&self, lo: &Rational, hi: &Rational) -> Vec<Root> {
        let inside = |x: &Rational| x > lo && x < hi;
        if self.a.is_zero() {
            if self.b.is_zero() {
                return Vec::new();
            }
            let x = -&self.c / &self.b;
            return if inside(&x) { vec![Root::Exact(x)] } else { Vec::new() };
        }
        let two_a = &self.a * Rational::from_integer(2.into());
        let disc = &self.b * &self.b - &two_a * &self.c * Rational::from_integer(2.into());
        if disc.is_negative() {
            return Vec::new();
        }
        if let Some(root) = rational_sqrt(&disc) {
            let mut xs = vec![(-&self.b - &root) / &two_a, (-&self.b + root) / &two_a];
            xs.sort();
            xs.dedup();
            return xs.into_iter().filter(|x| inside(x)).map(Root::Exact).collect();
        }
        // Two distinct irrational zeros, one on each side of the vertex.
        let vertex = -&self.b / &two_a;
        let mut out = Vec::new();
        for (l, h) in [(lo.clone(), vertex.clone().min(hi.clone())), (vertex.clone().max(lo.clone()), hi.clone())] {
            if l < h {
                if let Some(bracket) = self.bisect(l, h) {
                    out.push(bracket);
                }
            }
        }
        out
    }

    /// Brackets the single zero of a monotone stretch, if there is one.
    fn bisect(&self, mut l: Rational, mut h: Rational) -> Option<Root> {
        let sign = |x: &Rational| self.at(x).signum();
        let (sl, sh) = (sign(&l), sign(&h));
        if sl == sh || sl.is_zero() || sh.is_zero() {
            return None;
        }
        let width = bracket_width();
        while &h - &l > width {
            let m = midpoint(&l, &h);
            if sign(&m) == sl {
                l = m;
            } else {
                h = m;
            }
        }
        Some(Root::Bracket(l, h))
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Rational::new(rn, rd))
}

/// Candidate instants for the direct global check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalTimes {
    /// Event stamps and rational boundary crossings.
    pub exact: Vec<Rational>,
    /// Isolating intervals of irrational crossings.
    pub brackets: Vec<(Rational, Rational)>,
    /// Every instant to test, ascending: the exact points, bracket ends,
    /// and one point inside each gap.
    pub samples: Vec<Rational>,
}

impl CriticalTimes {
    /// True when some crossing could not be represented exactly.
    pub fn inexact(&self) -> bool {
        !self.brackets.is_empty()
    }
}

/// Boundary quadratics on the segment starting at `start`.
fn boundaries(scenario: &Scenario, start: &Rational) -> Result<Vec<Quadratic>> {
    let snapshot = scenario.snapshot_at(start)?;
    let a_max = &scenario.max_decel;
    let mut out = Vec::new();
    for car in snapshot.cars.values() {
        let rear = Quadratic::shifted(&car.acc * half(), car.spd.clone(), car.pos.clone(), start);
        // (spd + acc·u)²/A + L
        let sf = Quadratic::shifted(
            &car.acc * &car.acc / a_max,
            Rational::from_integer(2.into()) * &car.spd * &car.acc / a_max,
            &car.spd * &car.spd / a_max + &car.phys_len,
            start,
        );
        out.push(Quadratic::new(&rear.a + &sf.a, &rear.b + &sf.b, &rear.c + &sf.c));
        out.push(rear);
    }
    let owner = scenario
        .initial
        .car(&scenario.view.owner)
        .expect("validated scenario has its view owner");
    let owner_now = snapshot.car(&scenario.view.owner).expect("cars persist");
    let motion = Quadratic::shifted(&owner_now.acc * half(), owner_now.spd.clone(), &owner_now.pos - &owner.pos, start);
    for edge in [&scenario.view.left, &scenario.view.right] {
        out.push(Quadratic::new(motion.a.clone(), motion.b.clone(), &motion.c + edge));
    }
    Ok(out)
}

/// Collects event stamps, boundary crossings (shifted by sums of the
/// formula's length constants) and sample points over the whole timespan.
pub fn critical_times(scenario: &Scenario, formula: &Formula) -> Result<CriticalTimes> {
    let stamps: BTreeSet<Rational> = std::iter::once(Rational::zero())
        .chain(scenario.word.events().iter().map(|e| e.time.clone()))
        .collect();
    let shifts = subset_sums(&formula.length_constants());
    let mut exact = stamps.clone();
    let mut brackets = BTreeSet::new();
    let stamps: Vec<Rational> = stamps.into_iter().collect();
    for w in stamps.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let bounds = boundaries(scenario, lo)?;
        let mut diffs = BTreeSet::new();
        for (i, p) in bounds.iter().enumerate() {
            for q in &bounds[i + 1..] {
                for s in &shifts {
                    for sign in [1, -1] {
                        let d = Quadratic::new(&p.a - &q.a, &p.b - &q.b, &p.c - &q.c + s * Rational::from_integer(sign.into()));
                        if !d.is_zero() {
                            diffs.insert(d.monic());
                        }
                    }
                }
            }
        }
        for d in diffs {
            for root in d.roots_in(lo, hi) {
                match root {
                    Root::Exact(x) => {
                        exact.insert(x);
                    }
                    Root::Bracket(l, h) => {
                        brackets.insert((l, h));
                    }
                }
            }
        }
    }
    let mut points = exact.clone();
    for (l, h) in &brackets {
        points.insert(l.clone());
        points.insert(h.clone());
    }
    let points: Vec<Rational> = points.into_iter().collect();
    let mut samples = Vec::with_capacity(2 * points.len());
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            samples.push(midpoint(&points[i - 1], p));
        }
        samples.push(p.clone());
    }
    Ok(CriticalTimes {
        exact: exact.into_iter().collect(),
        brackets: brackets.into_iter().collect(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimedWord;
    use crate::rational::{int, rat};
    use crate::testdata::running_example;
    use proptest::prelude::*;

    #[test]
    fn running_example_crossing() {
        let s = running_example();
        let ct = critical_times(&s, &Formula::tt()).unwrap();
        assert!(ct.exact.contains(&rat(7, 6)));
        for stamp in [int(0), int(1), rat(11, 10), rat(61, 10)] {
            assert!(ct.exact.contains(&stamp));
        }
        assert!(!ct.inexact(), "all accelerations are zero");
        assert_eq!(ct.samples.first(), Some(&int(0)));
        assert_eq!(ct.samples.last(), Some(&rat(61, 10)));
    }

    #[test]
    fn single_end_marker() {
        let s = running_example();
        let s = s.with_word(TimedWord::closed(vec![]).unwrap()).unwrap();
        let ct = critical_times(&s, &Formula::tt()).unwrap();
        assert_eq!(ct.exact, vec![int(0)]);
        assert_eq!(ct.samples, vec![int(0)]);
    }

    #[test]
    fn quadratic_roots() {
        // (t − 1)(t − 3)
        let q = Quadratic::new(int(1), int(-4), int(3));
        assert_eq!(q.roots_in(&int(0), &int(5)), vec![Root::Exact(int(1)), Root::Exact(int(3))]);
        assert_eq!(q.roots_in(&int(1), &int(3)), vec![]);
        // t² − 2
        let q = Quadratic::new(int(1), int(0), int(-2));
        let roots = q.roots_in(&int(0), &int(5));
        assert_eq!(roots.len(), 1);
        let Root::Bracket(l, h) = &roots[0] else { panic!() };
        assert!(l * l < int(2) && h * h > int(2));
        assert!(h - l <= bracket_width());
        assert_eq!(Quadratic::new(int(1), int(0), int(-2)).roots_in(&int(-5), &int(5)).len(), 2);
        assert_eq!(Quadratic::shifted(int(1), int(0), int(0), &int(2)), Quadratic::new(int(1), int(-4), int(4)));
    }

    proptest! {
        #[test]
        fn exact_roots_vanish(r1 in -20i64..20, r2 in -20i64..20, d in 1i64..5, k in 1i64..4) {
            let (x1, x2) = (rat(r1, d), rat(r2, d));
            let q = Quadratic::new(int(k), -(&x1 + &x2) * int(k), &x1 * &x2 * int(k));
            for root in q.roots_in(&int(-30), &int(30)) {
                let Root::Exact(x) = root else { panic!("rational roots expected") };
                prop_assert!(q.at(&x).is_zero());
            }
        }

        #[test]
        fn brackets_change_sign(c in 1i64..50, lo in -10i64..0, hi in 1i64..10) {
            let q = Quadratic::new(int(1), int(0), int(-c));
            for root in q.roots_in(&int(lo), &int(hi)) {
                match root {
                    Root::Exact(x) => prop_assert!(q.at(&x).is_zero()),
                    Root::Bracket(l, h) => prop_assert!(q.at(&l).signum() != q.at(&h).signum()),
                }
            }
        }
    }
}
