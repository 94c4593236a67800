//! Real algebraic numbers reported by solvers, isolated with Sturm
//! sequences so a nearby rational can be pinned and re-checked.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, half, Rational};
use crate::smt::sexpr::Sexpr;

/// Dense univariate polynomial, coefficients from degree 0 upward, no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Poly {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    fn constant(q: Rational) -> Poly {
        Poly::new(vec![q])
    }

    fn x() -> Poly {
        Poly::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `0` for constants and the zero polynomial.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn at(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let get = |p: &Poly, i: usize| p.0.get(i).cloned().unwrap_or_else(Rational::zero);
        Poly::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly(vec![]);
        }
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(BigInt::from(i))).collect())
    }

    fn rem(&self, d: &Poly) -> Poly {
        let mut r = self.0.clone();
        let dl = d.lead();
        while r.len() >= d.0.len() && !r.is_empty() {
            let shift = r.len() - d.0.len();
            let factor = r.last().expect("nonempty") / &dl;
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &factor * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    fn sturm(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().expect("nonempty").is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            seq.push(r);
        }
        seq.pop();
        seq
    }

    /// Reads a polynomial in the variable `var`.
    pub fn from_sexpr(e: &Sexpr, var: &str) -> Option<Poly> {
        if let Some(q) = e.to_rational() {
            return Some(Poly::constant(q));
        }
        match e {
            Sexpr::Atom(a) if a == var => Some(Poly::x()),
            Sexpr::Atom(_) => None,
            Sexpr::List(items) => {
                let (op, args) = items.split_first()?;
                let ps: Option<Vec<Poly>> = args.iter().map(|a| Poly::from_sexpr(a, var)).collect();
                let ps = ps?;
                match (op.as_atom()?, ps.as_slice()) {
                    ("+", _) => Some(ps.iter().fold(Poly(vec![]), |acc, p| acc.add(p))),
                    ("-", [p]) => Some(p.neg()),
                    ("-", [p, rest @ ..]) => Some(rest.iter().fold(p.clone(), |acc, q| acc.add(&q.neg()))),
                    ("*", _) => Some(ps.iter().fold(Poly::constant(Rational::one()), |acc, p| acc.mul(p))),
                    ("^", [p, k]) if k.degree() == 0 => {
                        let k = k.0.first().cloned().unwrap_or_else(Rational::zero);
                        if !k.is_integer() || k.is_negative() || k > Rational::from_integer(64.into()) {
                            return None;
                        }
                        let k: usize = k.to_integer().try_into().ok()?;
                        Some((0..k).fold(Poly::constant(Rational::one()), |acc, _| acc.mul(p)))
                    }
                    ("/", [p, d]) if d.degree() == 0 && !d.is_zero() => {
                        let inv = Rational::one() / &d.0[0];
                        Some(Poly::new(p.0.iter().map(|c| c * &inv).collect()))
                    }
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format_rational(c),
                1 => format!("{}*x", format_rational(c)),
                _ => format!("{}*x^{i}", format_rational(c)),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

fn sign_changes(seq: &[Poly], x: &Rational) -> usize {
    let signs: Vec<bool> = seq.iter().map(|p| p.at(x)).filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The `index`-th real root (1-based, ascending) of a polynomial, known to
/// lie in the half-open interval `(lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebraic {
    pub poly: Poly,
    pub index: usize,
    pub lo: Rational,
    pub hi: Rational,
    sturm: Vec<Poly>,
    /// Sign changes at the initial lower bound, below every root.
    floor_changes: usize,
}

impl Algebraic {
    /// Isolates the root; `None` if the polynomial has fewer roots.
    pub fn new(poly: Poly, index: usize) -> Option<Algebraic> {
        if poly.degree() == 0 || index == 0 {
            return None;
        }
        let lead = poly.lead().abs();
        let bound = Rational::one() + poly.0.iter().map(|c| c.abs() / &lead).fold(Rational::zero(), |a, b| a.max(b));
        let sturm = poly.sturm();
        let (lo, hi) = (-bound.clone(), bound);
        let floor_changes = sign_changes(&sturm, &lo);
        if floor_changes - sign_changes(&sturm, &hi) < index {
            return None;
        }
        Some(Algebraic { poly, index, lo, hi, sturm, floor_changes })
    }

    /// Parses `(root-obj p k)` in the variable `x`.
    pub fn from_root_obj(e: &Sexpr) -> Option<Algebraic> {
        let items = e.as_list()?;
        if e.head()? != "root-obj" || items.len() != 3 {
            return None;
        }
        let poly = Poly::from_sexpr(&items[1], "x")?;
        let index: usize = items[2].as_atom()?.parse().ok()?;
        Algebraic::new(poly, index)
    }

    /// Number of roots `≤ x`.
    fn roots_up_to(&self, x: &Rational) -> usize {
        self.floor_changes - sign_changes(&self.sturm, x)
    }

    /// Shrinks the isolating interval below `width`. Returns the exact
    /// value if bisection hits it.
    pub fn refine(&mut self, width: &Rational) -> Option<Rational> {
        let count = |x: &Rational, s: &Self| s.roots_up_to(x);
        if self.poly.at(&self.hi).is_zero() && count(&self.hi, self) == self.index {
            let below = &self.hi - width;
            if count(&below, self) < self.index {
                self.lo = self.hi.clone();
                return Some(self.hi.clone());
            }
        }
        while &(&self.hi - &self.lo) >= width {
            let mid = (&self.lo + &self.hi) * half();
            if self.poly.at(&mid).is_zero() && count(&mid, self) == self.index {
                self.lo = mid.clone();
                self.hi = mid.clone();
                return Some(mid);
            }
            if count(&mid, self) >= self.index {
                self.hi = mid;
            } else {
                self.lo = mid;
            }
        }
        None
    }

    /// A rational approximation at most `width` away.
    pub fn approximate(&mut self, width: &Rational) -> Rational {
        match self.refine(width) {
            Some(q) => q,
            None => simplest_between(&self.lo, &self.hi),
        }
    }

    /// Sign of `value − self`.
    pub fn compare(&mut self, value: &Rational) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        if self.poly.at(value).is_zero() && self.roots_up_to(value) == self.index {
            return Equal;
        }
        loop {
            if value <= &self.lo {
                return Less;
            }
            if value > &self.hi {
                return Greater;
            }
            let w = (&self.hi - &self.lo) * half();
            if let Some(q) = self.refine(&w) {
                return value.cmp(&q);
            }
        }
    }
}

impl fmt::Display for Algebraic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "root #{} of {} in ({}, {}]",
            self.index,
            self.poly,
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

/// The rational with the smallest denominator in the open interval
/// `(lo, hi)`, or `lo` when the interval is empty.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    if lo >= hi {
        return lo.clone();
    }
    if lo.is_negative() && hi.is_positive() {
        return Rational::zero();
    }
    if !lo.is_negative() {
        simplest_positive(lo, hi)
    } else {
        -simplest_positive(&-hi.clone(), &-lo.clone())
    }
}

/// Smallest-denominator rational strictly between `0 ≤ lo < hi`.
fn simplest_positive(lo: &Rational, hi: &Rational) -> Rational {
    let fl = lo.floor();
    if &(&fl + Rational::one()) < hi {
        return fl + Rational::one();
    }
    // Both ends share the integer part; recurse on the reciprocals of the
    // fractional parts.
    let (a, b) = (lo - &fl, hi - &fl);
    if a.is_zero() {
        let n = (Rational::one() / &b).floor() + Rational::one();
        return fl + Rational::one() / n;
    }
    fl + Rational::one() / simplest_positive(&(Rational::one() / &b), &(Rational::one() / &a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::smt::sexpr::parse_sexprs;
    use proptest::prelude::*;

    fn root(text: &str) -> Algebraic {
        Algebraic::from_root_obj(&parse_sexprs(text).unwrap()[0]).unwrap()
    }

    #[test]
    fn sqrt_two() {
        let mut a = root("(root-obj (+ (^ x 2) (- 2)) 2)");
        let q = a.approximate(&rat(1, 1 << 20));
        assert!((&q * &q - int(2)).abs() < rat(1, 100_000));
        assert!(q > int(1));
        let mut b = root("(root-obj (+ (^ x 2) (- 2)) 1)");
        assert!(b.approximate(&rat(1, 1024)) < int(-1));
        assert_eq!(b.compare(&int(-1)), std::cmp::Ordering::Greater);
        assert_eq!(b.compare(&int(-2)), std::cmp::Ordering::Less);
    }

    #[test]
    fn cubic_with_leading_coefficient() {
        let mut a = root("(root-obj (+ (* 3 (^ x 3)) (- 7)) 1)");
        let q = a.approximate(&rat(1, 1 << 30));
        let cube = &q * &q * &q * int(3);
        assert!((cube - int(7)).abs() < rat(1, 1_000_000));
    }

    #[test]
    fn rational_roots_found_exactly() {
        let mut a = root("(root-obj (+ (^ x 2) (* (- 3) x) 2) 2)");
        assert_eq!(a.approximate(&rat(1, 1 << 20)), int(2));
        assert_eq!(a.compare(&int(2)), std::cmp::Ordering::Equal);
        assert!(Algebraic::from_root_obj(&parse_sexprs("(root-obj (+ (^ x 2) 1) 1)").unwrap()[0]).is_none());
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_between(&rat(1, 1), &rat(11, 10)), rat(12, 11));
        assert_eq!(simplest_between(&rat(1, 3), &rat(1, 2)), rat(2, 5));
        assert_eq!(simplest_between(&rat(-1, 2), &rat(1, 3)), int(0));
        assert_eq!(simplest_between(&rat(-7, 2), &rat(-3, 1)), rat(-10, 3));
        assert_eq!(simplest_between(&rat(0, 1), &rat(1, 3)), rat(1, 4));
        assert_eq!(simplest_between(&rat(2, 1), &rat(5, 1)), int(3));
    }

    proptest! {
        #[test]
        fn simplest_is_inside(a in -1000i64..1000, b in 1i64..1000, c in 1i64..1000, d in 1i64..1000) {
            let lo = rat(a, b);
            let hi = &lo + rat(c, d);
            let q = simplest_between(&lo, &hi);
            prop_assert!(lo < q && q < hi);
            // No rational with a smaller denominator lies strictly inside.
            let den: i64 = q.denom().try_into().unwrap();
            for k in 1..den {
                let step = rat(1, k);
                let first = (&lo / &step).floor() + Rational::one();
                prop_assert!(first * &step >= hi);
            }
        }

        #[test]
        fn isolation_brackets_squares(n in 2i64..500) {
            let mut a = Algebraic::new(Poly::new(vec![int(-n), int(0), int(1)]), 2).unwrap();
            let q = a.approximate(&rat(1, 1 << 24));
            prop_assert!(a.lo <= q && q <= a.hi);
            prop_assert!(&a.lo * &a.lo <= int(n) && int(n) <= &a.hi * &a.hi);
        }
    }
}
