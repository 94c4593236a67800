//! First-order real arithmetic: polynomial terms with rational constants,
//! and formulas over `=`, `<`, `≤`.
//!
//! The smart constructors fold constants and flatten nested sums, products,
//! conjunctions and disjunctions. Folding commutes with negation, so
//! `nnf(¬nnf(f)) = nnf(¬f)` holds structurally.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Rational),
    Add(Vec<Term>),
    Mul(Vec<Term>),
    Neg(Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(q: Rational) -> Term {
        Term::Const(q)
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Rational::from_integer(n.into()))
    }

    pub fn zero() -> Term {
        Term::int(0)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Term::Const(q) => Some(q),
            _ => None,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, b: Term) -> Term {
        Term::sum([a, b])
    }

    pub fn sum(terms: impl IntoIterator<Item = Term>) -> Term {
        let mut konst = Rational::zero();
        let mut parts = Vec::new();
        for t in terms {
            match t {
                Term::Const(q) => konst += q,
                Term::Add(inner) => {
                    for u in inner {
                        match u {
                            Term::Const(q) => konst += q,
                            other => parts.push(other),
                        }
                    }
                }
                other => parts.push(other),
            }
        }
        if !konst.is_zero() {
            parts.push(Term::Const(konst));
        }
        match parts.len() {
            0 => Term::zero(),
            1 => parts.pop().unwrap(),
            _ => Term::Add(parts),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Term) -> Term {
        match a {
            Term::Const(q) => Term::Const(-q),
            Term::Neg(inner) => *inner,
            other => Term::Neg(Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Term, b: Term) -> Term {
        Term::product([a, b])
    }

    pub fn product(terms: impl IntoIterator<Item = Term>) -> Term {
        let mut konst = Rational::one();
        let mut parts = Vec::new();
        for t in terms {
            match t {
                Term::Const(q) => konst *= q,
                Term::Mul(inner) => {
                    for u in inner {
                        match u {
                            Term::Const(q) => konst *= q,
                            other => parts.push(other),
                        }
                    }
                }
                other => parts.push(other),
            }
        }
        if konst.is_zero() || parts.is_empty() {
            return Term::Const(konst);
        }
        if !konst.is_one() {
            parts.insert(0, Term::Const(konst));
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Term::Mul(parts)
        }
    }

    pub fn scale(q: Rational, t: Term) -> Term {
        Term::mul(Term::Const(q), t)
    }

    pub fn square(t: Term) -> Term {
        Term::mul(t.clone(), t)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Add(ts) | Term::Mul(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Term::Neg(t) => t.collect_vars(out),
        }
    }

    /// Value under a total assignment of the term's variables.
    pub fn evaluate(&self, env: &dyn Fn(&str) -> Option<Rational>) -> Option<Rational> {
        Some(match self {
            Term::Var(v) => env(v)?,
            Term::Const(q) => q.clone(),
            Term::Add(ts) => {
                let mut acc = Rational::zero();
                for t in ts {
                    acc += t.evaluate(env)?;
                }
                acc
            }
            Term::Mul(ts) => {
                let mut acc = Rational::one();
                for t in ts {
                    acc *= t.evaluate(env)?;
                }
                acc
            }
            Term::Neg(t) => -t.evaluate(env)?,
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(q) if q.is_negative() => write!(f, "({})", format_rational(q)),
            Term::Const(q) => f.write_str(&format_rational(q)),
            Term::Add(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    match (i, t) {
                        (0, t) => write!(f, "{t}")?,
                        (_, Term::Neg(inner)) => write!(f, " - {inner}")?,
                        (_, t) => write!(f, " + {t}")?,
                    }
                }
                f.write_str(")")
            }
            Term::Mul(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            Term::Neg(t) => write!(f, "-{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rcf {
    True,
    False,
    Eq(Term, Term),
    Lt(Term, Term),
    Le(Term, Term),
    Not(Box<Rcf>),
    And(Vec<Rcf>),
    Or(Vec<Rcf>),
    Implies(Box<Rcf>, Box<Rcf>),
    Exists(Vec<String>, Box<Rcf>),
    Forall(Vec<String>, Box<Rcf>),
}

impl Rcf {
    pub fn bool(b: bool) -> Rcf {
        if b {
            Rcf::True
        } else {
            Rcf::False
        }
    }

    pub fn eq(a: Term, b: Term) -> Rcf {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Rcf::bool(x == y),
            _ => Rcf::Eq(a, b),
        }
    }

    pub fn lt(a: Term, b: Term) -> Rcf {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Rcf::bool(x < y),
            _ => Rcf::Lt(a, b),
        }
    }

    pub fn le(a: Term, b: Term) -> Rcf {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Rcf::bool(x <= y),
            _ => Rcf::Le(a, b),
        }
    }

    /// `lo ≤ v ≤ hi`.
    pub fn between(lo: Term, v: Term, hi: Term) -> Rcf {
        Rcf::and([Rcf::le(lo, v.clone()), Rcf::le(v, hi)])
    }

    /// `v ∈ centre ± radius`.
    pub fn within(v: Term, centre: Term, radius: &Rational) -> Rcf {
        Rcf::between(
            Term::sub(centre.clone(), Term::Const(radius.clone())),
            v,
            Term::add(centre, Term::Const(radius.clone())),
        )
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Rcf) -> Rcf {
        match f {
            Rcf::True => Rcf::False,
            Rcf::False => Rcf::True,
            Rcf::Not(inner) => *inner,
            other => Rcf::Not(Box::new(other)),
        }
    }

    pub fn and(parts: impl IntoIterator<Item = Rcf>) -> Rcf {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Rcf::True => {}
                Rcf::False => return Rcf::False,
                Rcf::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Rcf::True,
            1 => out.pop().unwrap(),
            _ => Rcf::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Rcf>) -> Rcf {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Rcf::False => {}
                Rcf::True => return Rcf::True,
                Rcf::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Rcf::False,
            1 => out.pop().unwrap(),
            _ => Rcf::Or(out),
        }
    }

    pub fn implies(a: Rcf, b: Rcf) -> Rcf {
        match (&a, &b) {
            (Rcf::True, _) => b,
            (Rcf::False, _) | (_, Rcf::True) => Rcf::True,
            _ => Rcf::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn exists(vars: Vec<String>, body: Rcf) -> Rcf {
        match body {
            Rcf::True | Rcf::False => body,
            _ if vars.is_empty() => body,
            _ => Rcf::Exists(vars, Box::new(body)),
        }
    }

    pub fn forall(vars: Vec<String>, body: Rcf) -> Rcf {
        match body {
            Rcf::True | Rcf::False => body,
            _ if vars.is_empty() => body,
            _ => Rcf::Forall(vars, Box::new(body)),
        }
    }

    /// Negation normal form: negation only in front of equalities, no
    /// implications. Negated orderings are flipped (`¬(a < b)` is `b ≤ a`).
    pub fn nnf(&self) -> Rcf {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Rcf {
        match (self, positive) {
            (Rcf::True, _) | (Rcf::False, _) => {
                let value = matches!(self, Rcf::True) == positive;
                Rcf::bool(value)
            }
            (Rcf::Eq(..), true) | (Rcf::Lt(..), true) | (Rcf::Le(..), true) => self.clone(),
            (Rcf::Eq(..), false) => Rcf::Not(Box::new(self.clone())),
            (Rcf::Lt(a, b), false) => Rcf::le(b.clone(), a.clone()),
            (Rcf::Le(a, b), false) => Rcf::lt(b.clone(), a.clone()),
            (Rcf::Not(f), _) => f.nnf_signed(!positive),
            (Rcf::And(fs), true) | (Rcf::Or(fs), false) => Rcf::and(fs.iter().map(|f| f.nnf_signed(positive))),
            (Rcf::Or(fs), true) | (Rcf::And(fs), false) => Rcf::or(fs.iter().map(|f| f.nnf_signed(positive))),
            (Rcf::Implies(a, b), true) => Rcf::or([a.nnf_signed(false), b.nnf_signed(true)]),
            (Rcf::Implies(a, b), false) => Rcf::and([a.nnf_signed(true), b.nnf_signed(false)]),
            (Rcf::Exists(vs, f), true) | (Rcf::Forall(vs, f), false) => Rcf::exists(vs.clone(), f.nnf_signed(positive)),
            (Rcf::Forall(vs, f), true) | (Rcf::Exists(vs, f), false) => Rcf::forall(vs.clone(), f.nnf_signed(positive)),
        }
    }

    pub fn has_forall(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Rcf::Forall(..)));
        found
    }

    pub fn has_quantifiers(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Rcf::Forall(..) | Rcf::Exists(..)));
        found
    }

    pub fn visit(&self, f: &mut impl FnMut(&Rcf)) {
        f(self);
        match self {
            Rcf::Not(g) | Rcf::Exists(_, g) | Rcf::Forall(_, g) => g.visit(f),
            Rcf::And(gs) | Rcf::Or(gs) => gs.iter().for_each(|g| g.visit(f)),
            Rcf::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Variables not bound by a quantifier.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut terms = |a: &Term, b: &Term, bound: &Vec<String>| {
            let mut vs = BTreeSet::new();
            a.collect_vars(&mut vs);
            b.collect_vars(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Rcf::True | Rcf::False => {}
            Rcf::Eq(a, b) | Rcf::Lt(a, b) | Rcf::Le(a, b) => terms(a, b, bound),
            Rcf::Not(f) => f.collect_free(bound, out),
            Rcf::And(fs) | Rcf::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Rcf::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Rcf::Exists(vs, f) | Rcf::Forall(vs, f) => {
                let before = bound.len();
                bound.extend(vs.iter().cloned());
                f.collect_free(bound, out);
                bound.truncate(before);
            }
        }
    }

    /// Removes every existential binder, returning the variables it bound.
    /// Sound for satisfiability when no binder sits below a universal one
    /// and bound names are unique.
    pub fn hoist_existentials(self) -> (Rcf, Vec<String>) {
        let mut hoisted = Vec::new();
        let f = self.hoist_into(&mut hoisted);
        (f, hoisted)
    }

    fn hoist_into(self, out: &mut Vec<String>) -> Rcf {
        match self {
            Rcf::Exists(vs, f) => {
                out.extend(vs);
                f.hoist_into(out)
            }
            Rcf::Not(f) => Rcf::not(f.hoist_into(out)),
            Rcf::And(fs) => Rcf::and(fs.into_iter().map(|f| f.hoist_into(out)).collect::<Vec<_>>()),
            Rcf::Or(fs) => Rcf::or(fs.into_iter().map(|f| f.hoist_into(out)).collect::<Vec<_>>()),
            Rcf::Implies(a, b) => Rcf::implies(a.hoist_into(out), b.hoist_into(out)),
            other => other,
        }
    }

    /// Truth under an assignment of every free variable; `None` if a
    /// variable is missing or the formula is quantified.
    pub fn evaluate(&self, env: &dyn Fn(&str) -> Option<Rational>) -> Option<bool> {
        Some(match self {
            Rcf::True => true,
            Rcf::False => false,
            Rcf::Eq(a, b) => a.evaluate(env)? == b.evaluate(env)?,
            Rcf::Lt(a, b) => a.evaluate(env)? < b.evaluate(env)?,
            Rcf::Le(a, b) => a.evaluate(env)? <= b.evaluate(env)?,
            Rcf::Not(f) => !f.evaluate(env)?,
            Rcf::And(fs) => {
                for f in fs {
                    if !f.evaluate(env)? {
                        return Some(false);
                    }
                }
                true
            }
            Rcf::Or(fs) => {
                for f in fs {
                    if f.evaluate(env)? {
                        return Some(true);
                    }
                }
                false
            }
            Rcf::Implies(a, b) => !a.evaluate(env)? || b.evaluate(env)?,
            Rcf::Exists(..) | Rcf::Forall(..) => return None,
        })
    }

    /// Number of nodes, terms excluded.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// Human-readable infix rendering.
impl fmt::Display for Rcf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Rcf], op: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{g}")?;
            }
            f.write_str(")")
        };
        match self {
            Rcf::True => f.write_str("true"),
            Rcf::False => f.write_str("false"),
            Rcf::Eq(a, b) => write!(f, "{a} = {b}"),
            Rcf::Lt(a, b) => write!(f, "{a} < {b}"),
            Rcf::Le(a, b) => write!(f, "{a} <= {b}"),
            Rcf::Not(g) => write!(f, "!({g})"),
            Rcf::And(gs) => join(f, gs, "&"),
            Rcf::Or(gs) => join(f, gs, "|"),
            Rcf::Implies(a, b) => write!(f, "({a} -> {b})"),
            Rcf::Exists(vs, g) => write!(f, "(exists {} . {g})", vs.join(", ")),
            Rcf::Forall(vs, g) => write!(f, "(forall {} . {g})", vs.join(", ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn x() -> Term {
        Term::var("x")
    }

    #[test]
    fn folding() {
        assert_eq!(Term::add(Term::int(2), Term::int(3)), Term::int(5));
        assert_eq!(Term::mul(Term::int(0), x()), Term::int(0));
        assert_eq!(Term::mul(Term::int(1), x()), x());
        assert_eq!(Term::sub(x(), Term::int(0)), x());
        assert_eq!(Rcf::eq(Term::int(-1), Term::int(2)), Rcf::False);
        assert_eq!(Rcf::and([Rcf::True, Rcf::lt(x(), Term::int(1))]), Rcf::lt(x(), Term::int(1)));
        assert_eq!(Rcf::or([Rcf::False, Rcf::True, Rcf::lt(x(), Term::int(1))]), Rcf::True);
    }

    #[test]
    fn display() {
        let t = Term::sub(Term::var("xr"), Term::var("xl"));
        assert_eq!(Rcf::eq(t, Term::int(90)).to_string(), "(xr - xl) = 90");
        assert_eq!(Term::scale(rat(1, 2), x()).to_string(), "1/2*x");
    }

    #[test]
    fn nnf_flips_orderings() {
        let f = Rcf::not(Rcf::and([Rcf::lt(x(), Term::int(1)), Rcf::eq(x(), Term::int(0))]));
        let g = Rcf::or([Rcf::le(Term::int(1), x()), Rcf::Not(Box::new(Rcf::eq(x(), Term::int(0))))]);
        assert_eq!(f.nnf(), g);
        assert_eq!(Rcf::not(f.nnf()).nnf(), Rcf::not(f.clone()).nnf());
    }

    #[test]
    fn evaluation() {
        let env = |v: &str| (v == "x").then(|| rat(1, 2));
        let t = Term::add(Term::square(x()), Term::int(1));
        assert_eq!(t.evaluate(&env), Some(rat(5, 4)));
        assert_eq!(Rcf::lt(t, Term::int(2)).evaluate(&env), Some(true));
        assert_eq!(Rcf::eq(Term::var("y"), x()).evaluate(&env), None);
        assert_eq!(int(0), Rational::zero());
    }

    #[test]
    fn hoisting() {
        let body = Rcf::and([Rcf::lt(Term::var("s"), x()), Rcf::exists(vec!["u".into()], Rcf::lt(Term::var("u"), x()))]);
        let f = Rcf::exists(vec!["s".into()], body);
        assert_eq!(f.free_vars(), BTreeSet::from(["x".to_string()]));
        let (g, vs) = f.hoist_existentials();
        assert_eq!(vs, vec!["s".to_string(), "u".to_string()]);
        assert!(!g.has_quantifiers());
        assert_eq!(g.free_vars().len(), 3);
    }
}
