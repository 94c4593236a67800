use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::Valuation;
use crate::rational::{format_rational, Rational};

/// Core MLSL syntax. Derived operators (`true`, `∨`, `→`, `∀`, somewhere)
/// are expanded by their constructors, so every formula is built from these
/// ten forms only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    VarEq(String, String),
    Free,
    Re(String),
    Cl(String),
    Len(Rational),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    /// Horizontal chop: left part, right part.
    HChop(Box<Formula>, Box<Formula>),
    /// Vertical chop: lower lanes, upper lanes.
    VChop(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// `¬(free ∧ ¬free)`.
    pub fn tt() -> Formula {
        Formula::not(Formula::and(Formula::Free, Formula::not(Formula::Free)))
    }

    pub fn ff() -> Formula {
        Formula::not(Formula::tt())
    }

    pub fn var_eq(a: &str, b: &str) -> Formula {
        Formula::VarEq(a.into(), b.into())
    }

    pub fn re(v: &str) -> Formula {
        Formula::Re(v.into())
    }

    pub fn cl(v: &str) -> Formula {
        Formula::Cl(v.into())
    }

    pub fn len(q: Rational) -> Formula {
        Formula::Len(q)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::not(Formula::exists(v, Formula::not(body)))
    }

    pub fn hchop(a: Formula, b: Formula) -> Formula {
        Formula::HChop(Box::new(a), Box::new(b))
    }

    pub fn vchop(lower: Formula, upper: Formula) -> Formula {
        Formula::VChop(Box::new(lower), Box::new(upper))
    }

    /// `true ⌢ (true / φ / true) ⌢ true`, chops associated to the left.
    pub fn somewhere(f: Formula) -> Formula {
        let column = Formula::vchop(Formula::tt(), Formula::vchop(f, Formula::tt()));
        Formula::hchop(Formula::hchop(Formula::tt(), column), Formula::tt())
    }

    pub fn is_true(&self) -> bool {
        *self == Formula::tt()
    }

    /// `φ` if this is `somewhere(φ)`.
    pub fn somewhere_body(&self) -> Option<&Formula> {
        let Formula::HChop(left, last) = self else { return None };
        let Formula::HChop(first, column) = left.as_ref() else { return None };
        let Formula::VChop(below, rest) = column.as_ref() else { return None };
        let Formula::VChop(body, above) = rest.as_ref() else { return None };
        [first, last, below, above].iter().all(|x| x.is_true()).then_some(body.as_ref())
    }

    /// Variables occurring free (not bound by `∃`).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut note = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::VarEq(a, b) => {
                note(a, bound);
                note(b, bound);
            }
            Formula::Re(v) | Formula::Cl(v) => note(v, bound),
            Formula::Free | Formula::Len(_) => {}
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::HChop(a, b) | Formula::VChop(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Fails with the first variable that neither a quantifier nor the
    /// valuation binds.
    pub fn ensure_closed(&self, valuation: &Valuation) -> Result<()> {
        match self.free_vars().into_iter().find(|v| !valuation.contains(v)) {
            Some(v) => Err(Error::UnboundVariable(v)),
            None => Ok(()),
        }
    }

    /// Every `len = q` constant, with multiplicity.
    pub fn length_constants(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Len(q) = f {
                out.push(q.clone());
            }
        });
        out
    }

    pub fn has_length_atoms(&self) -> bool {
        !self.length_constants().is_empty()
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Exists(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::HChop(a, b) | Formula::VChop(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Not(a) | Formula::Exists(_, a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::HChop(a, b) | Formula::VChop(a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }
}

/// Fully parenthesised core syntax, accepted back by the parser.
/// Prints derived operators (`true`, `false`, `|`, `->`, `!=`, `forall`,
/// `<< >>`) wherever the core form matches their expansion, so the text
/// parses back to the same formula.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_true() {
            return f.write_str("true");
        }
        if let Formula::Not(inner) = self {
            if inner.is_true() {
                return f.write_str("false");
            }
        }
        if let Some(body) = self.somewhere_body() {
            return write!(f, "<< {body} >>");
        }
        match self {
            Formula::VarEq(a, b) => write!(f, "{a} = {b}"),
            Formula::Free => f.write_str("free"),
            Formula::Re(v) => write!(f, "re({v})"),
            Formula::Cl(v) => write!(f, "cl({v})"),
            Formula::Len(q) => write!(f, "len = {}", format_rational(q)),
            Formula::Not(a) => match a.as_ref() {
                Formula::And(x, y) => match (x.as_ref(), y.as_ref()) {
                    (guard @ Formula::Not(g), Formula::Not(y)) if matches!(g.as_ref(), Formula::VarEq(..)) => {
                        write!(f, "({guard} -> {y})")
                    }
                    (Formula::Not(x), Formula::Not(y)) => write!(f, "({x} | {y})"),
                    (x, Formula::Not(y)) => write!(f, "({x} -> {y})"),
                    _ => write!(f, "!{a}"),
                },
                Formula::Exists(v, body) => match body.as_ref() {
                    Formula::Not(body) => write!(f, "(forall {v} . {body})"),
                    _ => write!(f, "!{a}"),
                },
                Formula::VarEq(x, y) => write!(f, "{x} != {y}"),
                Formula::Len(_) => write!(f, "!({a})"),
                _ => write!(f, "!{a}"),
            },
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Exists(v, body) => write!(f, "(exists {v} . {body})"),
            Formula::HChop(a, b) => write!(f, "({a} ~ {b})"),
            Formula::VChop(a, b) => write!(f, "[{a} // {b}]"),
        }
    }
}
