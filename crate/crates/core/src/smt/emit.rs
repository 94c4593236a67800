use std::fmt::Write as _;

use num_traits::{One, Signed};

use crate::rational::Rational;
use crate::rcf::{Query, Rcf, Term};

/// Exact literal: `3`, `(- 3)`, `(/ 1 10)`, `(- (/ 1 10))`.
pub fn rational_literal(q: &Rational) -> String {
    let abs = q.abs();
    let body = if abs.denom().is_one() {
        abs.numer().to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn write_list<T>(out: &mut String, op: &str, items: &[T], mut item: impl FnMut(&mut String, &T)) {
    write!(out, "({op}").unwrap();
    for x in items {
        out.push(' ');
        item(out, x);
    }
    out.push(')');
}

/// `a + (−b) + (−c)` as the operands of `(- a b c)`.
fn differences(ts: &[Term]) -> Option<Vec<&Term>> {
    let (first, rest) = ts.split_first()?;
    if matches!(first, Term::Neg(_)) || rest.is_empty() {
        return None;
    }
    let mut parts = vec![first];
    for t in rest {
        match t {
            Term::Neg(inner) => parts.push(inner),
            _ => return None,
        }
    }
    Some(parts)
}

pub fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Const(q) => out.push_str(&rational_literal(q)),
        Term::Add(ts) => match differences(ts) {
            Some(parts) => write_list(out, "-", &parts, |out, t| write_term(out, t)),
            None => write_list(out, "+", ts, write_term),
        },
        Term::Mul(ts) => write_list(out, "*", ts, write_term),
        Term::Neg(a) => {
            out.push_str("(- ");
            write_term(out, a);
            out.push(')');
        }
    }
}

fn write_binders(out: &mut String, q: &str, vars: &[String], body: &Rcf) {
    write!(out, "({q} (").unwrap();
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "({v} Real)").unwrap();
    }
    out.push_str(") ");
    write_rcf(out, body);
    out.push(')');
}

pub fn write_rcf(out: &mut String, f: &Rcf) {
    let binary = |out: &mut String, op: &str, a: &Term, b: &Term| {
        write!(out, "({op} ").unwrap();
        write_term(out, a);
        out.push(' ');
        write_term(out, b);
        out.push(')');
    };
    match f {
        Rcf::True => out.push_str("true"),
        Rcf::False => out.push_str("false"),
        Rcf::Eq(a, b) => binary(out, "=", a, b),
        Rcf::Lt(a, b) => binary(out, "<", a, b),
        Rcf::Le(a, b) => binary(out, "<=", a, b),
        Rcf::Not(g) => write_list(out, "not", std::slice::from_ref(g.as_ref()), write_rcf),
        Rcf::And(fs) => write_list(out, "and", fs, write_rcf),
        Rcf::Or(fs) => write_list(out, "or", fs, write_rcf),
        Rcf::Implies(a, b) => {
            out.push_str("(=> ");
            write_rcf(out, a);
            out.push(' ');
            write_rcf(out, b);
            out.push(')');
        }
        Rcf::Exists(vs, g) => write_binders(out, "exists", vs, g),
        Rcf::Forall(vs, g) => write_binders(out, "forall", vs, g),
    }
}

pub fn term_to_smtlib(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

pub fn rcf_to_smtlib(f: &Rcf) -> String {
    let mut s = String::new();
    write_rcf(&mut s, f);
    s
}

/// The complete script for `query`. A pure function of its input.
pub fn emit_smtlib(query: &Query) -> String {
    let mut out = String::new();
    writeln!(out, "(set-logic {})", query.logic).unwrap();
    out.push_str("(set-option :produce-models true)\n");
    for v in &query.declared {
        writeln!(out, "(declare-const {v} Real)").unwrap();
    }
    for a in &query.assertions {
        out.push_str("(assert ");
        write_rcf(&mut out, a);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n");
    if !query.report.is_empty() {
        writeln!(out, "(get-value ({}))", query.report.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn literals_are_exact() {
        assert_eq!(rational_literal(&rat(1, 10)), "(/ 1 10)");
        assert_eq!(rational_literal(&rat(-1, 10)), "(- (/ 1 10))");
        assert_eq!(rational_literal(&int(90)), "90");
        assert_eq!(rational_literal(&int(-1)), "(- 1)");
    }

    #[test]
    fn formulas() {
        let len = Rcf::eq(Term::sub(Term::var("xr"), Term::var("xl")), Term::int(90));
        assert_eq!(rcf_to_smtlib(&len), "(= (- xr xl) 90)");
        let q = Rcf::exists(
            vec!["s_1".into()],
            Rcf::and([Rcf::le(Term::var("a"), Term::var("s_1")), Rcf::not(Rcf::eq(Term::var("s_1"), Term::zero()))]),
        );
        assert_eq!(rcf_to_smtlib(&q), "(exists ((s_1 Real)) (and (<= a s_1) (not (= s_1 0))))");
        let f = Rcf::implies(Rcf::lt(Term::var("a"), Term::var("b")), Rcf::le(Term::var("a"), Term::constant(rat(1, 2))));
        assert_eq!(rcf_to_smtlib(&f), "(=> (< a b) (<= a (/ 1 2)))");
    }

    #[test]
    fn script_shape() {
        let mut q = Query { logic: "QF_NRA", declared: vec![], assertions: vec![], report: vec!["x".into()] };
        q.assert(Rcf::eq(Term::var("x"), Term::var("x")));
        let s = emit_smtlib(&q);
        assert_eq!(
            s,
            "(set-logic QF_NRA)\n(set-option :produce-models true)\n(declare-const x Real)\n(assert (= x x))\n(check-sat)\n(get-value (x))\n"
        );
        assert_eq!(s, emit_smtlib(&q.clone()));
    }
}
