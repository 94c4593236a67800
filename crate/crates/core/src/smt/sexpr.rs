use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            Sexpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items) => Some(items),
            Sexpr::Atom(_) => None,
        }
    }

    /// The head symbol of a list.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    /// Reads a rational constant built from numerals, decimals, `-`, `+`,
    /// `*` and `/`. `None` for anything else.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Sexpr::Atom(a) => {
                if a.starts_with(|c: char| c.is_ascii_digit()) {
                    parse_rational(a).ok()
                } else {
                    None
                }
            }
            Sexpr::List(items) => {
                let (op, args) = items.split_first()?;
                let vals: Option<Vec<Rational>> = args.iter().map(Sexpr::to_rational).collect();
                let vals = vals?;
                match (op.as_atom()?, vals.as_slice()) {
                    ("-", [x]) => Some(-x),
                    ("-", [x, rest @ ..]) => Some(rest.iter().fold(x.clone(), |acc, y| acc - y)),
                    ("+", _) => Some(vals.iter().fold(Rational::zero(), |acc, y| acc + y)),
                    ("*", _) => Some(vals.iter().fold(Rational::one(), |acc, y| acc * y)),
                    ("/", [x, rest @ ..]) if !rest.is_empty() && rest.iter().all(|y| !y.is_zero()) => {
                        Some(rest.iter().fold(x.clone(), |acc, y| acc / y))
                    }
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::List(items) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses a sequence of S-expressions. Strings keep their quotes; `;`
/// starts a line comment.
pub fn parse_sexprs(text: &str) -> Result<Vec<Sexpr>> {
    let bad = |msg: &str| Error::Solver(format!("malformed solver output: {msg}"));
    let mut stack: Vec<Vec<Sexpr>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().filter(|_| !stack.is_empty()).ok_or_else(|| bad("unbalanced `)`"))?;
                stack.last_mut().expect("nonempty").push(Sexpr::List(done));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                let mut s = String::from('"');
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push_str("\"\"");
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err(bad("unterminated string")),
                    }
                }
                s.push('"');
                stack.last_mut().expect("nonempty").push(Sexpr::Atom(s));
            }
            '|' => {
                let mut s = String::from('|');
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(c) => s.push(c),
                        None => return Err(bad("unterminated quoted symbol")),
                    }
                }
                s.push('|');
                stack.last_mut().expect("nonempty").push(Sexpr::Atom(s));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == '"' || n == ';' {
                        break;
                    }
                    s.push(n);
                    chars.next();
                }
                stack.last_mut().expect("nonempty").push(Sexpr::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err(bad("unbalanced `(`"));
    }
    Ok(stack.pop().expect("one level"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn nested() {
        let xs = parse_sexprs("sat\n((x (- 2.0))\n (y (/ 1.0 3.0)))").unwrap();
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[0], Sexpr::Atom("sat".into()));
        let pairs = xs[1].as_list().unwrap();
        assert_eq!(pairs[0].as_list().unwrap()[1].to_rational(), Some(int(-2)));
        assert_eq!(pairs[1].as_list().unwrap()[1].to_rational(), Some(rat(1, 3)));
        assert_eq!(xs[1].to_string(), "((x (- 2.0)) (y (/ 1.0 3.0)))");
    }

    #[test]
    fn strings_and_comments() {
        let xs = parse_sexprs("(error \"line 4: \"\"x\"\" (oops)\") ; trailing\n|a b|").unwrap();
        assert_eq!(xs[0].head(), Some("error"));
        assert_eq!(xs[1], Sexpr::Atom("|a b|".into()));
    }

    #[test]
    fn unbalanced() {
        assert!(parse_sexprs("((x 1)").is_err());
        assert!(parse_sexprs("(x 1))").is_err());
    }

    #[test]
    fn non_constants() {
        assert_eq!(Sexpr::Atom("x".into()).to_rational(), None);
        assert_eq!(parse_sexprs("(/ 1 0)").unwrap()[0].to_rational(), None);
        assert_eq!(parse_sexprs("(- 0.25)").unwrap()[0].to_rational(), Some(rat(-1, 4)));
    }

    proptest! {
        #[test]
        fn literals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let q = rat(n, d);
            let text = crate::smt::rational_literal(&q);
            let parsed = parse_sexprs(&text).unwrap();
            prop_assert_eq!(parsed[0].to_rational(), Some(q));
        }
    }
}
