//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! φ ::= free | re(x) | cl(x) | len = q | x = y | x != y | true | false
//!     | !φ | φ ~ φ | φ & φ | φ | φ | φ -> φ
//!     | exists x, y . φ | forall x . φ
//!     | [ lower // upper ] | << φ >> | ( φ )
//! ```
//!
//! Binding strength: `!` > `~` > `&` > `|` > `->`. Chops and conjunctions
//! associate to the left, implication to the right, and quantifier bodies
//! extend as far right as possible. `#` starts a comment running to the end
//! of the line.

use crate::error::{Error, Result};
use crate::mlsl::ast::Formula;
use crate::rational::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Slashes,
    LAngle,
    RAngle,
    Bang,
    NotEq,
    Amp,
    Pipe,
    Arrow,
    Tilde,
    Eq,
    Dot,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(_) => "number".into(),
            Tok::Eof => "end of input".into(),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Slashes => "//",
                    Tok::LAngle => "<<",
                    Tok::RAngle => ">>",
                    Tok::Bang => "!",
                    Tok::NotEq => "!=",
                    Tok::Amp => "&",
                    Tok::Pipe => "|",
                    Tok::Arrow => "->",
                    Tok::Tilde => "~",
                    Tok::Eq => "=",
                    Tok::Dot => ".",
                    Tok::Comma => ",",
                    _ => unreachable!(),
                };
                format!("`{s}`")
            }
        }
    }
}

const KEYWORDS: &[&str] = &["free", "re", "cl", "len", "exists", "forall", "true", "false"];

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax { line, column, message: message.into() }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.column);
            let Some(&(start, c)) = self.chars.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let two = |lx: &mut Self, t: Tok| {
                lx.bump();
                lx.bump();
                t
            };
            let tok = match c {
                '(' => { self.bump(); Tok::LParen }
                ')' => { self.bump(); Tok::RParen }
                '[' => { self.bump(); Tok::LBracket }
                ']' => { self.bump(); Tok::RBracket }
                '&' => { self.bump(); Tok::Amp }
                '|' => { self.bump(); Tok::Pipe }
                '~' => { self.bump(); Tok::Tilde }
                '=' => { self.bump(); Tok::Eq }
                '.' => { self.bump(); Tok::Dot }
                ',' => { self.bump(); Tok::Comma }
                '!' if self.peek2() == Some('=') => two(&mut self, Tok::NotEq),
                '!' => { self.bump(); Tok::Bang }
                '/' if self.peek2() == Some('/') => two(&mut self, Tok::Slashes),
                '<' if self.peek2() == Some('<') => two(&mut self, Tok::LAngle),
                '>' if self.peek2() == Some('>') => two(&mut self, Tok::RAngle),
                '-' if self.peek2() == Some('>') => two(&mut self, Tok::Arrow),
                c if c.is_ascii_digit() || c == '-' => {
                    self.bump();
                    let mut end = start + c.len_utf8();
                    let mut seen_slash = false;
                    while let Some(&(i, d)) = self.chars.peek() {
                        let slash_ok = d == '/' && !seen_slash && self.peek2().is_some_and(|n| n.is_ascii_digit() || n == '-');
                        if d.is_ascii_digit() || d == '.' || slash_ok {
                            seen_slash |= d == '/';
                            self.bump();
                            end = i + d.len_utf8();
                        } else {
                            break;
                        }
                    }
                    let text = &self.src[start..end];
                    let q = parse_rational(text)
                        .map_err(|_| self.error(line, col, format!("bad number {text:?}")))?;
                    Tok::Number(q)
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut end = start;
                    while let Some(&(i, d)) = self.chars.peek() {
                        if d.is_alphanumeric() || d == '_' || d == '\'' {
                            self.bump();
                            end = i + d.len_utf8();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(self.src[start..end].to_string())
                }
                other => return Err(self.error(line, col, format!("unexpected character {other:?}"))),
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (_, line, column) = self.toks[self.pos];
        Error::Syntax { line, column, message: message.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn variable(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected a variable, found {}", other.describe()))),
        }
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.next();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.chop()?;
        while *self.peek() == Tok::Amp {
            self.next();
            lhs = Formula::and(lhs, self.chop()?);
        }
        Ok(lhs)
    }

    fn chop(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Tilde {
            self.next();
            lhs = Formula::hchop(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Bang {
            self.next();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_keyword("exists") || self.is_keyword("forall") {
            let universal = self.is_keyword("forall");
            self.next();
            let mut vars = vec![self.variable()?];
            while *self.peek() == Tok::Comma {
                self.next();
                vars.push(self.variable()?);
            }
            self.expect(Tok::Dot)?;
            let body = self.implication()?;
            return Ok(vars.iter().rev().fold(body, |acc, v| {
                if universal {
                    Formula::forall(v, acc)
                } else {
                    Formula::exists(v, acc)
                }
            }));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let f = self.implication()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::LBracket => {
                self.next();
                let lower = self.implication()?;
                self.expect(Tok::Slashes)?;
                let upper = self.implication()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::vchop(lower, upper))
            }
            Tok::LAngle => {
                self.next();
                let f = self.implication()?;
                self.expect(Tok::RAngle)?;
                Ok(Formula::somewhere(f))
            }
            Tok::Ident(word) => match word.as_str() {
                "free" => {
                    self.next();
                    Ok(Formula::Free)
                }
                "true" => {
                    self.next();
                    Ok(Formula::tt())
                }
                "false" => {
                    self.next();
                    Ok(Formula::ff())
                }
                "re" | "cl" => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    let v = self.variable()?;
                    self.expect(Tok::RParen)?;
                    Ok(if word == "re" { Formula::Re(v) } else { Formula::Cl(v) })
                }
                "len" => {
                    self.next();
                    self.expect(Tok::Eq)?;
                    match self.next() {
                        Tok::Number(q) => Ok(Formula::Len(q)),
                        other => Err(self.error(format!("expected a length, found {}", other.describe()))),
                    }
                }
                _ => {
                    let a = self.variable()?;
                    let negated = match self.peek() {
                        Tok::Eq => false,
                        Tok::NotEq => true,
                        other => {
                            return Err(self.error(format!("expected `=` or `!=` after `{a}`, found {}", other.describe())))
                        }
                    };
                    self.next();
                    let b = self.variable()?;
                    let eq = Formula::VarEq(a, b);
                    Ok(if negated { Formula::not(eq) } else { eq })
                }
            },
            other => Err(self.error(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses a formula, expanding derived operators into the core syntax.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let lexer = Lexer { chars: text.char_indices().peekable(), src: text, line: 1, column: 1 };
    let mut parser = Parser { toks: lexer.tokens()?, pos: 0 };
    let f = parser.implication()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error(format!("unexpected {}", parser.peek().describe())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn display_recovers_sugar() {
        for text in [
            "(forall c . (forall d . (c != d -> !<< (re(c) & re(d)) >>)))",
            "((free | !cl(x)) & true)",
            "[false // !(len = 3)]",
            "(exists x . (re(x) ~ x = ego))",
        ] {
            assert_eq!(parse_formula(text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn somewhere_expands_to_chops() {
        let f = parse_formula("<< free ~ re(e) ~ free >>").unwrap();
        let body = Formula::hchop(Formula::hchop(Formula::Free, Formula::re("e")), Formula::Free);
        assert_eq!(f, Formula::somewhere(body));
    }

    #[test]
    fn atoms() {
        assert_eq!(parse_formula("free").unwrap(), Formula::Free);
        assert_eq!(parse_formula("len = 3/2").unwrap(), Formula::Len(rat(3, 2)));
        assert_eq!(parse_formula("len = 90").unwrap(), Formula::Len(int(90)));
        assert_eq!(parse_formula("c = d'").unwrap(), Formula::var_eq("c", "d'"));
        assert_eq!(parse_formula("c != d").unwrap(), Formula::not(Formula::var_eq("c", "d")));
    }

    #[test]
    fn universal_sugar() {
        let f = parse_formula("forall c . forall d . c = d").unwrap();
        let inner = Formula::not(Formula::exists("d", Formula::not(Formula::var_eq("c", "d"))));
        let expected = Formula::not(Formula::exists("c", Formula::not(inner)));
        assert_eq!(f, expected);
        assert_eq!(parse_formula("forall c, d . c = d").unwrap(), expected);
    }

    #[test]
    fn precedence() {
        let f = parse_formula("free & re(a) ~ cl(b) | !free").unwrap();
        let expected = Formula::or(
            Formula::and(Formula::Free, Formula::hchop(Formula::re("a"), Formula::cl("b"))),
            Formula::not(Formula::Free),
        );
        assert_eq!(f, expected);
        let g = parse_formula("free -> free -> re(a)").unwrap();
        assert_eq!(g, Formula::implies(Formula::Free, Formula::implies(Formula::Free, Formula::re("a"))));
    }

    #[test]
    fn quantifier_extends_right() {
        let f = parse_formula("free & exists x . re(x) | cl(x)").unwrap();
        let expected = Formula::and(
            Formula::Free,
            Formula::exists("x", Formula::or(Formula::re("x"), Formula::cl("x"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn vertical_chop_bottom_first() {
        let f = parse_formula("[ re(a) // cl(b) ]").unwrap();
        assert_eq!(f, Formula::vchop(Formula::re("a"), Formula::cl("b")));
    }

    #[test]
    fn comments_and_newlines() {
        let f = parse_formula("# potential collision\nforall c, d . c != d\n  -> !<< cl(c) & re(d) >>").unwrap();
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn error_positions() {
        match parse_formula("free &\n  re(") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 6)),
            other => panic!("{other:?}"),
        }
        match parse_formula("free ) ") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 6)),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("re(free)").is_err());
        assert!(parse_formula("len = x").is_err());
        assert!(parse_formula("<< free").is_err());
        assert!(parse_formula("free $").is_err());
    }

    #[test]
    fn unbound_variables_are_reported() {
        use crate::model::Valuation;
        let f = parse_formula("exists c . re(c) & cl(d)").unwrap();
        let v = Valuation::ego("E".into());
        assert!(matches!(f.ensure_closed(&v), Err(Error::UnboundVariable(d)) if d == "d"));
        assert!(f.ensure_closed(&v.with("d", "D".into())).is_ok());
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let var = prop::sample::select(vec!["ego", "c", "d"]).prop_map(String::from);
        let leaf = prop_oneof![
            Just(Formula::Free),
            var.clone().prop_map(Formula::Re),
            var.clone().prop_map(Formula::Cl),
            (var.clone(), var.clone()).prop_map(|(a, b)| Formula::VarEq(a, b)),
            (-20i64..20, 1i64..4).prop_map(|(n, d)| Formula::Len(rat(n, d))),
        ];
        leaf.prop_recursive(4, 32, 2, move |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::hchop(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::vchop(a, b)),
                (prop::sample::select(vec!["c", "d"]), inner).prop_map(|(v, b)| Formula::exists(v, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parses_back(f in arb_formula()) {
            prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }
}
