//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula := quant | impl
//! quant   := ("forall" | "exists") IDENT "." formula
//! impl    := disj ["->" formula]
//! disj    := conj {"|" conj}
//! conj    := neg {"&" neg}
//! neg     := "!" neg | quant | atom
//! atom    := term "=" term | "(" formula ")"
//! term    := factor {"*" factor}
//! factor  := base {"^-1"}
//! base    := "1" | IDENT | "@" IDENT | "#" INT | "(" term ")"
//! ```
//!
//! A quantifier in operand position extends as far right as possible.

use thiserror::Error;

use super::ast::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } => Some(*offset),
            ParseError::UnboundVariable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Param(String),
    Lit(usize),
    One,
    Star,
    InvSuffix,
    Equals,
    Bang,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    Dot,
    Forall,
    Exists,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Param(s) => format!("parameter `@{s}`"),
        Tok::Lit(n) => format!("literal `#{n}`"),
        Tok::End => "end of input".to_string(),
        other => format!("{other:?}"),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, message: &str| ParseError::Syntax { offset, message: message.to_string() };
    let ident_end = |mut j: usize| {
        while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'\'') {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            b'*' => {
                i += 1;
                Tok::Star
            }
            b'=' => {
                i += 1;
                Tok::Equals
            }
            b'!' => {
                i += 1;
                Tok::Bang
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'|' => {
                i += 1;
                Tok::Pipe
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Tok::Arrow
            }
            b'^' => {
                if text[i..].starts_with("^-1") {
                    i += 3;
                    Tok::InvSuffix
                } else {
                    return Err(err(i, "expected `^-1`"));
                }
            }
            b'@' => {
                let end = ident_end(i + 1);
                if end == i + 1 || bytes[i + 1].is_ascii_digit() {
                    return Err(err(i + 1, "expected parameter name after `@`"));
                }
                i = end;
                Tok::Param(text[start + 1..end].to_string())
            }
            b'#' => {
                let mut end = i + 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let n = text[i + 1..end].parse().map_err(|_| err(i + 1, "expected element id after `#`"))?;
                i = end;
                Tok::Lit(n)
            }
            b'0'..=b'9' => {
                let mut end = i;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                if &text[i..end] != "1" {
                    return Err(err(i, "only `1` is a numeric constant; use `#id` for elements"));
                }
                i = end;
                Tok::One
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let end = ident_end(i);
                i = end;
                match &text[start..end] {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    word => Tok::Ident(word.to_string()),
                }
            }
            _ => return Err(err(i, &format!("unexpected character `{}`", text[i..].chars().next().unwrap()))),
        };
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::Forall | Tok::Exists => self.quant(),
            _ => self.implication(),
        }
    }

    fn quant(&mut self) -> PResult<Formula> {
        let universal = self.bump() == Tok::Forall;
        let var = match self.bump() {
            Tok::Ident(v) => v,
            _ => {
                self.pos -= 1;
                return self.error("variable after quantifier");
            }
        };
        self.expect(Tok::Dot, "`.` after quantified variable")?;
        let body = self.formula()?;
        Ok(if universal { Formula::forall(var, body) } else { Formula::exists(var, body) })
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or(parts))
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.negation()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.negation()?);
        }
        Ok(Formula::and(parts))
    }

    fn negation(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.negation()?))
            }
            Tok::Forall | Tok::Exists => self.quant(),
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        if *self.peek() != Tok::LParen {
            return self.equation();
        }
        let save = self.pos;
        let as_equation = self.equation();
        let eq_err = match as_equation {
            Ok(f) => return Ok(f),
            Err(e) => e,
        };
        let eq_pos = self.pos;
        self.pos = save;
        self.bump();
        let as_formula = self.formula().and_then(|f| {
            self.expect(Tok::RParen, "`)`")?;
            Ok(f)
        });
        match as_formula {
            Ok(f) => Ok(f),
            Err(e) => {
                // report whichever reading got further
                if eq_pos > self.pos {
                    Err(eq_err)
                } else {
                    Err(e)
                }
            }
        }
    }

    fn equation(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        self.expect(Tok::Equals, "`=`")?;
        let rhs = self.term()?;
        Ok(Formula::eq(lhs, rhs))
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            t = Term::mul(t, self.factor()?);
        }
        Ok(t)
    }

    fn factor(&mut self) -> PResult<Term> {
        let mut t = self.base()?;
        while *self.peek() == Tok::InvSuffix {
            self.bump();
            t = Term::inv(t);
        }
        Ok(t)
    }

    fn base(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                Ok(Term::One)
            }
            Tok::Ident(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Param(p) => {
                self.bump();
                Ok(Term::Param(p))
            }
            Tok::Lit(n) => {
                self.bump();
                Ok(Term::Const(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.error("a term"),
        }
    }
}

/// Parses a formula; shadowed bound variables are renamed apart.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.error("end of input");
    }
    Ok(f.rename_shadowed())
}

/// Parses a formula and rejects free variables.
pub fn parse_sentence(text: &str) -> Result<Formula, ParseError> {
    let f = parse_formula(text)?;
    match f.free_vars().into_iter().next() {
        Some(v) => Err(ParseError::UnboundVariable(v)),
        None => Ok(f),
    }
}

/// Parses a term on its own.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return p.error("end of input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutativity_sentence() {
        let f = parse_formula("forall x. forall y. x*y = y*x").unwrap();
        assert_eq!(f.to_string(), "forall x. forall y. x * y = y * x");
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn free_variable_formula() {
        let f = parse_formula("exists y. y*y = x").unwrap();
        assert_eq!(f.free_vars(), vec!["x"]);
        assert_eq!(parse_sentence("exists y. y*y = x"), Err(ParseError::UnboundVariable("x".into())));
    }

    #[test]
    fn dangling_operator() {
        let err = parse_formula("x*").unwrap_err();
        assert_eq!(err.offset(), Some(2));
    }

    #[test]
    fn precedence() {
        let f = parse_formula("a = 1 | b = 1 & c = 1 -> !d = 1").unwrap();
        assert_eq!(f.to_string(), "(a = 1 | (b = 1 & c = 1)) -> !(d = 1)");
        let g = parse_formula("x*y*z = x*(y*z)").unwrap();
        assert_eq!(g.to_string(), "x * y * z = x * (y * z)");
    }

    #[test]
    fn parenthesized_terms_and_formulas() {
        assert_eq!(parse_formula("(x*y)^-1 = y^-1*x^-1").unwrap().to_string(), "(x * y)^-1 = y^-1 * x^-1");
        assert_eq!(parse_formula("(x = 1)").unwrap().to_string(), "x = 1");
        assert_eq!(parse_formula("((x) = (1))").unwrap().to_string(), "x = 1");
        assert_eq!(parse_formula("(x = 1 | y = 1) & z = 1").unwrap().to_string(), "(x = 1 | y = 1) & z = 1");
    }

    #[test]
    fn params_and_literals() {
        let f = parse_formula("x*@r = @r*x & #3 = #0").unwrap();
        assert_eq!(f.params().into_iter().collect::<Vec<_>>(), vec!["r"]);
        assert_eq!(f.to_string(), "x * @r = @r * x & #3 = #0");
    }

    #[test]
    fn quantifier_in_operand_position() {
        let f = parse_formula("x = 1 & forall y. y = x | y = 1").unwrap();
        assert_eq!(f.to_string(), "x = 1 & (forall y. y = x | y = 1)");
    }

    #[test]
    fn syntax_errors() {
        for bad in ["", "x", "x = ", "forall . x = x", "forall x x = x", "(x = 1", "x = 2", "x ^ 2 = 1", "x $ y"] {
            assert!(matches!(parse_formula(bad), Err(ParseError::Syntax { .. })), "{bad}");
        }
    }

    #[test]
    fn shadowing_renamed_on_parse() {
        let f = parse_formula("forall x. exists x. x = x").unwrap();
        assert_eq!(f.to_string(), "forall x. exists x_1. x_1 = x_1");
    }
}
