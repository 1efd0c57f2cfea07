//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := term { ("+"|"-") term }
//! term     := factor { ("*"|"/") factor }
//! factor   := ["-"] base ["^" signed-integer]
//! base     := rational | ident | "(" expr ")"
//! rational := integer ["/" integer]
//! ```
//!
//! Jet identifiers are `<field>_<indices>` with `<indices>` a string of
//! base-variable names; indices canonicalize by sorting.

use num::BigInt;

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = self.bytes[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let text = &self.src[self.pos..end];
                self.pos = end;
                let v = text.parse::<BigInt>().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("invalid integer `{text}`"),
                })?;
                return Ok((Tok::Int(v), start));
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = self.pos;
                while end < self.bytes.len()
                    && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                {
                    end += 1;
                }
                let text = self.src[self.pos..end].to_string();
                self.pos = end;
                return Ok((Tok::Ident(text), start));
            }
            other => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }
}

struct Parser<'a> {
    bundle: &'a Bundle,
    tokens: Vec<(Tok, usize)>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Slash => {
                    let pos = self.pos();
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc.div(&rhs).map_err(|e| match e {
                        Error::DivisionByZero => Error::Syntax {
                            pos,
                            msg: "division by the zero expression".into(),
                        },
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let negate = if matches!(self.peek(), Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let base = self.base()?;
        let out = if matches!(self.peek(), Tok::Caret) {
            let pos = self.pos();
            self.bump();
            let exp = self.signed_integer()?;
            base.pow(exp).map_err(|e| match e {
                Error::DivisionByZero => Error::Syntax {
                    pos,
                    msg: "negative power of the zero expression".into(),
                },
                other => other,
            })?
        } else {
            base
        };
        Ok(if negate { out.neg() } else { out })
    }

    fn signed_integer(&mut self) -> Result<i64> {
        let negate = if matches!(self.peek(), Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        match self.bump().0 {
            Tok::Int(v) => {
                let v: i64 = v.try_into().map_err(|_| Error::Syntax {
                    pos,
                    msg: "exponent too large".into(),
                })?;
                Ok(if negate { -v } else { v })
            }
            _ => Err(Error::Syntax {
                pos,
                msg: "expected integer exponent".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump().0 {
            Tok::Int(v) => Ok(Expr::from_rational(num::BigRational::from_integer(v))),
            Tok::Ident(name) => {
                let sym = self.bundle.resolve(&name).map_err(|e| match e {
                    Error::UnknownIdentifier { name, .. } => Error::UnknownIdentifier { name, pos },
                    other => other,
                })?;
                Ok(Expr::from_sym(sym))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                let pos = self.pos();
                match self.bump().0 {
                    Tok::RParen => Ok(inner),
                    _ => Err(Error::Syntax {
                        pos,
                        msg: "expected `)`".into(),
                    }),
                }
            }
            t => Err(Error::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }
}

/// Parses an expression over the bundle's declared symbols into normal
/// form.
pub fn parse(text: &str, bundle: &Bundle) -> Result<Expr> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let (tok, pos) = lexer.next()?;
        let end = matches!(tok, Tok::End);
        tokens.push((tok, pos));
        if end {
            break;
        }
    }
    let mut p = Parser {
        bundle,
        tokens,
        at: 0,
    };
    let out = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return Err(Error::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::Bundle;

    fn bundle() -> Bundle {
        Bundle::new(
            vec!["x".into()],
            vec!["u".into()],
            vec!["k>0".into(), "t".into()],
        )
        .unwrap()
    }

    #[test]
    fn parses_hamiltonian_density() {
        let b = bundle();
        let h = parse("-1/2*u_x^2 + 1/6*u^3", &b).unwrap();
        let built = {
            let ux = Expr::from_sym(b.resolve("u_x").unwrap());
            let u = Expr::from_sym(b.resolve("u").unwrap());
            ux.pow(2)
                .unwrap()
                .mul_rational(&num::BigRational::new((-1).into(), 2.into()))
                .add(
                    &u.pow(3)
                        .unwrap()
                        .mul_rational(&num::BigRational::new(1.into(), 6.into())),
                )
        };
        assert_eq!(h, built);
    }

    #[test]
    fn canonical_zero() {
        let b = bundle();
        assert!(parse("0", &b).unwrap().is_zero());
        assert!(parse("u - u", &b).unwrap().is_zero());
    }

    #[test]
    fn gcd_reduction_forced() {
        let b = bundle();
        assert_eq!(parse("x^2*u / x", &b).unwrap(), parse("x*u", &b).unwrap());
    }

    #[test]
    fn negative_powers() {
        let b = bundle();
        assert_eq!(parse("x^-2", &b).unwrap(), parse("1/x^2", &b).unwrap());
    }

    #[test]
    fn error_positions() {
        let b = bundle();
        match parse("u + w", &b) {
            Err(Error::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "w");
                assert_eq!(pos, 4);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        assert!(matches!(parse("u + ", &b), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse("u )", &b),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(matches!(parse("u_q", &b), Err(Error::BadJetIndex { .. })));
    }

    #[test]
    fn division_by_zero_expression() {
        let b = bundle();
        assert!(matches!(parse("u / 0", &b), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse("u / (u - u)", &b),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn round_trip_corpus() {
        let b = bundle();
        for s in [
            "-1/2*u_x^2 + 1/6*u^3",
            "x*u + 1/2*t*u^2",
            "1/2*x^6*u_x^2 + 2*x^5*u*u_x + 2*x^4*u^2 - 1/6*x^4*u^3",
            "(1)/(x)",
            "-u",
            "0",
        ] {
            let e1 = parse(s, &b).unwrap();
            let e2 = parse(&e1.render(&b), &b).unwrap();
            assert_eq!(e1, e2, "round trip failed for {s}");
        }
    }
}
