//! Exact rational-function expressions with a unique normal form.
//!
//! An expression is a GCD-reduced pair of expanded polynomials whose
//! denominator has leading coefficient +1. Equal mathematical values
//! have identical representations, so equality is decidable by
//! structural comparison.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, One, Signed};

use crate::bundle::{Bundle, Sym};
use crate::error::{Error, Result};
use crate::poly::{Coeff, Poly};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    /// Normalizing constructor; the only way expressions are built.
    pub fn new(num: Poly, den: Poly) -> Result<Expr> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        let (mut num, mut den) = (num, den);
        if !den.is_one() {
            let g = Poly::gcd(&num, &den);
            if !g.constant_value().map(|c| c.is_one()).unwrap_or(false) {
                num = num.try_div_exact(&g).expect("gcd divides numerator");
                den = den.try_div_exact(&g).expect("gcd divides denominator");
            }
        }
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.mul_coeff(&inv);
            den = den.mul_coeff(&inv);
        }
        Ok(Expr { num, den })
    }

    pub fn zero() -> Expr {
        Expr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Expr {
        Expr {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_int(v: i64) -> Expr {
        Expr {
            num: Poly::from_int(v),
            den: Poly::one(),
        }
    }

    pub fn from_rational(c: Coeff) -> Expr {
        Expr {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_sym(s: Sym) -> Expr {
        Expr {
            num: Poly::sym(s),
            den: Poly::one(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Coeff> {
        match (self.num.constant_value(), self.den.constant_value()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.den == other.den {
            return Expr::new(self.num.add(&other.num), self.den.clone())
                .expect("nonzero denominator");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Expr::new(num, self.den.mul(&other.den)).expect("nonzero denominator")
    }

    pub fn neg(&self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::new(self.num.mul(&other.num), self.den.mul(&other.den)).expect("nonzero denominator")
    }

    pub fn mul_rational(&self, c: &Coeff) -> Expr {
        Expr::new(self.num.mul_coeff(c), self.den.clone()).expect("nonzero denominator")
    }

    pub fn div(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Expr::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn inv(&self) -> Result<Expr> {
        Expr::one().div(self)
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, k: i64) -> Result<Expr> {
        if k == 0 {
            return Ok(Expr::one());
        }
        if self.is_zero() && k < 0 {
            return Err(Error::DivisionByZero);
        }
        let e = k.unsigned_abs() as u32;
        let p = Expr {
            num: self.num.pow(e),
            den: self.den.pow(e),
        };
        if k > 0 {
            Ok(p)
        } else {
            p.inv()
        }
    }

    /// Formal partial derivative (quotient rule).
    pub fn partial(&self, s: &Sym) -> Expr {
        if !self.num.contains(s) && !self.den.contains(s) {
            return Expr::zero();
        }
        if self.den.is_one() {
            return Expr {
                num: self.num.partial(s),
                den: Poly::one(),
            };
        }
        let num = self
            .num
            .partial(s)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.partial(s)));
        Expr::new(num, self.den.pow(2)).expect("nonzero denominator")
    }

    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = self.num.symbols();
        out.extend(self.den.symbols());
        out
    }

    pub fn contains(&self, s: &Sym) -> bool {
        self.num.contains(s) || self.den.contains(s)
    }

    /// Jet symbols occurring anywhere in the expression.
    pub fn jet_symbols(&self) -> Vec<Sym> {
        self.symbols().into_iter().filter(Sym::is_jet).collect()
    }

    pub fn max_jet_order(&self) -> usize {
        self.symbols()
            .iter()
            .filter_map(|s| s.jet_parts().map(|(_, i)| i.order()))
            .max()
            .unwrap_or(0)
    }

    /// Simultaneous substitution. Symbols absent from the map stay put.
    pub fn substitute(&self, map: &BTreeMap<Sym, Expr>) -> Result<Expr> {
        let num = eval_poly(&self.num, map)?;
        let den = eval_poly(&self.den, map)?;
        num.div(&den).map_err(|e| match e {
            Error::DivisionByZero => Error::SingularSubstitution,
            other => other,
        })
    }

    /// Decides equality of rational functions.
    pub fn equal(&self, other: &Expr) -> bool {
        self == other
    }

    /// Deterministic rendering: terms in descending monomial order,
    /// coefficients as reduced fractions.
    pub fn render(&self, b: &Bundle) -> String {
        if self.den.is_one() {
            render_poly(&self.num, b)
        } else {
            format!(
                "({})/({})",
                render_poly(&self.num, b),
                render_poly(&self.den, b)
            )
        }
    }
}

fn eval_poly(p: &Poly, map: &BTreeMap<Sym, Expr>) -> Result<Expr> {
    let mut out = Expr::zero();
    for (m, c) in p.terms() {
        let mut term = Expr::from_rational(c.clone());
        for (s, e) in m.factors() {
            let val = match map.get(s) {
                Some(v) => v.clone(),
                None => Expr::from_sym(s.clone()),
            };
            term = term.mul(&val.pow(*e as i64)?);
        }
        out = out.add(&term);
    }
    Ok(out)
}

fn render_coeff(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn render_monomial(m: &crate::poly::Monomial, b: &Bundle) -> String {
    m.factors()
        .iter()
        .map(|(s, e)| {
            if *e == 1 {
                b.sym_name(s)
            } else {
                format!("{}^{}", b.sym_name(s), e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

pub(crate) fn render_poly(p: &Poly, b: &Bundle) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms_desc().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if m.is_one() {
            out.push_str(&render_coeff(&abs));
        } else if abs.is_one() {
            out.push_str(&render_monomial(m, b));
        } else {
            out.push_str(&render_coeff(&abs));
            out.push('*');
            out.push_str(&render_monomial(m, b));
        }
    }
    out
}
