//! Expanded multivariate polynomials over the rationals with a fixed
//! graded-lexicographic monomial order, plus the polynomial GCD backing
//! the rational-function normal form.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Zero};

use crate::bundle::Sym;

pub type Coeff = BigRational;

/// A power product. Factors are kept sorted ascending by symbol with
/// strictly positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Sym, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn sym(s: Sym) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn power(s: Sym, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(s, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn factors(&self) -> &[(Sym, u32)] {
        &self.0
    }

    pub fn exponent(&self, s: &Sym) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| t == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Exact division; `None` when some exponent would go negative.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (s, e) in &self.0 {
            let mut e = *e;
            if j < other.0.len() && other.0[j].0 < *s {
                return None; // divisor has a symbol we lack
            }
            if j < other.0.len() && other.0[j].0 == *s {
                if other.0[j].1 > e {
                    return None;
                }
                e -= other.0[j].1;
                j += 1;
            }
            if e > 0 {
                out.push((s.clone(), e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (s, e) in &self.0 {
            let oe = other.exponent(s);
            let m = (*e).min(oe);
            if m > 0 {
                out.push((s.clone(), m));
            }
        }
        Monomial(out)
    }

    /// Removes `s`, returning its exponent and the remaining monomial.
    pub fn remove(&self, s: &Sym) -> (u32, Monomial) {
        let mut exp = 0;
        let mut rest = Vec::with_capacity(self.0.len());
        for (t, e) in &self.0 {
            if t == s {
                exp = *e;
            } else {
                rest.push((t.clone(), *e));
            }
        }
        (exp, Monomial(rest))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, ties broken by the
    /// exponent of the most significant (smallest) differing symbol.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((s, e)), Some((t, f))) => match s.cmp(t) {
                    Ordering::Less => return Ordering::Greater, // we have the earlier symbol
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match e.cmp(f) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An expanded multivariate polynomial with exact rational coefficients.
/// No zero coefficients are stored; the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Coeff>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn from_int(v: i64) -> Self {
        Poly::constant(Coeff::from_integer(BigInt::from(v)))
    }

    pub fn sym(s: Sym) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::sym(s), Coeff::one());
        Poly { terms }
    }

    pub fn term(m: Monomial, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Monomial::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
            || (self.terms.len() == 1 && self.terms.contains_key(&Monomial::one()))
    }

    pub fn constant_value(&self) -> Option<Coeff> {
        if self.is_zero() {
            return Some(Coeff::zero());
        }
        if self.is_constant() {
            return self.terms.get(&Monomial::one()).cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    /// Terms in descending monomial order (rendering order).
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter().rev()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_coeff(&self, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, k)| (mm.mul(m), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Formal partial derivative, all symbols independent.
    pub fn partial(&self, s: &Sym) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.remove(s);
            if e == 0 {
                continue;
            }
            let dm = if e == 1 {
                rest
            } else {
                rest.mul(&Monomial::power(s.clone(), e - 1))
            };
            out.add_term(dm, c * Coeff::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn contains(&self, s: &Sym) -> bool {
        self.terms.keys().any(|m| m.exponent(s) > 0)
    }

    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (s, _) in m.factors() {
                out.insert(s.clone());
            }
        }
        out
    }

    pub fn degree_in(&self, s: &Sym) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// The common monomial factor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let first = match it.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        it.fold(first, |acc, m| acc.gcd(m))
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, c)| (mm.try_div(m).expect("monomial content division"), c.clone()))
                .collect(),
        }
    }

    /// Exact polynomial division; `None` when the division leaves a
    /// remainder.
    pub fn try_div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.constant_value() {
            return Some(self.mul_coeff(&c.recip()));
        }
        let (dm, dc) = d.leading().unwrap();
        let mut r = self.clone();
        let mut q = Poly::zero();
        while !r.is_zero() {
            let (rm, rc) = r.leading().unwrap();
            let m = rm.try_div(dm)?;
            let c = rc / dc;
            r = r.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Scales so that the leading coefficient is +1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) => self.mul_coeff(&c.recip()),
            None => Poly::zero(),
        }
    }

    /// A greatest common divisor (an arbitrary associate).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        let ma = a.monomial_content();
        let mb = b.monomial_content();
        let mg = ma.gcd(&mb);
        let a1 = a.div_monomial(&ma);
        let b1 = b.div_monomial(&mb);
        let core = gcd_core(&a1, &b1);
        core.mul(&Poly::term(mg, Coeff::one()))
    }
}

/// GCD of polynomials with trivial monomial content, via a primitive
/// polynomial remainder sequence in a chosen main variable.
fn gcd_core(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let vars_a = a.symbols();
    let vars_b = b.symbols();
    let common: Vec<Sym> = vars_a.intersection(&vars_b).cloned().collect();
    if common.is_empty() {
        return Poly::one();
    }
    if provably_coprime(a, b, &common) {
        return Poly::one();
    }
    // main variable: the common symbol of least maximum degree, to keep
    // the remainder sequence short
    let x = common
        .iter()
        .min_by_key(|s| a.degree_in(s).max(b.degree_in(s)))
        .unwrap()
        .clone();

    let ua = to_uni(a, &x);
    let ub = to_uni(b, &x);
    let ca = uni_content(&ua);
    let cb = uni_content(&ub);
    let pa = uni_div_poly(&ua, &ca);
    let pb = uni_div_poly(&ub, &cb);
    let cont_gcd = Poly::gcd(&ca, &cb);

    let (mut u, mut v) = if uni_deg(&pa) >= uni_deg(&pb) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    loop {
        let r = uni_prem(&u, &v);
        if uni_is_zero(&r) {
            break;
        }
        let rc = uni_content(&r);
        u = v;
        v = uni_div_poly(&r, &rc);
    }
    if uni_deg(&v) == 0 {
        return cont_gcd;
    }
    let vc = uni_content(&v);
    let vp = uni_div_poly(&v, &vc);
    cont_gcd.mul(&from_uni(&vp, &x))
}

/// Deterministic evaluation points for the coprimality witness.
const WITNESS_POINTS: [i64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Sound coprimality certificate.  For each common variable x, evaluate
/// every other variable at integer points; if both leading-in-x
/// coefficients stay nonzero and the univariate gcd of the images is
/// constant, then (since any common divisor specializes to a divisor of
/// the images, with its x-degree preserved by the leading-coefficient
/// check) the true gcd has degree zero in x.  Degree zero in every
/// common variable means the gcd is constant.  A false return is merely
/// inconclusive.
fn provably_coprime(a: &Poly, b: &Poly, common: &[Sym]) -> bool {
    let all_vars: Vec<Sym> = a.symbols().union(&b.symbols()).cloned().collect();
    'vars: for x in common {
        for salt in 0..WITNESS_POINTS.len() {
            let mut point = BTreeMap::new();
            for (i, s) in all_vars.iter().enumerate() {
                if s != x {
                    let v = WITNESS_POINTS[(i + salt) % WITNESS_POINTS.len()];
                    point.insert(s.clone(), Coeff::from_integer(BigInt::from(v)));
                }
            }
            let ua = eval_uni(a, x, &point);
            let ub = eval_uni(b, x, &point);
            if ua.last().unwrap().is_zero() || ub.last().unwrap().is_zero() {
                continue; // a leading coefficient vanished at this point
            }
            if uni_rat_gcd_degree(ua, ub) == 0 {
                continue 'vars;
            }
        }
        return false;
    }
    true
}

/// Evaluates every variable except `x`, giving a dense univariate
/// polynomial in `x` with rational coefficients.
fn eval_uni(p: &Poly, x: &Sym, point: &BTreeMap<Sym, Coeff>) -> Vec<Coeff> {
    let d = p.degree_in(x) as usize;
    let mut out = vec![Coeff::zero(); d + 1];
    for (m, c) in p.terms() {
        let (e, rest) = m.remove(x);
        let mut v = c.clone();
        for (s, k) in rest.factors() {
            let base = point.get(s).expect("point covers all other symbols");
            v *= num::pow(base.clone(), *k as usize);
        }
        out[e as usize] += v;
    }
    out
}

fn uni_rat_deg(u: &[Coeff]) -> Option<usize> {
    u.iter().rposition(|c| !c.is_zero())
}

/// Degree of the gcd of two dense univariate rational polynomials.
fn uni_rat_gcd_degree(a: Vec<Coeff>, b: Vec<Coeff>) -> usize {
    let (mut u, mut v) = (a, b);
    loop {
        let dv = match uni_rat_deg(&v) {
            None => return uni_rat_deg(&u).unwrap_or(0),
            Some(d) => d,
        };
        if dv == 0 {
            return 0;
        }
        let du = match uni_rat_deg(&u) {
            None => return dv,
            Some(d) => d,
        };
        if du < dv {
            std::mem::swap(&mut u, &mut v);
            continue;
        }
        let f = &u[du] / &v[dv];
        let shift = du - dv;
        for i in 0..=dv {
            let t = &v[i] * &f;
            u[i + shift] -= t;
        }
        u[du] = Coeff::zero();
    }
}

type Uni = Vec<Poly>; // dense, index = exponent of the main variable

fn to_uni(p: &Poly, x: &Sym) -> Uni {
    let d = p.degree_in(x) as usize;
    let mut out = vec![Poly::zero(); d + 1];
    for (m, c) in p.terms() {
        let (e, rest) = m.remove(x);
        out[e as usize].add_term(rest, c.clone());
    }
    out
}

fn from_uni(u: &Uni, x: &Sym) -> Poly {
    let mut out = Poly::zero();
    for (e, coeff) in u.iter().enumerate() {
        let xe = Poly::term(Monomial::power(x.clone(), e as u32), Coeff::one());
        out = out.add(&coeff.mul(&xe));
    }
    out
}

fn uni_trim(u: &mut Uni) {
    while u.len() > 1 && u.last().map(|p| p.is_zero()).unwrap_or(false) {
        u.pop();
    }
}

fn uni_is_zero(u: &Uni) -> bool {
    u.iter().all(|p| p.is_zero())
}

fn uni_deg(u: &Uni) -> usize {
    for (i, p) in u.iter().enumerate().rev() {
        if !p.is_zero() {
            return i;
        }
    }
    0
}

fn uni_content(u: &Uni) -> Poly {
    let mut c = Poly::zero();
    for p in u {
        if !p.is_zero() {
            c = Poly::gcd(&c, p);
            if c == Poly::one() {
                return c;
            }
        }
    }
    if c.is_zero() {
        Poly::one()
    } else {
        c
    }
}

fn uni_div_poly(u: &Uni, d: &Poly) -> Uni {
    u.iter()
        .map(|p| {
            if p.is_zero() {
                Poly::zero()
            } else {
                p.try_div_exact(d).expect("content division is exact")
            }
        })
        .collect()
}

/// Pseudo-remainder of `u` by `v` in the main variable.
fn uni_prem(u: &Uni, v: &Uni) -> Uni {
    let dv = uni_deg(v);
    let lv = v[dv].clone();
    let mut r = u.clone();
    uni_trim(&mut r);
    while !uni_is_zero(&r) && uni_deg(&r) >= dv {
        let dr = uni_deg(&r);
        let lr = r[dr].clone();
        let shift = dr - dv;
        let mut next = vec![Poly::zero(); dr.max(r.len())];
        for (i, p) in r.iter().enumerate() {
            next[i] = p.mul(&lv);
        }
        for (i, p) in v.iter().enumerate() {
            if i + shift < next.len() {
                next[i + shift] = next[i + shift].sub(&p.mul(&lr));
            } else if !p.mul(&lr).is_zero() {
                unreachable!("pseudo-remainder overflow");
            }
        }
        r = next;
        uni_trim(&mut r);
        if uni_deg(&r) == dr && !uni_is_zero(&r) && dr >= dv && !r[dr].is_zero() {
            unreachable!("pseudo-remainder failed to reduce degree");
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Sym {
        Sym::Base(0)
    }
    fn y() -> Sym {
        Sym::Base(1)
    }

    fn c(v: i64) -> Coeff {
        Coeff::from_integer(BigInt::from(v))
    }

    #[test]
    fn grlex_order() {
        // degree dominates
        assert!(Monomial::power(x(), 3) > Monomial::power(y(), 2));
        // ties: the earlier symbol with the larger exponent wins
        assert!(Monomial::sym(x()) > Monomial::sym(y()));
        assert!(Monomial::power(x(), 2) > Monomial::sym(x()).mul(&Monomial::sym(y())));
    }

    #[test]
    fn arithmetic_expands() {
        let p = Poly::sym(x()).add(&Poly::sym(y()));
        let sq = p.pow(2);
        let mut expect = Poly::zero();
        expect.add_term(Monomial::power(x(), 2), c(1));
        expect.add_term(Monomial::sym(x()).mul(&Monomial::sym(y())), c(2));
        expect.add_term(Monomial::power(y(), 2), c(1));
        assert_eq!(sq, expect);
    }

    #[test]
    fn partial_derivative() {
        let p = Poly::sym(x()).pow(3).mul_coeff(&c(2)); // 2x^3
        let d = p.partial(&x());
        assert_eq!(d, Poly::sym(x()).pow(2).mul_coeff(&c(6)));
        assert!(p.partial(&y()).is_zero());
    }

    #[test]
    fn exact_division() {
        let p = Poly::sym(x()).pow(2).sub(&Poly::sym(y()).pow(2));
        let d = Poly::sym(x()).sub(&Poly::sym(y()));
        let q = p.try_div_exact(&d).unwrap();
        assert_eq!(q, Poly::sym(x()).add(&Poly::sym(y())));
        assert!(p.try_div_exact(&Poly::sym(x()).add(&Poly::one())).is_none());
    }

    #[test]
    fn gcd_univariate() {
        // (x+1)^2 (x-1) vs (x+1)(x-1)^2  ->  (x+1)(x-1)
        let xp1 = Poly::sym(x()).add(&Poly::one());
        let xm1 = Poly::sym(x()).sub(&Poly::one());
        let a = xp1.pow(2).mul(&xm1);
        let b = xp1.mul(&xm1.pow(2));
        let g = Poly::gcd(&a, &b);
        let expect = xp1.mul(&xm1).monic();
        assert_eq!(g.monic(), expect);
    }

    #[test]
    fn gcd_multivariate() {
        // common factor (x + y)
        let f = Poly::sym(x()).add(&Poly::sym(y()));
        let a = f.mul(&Poly::sym(x()));
        let b = f.mul(&Poly::sym(y()).add(&Poly::one()));
        let g = Poly::gcd(&a, &b);
        assert_eq!(g.monic(), f.monic());
    }

    #[test]
    fn gcd_coprime() {
        let a = Poly::sym(x()).pow(2).add(&Poly::one());
        let b = Poly::sym(y()).add(&Poly::from_int(3));
        assert!(Poly::gcd(&a, &b).is_constant());
    }

    #[test]
    fn gcd_monomial_fast_path() {
        let a = Poly::term(Monomial::power(x(), 5), c(4));
        let b = Poly::term(Monomial::power(x(), 2).mul(&Monomial::sym(y())), c(6));
        let g = Poly::gcd(&a, &b);
        assert_eq!(g.monic(), Poly::term(Monomial::power(x(), 2), c(1)));
    }
}
