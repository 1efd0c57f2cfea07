//! Total derivatives, the Euler-Lagrange operator and the total
//! divergence (null Lagrangian) test.

use std::sync::Arc;

use crate::bundle::{Bundle, MultiIndex, Sym};
use crate::error::Result;
use crate::expr::Expr;

/// The integrand of a local functional.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Density {
    pub bundle: Arc<Bundle>,
    pub value: Expr,
}

impl Density {
    pub fn new(bundle: Arc<Bundle>, value: Expr) -> Density {
        Density { bundle, value }
    }
}

/// Total derivative D_i = d/dx^i + u^a_{Ji} d/du^a_J, summed over the
/// jet symbols actually occurring in the expression.
pub fn total_derivative(bundle: &Bundle, e: &Expr, i: u8) -> Result<Expr> {
    let mut out = e.partial(&Sym::Base(i));
    for s in e.jet_symbols() {
        let d = e.partial(&s);
        if d.is_zero() {
            continue;
        }
        let (field, index) = s.jet_parts().expect("jet symbol");
        let next = bundle.jet(field, index.with(i))?;
        out = out.add(&Expr::from_sym(next).mul(&d));
    }
    Ok(out)
}

/// Iterated total derivative D_I; the empty index is the identity.
pub fn total_derivative_multi(bundle: &Bundle, e: &Expr, index: &MultiIndex) -> Result<Expr> {
    let mut out = e.clone();
    for &i in index.indices() {
        out = total_derivative(bundle, &out, i)?;
    }
    Ok(out)
}

/// Iterated D_x for one-dimensional bases.
pub fn total_derivative_iter(bundle: &Bundle, e: &Expr, i: u8, times: u32) -> Result<Expr> {
    let mut out = e.clone();
    for _ in 0..times {
        out = total_derivative(bundle, &out, i)?;
    }
    Ok(out)
}

/// Components E_a(P) = sum_I (-1)^{|I|} D_I(dP/du^a_I) over the
/// multi-indices occurring in P.
pub fn euler_lagrange(bundle: &Bundle, p: &Expr) -> Result<Vec<Expr>> {
    let mut out = vec![Expr::zero(); bundle.m()];
    for s in p.jet_symbols() {
        let d = p.partial(&s);
        if d.is_zero() {
            continue;
        }
        let (field, index) = s.jet_parts().expect("jet symbol");
        let term = total_derivative_multi(bundle, &d, index)?;
        let signed = if index.sign() < 0 { term.neg() } else { term };
        out[field as usize] = out[field as usize].add(&signed);
    }
    Ok(out)
}

/// Null-Lagrangian test: P is a total divergence iff E(P) vanishes.
pub fn is_total_divergence(bundle: &Bundle, p: &Expr) -> Result<bool> {
    Ok(euler_lagrange(bundle, p)?.iter().all(Expr::is_zero))
}
