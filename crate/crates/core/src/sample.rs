//! Seeded random densities for property tests and the bracket
//! cross-check: 1-3 terms, total degree <= 3, jets of order <= 2,
//! nonzero integer coefficients in -3..=3.

use num::BigRational;
use rand::Rng;

use crate::bundle::{Bundle, MultiIndex, Sym};
use crate::expr::Expr;

/// The symbol pool: the first base variable, and each field with jet
/// order 0, 1, 2 in the first base direction.
fn pool(bundle: &Bundle) -> Vec<Sym> {
    let mut out = vec![Sym::Base(0)];
    for a in 0..bundle.m() as u8 {
        out.push(Sym::fiber(a));
        out.push(Sym::Jet {
            field: a,
            index: MultiIndex::new(vec![0]),
        });
        out.push(Sym::Jet {
            field: a,
            index: MultiIndex::new(vec![0, 0]),
        });
    }
    out
}

fn random_coeff<R: Rng>(rng: &mut R) -> BigRational {
    let mut c: i64 = 0;
    while c == 0 {
        c = rng.gen_range(-3..=3);
    }
    BigRational::from_integer(c.into())
}

/// A random polynomial density; never the zero expression.
pub fn random_density<R: Rng>(bundle: &Bundle, rng: &mut R) -> Expr {
    let pool = pool(bundle);
    loop {
        let terms = rng.gen_range(1..=3);
        let mut out = Expr::zero();
        for _ in 0..terms {
            let mut term = Expr::from_rational(random_coeff(rng));
            let degree = rng.gen_range(1..=3);
            for _ in 0..degree {
                let s = pool[rng.gen_range(0..pool.len())].clone();
                term = term.mul(&Expr::from_sym(s));
            }
            out = out.add(&term);
        }
        if !out.is_zero() {
            return out;
        }
    }
}
