//! Matrix differential operators, bracket densities of local
//! functionals and equality modulo total divergence.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bundle::{Bundle, MultiIndex};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{euler_lagrange, total_derivative_multi};

/// An operator `D^{ab} = w^{abI} D_I` acting on vectors of local
/// functions. Absent entries are zero; per entry the multi-indices are
/// distinct and zero coefficients are dropped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOperator {
    bundle: Arc<Bundle>,
    entries: BTreeMap<(u8, u8), Vec<(Expr, MultiIndex)>>,
}

impl DiffOperator {
    pub fn new(
        bundle: Arc<Bundle>,
        terms: Vec<(u8, u8, Expr, MultiIndex)>,
    ) -> Result<DiffOperator> {
        let m = bundle.m() as u8;
        let mut entries: BTreeMap<(u8, u8), BTreeMap<MultiIndex, Expr>> = BTreeMap::new();
        for (a, b, coeff, index) in terms {
            if a >= m || b >= m {
                return Err(Error::DimensionMismatch(format!(
                    "operator entry ({a},{b}) out of range for {m} fields"
                )));
            }
            let slot = entries.entry((a, b)).or_default();
            let cur = slot.entry(index).or_insert_with(Expr::zero);
            *cur = cur.add(&coeff);
        }
        let entries = entries
            .into_iter()
            .map(|(k, v)| {
                (
                    k,
                    v.into_iter()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, c)| (c, i))
                        .collect::<Vec<_>>(),
                )
            })
            .filter(|(_, v): &(_, Vec<_>)| !v.is_empty())
            .collect();
        Ok(DiffOperator { bundle, entries })
    }

    pub fn zero(bundle: Arc<Bundle>) -> DiffOperator {
        DiffOperator {
            bundle,
            entries: BTreeMap::new(),
        }
    }

    /// The scalar operator `D_x` on a single-field bundle.
    pub fn d_x(bundle: Arc<Bundle>) -> DiffOperator {
        DiffOperator::new(bundle, vec![(0, 0, Expr::one(), MultiIndex::new(vec![0]))])
            .expect("valid scalar operator")
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u8, u8), &Vec<(Expr, MultiIndex)>)> {
        self.entries.iter()
    }

    pub fn coeff(&self, a: u8, b: u8, index: &MultiIndex) -> Expr {
        self.entries
            .get(&(a, b))
            .and_then(|v| v.iter().find(|(_, i)| i == index))
            .map(|(c, _)| c.clone())
            .unwrap_or_else(Expr::zero)
    }

    /// `(Dv)^a = w^{abI} D_I(v_b)`.
    pub fn apply(&self, v: &[Expr]) -> Result<Vec<Expr>> {
        if v.len() != self.bundle.m() {
            return Err(Error::DimensionMismatch(format!(
                "operator expects {} components, got {}",
                self.bundle.m(),
                v.len()
            )));
        }
        let mut out = vec![Expr::zero(); self.bundle.m()];
        for ((a, b), terms) in &self.entries {
            for (coeff, index) in terms {
                let d = total_derivative_multi(&self.bundle, &v[*b as usize], index)?;
                out[*a as usize] = out[*a as usize].add(&coeff.mul(&d));
            }
        }
        Ok(out)
    }

    /// For a scalar operator `w D_x`: returns `w`. `None` when the
    /// operator has any other shape.
    pub fn scalar_first_order(&self) -> Option<Expr> {
        if self.bundle.m() != 1 || self.bundle.n() != 1 {
            return None;
        }
        let terms = self.entries.get(&(0, 0))?;
        if self.entries.len() != 1 || terms.len() != 1 {
            return None;
        }
        let (coeff, index) = &terms[0];
        if index.indices() == [0] {
            Some(coeff.clone())
        } else {
            None
        }
    }

    /// True when every term is strictly first order (`|I| = 1`, no
    /// order-0 part) — the shape `w^{abi} D_i`.
    pub fn is_first_order(&self) -> bool {
        self.entries
            .values()
            .all(|terms| terms.iter().all(|(_, i)| i.order() == 1))
    }

    /// For a scalar operator `sum_I w^I D_x^I` on n = m = 1: the
    /// coefficient vector `[w^0, ..., w^N]`. `None` for other shapes.
    pub fn scalar_tower(&self) -> Option<Vec<Expr>> {
        if self.bundle.m() != 1 || self.bundle.n() != 1 {
            return None;
        }
        let order = self
            .entries
            .values()
            .flatten()
            .map(|(_, i)| i.order())
            .max()
            .unwrap_or(0);
        let mut out = vec![Expr::zero(); order + 1];
        for ((a, b), terms) in &self.entries {
            debug_assert_eq!((*a, *b), (0, 0));
            for (coeff, index) in terms {
                out[index.order()] = out[index.order()].add(coeff);
            }
        }
        Some(out)
    }
}

/// The integrand of `{P, Q}` together with its Euler-Lagrange image;
/// the image is zero iff the integrand is a total divergence.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BracketResult {
    pub density: Expr,
    pub reduced_witness: Vec<Expr>,
}

/// `{P,Q}` density `sum_a E_a(P) (D E(Q))_a`.
pub fn bracket_density(op: &DiffOperator, p: &Expr, q: &Expr) -> Result<BracketResult> {
    let bundle = op.bundle();
    let ep = euler_lagrange(bundle, p)?;
    let eq = euler_lagrange(bundle, q)?;
    let deq = op.apply(&eq)?;
    let mut density = Expr::zero();
    for (a, e) in ep.iter().enumerate() {
        density = density.add(&e.mul(&deq[a]));
    }
    let reduced_witness = euler_lagrange(bundle, &density)?;
    Ok(BracketResult {
        density,
        reduced_witness,
    })
}

/// Functionals are equal when their densities differ by a total
/// divergence.
pub fn equal_mod_divergence(bundle: &Bundle, p: &Expr, q: &Expr) -> Result<bool> {
    crate::jet::is_total_divergence(bundle, &p.sub(q))
}
