//! Bundle automorphisms, their prolongation to jet coordinates and the
//! induced pullback of local functions and densities.
//!
//! The prolongation table is filled by the chain-rule recursion
//! `u~^a_{Ij} o jpsi = (J^-1)_j^i D_i(u~^a_I o jpsi)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bundle::{Bundle, MultiIndex, Sym};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{euler_lagrange, total_derivative};

/// A fiber-respecting bundle map: base components in base variables and
/// parameters only, fiber components additionally in order-0 fiber
/// variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Automorphism {
    bundle: Arc<Bundle>,
    base_map: Vec<Expr>,
    fiber_map: Vec<Expr>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Jacobian {
    /// `matrix[i][j] = D_i psi_M^j`
    pub matrix: Vec<Vec<Expr>>,
    pub det: Expr,
    pub inverse: Vec<Vec<Expr>>,
}

impl Automorphism {
    pub fn new(bundle: Arc<Bundle>, base_map: Vec<Expr>, fiber_map: Vec<Expr>) -> Result<Self> {
        if base_map.len() != bundle.n() || fiber_map.len() != bundle.m() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} base and {} fiber components",
                bundle.n(),
                bundle.m()
            )));
        }
        for e in &base_map {
            for s in e.symbols() {
                if s.is_jet() {
                    return Err(Error::BadAutomorphism(
                        "base components must not contain fiber or jet variables".into(),
                    ));
                }
            }
        }
        for e in &fiber_map {
            for s in e.symbols() {
                if let Some((_, idx)) = s.jet_parts() {
                    if !idx.is_empty() {
                        return Err(Error::BadAutomorphism(
                            "fiber components must not contain jet variables of order >= 1".into(),
                        ));
                    }
                }
            }
        }
        let auto = Automorphism {
            bundle,
            base_map,
            fiber_map,
        };
        auto.jacobian()?; // verifies det != 0 and n <= 4
        if auto.bundle.m() == 1 {
            let du = auto.fiber_map[0].partial(&Sym::fiber(0));
            if du.is_zero() {
                return Err(Error::BadAutomorphism(
                    "fiber component does not depend on the fiber variable".into(),
                ));
            }
        }
        Ok(auto)
    }

    pub fn identity(bundle: Arc<Bundle>) -> Self {
        let base_map = (0..bundle.n())
            .map(|i| Expr::from_sym(Sym::Base(i as u8)))
            .collect();
        let fiber_map = (0..bundle.m())
            .map(|a| Expr::from_sym(Sym::fiber(a as u8)))
            .collect();
        Automorphism {
            bundle,
            base_map,
            fiber_map,
        }
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    pub fn base_map(&self) -> &[Expr] {
        &self.base_map
    }

    pub fn fiber_map(&self) -> &[Expr] {
        &self.fiber_map
    }

    /// `d psi_E^c / d u^a`, evaluated literally on the fiber components.
    pub fn fiber_partial(&self, c: usize, a: usize) -> Expr {
        self.fiber_map[c].partial(&Sym::fiber(a as u8))
    }

    /// Jacobian `J_ij = D_i psi_M^j`, its determinant and the adjugate
    /// inverse. Symbolic inversion is limited to n <= 4.
    pub fn jacobian(&self) -> Result<Jacobian> {
        let n = self.bundle.n();
        if n > 4 {
            return Err(Error::BaseTooLarge { n });
        }
        let mut matrix = vec![vec![Expr::zero(); n]; n];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                // base components carry no jet symbols, so the total
                // derivative is the plain partial
                *entry = self.base_map[j].partial(&Sym::Base(i as u8));
            }
        }
        let det = determinant(&matrix);
        if det.is_zero() {
            return Err(Error::SingularMap);
        }
        let mut inverse = vec![vec![Expr::zero(); n]; n];
        for (r, row) in inverse.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                // inverse = adj(J)/det, adj = transposed cofactors
                let cof = cofactor(&matrix, c, r);
                *entry = cof.div(&det)?;
            }
        }
        Ok(Jacobian {
            matrix,
            det,
            inverse,
        })
    }

    /// Composition `self o other` (apply `other` first).
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        let mut base_bind = BTreeMap::new();
        for (i, e) in other.base_map.iter().enumerate() {
            base_bind.insert(Sym::Base(i as u8), e.clone());
        }
        let mut full_bind = base_bind.clone();
        for (a, e) in other.fiber_map.iter().enumerate() {
            full_bind.insert(Sym::fiber(a as u8), e.clone());
        }
        let base_map = self
            .base_map
            .iter()
            .map(|e| e.substitute(&base_bind))
            .collect::<Result<Vec<_>>>()?;
        let fiber_map = self
            .fiber_map
            .iter()
            .map(|e| e.substitute(&full_bind))
            .collect::<Result<Vec<_>>>()?;
        Automorphism::new(self.bundle.clone(), base_map, fiber_map)
    }
}

fn determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut out = Expr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor = minor_matrix(m, 0, j);
                let term = m[0][j].mul(&determinant(&minor));
                out = if j % 2 == 0 {
                    out.add(&term)
                } else {
                    out.sub(&term)
                };
            }
            out
        }
    }
}

fn minor_matrix(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

fn cofactor(m: &[Vec<Expr>], row: usize, col: usize) -> Expr {
    if m.len() == 1 {
        return Expr::one();
    }
    let d = determinant(&minor_matrix(m, row, col));
    if (row + col).is_multiple_of(2) {
        d
    } else {
        d.neg()
    }
}

/// Sign of an expression, when determinable from even powers, constants
/// and parameters tagged positive. `1`, `-1` or `None`.
pub fn expr_sign(bundle: &Bundle, e: &Expr) -> Option<i8> {
    if e.is_zero() {
        return None;
    }
    let poly_sign = |p: &crate::poly::Poly| -> Option<i8> {
        if p.num_terms() != 1 {
            return None;
        }
        let (m, c) = p.leading().unwrap();
        for (s, e) in m.factors() {
            if e % 2 == 0 || bundle.is_positive_param(s) {
                continue;
            }
            return None;
        }
        Some(if num::Signed::is_negative(c) { -1 } else { 1 })
    };
    Some(poly_sign(e.num())? * poly_sign(e.den())?)
}

/// The prolongation table of an automorphism: for every jet coordinate
/// in the target system, its expression in source coordinates.
#[derive(Clone, Debug)]
pub struct Prolongation {
    auto: Automorphism,
    jac: Jacobian,
    table: BTreeMap<(u8, MultiIndex), Expr>,
}

impl Prolongation {
    pub fn new(auto: Automorphism) -> Result<Self> {
        let jac = auto.jacobian()?;
        let mut table = BTreeMap::new();
        for (a, e) in auto.fiber_map().iter().enumerate() {
            table.insert((a as u8, MultiIndex::empty()), e.clone());
        }
        Ok(Prolongation { auto, jac, table })
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.auto
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        self.auto.bundle()
    }

    pub fn jacobian(&self) -> &Jacobian {
        &self.jac
    }

    pub fn det(&self) -> &Expr {
        &self.jac.det
    }

    pub fn orientation(&self) -> Option<i8> {
        expr_sign(self.auto.bundle(), &self.jac.det)
    }

    /// The table entry for `u~^a_I o jpsi`, filled on demand.
    pub fn entry(&mut self, field: u8, index: &MultiIndex) -> Result<Expr> {
        if let Some(e) = self.table.get(&(field, index.clone())) {
            return Ok(e.clone());
        }
        if index.order() > self.bundle().max_order() {
            return Err(Error::JetOrderLimit {
                limit: self.bundle().max_order(),
            });
        }
        let (rest, last) = index.split_last().expect("order-0 entries preseeded");
        let prev = self.entry(field, &rest)?;
        let bundle = self.auto.bundle().clone();
        let n = bundle.n();
        let mut out = Expr::zero();
        for i in 0..n {
            let inv = self.jac.inverse[last as usize][i].clone();
            if inv.is_zero() {
                continue;
            }
            let d = total_derivative(&bundle, &prev, i as u8)?;
            out = out.add(&inv.mul(&d));
        }
        self.table.insert((field, index.clone()), out.clone());
        Ok(out)
    }

    /// Extends the table to all indices of the given order (1-D base
    /// bundles only need the straight chain; general bundles fill the
    /// full simplex).
    pub fn extend_to(&mut self, order: usize) -> Result<()> {
        let n = self.bundle().n() as u8;
        let m = self.bundle().m() as u8;
        let mut frontier: Vec<MultiIndex> = vec![MultiIndex::empty()];
        for _ in 0..order {
            let mut next = Vec::new();
            for idx in &frontier {
                for i in 0..n {
                    let grown = idx.with(i);
                    if !next.contains(&grown) {
                        next.push(grown);
                    }
                }
            }
            for idx in &next {
                for a in 0..m {
                    self.entry(a, idx)?;
                }
            }
            frontier = next;
        }
        Ok(())
    }

    /// Pullback of an expression written in target coordinates:
    /// simultaneous substitution of base maps and table entries.
    pub fn pullback(&mut self, f: &Expr) -> Result<Expr> {
        let mut bind = BTreeMap::new();
        for (i, e) in self.auto.base_map().to_vec().iter().enumerate() {
            bind.insert(Sym::Base(i as u8), e.clone());
        }
        for s in f.jet_symbols() {
            let (field, index) = s.jet_parts().expect("jet symbol");
            let value = self.entry(field, &index.clone())?;
            bind.insert(s, value);
        }
        f.substitute(&bind)
    }

    /// The density of the transformed functional: `(P o jpsi) det(psi_M)`
    /// with the signed determinant.
    pub fn transform_density(&mut self, p: &Expr) -> Result<Expr> {
        let pulled = self.pullback(p)?;
        Ok(pulled.mul(&self.jac.det))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ElPullbackReport {
    pub residuals: Vec<Expr>,
    pub holds: bool,
}

/// Checks the pullback identity for Euler-Lagrange components:
/// `E_a((P o jpsi) det) = det * dpsi_E^c/du^a * (E~_c(P) o jpsi)`.
#[allow(clippy::needless_range_loop)] // the fiber index a names the component
pub fn verify_el_pullback(prol: &mut Prolongation, p: &Expr) -> Result<ElPullbackReport> {
    let bundle = prol.bundle().clone();
    let m = bundle.m();
    let transformed = prol.transform_density(p)?;
    let lhs = euler_lagrange(&bundle, &transformed)?;
    let el = euler_lagrange(&bundle, p)?;
    let el_pulled = el
        .iter()
        .map(|e| prol.pullback(e))
        .collect::<Result<Vec<_>>>()?;
    let det = prol.det().clone();
    let mut residuals = Vec::with_capacity(m);
    for a in 0..m {
        let mut rhs = Expr::zero();
        for (c, pulled) in el_pulled.iter().enumerate() {
            let dpsi = prol.automorphism().fiber_partial(c, a);
            if dpsi.is_zero() {
                continue;
            }
            rhs = rhs.add(&dpsi.mul(pulled));
        }
        rhs = rhs.mul(&det);
        residuals.push(lhs[a].sub(&rhs));
    }
    let holds = residuals.iter().all(Expr::is_zero);
    Ok(ElPullbackReport { residuals, holds })
}
