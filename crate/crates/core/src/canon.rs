//! Canonicity of a transformation with respect to a Poisson operator:
//! exact residual conditions for the three supported operator shapes,
//! the (I,j) composition coefficients behind the highest-order case,
//! and a seeded sampling cross-check of bracket preservation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{total_derivative, total_derivative_iter};
use crate::poisson::{bracket_density, equal_mod_divergence, DiffOperator};
use crate::pullback::Prolongation;
use crate::sample::random_density;

pub const DEFAULT_COMP_COEFF_MAX: u32 = 8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CaseKind {
    Case1,
    Case2,
    Case3,
}

impl CaseKind {
    pub fn name(&self) -> &'static str {
        match self {
            CaseKind::Case1 => "case1",
            CaseKind::Case2 => "case2",
            CaseKind::Case3 => "case3",
        }
    }
}

/// One identity the transformation must satisfy: it holds iff the
/// residual is the zero expression.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Condition {
    pub label: String,
    pub residual: Expr,
    pub satisfied: bool,
}

impl Condition {
    fn new(label: String, residual: Expr) -> Condition {
        let satisfied = residual.is_zero();
        Condition {
            label,
            residual,
            satisfied,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CanonReport {
    pub case: CaseKind,
    pub conditions: Vec<Condition>,
    pub verdict: bool,
    /// Sign of the Jacobian determinant when determinable.
    pub orientation: Option<i8>,
}

impl CanonReport {
    fn new(case: CaseKind, conditions: Vec<Condition>, orientation: Option<i8>) -> CanonReport {
        let verdict = conditions.iter().all(|c| c.satisfied);
        CanonReport {
            case,
            conditions,
            verdict,
            orientation,
        }
    }
}

/// Memo table of the composition coefficients (I,j) of a 1-D base map:
/// `D_I(F o jpsi) = sum_j (D_j F o jpsi) (I,j)` with the recurrence
/// `(I,j) = (I-1,j-1) det + D_x((I-1,j))`, `(0,0) = 1`, `(j,0) = 0` for
/// `j != 0` and `(I,j) = 0` outside `0 <= j <= I`.
#[derive(Clone, Debug)]
pub struct CompCoeffs {
    bundle: Arc<Bundle>,
    det: Expr,
    max: u32,
    table: BTreeMap<(u32, u32), Expr>,
}

impl CompCoeffs {
    pub fn new(prol: &Prolongation) -> Result<CompCoeffs> {
        if prol.bundle().n() != 1 {
            return Err(Error::DimensionMismatch(
                "composition coefficients require a one-dimensional base".into(),
            ));
        }
        Ok(CompCoeffs {
            bundle: prol.bundle().clone(),
            det: prol.det().clone(),
            max: DEFAULT_COMP_COEFF_MAX,
            table: BTreeMap::new(),
        })
    }

    pub fn with_max(mut self, max: u32) -> CompCoeffs {
        self.max = max;
        self
    }

    pub fn get(&mut self, i: u32, j: u32) -> Result<Expr> {
        if i > self.max {
            return Err(Error::CompCoeffRange {
                i,
                j,
                max: self.max,
            });
        }
        if j > i {
            return Ok(Expr::zero());
        }
        if i == 0 {
            return Ok(Expr::one());
        }
        if j == 0 {
            return Ok(Expr::zero());
        }
        if let Some(e) = self.table.get(&(i, j)) {
            return Ok(e.clone());
        }
        let a = self.get(i - 1, j - 1)?.mul(&self.det);
        let prev = self.get(i - 1, j)?;
        let b = total_derivative(&self.bundle, &prev, 0)?;
        let out = a.add(&b);
        self.table.insert((i, j), out.clone());
        Ok(out)
    }
}

fn binomial(n: u32, k: u32) -> BigRational {
    let mut out = BigInt::from(1);
    for i in 0..k.min(n - k) {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(out)
}

/// Scalar operator `w D_x` on a single-field line bundle: canonical iff
/// `D_x(det * du) = 0` and `w o jpsi = w det^2 du^2` where
/// `du = dpsi_E/du`.
pub fn check_case1(prol: &mut Prolongation, op: &DiffOperator) -> Result<CanonReport> {
    let omega = op.scalar_first_order().ok_or_else(|| {
        Error::UnsupportedOperator("case 1 requires a single w*D{x} entry on one field".into())
    })?;
    let bundle = prol.bundle().clone();
    let det = prol.det().clone();
    let du = prol.automorphism().fiber_partial(0, 0);

    let res_i = total_derivative(&bundle, &det.mul(&du), 0)?;
    let rhs = omega.mul(&det.pow(2)?).mul(&du.pow(2)?);
    let res_ii = prol.pullback(&omega)?.sub(&rhs);
    let orientation = prol.orientation();
    Ok(CanonReport::new(
        CaseKind::Case1,
        vec![
            Condition::new("i".into(), res_i),
            Condition::new("ii".into(), res_ii),
        ],
        orientation,
    ))
}

/// First-order matrix operator `w^{abi} D_i`: canonical iff
/// (i) whenever `w^{cdj} != 0` for some c, `D_j(det * dpsi_E^b/du^d) = 0`
/// for all b, and
/// (ii) `w^{abi} o jpsi = det * sum_{cdj} w^{cdj} (dpsi_E^a/du^c)
/// (dpsi_E^b/du^d) D_j psi_M^i` for all (a,b,i).
#[allow(clippy::needless_range_loop)] // indices a, b, i mirror the condition labels
pub fn check_case2(prol: &mut Prolongation, op: &DiffOperator) -> Result<CanonReport> {
    if !op.is_first_order() {
        return Err(Error::UnsupportedOperator(
            "case 2 requires every operator term to be strictly first order".into(),
        ));
    }
    let bundle = prol.bundle().clone();
    let m = bundle.m();
    let n = bundle.n();
    let det = prol.det().clone();
    let jac_matrix = prol.jacobian().matrix.clone();
    let fp: Vec<Vec<Expr>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|c| prol.automorphism().fiber_partial(a, c))
                .collect()
        })
        .collect();

    // source pairs (d, j) with a nonzero coefficient for some c
    let mut active: Vec<(u8, u8)> = Vec::new();
    for ((_, d), terms) in op.entries() {
        for (coeff, index) in terms {
            if coeff.is_zero() {
                continue;
            }
            let j = index.indices()[0];
            if !active.contains(&(*d, j)) {
                active.push((*d, j));
            }
        }
    }
    active.sort_unstable();

    let mut conditions = Vec::new();
    for (d, j) in &active {
        for b in 0..m {
            let res = total_derivative(&bundle, &det.mul(&fp[b][*d as usize]), *j)?;
            conditions.push(Condition::new(
                format!(
                    "i:d={},j={},b={}",
                    bundle.fiber_names()[*d as usize],
                    bundle.base_names()[*j as usize],
                    bundle.fiber_names()[b]
                ),
                res,
            ));
        }
    }

    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                let mut rhs = Expr::zero();
                for ((c, d), terms) in op.entries() {
                    for (coeff, index) in terms {
                        let j = index.indices()[0] as usize;
                        let term = coeff
                            .mul(&fp[a][*c as usize])
                            .mul(&fp[b][*d as usize])
                            .mul(&jac_matrix[j][i]);
                        rhs = rhs.add(&term);
                    }
                }
                rhs = rhs.mul(&det);
                let idx = crate::bundle::MultiIndex::new(vec![i as u8]);
                let lhs = prol.pullback(&op.coeff(a as u8, b as u8, &idx))?;
                conditions.push(Condition::new(
                    format!(
                        "ii:a={},b={},i={}",
                        bundle.fiber_names()[a],
                        bundle.fiber_names()[b],
                        bundle.base_names()[i]
                    ),
                    lhs.sub(&rhs),
                ));
            }
        }
    }
    let orientation = prol.orientation();
    Ok(CanonReport::new(CaseKind::Case2, conditions, orientation))
}

/// Scalar operator tower `sum_I w^I D_x^I` on a single-field line
/// bundle: canonical iff for every I
/// `w^I o jpsi = du * sum_{J>=I} sum_{j=I..J} C(J,j) w^J
/// D_x^{J-j}(det du) (j,I)`.
pub fn check_case3(prol: &mut Prolongation, op: &DiffOperator) -> Result<CanonReport> {
    let tower = op.scalar_tower().ok_or_else(|| {
        Error::UnsupportedOperator("case 3 requires a scalar operator on one field".into())
    })?;
    let bundle = prol.bundle().clone();
    let det = prol.det().clone();
    let du = prol.automorphism().fiber_partial(0, 0);
    let c = det.mul(&du);
    let n_ord = (tower.len() - 1) as u32;
    let mut cc = CompCoeffs::new(prol)?.with_max(DEFAULT_COMP_COEFF_MAX.max(n_ord));

    let mut conditions = Vec::new();
    for i in 0..=n_ord {
        let mut sum = Expr::zero();
        for j_ord in i..=n_ord {
            let omega_j = &tower[j_ord as usize];
            if omega_j.is_zero() {
                continue;
            }
            for j in i..=j_ord {
                let coeff = cc.get(j, i)?;
                if coeff.is_zero() {
                    continue;
                }
                let dcomb = total_derivative_iter(&bundle, &c, 0, j_ord - j)?;
                let term = omega_j
                    .mul(&dcomb)
                    .mul(&coeff)
                    .mul_rational(&binomial(j_ord, j));
                sum = sum.add(&term);
            }
        }
        let rhs = du.mul(&sum);
        let lhs = prol.pullback(&tower[i as usize])?;
        conditions.push(Condition::new(format!("I={i}"), lhs.sub(&rhs)));
    }
    let orientation = prol.orientation();
    Ok(CanonReport::new(CaseKind::Case3, conditions, orientation))
}

/// Case selection: the most specific shape that fits the operator.
pub fn select_case(op: &DiffOperator) -> Result<CaseKind> {
    if op.scalar_first_order().is_some() {
        Ok(CaseKind::Case1)
    } else if op.is_first_order() {
        Ok(CaseKind::Case2)
    } else if op.scalar_tower().is_some() {
        Ok(CaseKind::Case3)
    } else {
        Err(Error::UnsupportedOperator(
            "operator is outside the three supported shapes".into(),
        ))
    }
}

pub fn check_canonical(
    prol: &mut Prolongation,
    op: &DiffOperator,
    case: Option<CaseKind>,
) -> Result<CanonReport> {
    let case = match case {
        Some(c) => c,
        None => select_case(op)?,
    };
    match case {
        CaseKind::Case1 => check_case1(prol, op),
        CaseKind::Case2 => check_case2(prol, op),
        CaseKind::Case3 => check_case3(prol, op),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrossValidateReport {
    pub samples: u32,
    pub preserved: u32,
    /// First sampled density pair whose bracket is not preserved.
    pub counterexample: Option<(Expr, Expr)>,
}

/// Draws seeded random density pairs (P, Q) and tests
/// `{Psi P, Psi Q} = Psi({P, Q})` modulo divergence.
pub fn cross_validate(
    prol: &mut Prolongation,
    op: &DiffOperator,
    samples: u32,
    seed: u64,
) -> Result<CrossValidateReport> {
    select_case(op)?;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bundle = prol.bundle().clone();
    let mut preserved = 0;
    let mut counterexample = None;
    for _ in 0..samples {
        let p = random_density(&bundle, &mut rng);
        let q = random_density(&bundle, &mut rng);
        if bracket_preserved(prol, op, &p, &q)? {
            preserved += 1;
        } else if counterexample.is_none() {
            counterexample = Some((p, q));
        }
    }
    Ok(CrossValidateReport {
        samples,
        preserved,
        counterexample,
    })
}

/// One bracket-preservation trial for a concrete density pair.
pub fn bracket_preserved(
    prol: &mut Prolongation,
    op: &DiffOperator,
    p: &Expr,
    q: &Expr,
) -> Result<bool> {
    let bundle = prol.bundle().clone();
    let tp = prol.transform_density(p)?;
    let tq = prol.transform_density(q)?;
    let lhs = bracket_density(op, &tp, &tq)?.density;
    let inner = bracket_density(op, p, q)?.density;
    let rhs = prol.transform_density(&inner)?;
    equal_mod_divergence(&bundle, &lhs, &rhs)
}
