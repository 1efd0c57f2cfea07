//! Exact symbolic engine for variational calculus on jet bundles:
//! rational-function expressions over declared coordinates, total
//! derivatives and the Euler-Lagrange operator, prolonged bundle maps
//! and pullback of densities, Poisson brackets of local functionals,
//! canonicity tests for three operator shapes, and transformation of
//! Hamiltonian evolutionary systems with their conservation laws.

pub mod bundle;
pub mod canon;
pub mod error;
pub mod evosys;
pub mod expr;
pub mod jet;
pub mod parse;
pub mod poisson;
pub mod poly;
pub mod pullback;
pub mod sample;

pub use bundle::{Bundle, MultiIndex, Sym, DEFAULT_MAX_ORDER};
pub use canon::{
    check_canonical, check_case1, check_case2, check_case3, cross_validate, select_case,
    CanonReport, CaseKind, CompCoeffs, Condition, CrossValidateReport,
};
pub use error::{Error, Result};
pub use evosys::EvoSystem;
pub use expr::Expr;
pub use jet::{
    euler_lagrange, is_total_divergence, total_derivative, total_derivative_iter,
    total_derivative_multi, Density,
};
pub use parse::parse;
pub use poisson::{bracket_density, equal_mod_divergence, BracketResult, DiffOperator};
pub use pullback::{
    expr_sign, verify_el_pullback, Automorphism, ElPullbackReport, Jacobian, Prolongation,
};
pub use sample::random_density;
