//! Seeded and property-based invariants of the engine: expression
//! arithmetic, total derivatives, the Euler-Lagrange operator,
//! prolonged maps, brackets, composition coefficients and system
//! transformation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetcalc::{
    bracket_density, check_case1, check_case2, check_case3, cross_validate, equal_mod_divergence,
    euler_lagrange, is_total_divergence, parse, random_density, total_derivative,
    total_derivative_iter, verify_el_pullback, Automorphism, Bundle, CompCoeffs, Density,
    DiffOperator, EvoSystem, Expr, MultiIndex, Prolongation, Sym,
};

fn kdv_bundle() -> Arc<Bundle> {
    Arc::new(
        Bundle::new(
            vec!["x".into()],
            vec!["u".into()],
            vec!["k>0".into(), "t".into()],
        )
        .unwrap(),
    )
}

fn bsq_bundle() -> Arc<Bundle> {
    Arc::new(Bundle::new(vec!["x".into()], vec!["u".into(), "v".into()], vec![]).unwrap())
}

fn e(b: &Bundle, s: &str) -> Expr {
    parse(s, b).unwrap()
}

fn scaling(b: &Arc<Bundle>) -> Prolongation {
    let auto = Automorphism::new(b.clone(), vec![e(b, "x/k")], vec![e(b, "k*u")]).unwrap();
    Prolongation::new(auto).unwrap()
}

fn inversion(b: &Arc<Bundle>) -> Prolongation {
    let auto = Automorphism::new(b.clone(), vec![e(b, "1/x")], vec![e(b, "x^2*u")]).unwrap();
    Prolongation::new(auto).unwrap()
}

fn bsq_inversion(b: &Arc<Bundle>) -> Prolongation {
    let auto = Automorphism::new(
        b.clone(),
        vec![e(b, "1/x")],
        vec![e(b, "x^2*u"), e(b, "x^2*v")],
    )
    .unwrap();
    Prolongation::new(auto).unwrap()
}

/// Random polynomial over an explicit symbol pool.
fn random_over_pool<R: Rng>(pool: &[Sym], max_degree: usize, rng: &mut R) -> Expr {
    loop {
        let terms = rng.gen_range(1..=3);
        let mut out = Expr::zero();
        for _ in 0..terms {
            let mut c: i64 = 0;
            while c == 0 {
                c = rng.gen_range(-3..=3);
            }
            let mut term = Expr::from_rational(BigRational::from_integer(c.into()));
            for _ in 0..rng.gen_range(1..=max_degree) {
                term = term.mul(&Expr::from_sym(pool[rng.gen_range(0..pool.len())].clone()));
            }
            out = out.add(&term);
        }
        if !out.is_zero() {
            return out;
        }
    }
}

// ---- expression arithmetic -------------------------------------------

/// Small random rational functions for the field-axiom checks.
fn expr_strategy() -> impl Strategy<Value = Expr> {
    let b = kdv_bundle();
    let pool: Vec<Expr> = ["x", "u", "u_x", "k", "2", "-3", "1/2"]
        .iter()
        .map(|s| e(&b, s))
        .collect();
    let leaf = proptest::sample::select(pool);
    leaf.prop_recursive(3, 16, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| {
            // alternate the operations deterministically off the content
            if a.num().num_terms() % 2 == 0 {
                a.add(&b)
            } else {
                a.mul(&b)
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in expr_strategy(), b in expr_strategy(), c in expr_strategy()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.sub(&a), Expr::zero());
        prop_assert_eq!(a.add(&Expr::zero()), a.clone());
        prop_assert_eq!(a.mul(&Expr::one()), a.clone());
        if !a.is_zero() {
            prop_assert_eq!(a.div(&a).unwrap(), Expr::one());
            prop_assert_eq!(a.inv().unwrap().mul(&a), Expr::one());
        }
    }

    #[test]
    fn partials_commute(a in expr_strategy()) {
        let b = kdv_bundle();
        let x = b.resolve("x").unwrap();
        let u = b.resolve("u").unwrap();
        prop_assert_eq!(a.partial(&x).partial(&u), a.partial(&u).partial(&x));
    }

    #[test]
    fn partial_is_a_derivation(a in expr_strategy(), b in expr_strategy()) {
        let bundle = kdv_bundle();
        let u = bundle.resolve("u").unwrap();
        let lhs = a.mul(&b).partial(&u);
        let rhs = a.partial(&u).mul(&b).add(&a.mul(&b.partial(&u)));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn substitution_is_a_homomorphism() {
    let b = kdv_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut map = BTreeMap::new();
    map.insert(b.resolve("u").unwrap(), e(&b, "x^2*u + 1"));
    map.insert(b.resolve("x").unwrap(), e(&b, "1/x"));
    for _ in 0..30 {
        let p = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        let sum = p.add(&q).substitute(&map).unwrap();
        assert_eq!(
            sum,
            p.substitute(&map)
                .unwrap()
                .add(&q.substitute(&map).unwrap())
        );
        let prod = p.mul(&q).substitute(&map).unwrap();
        assert_eq!(
            prod,
            p.substitute(&map)
                .unwrap()
                .mul(&q.substitute(&map).unwrap())
        );
    }
}

// ---- total derivatives and the Euler-Lagrange operator ---------------

#[test]
fn total_derivatives_commute_on_plane() {
    let b = Arc::new(Bundle::new(vec!["x".into(), "y".into()], vec!["u".into()], vec![]).unwrap());
    let pool: Vec<Sym> = ["x", "y", "u", "u_x", "u_y", "u_xy"]
        .iter()
        .map(|s| b.resolve(s).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..25 {
        let p = random_over_pool(&pool, 3, &mut rng);
        let dxy = total_derivative(&b, &total_derivative(&b, &p, 1).unwrap(), 0).unwrap();
        let dyx = total_derivative(&b, &total_derivative(&b, &p, 0).unwrap(), 1).unwrap();
        assert_eq!(dxy, dyx);
    }
}

#[test]
fn total_derivative_is_a_derivation() {
    let b = kdv_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..25 {
        let p = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        let lhs = total_derivative(&b, &p.mul(&q), 0).unwrap();
        let rhs = total_derivative(&b, &p, 0)
            .unwrap()
            .mul(&q)
            .add(&p.mul(&total_derivative(&b, &q, 0).unwrap()));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn euler_lagrange_annihilates_total_derivatives() {
    let b = kdv_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let p = random_density(&b, &mut rng);
        let d = total_derivative(&b, &p, 0).unwrap();
        assert_eq!(euler_lagrange(&b, &d).unwrap(), vec![Expr::zero()]);
        assert!(is_total_divergence(&b, &d).unwrap());
    }
}

#[test]
fn euler_lagrange_is_linear() {
    let b = bsq_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let three = BigRational::from_integer(3.into());
    for _ in 0..25 {
        let p = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        let lhs = euler_lagrange(&b, &p.mul_rational(&three).add(&q)).unwrap();
        let ep = euler_lagrange(&b, &p).unwrap();
        let eq = euler_lagrange(&b, &q).unwrap();
        for a in 0..b.m() {
            assert_eq!(lhs[a], ep[a].mul_rational(&three).add(&eq[a]));
        }
    }
}

#[test]
fn divergence_test_is_shift_invariant() {
    let b = kdv_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..25 {
        let p = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        let shifted = p.add(&total_derivative(&b, &q, 0).unwrap());
        assert_eq!(
            is_total_divergence(&b, &p).unwrap(),
            is_total_divergence(&b, &shifted).unwrap()
        );
    }
}

// ---- prolongation and pullback ----------------------------------------

/// `D_i(F o jpsi) = sum_j ((D_j F) o jpsi) D_i psi_M^j` for sampled F.
#[test]
fn chain_rule_identity_on_samples() {
    let b = kdv_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for mk in [scaling as fn(&Arc<Bundle>) -> Prolongation, inversion] {
        let mut prol = mk(&b);
        let jac = prol.jacobian().clone();
        for _ in 0..20 {
            let f = random_density(&b, &mut rng);
            let lhs = total_derivative(&b, &prol.pullback(&f).unwrap(), 0).unwrap();
            let df = total_derivative(&b, &f, 0).unwrap();
            let rhs = prol.pullback(&df).unwrap().mul(&jac.matrix[0][0]);
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn chain_rule_identity_on_plane() {
    let b = Arc::new(Bundle::new(vec!["x".into(), "y".into()], vec!["u".into()], vec![]).unwrap());
    let auto = Automorphism::new(
        b.clone(),
        vec![e(&b, "x + y"), e(&b, "y")],
        vec![e(&b, "x*u + 3*y*u^2")],
    )
    .unwrap();
    let mut prol = Prolongation::new(auto).unwrap();
    let jac = prol.jacobian().clone();
    let pool: Vec<Sym> = ["x", "y", "u", "u_x", "u_y"]
        .iter()
        .map(|s| b.resolve(s).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..6 {
        let f = random_over_pool(&pool, 2, &mut rng);
        for i in 0..2 {
            let lhs = total_derivative(&b, &prol.pullback(&f).unwrap(), i).unwrap();
            let mut rhs = Expr::zero();
            for j in 0..2 {
                let df = total_derivative(&b, &f, j).unwrap();
                rhs = rhs.add(
                    &prol
                        .pullback(&df)
                        .unwrap()
                        .mul(&jac.matrix[i as usize][j as usize]),
                );
            }
            assert_eq!(lhs, rhs, "direction {i}");
        }
    }
}

/// The two recursion paths to a mixed second-order entry agree.
#[test]
fn prolongation_is_symmetric_in_the_index() {
    let b = Arc::new(Bundle::new(vec!["x".into(), "y".into()], vec!["u".into()], vec![]).unwrap());
    let auto = Automorphism::new(
        b.clone(),
        vec![e(&b, "x + y^2"), e(&b, "y")],
        vec![e(&b, "x*u + 3*y*u^2")],
    )
    .unwrap();
    let mut prol = Prolongation::new(auto).unwrap();
    let jac = prol.jacobian().clone();
    let via = |prol: &mut Prolongation, inner: u8, outer: u8| -> Expr {
        let base = prol.entry(0, &MultiIndex::new(vec![inner])).unwrap();
        let mut out = Expr::zero();
        for i in 0..2 {
            let d = total_derivative(&b, &base, i as u8).unwrap();
            out = out.add(&jac.inverse[outer as usize][i].mul(&d));
        }
        out
    };
    assert_eq!(via(&mut prol, 0, 1), via(&mut prol, 1, 0));
    assert_eq!(
        via(&mut prol, 0, 1),
        prol.entry(0, &MultiIndex::new(vec![0, 1])).unwrap()
    );
}

#[test]
fn transformation_composes() {
    let b = kdv_bundle();
    let inv = Automorphism::new(b.clone(), vec![e(&b, "1/x")], vec![e(&b, "x^2*u")]).unwrap();
    let sca = Automorphism::new(b.clone(), vec![e(&b, "x/k")], vec![e(&b, "k*u")]).unwrap();
    // apply `inv` first, then `sca`
    let comp = sca.compose(&inv).unwrap();
    assert_eq!(comp.base_map()[0], e(&b, "1/(k*x)"));
    assert_eq!(comp.fiber_map()[0], e(&b, "k*x^2*u"));

    let mut p_inv = Prolongation::new(inv).unwrap();
    let mut p_sca = Prolongation::new(sca).unwrap();
    let mut p_comp = Prolongation::new(comp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..15 {
        let f = random_density(&b, &mut rng);
        let two_step = p_inv.pullback(&p_sca.pullback(&f).unwrap()).unwrap();
        assert_eq!(p_comp.pullback(&f).unwrap(), two_step);
        let two_step_density = p_inv
            .transform_density(&p_sca.transform_density(&f).unwrap())
            .unwrap();
        assert_eq!(p_comp.transform_density(&f).unwrap(), two_step_density);
    }
}

#[test]
fn pullback_identity_on_samples() {
    let b = kdv_bundle();
    let mut prol = Prolongation::new(Automorphism::identity(b.clone())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..15 {
        let f = random_density(&b, &mut rng);
        assert_eq!(prol.pullback(&f).unwrap(), f);
        assert_eq!(prol.transform_density(&f).unwrap(), f);
    }
}

#[test]
fn euler_lagrange_pullback_identity_on_samples() {
    let b = kdv_bundle();
    let b2 = bsq_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..25 {
        for mk in [scaling as fn(&Arc<Bundle>) -> Prolongation, inversion] {
            let mut prol = mk(&b);
            let p = random_density(&b, &mut rng);
            assert!(verify_el_pullback(&mut prol, &p).unwrap().holds);
        }
        let mut prol = bsq_inversion(&b2);
        let p = random_density(&b2, &mut rng);
        assert!(verify_el_pullback(&mut prol, &p).unwrap().holds);
    }
}

// ---- brackets ----------------------------------------------------------

#[test]
fn bracket_is_antisymmetric_mod_divergence() {
    let b = kdv_bundle();
    let dx = DiffOperator::d_x(b.clone());
    let dx3 = DiffOperator::new(
        b.clone(),
        vec![(0, 0, Expr::one(), MultiIndex::new(vec![0, 0, 0]))],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..50 {
        let p = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        for op in [&dx, &dx3] {
            let pq = bracket_density(op, &p, &q).unwrap().density;
            let qp = bracket_density(op, &q, &p).unwrap().density;
            assert!(is_total_divergence(&b, &pq.add(&qp)).unwrap());
        }
    }
}

#[test]
fn bracket_is_bilinear() {
    let b = kdv_bundle();
    let op = DiffOperator::d_x(b.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let half = BigRational::new(1.into(), 2.into());
    for _ in 0..20 {
        let p1 = random_density(&b, &mut rng);
        let p2 = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        let left = bracket_density(&op, &p1.mul_rational(&half).add(&p2), &q)
            .unwrap()
            .density;
        let split = bracket_density(&op, &p1, &q)
            .unwrap()
            .density
            .mul_rational(&half)
            .add(&bracket_density(&op, &p2, &q).unwrap().density);
        assert_eq!(left, split);

        let right = bracket_density(&op, &q, &p1.mul_rational(&half).add(&p2))
            .unwrap()
            .density;
        let split = bracket_density(&op, &q, &p1)
            .unwrap()
            .density
            .mul_rational(&half)
            .add(&bracket_density(&op, &q, &p2).unwrap().density);
        assert_eq!(right, split);
    }
}

#[test]
fn equal_mod_divergence_is_an_equivalence() {
    let b = kdv_bundle();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..15 {
        let p = random_density(&b, &mut rng);
        let q = random_density(&b, &mut rng);
        let r = random_density(&b, &mut rng);
        assert!(equal_mod_divergence(&b, &p, &p).unwrap());
        assert_eq!(
            equal_mod_divergence(&b, &p, &q).unwrap(),
            equal_mod_divergence(&b, &q, &p).unwrap()
        );
        if equal_mod_divergence(&b, &p, &q).unwrap() && equal_mod_divergence(&b, &q, &r).unwrap() {
            assert!(equal_mod_divergence(&b, &p, &r).unwrap());
        }
        // transitivity on guaranteed-related triples
        let q2 = p.add(&total_derivative(&b, &q, 0).unwrap());
        let r2 = q2.add(&total_derivative(&b, &r, 0).unwrap());
        assert!(equal_mod_divergence(&b, &p, &q2).unwrap());
        assert!(equal_mod_divergence(&b, &q2, &r2).unwrap());
        assert!(equal_mod_divergence(&b, &p, &r2).unwrap());
    }
}

// ---- composition coefficients ------------------------------------------

#[test]
fn comp_coeff_closed_forms() {
    let b = kdv_bundle();
    for mk in [scaling as fn(&Arc<Bundle>) -> Prolongation, inversion] {
        let prol = mk(&b);
        let det = prol.det().clone();
        let mut cc = CompCoeffs::new(&prol).unwrap();
        for i in 1..=6u32 {
            assert_eq!(cc.get(i, i).unwrap(), det.pow(i as i64).unwrap());
            assert_eq!(
                cc.get(i, 1).unwrap(),
                total_derivative_iter(&b, &det, 0, i - 1).unwrap()
            );
        }
    }
}

#[test]
fn comp_coeff_expansion_identity() {
    let b = kdv_bundle();
    let pool: Vec<Sym> = ["x", "u", "u_x"]
        .iter()
        .map(|s| b.resolve(s).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for mk in [scaling as fn(&Arc<Bundle>) -> Prolongation, inversion] {
        for _ in 0..8 {
            let mut prol = mk(&b);
            let mut cc = CompCoeffs::new(&prol).unwrap();
            let f = random_over_pool(&pool, 2, &mut rng);
            for i in 1..=4u32 {
                let lhs = total_derivative_iter(&b, &prol.pullback(&f).unwrap(), 0, i).unwrap();
                let mut rhs = Expr::zero();
                for j in 1..=i {
                    let dj = total_derivative_iter(&b, &f, 0, j).unwrap();
                    rhs = rhs.add(&prol.pullback(&dj).unwrap().mul(&cc.get(i, j).unwrap()));
                }
                assert_eq!(lhs, rhs, "order {i}");
            }
        }
    }
}

// ---- canonicity checks ---------------------------------------------------

#[test]
fn case_checks_specialize_consistently() {
    let b = kdv_bundle();
    let op = DiffOperator::d_x(b.clone());
    let squaring = || {
        Prolongation::new(
            Automorphism::new(b.clone(), vec![e(&b, "x")], vec![e(&b, "u^2")]).unwrap(),
        )
        .unwrap()
    };
    for mk in [
        Box::new(|| scaling(&b)) as Box<dyn Fn() -> Prolongation>,
        Box::new(|| inversion(&b)),
        Box::new(squaring),
    ] {
        let r1 = check_case1(&mut mk(), &op).unwrap();
        let r2 = check_case2(&mut mk(), &op).unwrap();
        let r3 = check_case3(&mut mk(), &op).unwrap();
        assert_eq!(r1.verdict, r2.verdict);
        assert_eq!(r1.verdict, r3.verdict);
        for (a, b2) in r1.conditions.iter().zip(r2.conditions.iter()) {
            assert_eq!(a.residual, b2.residual);
        }
        // on a canonical map every tower row is clean
        if r1.verdict {
            for c in &r3.conditions {
                assert_eq!(c.residual, Expr::zero());
            }
        }
    }
}

#[test]
fn sampling_agrees_with_verdicts() {
    let b = kdv_bundle();
    let op = DiffOperator::d_x(b.clone());
    let rep = cross_validate(&mut inversion(&b), &op, 50, 1).unwrap();
    assert_eq!(rep.preserved, 50);
    assert!(rep.counterexample.is_none());

    let mut squaring = Prolongation::new(
        Automorphism::new(b.clone(), vec![e(&b, "x")], vec![e(&b, "u^2")]).unwrap(),
    )
    .unwrap();
    let rep = cross_validate(&mut squaring, &op, 30, 1).unwrap();
    assert!(rep.counterexample.is_some());
}

// ---- evolutionary systems -------------------------------------------------

fn kdv_system(b: &Arc<Bundle>) -> EvoSystem {
    EvoSystem::new(
        b.clone(),
        DiffOperator::d_x(b.clone()),
        Density::new(b.clone(), e(b, "-1/2*u_x^2 + 1/6*u^3")),
        vec![
            ("P1".into(), Density::new(b.clone(), e(b, "1/2*u^2"))),
            (
                "P2".into(),
                Density::new(b.clone(), e(b, "x*u + 1/2*t*u^2")),
            ),
            ("M".into(), Density::new(b.clone(), e(b, "u"))),
        ],
    )
}

#[test]
fn transformed_claws_stay_conserved() {
    let b = kdv_bundle();
    let sys = kdv_system(&b);
    for mk in [scaling as fn(&Arc<Bundle>) -> Prolongation, inversion] {
        let mut prol = mk(&b);
        let t = sys.transform(&mut prol, true, false).unwrap();
        for (name, ok) in t.verify_claws().unwrap() {
            assert!(ok, "claw {name}");
        }
        // rhs is recomputed from the transformed Hamiltonian
        let el = euler_lagrange(&b, &t.hamiltonian.value).unwrap();
        assert_eq!(t.rhs().unwrap(), t.operator.apply(&el).unwrap());
    }
}

#[test]
fn transform_round_trips_through_the_inverse() {
    let b = kdv_bundle();
    let sys = kdv_system(&b);

    // the inversion map is an involution
    let mut prol = inversion(&b);
    let once = sys.transform(&mut prol, true, false).unwrap();
    let mut prol = inversion(&b);
    let twice = once.transform(&mut prol, true, false).unwrap();
    assert_eq!(twice.hamiltonian.value, sys.hamiltonian.value);
    for ((_, a), (_, b2)) in twice.claws.iter().zip(sys.claws.iter()) {
        assert_eq!(a.value, b2.value);
    }

    // scaling composed with its inverse map
    let mut fwd = scaling(&b);
    let mut bwd = Prolongation::new(
        Automorphism::new(b.clone(), vec![e(&b, "k*x")], vec![e(&b, "u/k")]).unwrap(),
    )
    .unwrap();
    let once = sys.transform(&mut fwd, true, false).unwrap();
    let back = once.transform(&mut bwd, true, false).unwrap();
    assert_eq!(back.hamiltonian.value, sys.hamiltonian.value);
    assert_eq!(back.rhs().unwrap(), sys.rhs().unwrap());
}
