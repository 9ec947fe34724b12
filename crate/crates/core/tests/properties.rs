use std::collections::BTreeMap;

use defq_core::modrep::{gns, BimoduleSpec, PreHilbertModule, Representation};
use defq_core::morita::{dual_bases, roundtrip, verify_dual_bases, verify_sme_axioms, EquivalenceBimoduleSpec};
use defq_core::positivity::{
    formal_psd_check, functional_eval, functional_from_rep, is_positive_functional, lemma_decompose, quadratic_form,
    real_sign, LinearFunctional,
};
use defq_core::rieffel::{induce_morphism, intertwines, rieffel_induce, trivial_representation};
use defq_core::scalars::gauss_int;
use defq_core::staralg::{
    matrix_algebra, star, AlgElem, AlgebraElement, AlgebraRef, FiniteStarAlgebra, Observable, PhaseSpaceSignature,
    StarProductRule,
};
use defq_core::{Matrix, OrderedScalar, Scalar, ScalarMatrix, Sign, TruncationContext};
use num_traits::Zero;
use proptest::prelude::*;

fn ordered(ctx: TruncationContext) -> impl Strategy<Value = OrderedScalar> {
    prop::collection::vec(-3i64..=3, ctx.len()).prop_map(move |c| OrderedScalar::from_ints(&c, ctx))
}

fn scalar(ctx: TruncationContext, max_power: usize) -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-3i64..=3, -3i64..=3), max_power + 1).prop_map(move |c| {
        let mut s = Scalar::zero(ctx);
        for (k, (re, im)) in c.into_iter().enumerate() {
            s.set_coeff(k, gauss_int(re, im));
        }
        s
    })
}

fn observable(sig: PhaseSpaceSignature, ctx: TruncationContext) -> impl Strategy<Value = Observable> {
    let monos = sig.monomials_up_to(2);
    prop::collection::vec(scalar(ctx, 1), monos.len()).prop_map(move |cs| {
        let mut f = Observable::zero(sig, ctx);
        for (e, c) in monos.iter().zip(&cs) {
            f.add_term(e.clone(), c);
        }
        f
    })
}

fn upper_triangular(n: usize, ctx: TruncationContext) -> impl Strategy<Value = ScalarMatrix> {
    prop::collection::vec(scalar(ctx, 1), n * n).prop_map(move |v| {
        let z = Scalar::zero(ctx);
        Matrix::from_fn(n, n, &z, |i, j| if j < i { z.clone() } else { v[i * n + j].clone() })
    })
}

fn m2(ctx: TruncationContext) -> AlgebraRef {
    AlgebraRef::Finite(matrix_algebra(&FiniteStarAlgebra::scalars(ctx), 2))
}

fn element(alg: &AlgebraRef, coeffs: &[i64]) -> AlgebraElement {
    let ctx = alg.ctx();
    alg.from_coords(coeffs.iter().map(|&c| Scalar::from_int(c, ctx)).collect())
}

fn direct_sum(h: &Representation, copies: usize) -> Representation {
    let ctx = h.ctx();
    let z = ScalarMatrix::scalar_zeros(h.rank(), h.rank(), ctx);
    let diag = |m: &ScalarMatrix| {
        let rows: Vec<Vec<ScalarMatrix>> =
            (0..copies).map(|i| (0..copies).map(|j| if i == j { m.clone() } else { z.clone() }).collect()).collect();
        Matrix::from_blocks(&rows, &Scalar::zero(ctx))
    };
    let action: BTreeMap<usize, ScalarMatrix> = h.action.iter().map(|(k, m)| (*k, diag(m))).collect();
    Representation::new(h.algebra.clone(), PreHilbertModule::new(diag(h.gram())).unwrap(), action).unwrap()
}

fn kron_identity(m: &ScalarMatrix, n: usize) -> ScalarMatrix {
    let ctx = m.ctx();
    let z = Scalar::zero(ctx);
    Matrix::from_fn(m.rows() * n, m.cols() * n, &z, |i, j| {
        if i % n == j % n {
            m.get(i / n, j / n).clone()
        } else {
            z.clone()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordered_ring_is_totally_ordered(a in ordered(TruncationContext::new(3)), b in ordered(TruncationContext::new(3))) {
        prop_assert!(a.ge(&b) || b.ge(&a));
        prop_assert_eq!(a.ge(&b) && b.ge(&a), a == b);
        prop_assert_eq!((a.clone() - b.clone()).sign() == Sign::Positive, (b.clone() - a.clone()).sign() == Sign::Negative);
    }

    #[test]
    fn ordered_ring_is_compatible(
        a in ordered(TruncationContext::new(3)),
        b in ordered(TruncationContext::new(3)),
        c in ordered(TruncationContext::new(3)),
    ) {
        if a.ge(&b) {
            prop_assert!((a.clone() + c.clone()).ge(&(b.clone() + c.clone())));
            if c.sign() != Sign::Negative {
                prop_assert!((a.clone() * c.clone()).ge(&(b.clone() * c.clone())));
            }
        }
        if a.ge(&b) && b.ge(&c) {
            prop_assert!(a.ge(&c));
        }
        prop_assert_ne!((a.clone() * a.clone()).sign(), Sign::Negative);
    }

    #[test]
    fn scalar_involution_and_inverse(a in scalar(TruncationContext::new(4), 4), b in scalar(TruncationContext::new(4), 4)) {
        prop_assert_eq!((&a * &b).conj(), &b.conj() * &a.conj());
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_ne!((&a * &a.conj()).re().sign(), Sign::Negative);
        if !a.coeff(0).is_zero() {
            let inv = a.invert().unwrap();
            prop_assert!((&a * &inv).is_one());
        } else {
            prop_assert!(a.invert().is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moyal_is_associative_with_involution(
        f in observable(PhaseSpaceSignature::canonical(1), TruncationContext::new(4)),
        g in observable(PhaseSpaceSignature::canonical(1), TruncationContext::new(4)),
        h in observable(PhaseSpaceSignature::canonical(1), TruncationContext::new(4)),
    ) {
        let ctx = TruncationContext::new(4);
        let r = StarProductRule::Moyal;
        let s = |a: &Observable, b: &Observable| star(a, b, &r, ctx).unwrap();
        prop_assert_eq!(s(&s(&f, &g), &h), s(&f, &s(&g, &h)));
        prop_assert_eq!(s(&f, &g).conj(), s(&g.conj(), &f.conj()));
        prop_assert_eq!(s(&Observable::one(f.sig(), ctx), &f), f.clone());
    }

    #[test]
    fn wick_is_associative_with_involution(
        f in observable(PhaseSpaceSignature::conjugate(1), TruncationContext::new(4)),
        g in observable(PhaseSpaceSignature::conjugate(1), TruncationContext::new(4)),
        h in observable(PhaseSpaceSignature::conjugate(1), TruncationContext::new(4)),
    ) {
        let ctx = TruncationContext::new(4);
        let r = StarProductRule::Wick;
        let s = |a: &Observable, b: &Observable| star(a, b, &r, ctx).unwrap();
        prop_assert_eq!(s(&s(&f, &g), &h), s(&f, &s(&g, &h)));
        prop_assert_eq!(s(&f, &g).conj(), s(&g.conj(), &f.conj()));
    }

    #[test]
    fn gram_matrices_are_certified(y in upper_triangular(3, TruncationContext::new(3))) {
        let ctx = TruncationContext::new(3);
        let h = y.adjoint().mul(&y);
        let v = formal_psd_check(&h).unwrap();
        let cert = v.certificate().expect("Y*Y is positive");
        prop_assert!(cert.verify(&h));
        prop_assert_eq!(cert.reexpand(ctx), h.clone());
        let shifted = h.map(|x| x.shift_up(2));
        prop_assert!(formal_psd_check(&shifted).unwrap().is_positive());
    }

    #[test]
    fn negated_grams_have_witnesses(y in upper_triangular(3, TruncationContext::new(3))) {
        let h = y.adjoint().mul(&y).map(|x| -x);
        if h.is_zero() {
            prop_assert!(formal_psd_check(&h).unwrap().is_positive());
        } else {
            let v = formal_psd_check(&h).unwrap();
            let w = v.witness().expect("-Y*Y with Y != 0 is not positive");
            prop_assert_eq!(real_sign(&quadratic_form(&h, w)), Sign::Negative);
        }
    }

    #[test]
    fn cauchy_schwarz_in_gns(
        v in prop::collection::vec(scalar(TruncationContext::new(2), 1), 2),
        a in prop::collection::vec(-2i64..=2, 4),
        b in prop::collection::vec(-2i64..=2, 4),
    ) {
        let ctx = TruncationContext::new(2);
        let alg = m2(ctx);
        prop_assume!(v.iter().any(|s| !s.is_zero()));
        let w = LinearFunctional::vector_state(&alg, &v).unwrap();
        let g = gns(&w, None).unwrap();
        let (pa, pb) = (g.psi(&element(&alg, &a)).unwrap(), g.psi(&element(&alg, &b)).unwrap());
        let ab = g.rep.carrier.inner(&pa, &pb);
        let lhs = &ab * &ab.conj();
        let rhs = &g.rep.carrier.inner(&pa, &pa) * &g.rep.carrier.inner(&pb, &pb);
        prop_assert!(rhs.re().ge(&lhs.re()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lemma_round_trip(phis in prop::collection::vec(prop::collection::vec(-2i64..=2, 4), 2)) {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        let h = gns(&LinearFunctional::normalized_trace(&a).unwrap(), None).unwrap().rep;
        let phis: Vec<Vec<Scalar>> = phis.iter().map(|p| p.iter().map(|&c| Scalar::from_int(c, ctx)).collect()).collect();
        let omega = functional_from_rep(&h, &phis, 2).unwrap();
        prop_assert!(is_positive_functional(&omega, None).unwrap().is_positive());
        let dec = lemma_decompose(&omega, 2).unwrap();
        let big = omega.algebra.finite().unwrap().clone();
        for k in 0..big.dim() {
            let e = AlgElem::basis(&big, k);
            let lhs = functional_eval(&omega, &AlgebraElement::Finite(e.clone())).unwrap();
            prop_assert_eq!(&lhs + &lhs, dec.pairing(&e.to_blocks().unwrap()).unwrap());
        }
    }

    #[test]
    fn induction_is_functorial(
        m in prop::collection::vec(-2i64..=2, 4),
        n in prop::collection::vec(-2i64..=2, 4),
    ) {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        let h = gns(&LinearFunctional::normalized_trace(&a).unwrap(), None).unwrap().rep;
        let h2 = direct_sum(&h, 2);
        let ind = rieffel_induce(&BimoduleSpec::standard(&a, 2).unwrap(), &h2).unwrap();
        let small = |c: &[i64]| Matrix::from_fn(2, 2, &Scalar::zero(ctx), |i, j| Scalar::from_int(c[i * 2 + j], ctx));
        let (vm, vn) = (kron_identity(&small(&m), h.rank()), kron_identity(&small(&n), h.rank()));
        prop_assert!(intertwines(&vm, &h2, &h2));
        let (rm, rn) = (induce_morphism(&vm, &ind, &ind), induce_morphism(&vn, &ind, &ind));
        prop_assert!(intertwines(&rm, &ind.rep, &ind.rep));
        prop_assert_eq!(induce_morphism(&vm.mul(&vn), &ind, &ind), rm.mul(&rn));
        let id = ScalarMatrix::scalar_identity(h2.rank(), ctx);
        prop_assert_eq!(induce_morphism(&id, &ind, &ind), ScalarMatrix::scalar_identity(ind.rep.rank(), ctx));
        // R(V*) is the carrier adjoint of R(V).
        let g = ind.rep.gram();
        prop_assert_eq!(g.mul(&induce_morphism(&vm.adjoint(), &ind, &ind)), rm.adjoint().mul(g));
    }

    #[test]
    fn morita_axioms_hold_for_any_seed(seed in any::<u64>(), n in 1usize..=3) {
        let ctx = TruncationContext::new(2);
        let s = AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx));
        let spec = EquivalenceBimoduleSpec::standard(&s, n).unwrap();
        let r = verify_sme_axioms(&spec, 4, seed);
        prop_assert!(r.passed(), "{}", r.to_text());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn roundtrip_is_natural(a in -3i64..=3, b in -3i64..=3, n in 2usize..=3) {
        let ctx = TruncationContext::new(2);
        let alg = m2(ctx);
        let w = LinearFunctional::vector_state(&alg, &[Scalar::one(ctx), Scalar::from_ints(&[0, 1], ctx)]).unwrap();
        let h = gns(&w, None).unwrap().rep;
        let h2 = direct_sum(&h, 2);
        let col = Matrix::from_fn(2, 1, &Scalar::zero(ctx), |i, _| Scalar::from_int([a, b][i], ctx));
        let v = kron_identity(&col, h.rank());
        prop_assert!(intertwines(&v, &h, &h2));
        let spec = EquivalenceBimoduleSpec::standard(&alg, n).unwrap();
        let (r1, r2) = (roundtrip(&spec, &h).unwrap(), roundtrip(&spec, &h2).unwrap());
        let forward = induce_morphism(&v, &r1.forward, &r2.forward);
        let back = induce_morphism(&forward, &r1.back, &r2.back);
        prop_assert_eq!(r2.canonical.mul(&back), v.mul(&r1.canonical));
    }
}

#[test]
fn dual_bases_reconstruct() {
    let ctx = TruncationContext::new(2);
    for a in [AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx)), m2(ctx)] {
        for n in 1..=3 {
            let spec = EquivalenceBimoduleSpec::standard(&a, n).unwrap();
            let db = dual_bases(&spec).unwrap();
            let r = verify_dual_bases(&spec, &db);
            assert!(r.passed(), "n = {n}: {}", r.to_text());
        }
    }
}

#[test]
fn induction_from_trivial_rep_matches_module() {
    let ctx = TruncationContext::new(3);
    let s = AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx));
    for n in 1..=3 {
        let ind = rieffel_induce(&BimoduleSpec::standard(&s, n).unwrap(), &trivial_representation(ctx)).unwrap();
        assert_eq!(ind.rep.rank(), n);
    }
}
