//! Linear functionals on finite and function algebras.

use num_traits::Zero;
use rand::SeedableRng;
use serde_json::{json, Value};

use super::psd::{formal_psd_check, PSDVerdict};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, ScalarMatrix, StarRing};
use crate::scalars::{gauss_int, Gaussian, Rational, Scalar, TruncationContext};
use crate::staralg::rule::random_observable;
use crate::staralg::{
    star, AlgebraElement, AlgebraRef, CappedFunctionAlgebra, Observable, PhaseSpaceSignature, SignatureKind,
    StarProductRule,
};

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionalBody {
    /// `ω(a) = Σ_k c_k a_k` in the (tracked) basis.
    Covector(Vec<Scalar>),
    /// `ω(f) = (exp(s·Δ) f)(q)` with Δ the flat Laplacian.
    Point { point: Vec<Gaussian>, smoothing: Scalar },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional {
    pub algebra: AlgebraRef,
    pub body: FunctionalBody,
}

impl LinearFunctional {
    pub fn covector(algebra: &AlgebraRef, coords: Vec<Scalar>) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::Dimension(format!("covector has {} entries, algebra has {}", coords.len(), algebra.dim())));
        }
        Ok(LinearFunctional { algebra: algebra.clone(), body: FunctionalBody::Covector(coords) })
    }

    /// Plain evaluation δ_q on a function algebra.
    pub fn point(algebra: &AlgebraRef, point: Vec<Gaussian>) -> Result<Self> {
        let smoothing = Scalar::zero(algebra.ctx());
        Self::smoothed_point(algebra, point, smoothing)
    }

    pub fn smoothed_point(algebra: &AlgebraRef, point: Vec<Gaussian>, smoothing: Scalar) -> Result<Self> {
        let AlgebraRef::Capped(c) = algebra else {
            return Err(Error::UnsupportedFunctionalShape("point evaluation needs a function algebra".into()));
        };
        Observable::slot_values(c.sig(), &point)?;
        Ok(LinearFunctional { algebra: algebra.clone(), body: FunctionalBody::Point { point, smoothing } })
    }

    /// Normalized trace `tr(a)/n` on M_n(scalars).
    pub fn normalized_trace(algebra: &AlgebraRef) -> Result<Self> {
        let alg = algebra.finite().ok_or_else(|| Error::Unsupported("trace needs a finite algebra".into()))?;
        let form = alg.matrix_form().ok_or_else(|| Error::Unsupported("trace needs a matrix form".into()))?;
        let n = Rational::from_integer((form.size as i64).into());
        let coords = form
            .images
            .iter()
            .map(|img| {
                let mut t = Scalar::zero(alg.ctx());
                for i in 0..form.size {
                    t += img.get(i, i);
                }
                t.scale_rational(&n.recip())
            })
            .collect();
        Self::covector(algebra, coords)
    }

    /// Vector functional `a ↦ ⟨v, a v⟩` through the matrix form.
    pub fn vector_state(algebra: &AlgebraRef, v: &[Scalar]) -> Result<Self> {
        let alg = algebra.finite().ok_or_else(|| Error::Unsupported("vector functional needs a finite algebra".into()))?;
        let form = alg.matrix_form().ok_or_else(|| Error::Unsupported("vector functional needs a matrix form".into()))?;
        if v.len() != form.size {
            return Err(Error::Dimension("vector length differs from matrix form size".into()));
        }
        let coords = form.images.iter().map(|img| super::psd::quadratic_form_sesq(img, v, v)).collect();
        Self::covector(algebra, coords)
    }

    pub fn ctx(&self) -> TruncationContext {
        self.algebra.ctx()
    }

    pub fn to_json(&self) -> Value {
        match &self.body {
            FunctionalBody::Covector(c) => {
                json!({"kind": "covector", "coords": c.iter().map(Scalar::to_json).collect::<Vec<_>>()})
            }
            FunctionalBody::Point { point, smoothing } => json!({
                "kind": "point",
                "point": point.iter().map(|g| Scalar::constant(g.clone(), TruncationContext::new(0)).to_json()[0].clone()).collect::<Vec<_>>(),
                "smoothing": smoothing.to_json(),
            }),
        }
    }

    pub fn from_json(v: &Value, algebra: &AlgebraRef) -> Result<Self> {
        let ctx = algebra.ctx();
        match v["kind"].as_str() {
            Some("covector") => {
                let coords = v["coords"]
                    .as_array()
                    .ok_or_else(|| Error::Input("covector needs coords".into()))?
                    .iter()
                    .map(|s| Scalar::from_json(s, ctx))
                    .collect::<Result<Vec<_>>>()?;
                Self::covector(algebra, coords)
            }
            Some("point") => {
                let point = v["point"]
                    .as_array()
                    .ok_or_else(|| Error::Input("point functional needs point".into()))?
                    .iter()
                    .map(|q| Ok(Scalar::from_json(&json!([q.clone()]), TruncationContext::new(0))?.coeff(0)))
                    .collect::<Result<Vec<_>>>()?;
                let smoothing = match v.get("smoothing") {
                    Some(s) => Scalar::from_json(s, ctx)?,
                    None => Scalar::zero(ctx),
                };
                Self::smoothed_point(algebra, point, smoothing)
            }
            Some("trace") => Self::normalized_trace(algebra),
            other => Err(Error::Input(format!("unknown functional kind {other:?}"))),
        }
    }
}

/// `exp(s·Δ) f`, a finite sum on polynomials.
pub fn smooth(f: &Observable, s: &Scalar) -> Observable {
    if s.is_zero() {
        return f.clone();
    }
    let mut out = f.clone();
    let mut term = f.clone();
    let mut k: i64 = 1;
    loop {
        term = term.laplacian().scale(&s.scale_rational(&Rational::new(1.into(), k.into())));
        if term.is_zero() {
            return out;
        }
        out = out.add(&term);
        k += 1;
    }
}

pub fn functional_eval(w: &LinearFunctional, a: &AlgebraElement) -> Result<Scalar> {
    if a.parent() != w.algebra {
        return Err(Error::ParentMismatch);
    }
    match &w.body {
        FunctionalBody::Covector(c) => {
            let coords = a.coords()?;
            let mut acc = Scalar::zero(w.ctx());
            for (ck, ak) in c.iter().zip(&coords) {
                if !ck.is_zero() && !ak.is_zero() {
                    acc += &(ck * ak);
                }
            }
            Ok(acc)
        }
        FunctionalBody::Point { point, smoothing } => {
            let f = a.as_observable().ok_or(Error::ParentMismatch)?;
            smooth(f, smoothing).evaluate(point)
        }
    }
}

/// Elements whose Gram matrix decides positivity: the basis of a finite
/// algebra, or the monomials of degree ≤ `cap` of a function algebra.
pub fn test_elements(algebra: &AlgebraRef, cap: Option<u32>) -> Result<Vec<AlgebraElement>> {
    match algebra {
        AlgebraRef::Finite(_) => Ok((0..algebra.dim()).map(|i| algebra.basis_element(i)).collect()),
        AlgebraRef::Capped(c) => {
            let d = cap.unwrap_or(c.cap());
            c.sig()
                .monomials_up_to(d)
                .into_iter()
                .map(|e| algebra.observable(Observable::monomial(e, Scalar::one(c.ctx()), c.sig())))
                .collect()
        }
    }
}

/// `G_ij = ω(e_i* e_j)`.
pub fn functional_gram(w: &LinearFunctional, elems: &[AlgebraElement]) -> Result<ScalarMatrix> {
    let n = elems.len();
    let z = Scalar::zero(w.ctx());
    let mut g = Matrix::zeros(n, n, &z);
    let stars: Vec<AlgebraElement> = elems.iter().map(StarRing::star).collect();
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, functional_eval(w, &stars[i].try_mul(&elems[j])?)?);
        }
    }
    Ok(g)
}

/// Vector `v` with `v*Gv` not real, for a non-Hermitian `G`.
fn non_real_witness(g: &ScalarMatrix) -> Vec<Scalar> {
    let ctx = g.ctx();
    let n = g.rows();
    let unit = |k: usize, c: Gaussian| {
        let mut v = vec![Scalar::zero(ctx); n];
        v[k] = Scalar::constant(c, ctx);
        v
    };
    for i in 0..n {
        if !g.get(i, i).is_real() {
            return unit(i, gauss_int(1, 0));
        }
        for j in 0..n {
            if i != j && g.get(i, j) != &g.get(j, i).conj() {
                for t in [gauss_int(1, 0), gauss_int(0, 1)] {
                    let mut v = unit(i, gauss_int(1, 0));
                    v[j] = Scalar::constant(t, ctx);
                    if !super::psd::quadratic_form(g, &v).is_real() {
                        return v;
                    }
                }
            }
        }
    }
    unreachable!("matrix is not Hermitian")
}

/// Positivity of ω via formal PSD of its Gram matrix. For function algebras
/// the verdict covers arguments of degree ≤ `cap` only.
pub fn is_positive_functional(w: &LinearFunctional, cap: Option<u32>) -> Result<PSDVerdict> {
    let elems = test_elements(&w.algebra, cap)?;
    let g = functional_gram(w, &elems)?;
    if !g.is_hermitian() {
        return Ok(PSDVerdict::NotPositive(non_real_witness(&g)));
    }
    formal_psd_check(&g)
}

/// Element `Σ v_i e_i` for a witness vector over [`test_elements`].
pub fn witness_element(elems: &[AlgebraElement], v: &[Scalar]) -> AlgebraElement {
    let mut acc = elems[0].zero_like();
    for (e, c) in elems.iter().zip(v) {
        if !c.is_zero() {
            acc = acc.add(&e.scale(c));
        }
    }
    acc
}

/// Constant `c` for which `S_c = exp(cλΔ)` followed by `z = x + ip`
/// intertwines the Moyal and Wick products, solved from `S_c(z ⋆ z̄)` and
/// then checked on random polynomial pairs.
pub fn calibrate_weyl_wick_constant(ctx: TruncationContext, samples: usize, seed: u64) -> Result<Rational> {
    if ctx.order < 1 {
        return Err(Error::Unsupported("calibration needs order at least 1".into()));
    }
    let canon = PhaseSpaceSignature::canonical(1);
    let x = Observable::var(0, canon, ctx);
    let p = Observable::var(1, canon, ctx);
    let i = Scalar::constant(gauss_int(0, 1), ctx);
    let z = x.add(&p.scale(&i));
    let zb = x.sub(&p.scale(&i));
    let lam = Scalar::lambda(ctx);
    let h = star(&z, &zb, &StarProductRule::Moyal, ctx)?;
    // S_c(h) = h + cλΔh because Δ²h = 0 for quadratic h.
    let a = h.to_conjugate()?;
    let b = h.laplacian().scale(&lam).to_conjugate()?;
    let target = star(&z.to_conjugate()?, &zb.to_conjugate()?, &StarProductRule::Wick, ctx)?;
    let diff = target.sub(&a);
    let (e, be) = b.terms().iter().find(|(_, c)| !c.is_zero()).ok_or_else(|| Error::Unsupported("degenerate calibration".into()))?;
    let c_series = diff.coeff(e);
    let ratio = c_series.coeff(1) / be.coeff(1);
    if !ratio.im.is_zero() {
        return Err(Error::Unsupported("calibration constant is not real".into()));
    }
    let c = ratio.re.clone();
    if !verify_intertwining(&c, ctx, samples, seed)? {
        return Err(Error::Unsupported("no smoothing constant intertwines the products".into()));
    }
    Ok(c)
}

/// Checks `S_c(f ⋆_M g) = S_c(f) ⋆_W S_c(g)` on random pairs of degree ≤ 3.
pub fn verify_intertwining(c: &Rational, ctx: TruncationContext, samples: usize, seed: u64) -> Result<bool> {
    let canon = PhaseSpaceSignature::canonical(1);
    let s = Scalar::lambda(ctx).scale_rational(c);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let f = random_observable(canon, ctx, 3, &mut rng);
        let g = random_observable(canon, ctx, 3, &mut rng);
        let lhs = smooth(&star(&f, &g, &StarProductRule::Moyal, ctx)?, &s).to_conjugate()?;
        let sf = smooth(&f, &s).to_conjugate()?;
        let sg = smooth(&g, &s).to_conjugate()?;
        if lhs != star(&sf, &sg, &StarProductRule::Wick, ctx)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Positive deformation of the point evaluation `δ_q` for the Moyal product:
/// `δ_q ∘ exp(cλΔ)` with the calibrated constant.
pub fn deform_classical_functional(w0: &LinearFunctional) -> Result<LinearFunctional> {
    let FunctionalBody::Point { point, smoothing } = &w0.body else {
        return Err(Error::UnsupportedFunctionalShape("only point evaluations can be deformed".into()));
    };
    let AlgebraRef::Capped(alg) = &w0.algebra else {
        return Err(Error::UnsupportedFunctionalShape("needs a function algebra".into()));
    };
    if !smoothing.is_zero() {
        return Err(Error::UnsupportedFunctionalShape("functional is already smoothed".into()));
    }
    match alg.rule() {
        StarProductRule::Wick | StarProductRule::Pointwise => return Ok(w0.clone()),
        StarProductRule::Moyal => {}
        StarProductRule::CustomTable(_) => {
            return Err(Error::UnsupportedFunctionalShape("custom rules have no known smoothing".into()))
        }
    }
    debug_assert_eq!(alg.sig().kind, SignatureKind::Canonical);
    let ctx = alg.ctx();
    let c = calibrate_weyl_wick_constant(TruncationContext::new(ctx.order.max(2)), 8, 0)?;
    let s = Scalar::lambda(ctx).scale_rational(&c);
    LinearFunctional::smoothed_point(&w0.algebra, point.clone(), s)
}

/// Function algebra handle, for convenience in tests and the CLI.
pub fn function_algebra(sig: PhaseSpaceSignature, rule: StarProductRule, ctx: TruncationContext, cap: u32) -> Result<AlgebraRef> {
    Ok(AlgebraRef::Capped(CappedFunctionAlgebra::new(sig, rule, ctx, cap)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;
    use crate::staralg::{elementary_matrix, matrix_algebra, AlgElem, FiniteStarAlgebra};

    #[test]
    fn trace_values() {
        let ctx = TruncationContext::new(2);
        let m2 = matrix_algebra(&FiniteStarAlgebra::scalars(ctx), 2);
        let alg = AlgebraRef::Finite(m2.clone());
        let tr = LinearFunctional::normalized_trace(&alg).unwrap();
        let e11 = AlgebraElement::Finite(elementary_matrix(&m2, 0, 0).unwrap());
        assert_eq!(functional_eval(&tr, &e11).unwrap(), Scalar::from_rational(rat(1, 2), ctx));
        assert_eq!(functional_eval(&tr, &alg.one()).unwrap(), Scalar::one(ctx));
        assert!(is_positive_functional(&tr, None).unwrap().is_positive());
    }

    #[test]
    fn difference_of_diagonals_is_not_positive() {
        let ctx = TruncationContext::new(2);
        let d = FiniteStarAlgebra::diagonal(2, ctx);
        let alg = AlgebraRef::Finite(d.clone());
        let w = LinearFunctional::covector(&alg, vec![Scalar::one(ctx), Scalar::from_int(-1, ctx)]).unwrap();
        let v = is_positive_functional(&w, None).unwrap();
        let elems = test_elements(&alg, None).unwrap();
        let wit = witness_element(&elems, v.witness().unwrap());
        assert_eq!(wit, AlgebraElement::Finite(AlgElem::basis(&d, 1)));
    }

    #[test]
    fn wick_point_evaluation() {
        let ctx = TruncationContext::new(3);
        let sig = PhaseSpaceSignature::conjugate(1);
        let alg = function_algebra(sig, StarProductRule::Wick, ctx, 3).unwrap();
        let d0 = LinearFunctional::point(&alg, vec![gauss_int(0, 0)]).unwrap();
        let z = alg.observable(Observable::var(0, sig, ctx)).unwrap();
        let zb = alg.observable(Observable::var(1, sig, ctx)).unwrap();
        assert_eq!(functional_eval(&d0, &z.mul(&zb)).unwrap(), Scalar::from_ints(&[0, 2], ctx));
        assert!(is_positive_functional(&d0, Some(3)).unwrap().is_positive());
    }

    #[test]
    fn smoothing_constant_is_one_quarter() {
        let ctx = TruncationContext::new(4);
        assert_eq!(calibrate_weyl_wick_constant(ctx, 10, 3).unwrap(), rat(1, 4));
        assert!(!verify_intertwining(&rat(1, 2), ctx, 5, 3).unwrap());
    }

    #[test]
    fn moyal_origin_needs_correction() {
        let ctx = TruncationContext::new(4);
        let sig = PhaseSpaceSignature::canonical(1);
        let alg = function_algebra(sig, StarProductRule::Moyal, ctx, 4).unwrap();
        let d0 = LinearFunctional::point(&alg, vec![gauss_int(0, 0), gauss_int(0, 0)]).unwrap();
        let x = Observable::var(0, sig, ctx);
        let p = Observable::var(1, sig, ctx);
        let u = alg.observable(x.pow(2).add(&p.pow(2))).unwrap();
        assert_eq!(functional_eval(&d0, &u.mul(&u)).unwrap(), Scalar::from_ints(&[0, 0, -1], ctx));
        assert!(!is_positive_functional(&d0, Some(2)).unwrap().is_positive());
        let w = deform_classical_functional(&d0).unwrap();
        assert_eq!(functional_eval(&w, &u.mul(&u)).unwrap(), Scalar::from_ints(&[0, 0, 1], ctx));
        assert!(is_positive_functional(&w, Some(2)).unwrap().is_positive());
    }

    #[test]
    fn non_hermitian_functional_has_witness() {
        let ctx = TruncationContext::new(1);
        let m2 = AlgebraRef::Finite(matrix_algebra(&FiniteStarAlgebra::scalars(ctx), 2));
        let mut c = vec![Scalar::zero(ctx); 4];
        c[1] = Scalar::one(ctx);
        let w = LinearFunctional::covector(&m2, c).unwrap();
        let v = is_positive_functional(&w, None).unwrap();
        let elems = test_elements(&m2, None).unwrap();
        let a = witness_element(&elems, v.witness().unwrap());
        assert!(!functional_eval(&w, &a.star().mul(&a)).unwrap().is_real());
    }
}
