//! Function algebras seen through a degree filtration, and a handle that
//! covers both kinds of algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use super::finite::{same_algebra, AlgElem, Algebra};
use super::observable::{Exponents, Observable, PhaseSpaceSignature};
use super::rule::{star, StarProductRule};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, ScalarMatrix, StarRing};
use crate::scalars::{Scalar, TruncationContext};

/// Polynomial star-product algebra with the monomials of degree ≤ `cap`
/// as tracked basis. Products are exact; only coordinates are capped.
#[derive(Clone, Debug, PartialEq)]
pub struct CappedFunctionAlgebra {
    sig: PhaseSpaceSignature,
    rule: StarProductRule,
    ctx: TruncationContext,
    cap: u32,
    basis: Vec<Exponents>,
    index: BTreeMap<Exponents, usize>,
}

pub type Capped = Arc<CappedFunctionAlgebra>;

impl CappedFunctionAlgebra {
    pub fn new(sig: PhaseSpaceSignature, rule: StarProductRule, ctx: TruncationContext, cap: u32) -> Result<Capped> {
        rule.check_signature(sig)?;
        let basis = sig.monomials_up_to(cap);
        let index = basis.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(Arc::new(CappedFunctionAlgebra { sig, rule, ctx, cap, basis, index }))
    }

    pub fn sig(&self) -> PhaseSpaceSignature {
        self.sig
    }

    pub fn rule(&self) -> &StarProductRule {
        &self.rule
    }

    pub fn ctx(&self) -> TruncationContext {
        self.ctx
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn basis(&self) -> &[Exponents] {
        &self.basis
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn basis_observable(&self, i: usize) -> Observable {
        Observable::monomial(self.basis[i].clone(), Scalar::one(self.ctx), self.sig)
    }

    pub fn label(&self, i: usize) -> String {
        self.basis_observable(i).to_string()
    }

    pub fn coords(&self, f: &Observable) -> Result<Vec<Scalar>> {
        if f.degree() > self.cap && !f.is_zero() {
            return Err(Error::DegreeCapExceeded { cap: self.cap, degree: f.degree() });
        }
        let mut v = vec![Scalar::zero(self.ctx); self.basis.len()];
        for (e, c) in f.terms() {
            v[self.index[e]] = c.clone();
        }
        Ok(v)
    }

    pub fn mul(&self, f: &Observable, g: &Observable) -> Observable {
        star(f, g, &self.rule, self.ctx).expect("operands belong to this algebra")
    }
}

/// Handle to either kind of algebra.
#[derive(Clone, Debug)]
pub enum AlgebraRef {
    Finite(Algebra),
    Capped(Capped),
}

impl PartialEq for AlgebraRef {
    fn eq(&self, o: &Self) -> bool {
        match (self, o) {
            (AlgebraRef::Finite(a), AlgebraRef::Finite(b)) => same_algebra(a, b),
            (AlgebraRef::Capped(a), AlgebraRef::Capped(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl AlgebraRef {
    pub fn ctx(&self) -> TruncationContext {
        match self {
            AlgebraRef::Finite(a) => a.ctx(),
            AlgebraRef::Capped(c) => c.ctx(),
        }
    }

    /// Dimension of the algebra, or of its tracked subspace.
    pub fn dim(&self) -> usize {
        match self {
            AlgebraRef::Finite(a) => a.dim(),
            AlgebraRef::Capped(c) => c.basis.len(),
        }
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            AlgebraRef::Finite(a) => a.labels()[i].clone(),
            AlgebraRef::Capped(c) => c.label(i),
        }
    }

    pub fn finite(&self) -> Option<&Algebra> {
        match self {
            AlgebraRef::Finite(a) => Some(a),
            AlgebraRef::Capped(_) => None,
        }
    }

    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        match self {
            AlgebraRef::Finite(a) => AlgebraElement::Finite(AlgElem::basis(a, i)),
            AlgebraRef::Capped(c) => AlgebraElement::Function { alg: c.clone(), obs: c.basis_observable(i) },
        }
    }

    pub fn one(&self) -> AlgebraElement {
        match self {
            AlgebraRef::Finite(a) => AlgebraElement::Finite(AlgElem::one(a)),
            AlgebraRef::Capped(c) => AlgebraElement::Function { alg: c.clone(), obs: Observable::one(c.sig, c.ctx) },
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        match self {
            AlgebraRef::Finite(a) => AlgebraElement::Finite(AlgElem::zero(a)),
            AlgebraRef::Capped(c) => AlgebraElement::Function { alg: c.clone(), obs: Observable::zero(c.sig, c.ctx) },
        }
    }

    pub fn from_coords(&self, coords: Vec<Scalar>) -> AlgebraElement {
        match self {
            AlgebraRef::Finite(a) => AlgebraElement::Finite(AlgElem::new(a, coords)),
            AlgebraRef::Capped(c) => {
                let mut obs = Observable::zero(c.sig, c.ctx);
                for (e, s) in c.basis.iter().zip(&coords) {
                    obs.add_term(e.clone(), s);
                }
                AlgebraElement::Function { alg: c.clone(), obs }
            }
        }
    }

    pub fn observable(&self, obs: Observable) -> Result<AlgebraElement> {
        match self {
            AlgebraRef::Capped(c) if obs.sig() == c.sig && obs.ctx() == c.ctx => {
                Ok(AlgebraElement::Function { alg: c.clone(), obs })
            }
            AlgebraRef::Capped(_) => Err(Error::SignatureMismatch),
            AlgebraRef::Finite(_) => Err(Error::ParentMismatch),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AlgebraRef::Finite(a) => a.to_json(),
            AlgebraRef::Capped(c) => json!({
                "function_algebra": {
                    "signature": {"kind": c.sig.kind, "dof": c.sig.dof},
                    "rule": c.rule.name(),
                    "cap": c.cap,
                }
            }),
        }
    }

    /// Finite algebras use the [`super::FiniteStarAlgebra`] formats; function
    /// algebras use `{"function_algebra": {"signature", "rule", "cap"}}`,
    /// with `default_cap` used when `cap` is absent.
    pub fn from_json(v: &Value, ctx: TruncationContext, default_cap: u32) -> Result<AlgebraRef> {
        let Some(f) = v.get("function_algebra") else {
            return Ok(AlgebraRef::Finite(super::FiniteStarAlgebra::from_json(v, ctx)?));
        };
        let sig: PhaseSpaceSignature = serde_json::from_value(f["signature"].clone())
            .map_err(|e| Error::Input(format!("bad signature: {e}")))?;
        if sig.dof == 0 {
            return Err(Error::Input("dof must be positive".into()));
        }
        let rule = match f["rule"].as_str() {
            Some("moyal") => StarProductRule::Moyal,
            Some("wick") => StarProductRule::Wick,
            Some("pointwise") => StarProductRule::Pointwise,
            other => return Err(Error::Input(format!("unknown rule {other:?}"))),
        };
        let cap = f.get("cap").and_then(Value::as_u64).map_or(default_cap, |c| c as u32);
        Ok(AlgebraRef::Capped(CappedFunctionAlgebra::new(sig, rule, ctx, cap)?))
    }
}

/// Element of an [`AlgebraRef`].
#[derive(Clone)]
pub enum AlgebraElement {
    Finite(AlgElem),
    Function { alg: Capped, obs: Observable },
}

impl AlgebraElement {
    pub fn parent(&self) -> AlgebraRef {
        match self {
            AlgebraElement::Finite(a) => AlgebraRef::Finite(a.algebra().clone()),
            AlgebraElement::Function { alg, .. } => AlgebraRef::Capped(alg.clone()),
        }
    }

    pub fn ctx(&self) -> TruncationContext {
        self.parent().ctx()
    }

    /// Coordinates in the (tracked) basis.
    pub fn coords(&self) -> Result<Vec<Scalar>> {
        match self {
            AlgebraElement::Finite(a) => Ok(a.coords().to_vec()),
            AlgebraElement::Function { alg, obs } => alg.coords(obs),
        }
    }

    pub fn as_finite(&self) -> Option<&AlgElem> {
        match self {
            AlgebraElement::Finite(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_observable(&self) -> Option<&Observable> {
        match self {
            AlgebraElement::Function { obs, .. } => Some(obs),
            _ => None,
        }
    }

    pub fn try_mul(&self, o: &AlgebraElement) -> Result<AlgebraElement> {
        match (self, o) {
            (AlgebraElement::Finite(a), AlgebraElement::Finite(b)) => Ok(AlgebraElement::Finite(a.try_mul(b)?)),
            (AlgebraElement::Function { alg, obs }, AlgebraElement::Function { alg: alg2, obs: obs2 }) => {
                if !Arc::ptr_eq(alg, alg2) && alg.rule != alg2.rule {
                    return Err(Error::ParentMismatch);
                }
                Ok(AlgebraElement::Function { alg: alg.clone(), obs: star(obs, obs2, &alg.rule, alg.ctx)? })
            }
            _ => Err(Error::ParentMismatch),
        }
    }

    pub fn scale(&self, s: &Scalar) -> AlgebraElement {
        match self {
            AlgebraElement::Finite(a) => AlgebraElement::Finite(a.scale(s)),
            AlgebraElement::Function { alg, obs } => AlgebraElement::Function { alg: alg.clone(), obs: obs.scale(s) },
        }
    }

    /// Reduction modulo λ.
    pub fn classical_limit(&self) -> AlgebraElement {
        match self {
            AlgebraElement::Finite(a) => {
                AlgebraElement::Finite(AlgElem::new(a.algebra(), a.coords().iter().map(Scalar::classical_limit).collect()))
            }
            AlgebraElement::Function { alg, obs } => {
                AlgebraElement::Function { alg: alg.clone(), obs: obs.classical_limit() }
            }
        }
    }

    /// Image under a faithful matrix form: the algebra's own form for finite
    /// algebras, 1×1 for constant observables, otherwise none.
    pub fn to_matrix(&self) -> Option<ScalarMatrix> {
        match self {
            AlgebraElement::Finite(a) => a.to_matrix(),
            AlgebraElement::Function { obs, .. } => {
                if obs.degree() > 0 && !obs.is_zero() {
                    return None;
                }
                let c = obs.coeff(&vec![0; obs.sig().nvars()]);
                Some(Matrix::from_rows(vec![vec![c]], &Scalar::zero(obs.ctx())))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AlgebraElement::Finite(a) => Value::Array(a.coords().iter().map(Scalar::to_json).collect()),
            AlgebraElement::Function { obs, .. } => obs.to_json(),
        }
    }

    pub fn from_json(alg: &AlgebraRef, v: &Value) -> Result<AlgebraElement> {
        let ctx = alg.ctx();
        match alg {
            AlgebraRef::Finite(a) => {
                let coords = v
                    .as_array()
                    .ok_or_else(|| Error::Input("algebra element must be a coordinate array".into()))?
                    .iter()
                    .map(|s| Scalar::from_json(s, ctx))
                    .collect::<Result<Vec<_>>>()?;
                if coords.len() != a.dim() {
                    return Err(Error::Dimension(format!("expected {} coordinates, got {}", a.dim(), coords.len())));
                }
                Ok(AlgebraElement::Finite(AlgElem::new(a, coords)))
            }
            AlgebraRef::Capped(_) => alg.observable(Observable::from_json(v, ctx)?),
        }
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, o: &Self) -> bool {
        match (self, o) {
            (AlgebraElement::Finite(a), AlgebraElement::Finite(b)) => a == b,
            (AlgebraElement::Function { obs: a, .. }, AlgebraElement::Function { obs: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraElement::Finite(a) => write!(f, "{a}"),
            AlgebraElement::Function { obs, .. } => write!(f, "{obs}"),
        }
    }
}

impl StarRing for AlgebraElement {
    fn zero_like(&self) -> Self {
        self.parent().zero()
    }
    fn one_like(&self) -> Self {
        self.parent().one()
    }
    fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (AlgebraElement::Finite(a), AlgebraElement::Finite(b)) => AlgebraElement::Finite(StarRing::add(a, b)),
            (AlgebraElement::Function { alg, obs }, AlgebraElement::Function { obs: o2, .. }) => {
                AlgebraElement::Function { alg: alg.clone(), obs: obs.add(o2) }
            }
            _ => panic!("sum of elements of different algebras"),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        StarRing::add(self, &StarRing::neg(o))
    }
    fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("product of elements of different algebras")
    }
    fn neg(&self) -> Self {
        match self {
            AlgebraElement::Finite(a) => AlgebraElement::Finite(StarRing::neg(a)),
            AlgebraElement::Function { alg, obs } => AlgebraElement::Function { alg: alg.clone(), obs: obs.neg() },
        }
    }
    fn star(&self) -> Self {
        match self {
            AlgebraElement::Finite(a) => AlgebraElement::Finite(a.star()),
            AlgebraElement::Function { alg, obs } => AlgebraElement::Function { alg: alg.clone(), obs: obs.conj() },
        }
    }
    fn is_zero(&self) -> bool {
        match self {
            AlgebraElement::Finite(a) => StarRing::is_zero(a),
            AlgebraElement::Function { obs, .. } => obs.is_zero(),
        }
    }
}

/// Lifts a matrix over a finite algebra to [`AlgebraElement`] entries.
pub fn lift_matrix(m: &Matrix<AlgElem>) -> Matrix<AlgebraElement> {
    let zero = AlgebraElement::Finite(m.zero_elem().clone());
    Matrix::from_fn(m.rows(), m.cols(), &zero, |i, j| AlgebraElement::Finite(m.get(i, j).clone()))
}

/// Flattens a matrix whose entries all have matrix forms of a common size.
pub fn flatten(m: &Matrix<AlgebraElement>) -> Option<ScalarMatrix> {
    let blocks: Option<Vec<Vec<ScalarMatrix>>> =
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_matrix()).collect()).collect();
    let blocks = blocks?;
    let size = blocks.first().and_then(|r| r.first()).map(|b| b.rows())?;
    if blocks.iter().flatten().any(|b| b.rows() != size) {
        return None;
    }
    Some(Matrix::from_blocks(&blocks, &Scalar::zero(m.zero_elem().ctx())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::gauss_int;

    #[test]
    fn capped_coordinates() {
        let ctx = TruncationContext::new(2);
        let sig = PhaseSpaceSignature::conjugate(1);
        let c = CappedFunctionAlgebra::new(sig, StarProductRule::Wick, ctx, 2).unwrap();
        assert_eq!(c.basis().len(), 6);
        let z = Observable::var(0, sig, ctx);
        let zb = Observable::var(1, sig, ctx);
        let p = c.mul(&z, &zb);
        let coords = c.coords(&p).unwrap();
        assert_eq!(coords[0], Scalar::from_ints(&[0, 2], ctx));
        assert!(matches!(c.coords(&p.pointwise(&z)), Err(Error::DegreeCapExceeded { cap: 2, degree: 3 })));
    }

    #[test]
    fn function_elements_form_a_star_ring() {
        let ctx = TruncationContext::new(2);
        let sig = PhaseSpaceSignature::canonical(1);
        let c = AlgebraRef::Capped(CappedFunctionAlgebra::new(sig, StarProductRule::Moyal, ctx, 2).unwrap());
        let x = c.observable(Observable::var(0, sig, ctx)).unwrap();
        let p = c.observable(Observable::var(1, sig, ctx)).unwrap();
        let comm = x.mul(&p).sub(&p.mul(&x));
        let i_lambda = Scalar::monomial(gauss_int(0, 1), 1, ctx);
        assert_eq!(comm, c.one().scale(&i_lambda));
        assert_eq!(comm.to_matrix().unwrap().get(0, 0), &i_lambda);
        assert!(x.to_matrix().is_none());
    }
}
