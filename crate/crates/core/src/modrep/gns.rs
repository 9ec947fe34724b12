//! The GNS construction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ScalarMatrix};
use crate::positivity::{functional_eval, functional_gram, is_positive_functional, FunctionalBody, LinearFunctional};
use crate::scalars::Scalar;
use crate::staralg::{AlgebraElement, AlgebraRef, CappedFunctionAlgebra, Exponents, Observable};

use super::hilbert::{kernel_quotient, null_vectors, PreHilbertModule, Quotient, Representation};

/// GNS representation together with the map `a ↦ ψ_a`.
#[derive(Clone, Debug)]
pub struct Gns {
    pub rep: Representation,
    pub functional: LinearFunctional,
    /// Gram `ω(e_i* e_j)` on the (tracked) basis before the quotient.
    pub pre_gram: ScalarMatrix,
    pub quotient: Quotient,
    /// Basis indices whose action left the tracked subspace.
    pub inadmissible: Vec<usize>,
}

impl Gns {
    /// ψ_a in the quotient basis.
    pub fn psi(&self, a: &AlgebraElement) -> Result<Vec<Scalar>> {
        Ok(self.quotient.project(&a.coords()?))
    }

    /// The cyclic vector ψ_1.
    pub fn cyclic(&self) -> Vec<Scalar> {
        self.psi(&self.rep.algebra.one()).expect("unit is tracked")
    }
}

/// Rebuilds a point functional over a function algebra with another cap.
pub fn with_cap(w: &LinearFunctional, cap: u32) -> Result<LinearFunctional> {
    match (&w.algebra, &w.body) {
        (AlgebraRef::Capped(c), _) if c.cap() == cap => Ok(w.clone()),
        (AlgebraRef::Capped(c), FunctionalBody::Point { point, smoothing }) => {
            let alg = AlgebraRef::Capped(CappedFunctionAlgebra::new(c.sig(), c.rule().clone(), c.ctx(), cap)?);
            LinearFunctional::smoothed_point(&alg, point.clone(), smoothing.clone())
        }
        (AlgebraRef::Capped(_), FunctionalBody::Covector(_)) => {
            Err(Error::UnsupportedFunctionalShape("a covector is tied to its degree cap".into()))
        }
        (AlgebraRef::Finite(_), _) => Ok(w.clone()),
    }
}

/// Left multiplication by the basis element `a` as a matrix on the tracked
/// basis. Out-of-cap monomials are dropped only when they are orthogonal to
/// every tracked element and null; otherwise `None`.
pub(crate) fn left_action_matrix(
    w: &LinearFunctional,
    a: usize,
    elems: &[AlgebraElement],
    nulls: &mut BTreeMap<Exponents, bool>,
) -> Result<Option<ScalarMatrix>> {
    let alg = &w.algebra;
    let m = elems.len();
    let ctx = alg.ctx();
    let ea = alg.basis_element(a);
    let z = Scalar::zero(ctx);
    let mut l = Matrix::zeros(m, m, &z);
    for (j, ej) in elems.iter().enumerate() {
        let prod = ea.try_mul(ej)?;
        let coords = match (&prod, alg) {
            (AlgebraElement::Function { obs, .. }, AlgebraRef::Capped(c)) => {
                let mut kept = Observable::zero(c.sig(), ctx);
                for (e, coef) in obs.terms() {
                    if c.index_of(e).is_some() {
                        kept.add_term(e.clone(), coef);
                        continue;
                    }
                    let negligible = match nulls.get(e) {
                        Some(&b) => b,
                        None => {
                            let b = is_negligible(w, e, elems)?;
                            nulls.insert(e.clone(), b);
                            b
                        }
                    };
                    if !negligible {
                        return Ok(None);
                    }
                }
                c.coords(&kept)?
            }
            _ => prod.coords()?,
        };
        for (i, c) in coords.into_iter().enumerate() {
            l.set(i, j, c);
        }
    }
    Ok(Some(l))
}

fn is_negligible(w: &LinearFunctional, e: &Exponents, elems: &[AlgebraElement]) -> Result<bool> {
    let AlgebraRef::Capped(c) = &w.algebra else { return Ok(false) };
    let m = AlgebraElement::Function {
        alg: c.clone(),
        obs: Observable::monomial(e.clone(), Scalar::one(c.ctx()), c.sig()),
    };
    let ms = crate::matrix::StarRing::star(&m);
    if !functional_eval(w, &ms.try_mul(&m)?)?.is_zero() {
        return Ok(false);
    }
    for x in elems {
        if !functional_eval(w, &crate::matrix::StarRing::star(x).try_mul(&m)?)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// GNS representation of a positive functional. For function algebras the
/// tracked subspace is spanned by the monomials of degree ≤ `cap` (the
/// algebra's own cap when `None`), and only basis elements whose action stays
/// inside it act.
pub fn gns(w: &LinearFunctional, cap: Option<u32>) -> Result<Gns> {
    let w = match cap {
        Some(c) => with_cap(w, c)?,
        None => w.clone(),
    };
    if !is_positive_functional(&w, None)?.is_positive() {
        return Err(Error::NotPositiveFunctional);
    }
    let alg = w.algebra.clone();
    let elems: Vec<AlgebraElement> = (0..alg.dim()).map(|i| alg.basis_element(i)).collect();
    let pre_gram = functional_gram(&w, &elems)?;
    let pre = PreHilbertModule::new(pre_gram.clone())?;
    let (carrier, quotient) = kernel_quotient(&pre)?;
    let nulls_pre = null_vectors(&pre)?;
    let z = Scalar::zero(alg.ctx());

    let mut action = BTreeMap::new();
    let mut inadmissible = Vec::new();
    let mut negligible = BTreeMap::new();
    for a in 0..alg.dim() {
        let Some(l) = left_action_matrix(&w, a, &elems, &mut negligible)? else {
            inadmissible.push(a);
            continue;
        };
        // The action must preserve the null space to descend to the quotient.
        let preserves = nulls_pre.iter().all(|n| {
            let image = l.mul(&Matrix::column(n.clone(), &z));
            pre_gram.mul(&image).is_zero()
        });
        if !preserves {
            inadmissible.push(a);
            continue;
        }
        action.insert(a, quotient.descend(&l));
    }
    if matches!(alg, AlgebraRef::Finite(_)) && !inadmissible.is_empty() {
        return Err(Error::Unsupported("left multiplication does not preserve the null space".into()));
    }
    let rep = Representation::new(alg, carrier, action)?;
    Ok(Gns { rep, functional: w, pre_gram, quotient, inadmissible })
}

/// Basis indices that act in a GNS representation.
pub fn acting_indices(g: &Gns) -> BTreeSet<usize> {
    g.rep.action.keys().copied().collect()
}
