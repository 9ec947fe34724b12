//! Positive functionals on `M_n(A)` versus representations of `A` with `n`
//! vectors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::modrep::{gns, Gns, Representation};
use crate::scalars::{rat_int, Rational, Scalar};
use crate::staralg::{elementary_matrix, matrix_algebra, AlgElem, Algebra, AlgebraElement, AlgebraRef};

use super::functional::LinearFunctional;
use super::psd::quadratic_form_sesq;

/// A representation of `A` with vectors `φ_1..φ_n` such that
/// `nΩ(A) = Σ_ij ⟨φ_i, π(a_ij) φ_j⟩`.
#[derive(Clone, Debug)]
pub struct LemmaDecomposition {
    pub rep: Representation,
    pub vectors: Vec<Vec<Scalar>>,
    pub n: usize,
    pub gns: Gns,
}

impl LemmaDecomposition {
    /// `Σ_ij ⟨φ_i, π(a_ij) φ_j⟩` for a block matrix over `A`.
    pub fn pairing(&self, blocks: &Matrix<AlgElem>) -> Result<Scalar> {
        let g = self.rep.gram();
        let mut acc = Scalar::zero(self.rep.ctx());
        for i in 0..self.n {
            for j in 0..self.n {
                let pa = self.rep.act_coords(blocks.get(i, j).coords())?;
                let v = pa.mul(&Matrix::column(self.vectors[j].clone(), &acc)).col_vec(0);
                acc += &quadratic_form_sesq(g, &self.vectors[i], &v);
            }
        }
        Ok(acc)
    }
}

fn split(alg: &Algebra, n: usize) -> Result<Option<Algebra>> {
    match alg.structure() {
        Some(st) if st.n == n => Ok(Some(st.base.clone())),
        _ if n == 1 => Ok(None),
        _ => Err(Error::Dimension(format!("functional is not defined on a {n}x{n} matrix algebra"))),
    }
}

/// GNS of `Ω` on `M_n(A)`, with `φ_i = Σ_j ψ_{E_ji}` and `π(a) = Π(a·1_n)`.
pub fn lemma_decompose(omega: &LinearFunctional, n: usize) -> Result<LemmaDecomposition> {
    let alg = omega.algebra.finite().ok_or_else(|| Error::Unsupported("lemma needs a finite algebra".into()))?.clone();
    let g = gns(omega, None)?;
    let Some(base) = split(&alg, n)? else {
        // M_1(A) = A given directly.
        let rep = g.rep.clone();
        return Ok(LemmaDecomposition { rep, vectors: vec![g.cyclic()], n: 1, gns: g });
    };
    let vectors = (0..n)
        .map(|i| {
            let mut sum = AlgElem::zero(&alg);
            for j in 0..n {
                let e = elementary_matrix(&alg, j, i)?;
                sum = AlgElem::new(&alg, sum.coords().iter().zip(e.coords()).map(|(a, b)| a + b).collect());
            }
            g.psi(&AlgebraElement::Finite(sum))
        })
        .collect::<Result<Vec<_>>>()?;
    let zero = AlgElem::zero(&base);
    let mut action = BTreeMap::new();
    for t in 0..base.dim() {
        let mut blocks = Matrix::zeros(n, n, &zero);
        for i in 0..n {
            blocks.set(i, i, AlgElem::basis(&base, t));
        }
        let diag = AlgElem::from_blocks(&alg, &blocks)?;
        action.insert(t, g.rep.act(&AlgebraElement::Finite(diag))?);
    }
    let rep = Representation::new(AlgebraRef::Finite(base), g.rep.carrier.clone(), action)?;
    Ok(LemmaDecomposition { rep, vectors, n, gns: g })
}

/// `Ω(A) = (1/n) Σ_ij ⟨φ_i, π(a_ij) φ_j⟩` as a covector on `M_n(A)`.
pub fn functional_from_rep(pi: &Representation, phis: &[Vec<Scalar>], n: usize) -> Result<LinearFunctional> {
    if phis.len() != n || n == 0 {
        return Err(Error::Dimension(format!("expected {n} vectors, got {}", phis.len())));
    }
    if phis.iter().any(|v| v.len() != pi.rank()) {
        return Err(Error::Dimension("vector length differs from the carrier rank".into()));
    }
    let base = pi.algebra.finite().ok_or_else(|| Error::Unsupported("lemma needs a finite algebra".into()))?;
    let mn = matrix_algebra(base, n);
    let m = base.dim();
    let ctx = pi.ctx();
    let inv_n: Rational = rat_int(n as i64).recip();
    let g = pi.gram();
    let z = Scalar::zero(ctx);
    let mut coords = vec![z.clone(); mn.dim()];
    for t in 0..m {
        let pt = pi.action.get(&t).ok_or_else(|| Error::Unsupported(format!("no action for {}", base.labels()[t])))?;
        let images: Vec<Vec<Scalar>> =
            phis.iter().map(|phi| pt.mul(&Matrix::column(phi.clone(), &z)).col_vec(0)).collect();
        for i in 0..n {
            for j in 0..n {
                coords[(i * n + j) * m + t] = quadratic_form_sesq(g, &phis[i], &images[j]).scale_rational(&inv_n);
            }
        }
    }
    LinearFunctional::covector(&AlgebraRef::Finite(mn), coords)
}
