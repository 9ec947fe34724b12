//! Formal positivity of Hermitian matrices over the truncated series ring.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ScalarMatrix};
use crate::scalars::{fmt_gaussian, gauss_int, gauss_real, Gaussian, Rational, Scalar, Sign, TruncationContext};

/// One term `weight · λ^order · v v*`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateTerm {
    pub weight: Rational,
    pub order: usize,
    pub vector: Vec<Scalar>,
}

/// λ-graded sum of rank-one Hermitian squares.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityCertificate {
    pub dim: usize,
    pub terms: Vec<CertificateTerm>,
}

impl PositivityCertificate {
    pub fn empty(dim: usize) -> Self {
        PositivityCertificate { dim, terms: Vec::new() }
    }

    /// `Σ_j c_j λ^{m_j} v_j v_j*`.
    pub fn reexpand(&self, ctx: TruncationContext) -> ScalarMatrix {
        let mut out = Matrix::scalar_zeros(self.dim, self.dim, ctx);
        for t in &self.terms {
            let w = Scalar::monomial(gauss_real(t.weight.clone()), t.order, ctx);
            for i in 0..self.dim {
                if t.vector[i].is_zero() {
                    continue;
                }
                let wi = &w * &t.vector[i];
                for j in 0..self.dim {
                    if !t.vector[j].is_zero() {
                        let e = out.get(i, j) + &(&wi * &t.vector[j].conj());
                        out.set(i, j, e);
                    }
                }
            }
        }
        out
    }

    /// Weights positive and re-expansion equal to `h`.
    pub fn verify(&self, h: &ScalarMatrix) -> bool {
        self.terms.iter().all(|t| t.weight.is_positive()) && self.reexpand(h.ctx()) == *h
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|t| {
                    json!({
                        "weight": fmt_gaussian(&gauss_real(t.weight.clone())),
                        "order": t.order,
                        "vector": t.vector.iter().map(Scalar::to_json).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }

    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|t| {
                let v: Vec<String> = t.vector.iter().map(|s| s.to_string()).collect();
                format!("{}·λ^{}·vv* with v = ({})", fmt_gaussian(&gauss_real(t.weight.clone())), t.order, v.join(", "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PSDVerdict {
    Positive(PositivityCertificate),
    NotPositive(Vec<Scalar>),
    Indeterminate(String),
}

impl PSDVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, PSDVerdict::Positive(_))
    }

    pub fn certificate(&self) -> Option<&PositivityCertificate> {
        match self {
            PSDVerdict::Positive(c) => Some(c),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&[Scalar]> {
        match self {
            PSDVerdict::NotPositive(w) => Some(w),
            _ => None,
        }
    }

    pub fn verdict(&self) -> crate::report::Verdict {
        match self {
            PSDVerdict::Positive(_) => crate::report::Verdict::Pass,
            PSDVerdict::NotPositive(_) => crate::report::Verdict::Fail,
            PSDVerdict::Indeterminate(_) => crate::report::Verdict::Indeterminate,
        }
    }

    /// Report entry carrying the certificate or witness.
    pub fn to_entry(&self, name: &str) -> crate::report::CheckEntry {
        let e = crate::report::CheckEntry::new(name, self.verdict());
        match self {
            PSDVerdict::Positive(c) => e.with_certificate(c.to_json()),
            PSDVerdict::NotPositive(w) => {
                e.with_witness(Value::Array(w.iter().map(|s| json!(s.to_string())).collect()))
            }
            PSDVerdict::Indeterminate(r) => e.with_detail(r.clone()),
        }
    }
}

/// `v* H v`.
pub fn quadratic_form(h: &ScalarMatrix, v: &[Scalar]) -> Scalar {
    quadratic_form_sesq(h, v, v)
}

/// `v* H w`.
pub fn quadratic_form_sesq(h: &ScalarMatrix, v: &[Scalar], w: &[Scalar]) -> Scalar {
    let mut acc = Scalar::zero(h.ctx());
    for i in 0..h.rows() {
        if v[i].is_zero() {
            continue;
        }
        let vi = v[i].conj();
        for j in 0..h.cols() {
            if !w[j].is_zero() && !h.get(i, j).is_zero() {
                acc += &(&vi * &(h.get(i, j) * &w[j]));
            }
        }
    }
    acc
}

/// Sign of a real series in the ordered ring.
pub fn real_sign(s: &Scalar) -> Sign {
    s.re().sign()
}

/// A pivot step, kept to lift witnesses back to the original coordinates.
struct Pivot {
    index: usize,
    /// `u^{-1}` where `u = H_ii / λ^{r0}`.
    u_inv: Scalar,
    /// `g = H_{·i} / λ^{r0}`.
    g: Vec<Scalar>,
}

/// Decides `v*Hv ≥ 0` for all `v` by pivoting on minimal-order positive
/// diagonals; the Schur complement drops the pivot row and column exactly.
pub fn formal_psd_check(h: &ScalarMatrix) -> Result<PSDVerdict> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let n = h.rows();
    let ctx = h.ctx();
    let mut cur = h.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots: Vec<Pivot> = Vec::new();
    let mut cert = PositivityCertificate::empty(n);

    loop {
        let r0 = active
            .iter()
            .flat_map(|&i| active.iter().map(move |&j| (i, j)))
            .filter_map(|(i, j)| cur.get(i, j).valuation())
            .min();
        let Some(r0) = r0 else {
            return Ok(PSDVerdict::Positive(cert));
        };
        let lead = |i: usize, j: usize| -> Gaussian { cur.get(i, j).coeff(r0) };

        if let Some(&i) = active.iter().find(|&&i| lead(i, i).re.is_negative()) {
            let mut w = vec![Scalar::zero(ctx); n];
            w[i] = Scalar::one(ctx);
            return Ok(finish_witness(h, &pivots, w));
        }

        if let Some(&i) = active.iter().find(|&&i| lead(i, i).re.is_positive()) {
            let u = cur.get(i, i).shift_down(r0);
            let u0 = u.coeff(0).re.clone();
            let u_inv = u.invert()?;
            let g: Vec<Scalar> = (0..n).map(|j| cur.get(j, i).shift_down(r0)).collect();
            let normalized = u_inv.scale_rational(&u0);
            let s = normalized.sqrt_one_plus();
            cert.terms.push(CertificateTerm {
                weight: u0.recip(),
                order: r0,
                vector: g.iter().map(|x| x * &s).collect(),
            });
            let lam = Scalar::monomial(gauss_int(1, 0), r0, ctx);
            let coef = &lam * &u_inv;
            for &j in &active {
                if g[j].is_zero() {
                    continue;
                }
                let gj = &coef * &g[j];
                for &k in &active {
                    if !g[k].is_zero() {
                        let e = cur.get(j, k) - &(&gj * &g[k].conj());
                        cur.set(j, k, e);
                    }
                }
            }
            active.retain(|&j| j != i);
            pivots.push(Pivot { index: i, u_inv, g });
            continue;
        }

        // All leading diagonal entries vanish: an off-diagonal leading entry
        // gives a two-dimensional witness.
        let (i, j) = active
            .iter()
            .flat_map(|&i| active.iter().map(move |&j| (i, j)))
            .find(|&(i, j)| i != j && !lead(i, j).is_zero())
            .expect("a leading entry at the minimal order");
        let l = lead(i, j);
        let norm = &l.re * &l.re + &l.im * &l.im;
        let y = Gaussian::new(-&l.re / &norm, &l.im / &norm);
        let mut w = vec![Scalar::zero(ctx); n];
        w[i] = Scalar::one(ctx);
        w[j] = Scalar::constant(y, ctx);
        return Ok(finish_witness(h, &pivots, w));
    }
}

fn finish_witness(h: &ScalarMatrix, pivots: &[Pivot], mut w: Vec<Scalar>) -> PSDVerdict {
    for p in pivots.iter().rev() {
        let mut gw = Scalar::zero(h.ctx());
        for (k, wk) in w.iter().enumerate() {
            if k != p.index && !wk.is_zero() {
                gw += &(&p.g[k].conj() * wk);
            }
        }
        w[p.index] = -(&p.u_inv * &gw);
    }
    if real_sign(&quadratic_form(h, &w)) == Sign::Negative {
        PSDVerdict::NotPositive(w)
    } else {
        PSDVerdict::Indeterminate("witness lifting did not produce a negative value".into())
    }
}

/// Positivity of an element of a matrix algebra over the scalars, decided on
/// its matrix form.
pub fn element_positivity_check(a: &crate::staralg::AlgebraElement) -> PSDVerdict {
    let Some(m) = a.to_matrix() else {
        return PSDVerdict::Indeterminate("element has no matrix form over the scalars".into());
    };
    if !m.is_hermitian() {
        return PSDVerdict::Indeterminate("element is not Hermitian".into());
    }
    formal_psd_check(&m).unwrap_or_else(|e| PSDVerdict::Indeterminate(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> TruncationContext {
        TruncationContext::new(3)
    }

    fn m(rows: &[&[&[i64]]]) -> ScalarMatrix {
        let z = Scalar::zero(ctx());
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|c| Scalar::from_ints(c, ctx())).collect()).collect(), &z)
    }

    #[test]
    fn diag_one_lambda_certificate() {
        let h = m(&[&[&[1], &[0]], &[&[0], &[0, 1]]]);
        let PSDVerdict::Positive(c) = formal_psd_check(&h).unwrap() else { panic!() };
        assert_eq!(c.terms.len(), 2);
        assert_eq!((c.terms[0].order, c.terms[1].order), (0, 1));
        assert_eq!(c.terms[0].vector, vec![Scalar::one(ctx()), Scalar::zero(ctx())]);
        assert_eq!(c.terms[1].vector, vec![Scalar::zero(ctx()), Scalar::one(ctx())]);
        assert!(c.verify(&h));
    }

    #[test]
    fn diag_one_minus_lambda_witness() {
        let h = m(&[&[&[1], &[0]], &[&[0], &[0, -1]]]);
        let w = formal_psd_check(&h).unwrap();
        assert_eq!(w.witness().unwrap(), &[Scalar::zero(ctx()), Scalar::one(ctx())]);
    }

    #[test]
    fn off_diagonal_witness() {
        let h = m(&[&[&[0, 1], &[1]], &[&[1], &[0, 1]]]);
        let w = formal_psd_check(&h).unwrap();
        assert_eq!(w.witness().unwrap(), &[Scalar::one(ctx()), Scalar::from_int(-1, ctx())]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = m(&[&[&[1], &[1]], &[&[0], &[1]]]);
        assert_eq!(formal_psd_check(&h), Err(Error::NotHermitian));
    }

    #[test]
    fn complex_rank_one_with_lambda_correction() {
        let c = ctx();
        let i = Scalar::constant(gauss_int(0, 1), c);
        let v = [Scalar::one(c), i.clone(), Scalar::from_ints(&[2, 1], c)];
        let z = Scalar::zero(c);
        let mut h = Matrix::from_fn(3, 3, &z, |a, b| &v[a] * &v[b].conj());
        h.set(2, 2, h.get(2, 2) + &Scalar::from_ints(&[0, 0, 1], c));
        let PSDVerdict::Positive(cert) = formal_psd_check(&h).unwrap() else { panic!() };
        assert!(cert.verify(&h));
        h.set(2, 2, h.get(2, 2) - &Scalar::from_ints(&[0, 0, 2], c));
        let w = formal_psd_check(&h).unwrap();
        assert_eq!(real_sign(&quadratic_form(&h, w.witness().unwrap())), Sign::Negative);
    }

    #[test]
    fn zero_matrix_is_positive() {
        let h = Matrix::scalar_zeros(2, 2, ctx());
        assert_eq!(formal_psd_check(&h).unwrap(), PSDVerdict::Positive(PositivityCertificate::empty(2)));
    }
}
