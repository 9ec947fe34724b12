//! Pre-Hilbert spaces over the scalars and *-representations on them.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fraction::{lift, rank, rref, solve, RatFn};
use crate::matrix::{Matrix, ScalarMatrix};
use crate::report::{CheckEntry, Report};
use crate::scalars::{Scalar, TruncationContext};
use crate::staralg::{AlgebraElement, AlgebraRef};

/// Free module of rank `d` over the scalars with a Hermitian Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PreHilbertModule {
    pub gram: ScalarMatrix,
}

impl PreHilbertModule {
    pub fn new(gram: ScalarMatrix) -> Result<Self> {
        if !gram.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        Ok(PreHilbertModule { gram })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn ctx(&self) -> TruncationContext {
        self.gram.ctx()
    }

    /// `⟨v, w⟩ = v* G w`.
    pub fn inner(&self, v: &[Scalar], w: &[Scalar]) -> Scalar {
        crate::positivity::quadratic_form_sesq(&self.gram, v, w)
    }

    /// Nondegenerate over the fraction field.
    pub fn is_nondegenerate(&self) -> bool {
        rank(&self.gram.row_vecs(), self.rank()) == self.rank()
    }
}

/// Canonical surjection onto `V / ker G` with representatives for the
/// quotient basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Quotient {
    /// r × d, sends `e_f` to the class of `e_f` in the quotient basis.
    pub surjection: ScalarMatrix,
    /// d × r, picks the representative `e_{c_k}` of each quotient basis vector.
    pub inclusion: ScalarMatrix,
    pub representatives: Vec<usize>,
}

impl Quotient {
    pub fn rank(&self) -> usize {
        self.surjection.rows()
    }

    /// Operator induced on the quotient, `S T J`.
    pub fn descend(&self, t: &ScalarMatrix) -> ScalarMatrix {
        self.surjection.mul(t).mul(&self.inclusion)
    }

    pub fn project(&self, v: &[Scalar]) -> Vec<Scalar> {
        let z = Scalar::zero(self.surjection.ctx());
        self.surjection.mul(&Matrix::column(v.to_vec(), &z)).col_vec(0)
    }
}

/// Quotient by the null space of the Gram matrix, computed over the fraction
/// field so that vectors of nonzero formal norm (e.g. λ) are kept.
pub fn kernel_quotient(m: &PreHilbertModule) -> Result<(PreHilbertModule, Quotient)> {
    let d = m.rank();
    let ctx = m.ctx();
    let red = rref(lift(&m.gram.row_vecs()), d);
    let r = red.rank();
    let reps = red.pivot_columns();
    let z = Scalar::zero(ctx);
    let mut s = Matrix::zeros(r, d, &z);
    for (k, &(row, _)) in red.pivots.iter().enumerate() {
        for f in 0..d {
            let entry = red.matrix[row][f]
                .to_series(ctx)
                .ok_or_else(|| Error::Unsupported("kernel quotient needs a non-series coefficient".into()))?;
            s.set(k, f, entry);
        }
    }
    let mut j = Matrix::zeros(d, r, &z);
    for (k, &c) in reps.iter().enumerate() {
        j.set(c, k, Scalar::one(ctx));
    }
    let gram = m.gram.select(&reps, &reps);
    Ok((PreHilbertModule { gram }, Quotient { surjection: s, inclusion: j, representatives: reps }))
}

/// Null-space basis of the Gram matrix with series entries.
pub fn null_vectors(m: &PreHilbertModule) -> Result<Vec<Vec<Scalar>>> {
    let ctx = m.ctx();
    rref(lift(&m.gram.row_vecs()), m.rank())
        .nullspace()
        .into_iter()
        .map(|v| {
            v.iter()
                .map(|x| x.to_series(ctx).ok_or_else(|| Error::Unsupported("null vector is not a series".into())))
                .collect()
        })
        .collect()
}

/// Adjoint of `T` with respect to a nondegenerate Gram: the unique `X` with
/// `G X = T* G`, provided its entries are series.
pub fn adjoint_of(t: &ScalarMatrix, m: &PreHilbertModule) -> Result<ScalarMatrix> {
    let d = m.rank();
    if t.rows() != d || t.cols() != d {
        return Err(Error::Dimension("operator and module sizes differ".into()));
    }
    if !m.is_nondegenerate() {
        return Err(Error::NotAdjointable("Gram matrix is degenerate".into()));
    }
    let ctx = m.ctx();
    let rhs = t.adjoint().mul(&m.gram);
    let a = lift(&m.gram.row_vecs());
    let z = Scalar::zero(ctx);
    let mut x = Matrix::zeros(d, d, &z);
    for col in 0..d {
        let b: Vec<RatFn> = rhs.col_vec(col).iter().map(RatFn::from_scalar).collect();
        let sol = solve(&a, &b, d).ok_or_else(|| Error::NotAdjointable("no solution".into()))?;
        for (row, v) in sol.iter().enumerate() {
            let s = v
                .to_series(ctx)
                .ok_or_else(|| Error::NotAdjointable(format!("adjoint entry {v} is not a series")))?;
            x.set(row, col, s);
        }
    }
    if m.gram.mul(&x) != rhs {
        return Err(Error::NotAdjointable("adjoint equation fails after truncation".into()));
    }
    Ok(x)
}

/// *-representation of an algebra on a pre-Hilbert space. For function
/// algebras only some basis monomials have an action (those that stay within
/// the tracked subspace).
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub algebra: AlgebraRef,
    pub carrier: PreHilbertModule,
    pub action: BTreeMap<usize, ScalarMatrix>,
}

impl Representation {
    pub fn new(algebra: AlgebraRef, carrier: PreHilbertModule, action: BTreeMap<usize, ScalarMatrix>) -> Result<Self> {
        let d = carrier.rank();
        if action.values().any(|m| m.rows() != d || m.cols() != d) {
            return Err(Error::Dimension("action matrices must match the carrier rank".into()));
        }
        if action.keys().any(|&k| k >= algebra.dim()) {
            return Err(Error::Dimension("action index beyond algebra dimension".into()));
        }
        Ok(Representation { algebra, carrier, action })
    }

    pub fn rank(&self) -> usize {
        self.carrier.rank()
    }

    pub fn ctx(&self) -> TruncationContext {
        self.carrier.ctx()
    }

    pub fn gram(&self) -> &ScalarMatrix {
        &self.carrier.gram
    }

    /// π(a) for an element in the span of the acting basis elements.
    pub fn act(&self, a: &AlgebraElement) -> Result<ScalarMatrix> {
        let coords = a.coords()?;
        self.act_coords(&coords)
    }

    pub fn act_coords(&self, coords: &[Scalar]) -> Result<ScalarMatrix> {
        let d = self.rank();
        let mut out = Matrix::scalar_zeros(d, d, self.ctx());
        for (k, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = self
                .action
                .get(&k)
                .ok_or_else(|| Error::Unsupported(format!("no action for {}", self.algebra.label(k))))?;
            out = out.add(&m.scale_left(c));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let action: Vec<Value> = (0..self.algebra.dim())
            .map(|k| self.action.get(&k).map_or(Value::Null, ScalarMatrix::to_json))
            .collect();
        json!({"algebra": self.algebra.to_json(), "gram": self.gram().to_json(), "action": action})
    }

    pub fn from_json(v: &Value, ctx: TruncationContext, default_cap: u32) -> Result<Self> {
        let algebra = AlgebraRef::from_json(&v["algebra"], ctx, default_cap)?;
        let gram = Matrix::from_json(&v["gram"], ctx)?;
        let carrier = PreHilbertModule::new(gram)?;
        let entries = v["action"].as_array().ok_or_else(|| Error::Input("action must be an array".into()))?;
        let mut action = BTreeMap::new();
        for (k, m) in entries.iter().enumerate() {
            if !m.is_null() {
                action.insert(k, Matrix::from_json(m, ctx)?);
            }
        }
        Representation::new(algebra, carrier, action)
    }
}

/// Multiplicativity, unit and *-compatibility on basis elements, wherever
/// the action is defined.
pub fn verify_representation(pi: &Representation) -> Report {
    let mut report = Report::new("verify-representation");
    let alg = &pi.algebra;
    let idx: Vec<usize> = pi.action.keys().copied().collect();
    let basis: BTreeMap<usize, AlgebraElement> = idx.iter().map(|&k| (k, alg.basis_element(k))).collect();

    report.push(CheckEntry::from_bool("gram_hermitian", pi.gram().is_hermitian()));

    let unit = match pi.act(&alg.one()) {
        Ok(m) => CheckEntry::from_bool("unit", m == Matrix::scalar_identity(pi.rank(), pi.ctx())),
        Err(e) => CheckEntry::new("unit", crate::report::Verdict::Indeterminate).with_detail(e.to_string()),
    };
    report.push(unit);

    let mut mult = CheckEntry::pass("multiplicative");
    let mut skipped = 0usize;
    'outer: for &i in &idx {
        for &j in &idx {
            let prod = basis[&i].try_mul(&basis[&j]).and_then(|p| pi.act(&p));
            match prod {
                Ok(m) => {
                    if pi.action[&i].mul(&pi.action[&j]) != m {
                        mult = CheckEntry::fail("multiplicative").with_witness(json!([alg.label(i), alg.label(j)]));
                        break 'outer;
                    }
                }
                Err(_) => skipped += 1,
            }
        }
    }
    if skipped > 0 && mult.verdict == crate::report::Verdict::Pass {
        mult = mult.with_detail(format!("{skipped} pairs leave the tracked subspace"));
    }
    report.push(mult);

    let mut adj = CheckEntry::pass("star_compatible");
    for &i in &idx {
        let Ok(star_m) = pi.act(&crate::matrix::StarRing::star(&basis[&i])) else { continue };
        if pi.gram().mul(&star_m) != pi.action[&i].adjoint().mul(pi.gram()) {
            adj = CheckEntry::fail("star_compatible").with_witness(json!(alg.label(i)));
            break;
        }
    }
    report.push(adj);
    report
}
