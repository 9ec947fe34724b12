//! Inner-product modules `P·Aᵖ` with metric `Q`, and bimodules over them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fraction::rank;
use crate::matrix::{Matrix, ScalarMatrix, StarRing};
use crate::positivity::{formal_psd_check, CertificateTerm, PSDVerdict, PositivityCertificate};
use crate::report::{CheckEntry, Report, Verdict};
use crate::scalars::{rat_int, Gaussian, Scalar, TruncationContext};
use crate::staralg::{flatten, AlgElem, AlgebraElement, AlgebraRef, Observable};

pub type Column = Vec<AlgebraElement>;
pub type AlgMatrix = Matrix<AlgebraElement>;

/// Right module `P·Aᵖ` with inner product `⟨x, y⟩ = x* Q y`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProductModule {
    pub algebra: AlgebraRef,
    pub projection: AlgMatrix,
    pub metric: AlgMatrix,
    /// `R` with `Q = R* R`, when known.
    pub metric_factor: Option<AlgMatrix>,
}

fn check_square(m: &AlgMatrix, p: usize, what: &str) -> Result<()> {
    if m.rows() != p || m.cols() != p {
        return Err(Error::Dimension(format!("{what} must be {p}x{p}")));
    }
    Ok(())
}

impl InnerProductModule {
    pub fn new(algebra: AlgebraRef, projection: AlgMatrix, metric: AlgMatrix) -> Result<Self> {
        let p = projection.rows();
        check_square(&projection, p, "projection")?;
        check_square(&metric, p, "metric")?;
        if projection.mul(&projection) != projection || !projection.is_hermitian() {
            return Err(Error::Input("projection must satisfy P = P² = P*".into()));
        }
        if !metric.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        Ok(InnerProductModule { algebra, projection, metric, metric_factor: None })
    }

    /// Metric given as `R* R`.
    pub fn with_factor(algebra: AlgebraRef, projection: AlgMatrix, factor: AlgMatrix) -> Result<Self> {
        let mut m = Self::new(algebra, projection, factor.adjoint().mul(&factor))?;
        m.metric_factor = Some(factor);
        Ok(m)
    }

    /// `Aᵖ` with the standard inner product.
    pub fn free(algebra: &AlgebraRef, p: usize) -> Self {
        let id = Matrix::identity(p, &algebra.one());
        InnerProductModule {
            algebra: algebra.clone(),
            projection: id.clone(),
            metric: id.clone(),
            metric_factor: Some(id),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.projection.rows()
    }

    pub fn ctx(&self) -> TruncationContext {
        self.algebra.ctx()
    }

    pub fn contains(&self, x: &[AlgebraElement]) -> bool {
        self.apply(&self.projection, x) == x
    }

    pub fn project(&self, x: &[AlgebraElement]) -> Column {
        self.apply(&self.projection, x)
    }

    pub fn apply(&self, m: &AlgMatrix, x: &[AlgebraElement]) -> Column {
        m.mul(&Matrix::column(x.to_vec(), &self.algebra.zero())).col_vec(0)
    }

    pub fn inner(&self, x: &[AlgebraElement], y: &[AlgebraElement]) -> AlgebraElement {
        let qy = self.apply(&self.metric, y);
        x.iter().zip(&qy).fold(self.algebra.zero(), |acc, (a, b)| acc.add(&a.star().mul(b)))
    }

    /// `x · a`.
    pub fn right_mul(x: &[AlgebraElement], a: &AlgebraElement) -> Column {
        x.iter().map(|e| e.mul(a)).collect()
    }

    /// `P e_i · e_t`: spans the module over the scalars for finite algebras.
    pub fn spanning_set(&self) -> Vec<Column> {
        let p = self.ambient_rank();
        let mut out = Vec::new();
        for i in 0..p {
            for t in 0..self.algebra.dim() {
                let mut x = vec![self.algebra.zero(); p];
                x[i] = self.algebra.basis_element(t);
                let px = self.project(&x);
                if !px.iter().all(StarRing::is_zero) {
                    out.push(px);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "algebra": self.algebra.to_json(),
            "rank": self.ambient_rank(),
            "projection": alg_matrix_to_json(&self.projection),
            "metric": alg_matrix_to_json(&self.metric),
        });
        if let Some(r) = &self.metric_factor {
            v["metric_factor"] = alg_matrix_to_json(r);
        }
        v
    }

    /// `projection` and `metric` default to the identity; `metric_factor`
    /// replaces `metric` by `R* R`.
    pub fn from_json(v: &Value, ctx: TruncationContext, default_cap: u32) -> Result<Self> {
        let algebra = AlgebraRef::from_json(&v["algebra"], ctx, default_cap)?;
        Self::from_json_over(v, &algebra)
    }

    pub fn from_json_over(v: &Value, algebra: &AlgebraRef) -> Result<Self> {
        let p = v["rank"].as_u64().ok_or_else(|| Error::Input("module needs rank".into()))? as usize;
        let id = Matrix::identity(p, &algebra.one());
        let read = |key: &str| -> Result<Option<AlgMatrix>> {
            match v.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(m) => {
                    let m = alg_matrix_from_json(m, algebra)?;
                    check_square(&m, p, key)?;
                    Ok(Some(m))
                }
            }
        };
        let projection = read("projection")?.unwrap_or_else(|| id.clone());
        if let Some(r) = read("metric_factor")? {
            return Self::with_factor(algebra.clone(), projection, r);
        }
        let metric = read("metric")?.unwrap_or(id);
        Self::new(algebra.clone(), projection, metric)
    }
}

pub fn alg_matrix_to_json(m: &AlgMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| m.get(i, j).to_json()).collect())).collect())
}

pub fn alg_matrix_from_json(v: &Value, algebra: &AlgebraRef) -> Result<AlgMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Input("matrix must be an array of rows".into()))?;
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let r = r.as_array().ok_or_else(|| Error::Input("matrix row must be an array".into()))?;
        out.push(r.iter().map(|x| AlgebraElement::from_json(algebra, x)).collect::<Result<Vec<_>>>()?);
    }
    let cols = out.first().map_or(0, Vec::len);
    if out.iter().any(|r| r.len() != cols) {
        return Err(Error::Input("ragged matrix".into()));
    }
    Ok(Matrix::from_rows(out, &algebra.zero()))
}

/// `(⟨x_i, x_j⟩)_{ij}`.
pub fn module_gram(xs: &[Column], e: &InnerProductModule) -> Result<AlgMatrix> {
    if xs.iter().any(|x| x.len() != e.ambient_rank() || !e.contains(x)) {
        return Err(Error::NotInModule);
    }
    let n = xs.len();
    let mut g = Matrix::zeros(n, n, &e.algebra.zero());
    for i in 0..n {
        for j in i..n {
            let v = e.inner(&xs[i], &xs[j]);
            if i != j {
                g.set(j, i, v.star());
            }
            g.set(i, j, v);
        }
    }
    Ok(g)
}

/// Columns `x_1..x_n` as the p × n matrix `X`.
pub fn columns_matrix(xs: &[Column], zero: &AlgebraElement) -> AlgMatrix {
    let p = xs.first().map_or(0, Vec::len);
    Matrix::from_fn(p, xs.len(), zero, |i, j| xs[j][i].clone())
}

/// Certificate for `Y* Y` with weight one at order zero, one term per row of
/// the flattened `Y`.
pub fn factor_certificate(y: &ScalarMatrix) -> PositivityCertificate {
    let terms = (0..y.rows())
        .map(|r| CertificateTerm {
            weight: rat_int(1),
            order: 0,
            vector: (0..y.cols()).map(|j| y.get(r, j).conj()).collect(),
        })
        .filter(|t| t.vector.iter().any(|s| !s.is_zero()))
        .collect();
    PositivityCertificate { dim: y.cols(), terms }
}

/// Positivity of `(⟨x_i, x_j⟩)` in `M_n(A)`, decided on the flattened matrix.
pub fn cp_check(e: &InnerProductModule, xs: &[Column]) -> PSDVerdict {
    let gram = match module_gram(xs, e) {
        Ok(g) => g,
        Err(err) => return PSDVerdict::Indeterminate(err.to_string()),
    };
    if xs.is_empty() {
        return PSDVerdict::Positive(PositivityCertificate::empty(0));
    }
    let Some(flat) = flatten(&gram) else {
        return PSDVerdict::Indeterminate("algebra has no matrix form over the scalars".into());
    };
    if let Some(r) = &e.metric_factor {
        let y = r.mul(&columns_matrix(xs, &e.algebra.zero()));
        if let Some(fy) = flatten(&y) {
            let cert = factor_certificate(&fy);
            if cert.verify(&flat) {
                return PSDVerdict::Positive(cert);
            }
        }
    }
    formal_psd_check(&flat).unwrap_or_else(|err| PSDVerdict::Indeterminate(err.to_string()))
}

/// Complete positivity on the module's spanning set.
pub fn cp_check_module(e: &InnerProductModule) -> PSDVerdict {
    cp_check(e, &e.spanning_set())
}

fn det_observable(m: &Matrix<Observable>) -> Observable {
    let n = m.rows();
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = Observable::zero(m.get(0, 0).sig(), m.get(0, 0).ctx());
    for j in 0..n {
        let rows: Vec<usize> = (1..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
        let minor = Matrix::from_fn(n - 1, n - 1, m.get(0, 0), |a, b| m.get(rows[a], cols[b]).clone());
        let term = m.get(0, j).pointwise(&det_observable(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

impl StarRing for Observable {
    fn zero_like(&self) -> Self {
        Observable::zero(self.sig(), self.ctx())
    }
    fn one_like(&self) -> Self {
        Observable::one(self.sig(), self.ctx())
    }
    fn add(&self, o: &Self) -> Self {
        Observable::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Observable::sub(self, o)
    }
    /// The commutative (classical) product.
    fn mul(&self, o: &Self) -> Self {
        self.pointwise(o)
    }
    fn neg(&self) -> Self {
        Observable::neg(self)
    }
    fn star(&self) -> Self {
        self.conj()
    }
    fn is_zero(&self) -> bool {
        Observable::is_zero(self)
    }
}

/// Invertibility of a classical (λ-free) metric over its algebra.
fn classically_invertible(h0: &AlgMatrix) -> bool {
    if let Some(flat) = flatten(h0) {
        let n = flat.rows();
        return rank(&flat.row_vecs(), n) == n;
    }
    let obs: Option<Vec<Observable>> = h0.entries().iter().map(|e| e.as_observable().cloned()).collect();
    let Some(obs) = obs else { return false };
    let z = obs[0].zero_like();
    let m = Matrix::from_fn(h0.rows(), h0.cols(), &z, |i, j| obs[i * h0.cols() + j].clone());
    let d = det_observable(&m);
    !d.is_zero() && d.degree() == 0
}

/// Rational sample points for pointwise positivity of a classical metric.
fn sample_points(nvars: usize, count: usize, seed: u64) -> Vec<Vec<Gaussian>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![vec![Gaussian::new(rat_int(0), rat_int(0)); nvars]];
    for _ in 0..count {
        pts.push((0..nvars).map(|_| Gaussian::new(rat_int(rng.gen_range(-3..=3)), rat_int(0))).collect());
    }
    pts
}

/// Classical limit `h₀ = h mod λ` with a report on Hermiticity, positivity
/// and strong nondegeneracy.
pub fn classical_limit_metric(e: &InnerProductModule) -> Result<(InnerProductModule, Report)> {
    let h0 = e.metric.map(AlgebraElement::classical_limit);
    if !classically_invertible(&h0) {
        return Err(Error::NotStronglyNondegenerate);
    }
    let p0 = e.projection.map(AlgebraElement::classical_limit);
    let mut report = Report::new("classical-limit-metric");
    report.push(CheckEntry::from_bool("h0_hermitian", h0.is_hermitian()));
    let positive = match flatten(&h0) {
        Some(flat) => match formal_psd_check(&flat) {
            Ok(v) => v.to_entry("h0_positive"),
            Err(err) => CheckEntry::fail("h0_positive").with_detail(err.to_string()),
        },
        None => pointwise_positivity(&h0),
    };
    report.push(positive);
    report.push(CheckEntry::pass("h0_strongly_nondegenerate"));
    let mut classical = InnerProductModule::new(e.algebra.clone(), p0, h0)?;
    classical.metric_factor = e.metric_factor.as_ref().map(|r| r.map(AlgebraElement::classical_limit));
    Ok((classical, report))
}

/// Positivity of a polynomial metric at sample points; sound for failures,
/// indeterminate otherwise.
fn pointwise_positivity(h0: &AlgMatrix) -> CheckEntry {
    let Some(first) = h0.entries().first().and_then(AlgebraElement::as_observable) else {
        return CheckEntry::new("h0_positive", Verdict::Indeterminate).with_detail("no matrix form");
    };
    let sig = first.sig();
    let ctx = TruncationContext::new(0);
    let n = h0.rows();
    let pts = sample_points(sig.nvars() / if sig.kind == crate::staralg::SignatureKind::Conjugate { 2 } else { 1 }, 16, 0);
    for pt in pts {
        let z = Scalar::zero(ctx);
        let vals: Result<Vec<Scalar>> =
            h0.entries().iter().map(|x| x.as_observable().unwrap().evaluate(&pt).map(|s| s.with_ctx(ctx))).collect();
        let Ok(vals) = vals else { continue };
        let m = Matrix::from_fn(n, n, &z, |i, j| vals[i * n + j].clone());
        if let Ok(PSDVerdict::NotPositive(_)) = formal_psd_check(&m) {
            let p: Vec<String> = pt.iter().map(crate::scalars::fmt_gaussian).collect();
            return CheckEntry::fail("h0_positive").with_witness(json!(p));
        }
    }
    CheckEntry::new("h0_positive", Verdict::Indeterminate).with_detail("positive at all sample points; no certificate")
}

/// `(B, A)`-bimodule: a module over `A` with a left action of `B` by
/// matrices in `M_p(A)`, stored as `P ρ(b) P` per basis element of `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct BimoduleSpec {
    pub module: InnerProductModule,
    pub left: AlgebraRef,
    pub left_action: BTreeMap<usize, AlgMatrix>,
}

impl BimoduleSpec {
    pub fn new(module: InnerProductModule, left: AlgebraRef, action: BTreeMap<usize, AlgMatrix>) -> Result<Self> {
        let p = module.ambient_rank();
        let pm = &module.projection;
        let mut normalized = BTreeMap::new();
        for (k, m) in action {
            check_square(&m, p, "left action")?;
            if k >= left.dim() {
                return Err(Error::Dimension("left action index beyond algebra dimension".into()));
            }
            normalized.insert(k, pm.mul(&m).mul(pm));
        }
        Ok(BimoduleSpec { module, left, left_action: normalized })
    }

    /// `A` as an `(A, A)`-bimodule.
    pub fn identity(a: &AlgebraRef) -> Result<Self> {
        let fin = a.finite().ok_or_else(|| Error::Unsupported("identity bimodule needs a finite algebra".into()))?;
        let action = (0..fin.dim()).map(|k| (k, Matrix::from_rows(vec![vec![a.basis_element(k)]], &a.zero()))).collect();
        Self::new(InnerProductModule::free(a, 1), a.clone(), action)
    }

    /// `Aⁿ` as an `(M_n(A), A)`-bimodule.
    pub fn standard(a: &AlgebraRef, n: usize) -> Result<Self> {
        let fin = a.finite().ok_or_else(|| Error::Unsupported("standard bimodule needs a finite algebra".into()))?;
        let mn = crate::staralg::matrix_algebra(fin, n);
        let left = AlgebraRef::Finite(mn.clone());
        let action = (0..mn.dim())
            .map(|k| {
                let blocks = AlgElem::basis(&mn, k).to_blocks().expect("matrix algebra");
                (k, crate::staralg::lift_matrix(&blocks))
            })
            .collect();
        Self::new(InnerProductModule::free(a, n), left, action)
    }

    pub fn ctx(&self) -> TruncationContext {
        self.module.ctx()
    }

    /// `ρ(b)` for an element in the span of the acting basis elements.
    pub fn act(&self, b: &AlgebraElement) -> Result<AlgMatrix> {
        let p = self.module.ambient_rank();
        let mut out = Matrix::zeros(p, p, &self.module.algebra.zero());
        for (k, c) in b.coords()?.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = self
                .left_action
                .get(&k)
                .ok_or_else(|| Error::Unsupported(format!("no left action for {}", self.left.label(k))))?;
            out = out.add(&m.map(|x| x.scale(c)));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let action: Vec<Value> = (0..self.left.dim())
            .map(|k| self.left_action.get(&k).map_or(Value::Null, alg_matrix_to_json))
            .collect();
        json!({"module": self.module.to_json(), "left_algebra": self.left.to_json(), "left_action": action})
    }

    /// Also accepts `{"builtin": "identity", "algebra": ...}` and
    /// `{"builtin": "standard", "n": k, "algebra": ...}`.
    pub fn from_json(v: &Value, ctx: TruncationContext, default_cap: u32) -> Result<Self> {
        if let Some(b) = v.get("builtin").and_then(Value::as_str) {
            let a = AlgebraRef::from_json(&v["algebra"], ctx, default_cap)?;
            return match b {
                "identity" => Self::identity(&a),
                "standard" => Self::standard(&a, v["n"].as_u64().unwrap_or(1) as usize),
                other => Err(Error::Input(format!("unknown builtin bimodule {other}"))),
            };
        }
        let module = InnerProductModule::from_json(&v["module"], ctx, default_cap)?;
        let left = AlgebraRef::from_json(&v["left_algebra"], ctx, default_cap)?;
        let entries = v["left_action"].as_array().ok_or_else(|| Error::Input("left_action must be an array".into()))?;
        let mut action = BTreeMap::new();
        for (k, m) in entries.iter().enumerate() {
            if !m.is_null() {
                action.insert(k, alg_matrix_from_json(m, &module.algebra)?);
            }
        }
        Self::new(module, left, action)
    }
}

/// Unit, multiplicativity and adjointability of the left action.
pub fn verify_bimodule(spec: &BimoduleSpec) -> Report {
    let mut report = Report::new("verify-bimodule");
    let e = &spec.module;
    let unit = spec.act(&spec.left.one()).map(|m| m == e.projection);
    report.push(match unit {
        Ok(ok) => CheckEntry::from_bool("left_unit", ok),
        Err(err) => CheckEntry::new("left_unit", Verdict::Indeterminate).with_detail(err.to_string()),
    });
    let idx: Vec<usize> = spec.left_action.keys().copied().collect();
    let mut mult = CheckEntry::pass("left_multiplicative");
    'outer: for &i in &idx {
        for &j in &idx {
            let Ok(prod) = spec.left.basis_element(i).try_mul(&spec.left.basis_element(j)) else { continue };
            let Ok(m) = spec.act(&prod) else { continue };
            if spec.left_action[&i].mul(&spec.left_action[&j]) != m {
                mult = CheckEntry::fail("left_multiplicative")
                    .with_witness(json!([spec.left.label(i), spec.left.label(j)]));
                break 'outer;
            }
        }
    }
    report.push(mult);
    let mut adj = CheckEntry::pass("left_adjointable");
    for &i in &idx {
        let Ok(star_m) = spec.act(&spec.left.basis_element(i).star()) else { continue };
        let lhs = spec.left_action[&i].adjoint().mul(&e.metric).mul(&e.projection);
        let rhs = e.projection.mul(&e.metric).mul(&star_m);
        if e.projection.mul(&lhs) != rhs {
            adj = CheckEntry::fail("left_adjointable").with_witness(json!(spec.left.label(i)));
            break;
        }
    }
    report.push(adj);
    report
}

/// `L_a` on coordinates: column `j` holds the coordinates of `a e_j`.
pub fn left_mul_matrix(a: &AlgElem) -> ScalarMatrix {
    let alg = a.algebra();
    let m = alg.dim();
    let z = Scalar::zero(alg.ctx());
    let cols: Vec<Vec<Scalar>> = (0..m).map(|j| a.mul(&AlgElem::basis(alg, j)).coords().to_vec()).collect();
    Matrix::from_fn(m, m, &z, |i, j| cols[j][i].clone())
}

/// `R_a` on coordinates: column `j` holds the coordinates of `e_j a`.
pub fn right_mul_matrix(a: &AlgElem) -> ScalarMatrix {
    let alg = a.algebra();
    let m = alg.dim();
    let z = Scalar::zero(alg.ctx());
    let cols: Vec<Vec<Scalar>> = (0..m).map(|j| AlgElem::basis(alg, j).mul(a).coords().to_vec()).collect();
    Matrix::from_fn(m, m, &z, |i, j| cols[j][i].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staralg::{matrix_algebra, FiniteStarAlgebra};

    fn scalars(ctx: TruncationContext) -> AlgebraRef {
        AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx))
    }

    fn m2(ctx: TruncationContext) -> AlgebraRef {
        AlgebraRef::Finite(matrix_algebra(&FiniteStarAlgebra::scalars(ctx), 2))
    }

    fn s(a: &AlgebraRef, c: &[i64]) -> AlgebraElement {
        a.one().scale(&Scalar::from_ints(c, a.ctx()))
    }

    #[test]
    fn gram_examples() {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        let e = InnerProductModule::free(&a, 2);
        let basis: Vec<Column> = (0..2)
            .map(|i| (0..2).map(|j| if i == j { a.one() } else { a.zero() }).collect())
            .collect();
        assert_eq!(module_gram(&basis, &e).unwrap(), Matrix::identity(2, &a.one()));
        let g = module_gram(&[basis[0].clone(), basis[0].clone()], &e).unwrap();
        assert!(g.entries().iter().all(|x| *x == a.one()));
        assert!(cp_check(&e, &basis).is_positive());
    }

    #[test]
    fn negative_metric_is_not_cp() {
        let ctx = TruncationContext::new(2);
        let a = scalars(ctx);
        let q = Matrix::from_rows(vec![vec![s(&a, &[-1])]], &a.zero());
        let e = InnerProductModule::new(a.clone(), Matrix::identity(1, &a.one()), q).unwrap();
        assert!(matches!(cp_check(&e, &[vec![a.one()]]), PSDVerdict::NotPositive(_)));
    }

    #[test]
    fn projected_module_is_cp() {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        let fin = a.finite().unwrap().clone();
        let e11 = AlgebraElement::Finite(crate::staralg::elementary_matrix(&fin, 0, 0).unwrap());
        let p = Matrix::from_rows(vec![vec![a.one(), a.zero()], vec![a.zero(), e11]], &a.zero());
        let e = InnerProductModule::new(a.clone(), p, Matrix::identity(2, &a.one())).unwrap();
        let mut e = e;
        e.metric_factor = Some(Matrix::identity(2, &a.one()));
        let v = cp_check_module(&e);
        assert!(v.is_positive());
    }

    #[test]
    fn classical_limits() {
        let ctx = TruncationContext::new(2);
        let a = scalars(ctx);
        let id = Matrix::identity(2, &a.one());
        for q in [
            id.clone(),
            id.map(|x| x.scale(&Scalar::from_ints(&[1, 1], ctx))),
            Matrix::from_rows(vec![vec![a.one(), s(&a, &[0, 1])], vec![s(&a, &[0, 1]), a.one()]], &a.zero()),
        ] {
            let e = InnerProductModule::new(a.clone(), id.clone(), q).unwrap();
            let (c, r) = classical_limit_metric(&e).unwrap();
            assert!(r.passed(), "{}", r.to_text());
            assert_eq!(c.metric, id);
        }
        let q = Matrix::from_rows(vec![vec![s(&a, &[0, 1])]], &a.zero());
        let e = InnerProductModule::new(a.clone(), Matrix::identity(1, &a.one()), q).unwrap();
        assert!(matches!(classical_limit_metric(&e), Err(Error::NotStronglyNondegenerate)));
    }

    #[test]
    fn standard_bimodule_is_a_bimodule() {
        let ctx = TruncationContext::new(1);
        let spec = BimoduleSpec::standard(&scalars(ctx), 2).unwrap();
        assert!(verify_bimodule(&spec).passed());
        let back = BimoduleSpec::from_json(&spec.to_json(), ctx, 0).unwrap();
        assert_eq!(back.left_action.len(), 4);
    }
}
