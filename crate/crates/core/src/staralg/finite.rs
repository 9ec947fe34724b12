//! Finite-dimensional *-algebras over the scalars, presented by structure
//! constants, and matrix algebras over them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ScalarMatrix, StarRing};
use crate::report::{CheckEntry, Report};
use crate::scalars::{gauss_int, Scalar, TruncationContext};

type Sparse = Vec<(usize, Scalar)>;

/// Faithful *-representation by square scalar matrices, used to decide
/// positivity in the algebra and in matrix algebras over it.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixForm {
    pub size: usize,
    pub images: Vec<ScalarMatrix>,
}

/// Record that an algebra is M_n(base) with basis index `(i·n + j)·m + t`
/// for `E_ij ⊗ e_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixStructure {
    pub n: usize,
    pub base: Algebra,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteStarAlgebra {
    ctx: TruncationContext,
    labels: Vec<String>,
    /// `mult[i][j]` = coordinates of `e_i e_j`, sparse.
    mult: Vec<Vec<Sparse>>,
    /// `inv[j]` = coordinates of `e_j*`, sparse.
    inv: Vec<Sparse>,
    unit: Vec<Scalar>,
    matrix_form: Option<MatrixForm>,
    structure: Option<MatrixStructure>,
}

pub type Algebra = Arc<FiniteStarAlgebra>;

fn sparse(v: &[Scalar]) -> Sparse {
    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.clone())).collect()
}

fn dense(s: &Sparse, m: usize, ctx: TruncationContext) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(ctx); m];
    for (k, c) in s {
        v[*k] = c.clone();
    }
    v
}

impl FiniteStarAlgebra {
    /// Builds an algebra from dense structure constants and involution
    /// matrix (`involution[k][j]` = k-th coordinate of `e_j*`). No axioms are
    /// checked here; see [`verify_algebra`].
    pub fn new(
        labels: Vec<String>,
        mult: Vec<Vec<Vec<Scalar>>>,
        involution: ScalarMatrix,
        unit: Vec<Scalar>,
        ctx: TruncationContext,
    ) -> Result<Self> {
        let m = labels.len();
        if mult.len() != m || mult.iter().any(|r| r.len() != m || r.iter().any(|v| v.len() != m)) {
            return Err(Error::Input(format!("structure constants must be {m}x{m} vectors of length {m}")));
        }
        if involution.rows() != m || involution.cols() != m || unit.len() != m {
            return Err(Error::Input("involution or unit has the wrong size".into()));
        }
        let inv = (0..m).map(|j| sparse(&involution.col_vec(j))).collect();
        let mult = mult.iter().map(|row| row.iter().map(|v| sparse(v)).collect()).collect();
        Ok(FiniteStarAlgebra { ctx, labels, mult, inv, unit, matrix_form: None, structure: None })
    }

    pub fn with_matrix_form(mut self, form: MatrixForm) -> Self {
        self.matrix_form = Some(form);
        self
    }

    /// The scalars as a one-dimensional algebra.
    pub fn scalars(ctx: TruncationContext) -> Algebra {
        let one = Scalar::one(ctx);
        Arc::new(FiniteStarAlgebra {
            ctx,
            labels: vec!["1".into()],
            mult: vec![vec![vec![(0, one.clone())]]],
            inv: vec![vec![(0, one.clone())]],
            unit: vec![one.clone()],
            matrix_form: Some(MatrixForm { size: 1, images: vec![Matrix::scalar_identity(1, ctx)] }),
            structure: None,
        })
    }

    /// Commutative algebra of diagonal n×n matrices.
    pub fn diagonal(n: usize, ctx: TruncationContext) -> Algebra {
        let one = Scalar::one(ctx);
        let mult = (0..n).map(|i| (0..n).map(|j| if i == j { vec![(i, one.clone())] } else { Vec::new() }).collect()).collect();
        let images = (0..n)
            .map(|i| {
                let mut e = Matrix::scalar_zeros(n, n, ctx);
                e.set(i, i, one.clone());
                e
            })
            .collect();
        Arc::new(FiniteStarAlgebra {
            ctx,
            labels: (0..n).map(|i| format!("D{}", i + 1)).collect(),
            mult,
            inv: (0..n).map(|i| vec![(i, one.clone())]).collect(),
            unit: vec![one.clone(); n],
            matrix_form: Some(MatrixForm { size: n, images }),
            structure: None,
        })
    }

    pub fn ctx(&self) -> TruncationContext {
        self.ctx
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix_form(&self) -> Option<&MatrixForm> {
        self.matrix_form.as_ref()
    }

    pub fn structure(&self) -> Option<&MatrixStructure> {
        self.structure.as_ref()
    }

    fn zero_coords(&self) -> Vec<Scalar> {
        vec![Scalar::zero(self.ctx); self.dim()]
    }

    pub fn mul_coords(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let mut out = self.zero_coords();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let ab = ai * bj;
                for (k, c) in &self.mult[i][j] {
                    if c.is_one() {
                        out[*k] += &ab;
                    } else {
                        out[*k] += &(&ab * c);
                    }
                }
            }
        }
        out
    }

    pub fn star_coords(&self, a: &[Scalar]) -> Vec<Scalar> {
        let mut out = self.zero_coords();
        for (j, aj) in a.iter().enumerate() {
            if aj.is_zero() {
                continue;
            }
            let c = aj.conj();
            for (k, s) in &self.inv[j] {
                if s.is_one() {
                    out[*k] += &c;
                } else {
                    out[*k] += &(&c * s);
                }
            }
        }
        out
    }

    pub fn unit_coords(&self) -> &[Scalar] {
        &self.unit
    }

    pub fn basis_coords(&self, i: usize) -> Vec<Scalar> {
        let mut v = self.zero_coords();
        v[i] = Scalar::one(self.ctx);
        v
    }

    pub fn product_of_basis(&self, i: usize, j: usize) -> Vec<Scalar> {
        dense(&self.mult[i][j], self.dim(), self.ctx)
    }

    pub fn involution_matrix(&self) -> ScalarMatrix {
        let m = self.dim();
        let cols: Vec<Vec<Scalar>> = self.inv.iter().map(|s| dense(s, m, self.ctx)).collect();
        Matrix::from_fn(m, m, &Scalar::zero(self.ctx), |k, j| cols[j][k].clone())
    }

    /// Image of coordinates under the matrix form.
    pub fn to_matrix_coords(&self, a: &[Scalar]) -> Option<ScalarMatrix> {
        let form = self.matrix_form.as_ref()?;
        let mut out = Matrix::scalar_zeros(form.size, form.size, self.ctx);
        for (c, img) in a.iter().zip(&form.images) {
            if !c.is_zero() {
                out = out.add(&img.scale_left(c));
            }
        }
        Some(out)
    }

    pub fn to_json(&self) -> Value {
        let m = self.dim();
        let mult: Vec<Vec<Value>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| Value::Array(self.product_of_basis(i, j).iter().map(Scalar::to_json).collect()))
                    .collect()
            })
            .collect();
        let mut v = json!({
            "dim": m,
            "labels": self.labels,
            "unit": self.unit.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "mult": mult,
            "involution": self.involution_matrix().to_json(),
        });
        if let Some(f) = &self.matrix_form {
            v["matrix_form"] = json!({"size": f.size, "images": f.images.iter().map(|m| m.to_json()).collect::<Vec<_>>()});
        }
        v
    }

    /// Accepts either the explicit table form or a builtin description:
    /// `{"builtin": "scalars"}`, `{"builtin": "diagonal", "n": k}`,
    /// `{"builtin": "matrix", "n": k, "base": <algebra>}`.
    pub fn from_json(v: &Value, ctx: TruncationContext) -> Result<Algebra> {
        if let Some(b) = v.get("builtin").and_then(Value::as_str) {
            let n = v.get("n").and_then(Value::as_u64).unwrap_or(1) as usize;
            return match b {
                "scalars" => Ok(Self::scalars(ctx)),
                "diagonal" => Ok(Self::diagonal(n, ctx)),
                "matrix" => {
                    let base = match v.get("base") {
                        Some(b) => Self::from_json(b, ctx)?,
                        None => Self::scalars(ctx),
                    };
                    if n == 0 {
                        return Err(Error::Input("matrix size must be at least 1".into()));
                    }
                    Ok(matrix_algebra(&base, n))
                }
                other => Err(Error::Input(format!("unknown builtin algebra {other}"))),
            };
        }
        let m = v["dim"].as_u64().ok_or_else(|| Error::Input("algebra needs dim".into()))? as usize;
        let labels = match v.get("labels").and_then(Value::as_array) {
            Some(l) => l.iter().map(|s| s.as_str().unwrap_or("?").to_string()).collect(),
            None => (0..m).map(|i| format!("e{}", i + 1)).collect(),
        };
        let vec_of = |x: &Value| -> Result<Vec<Scalar>> {
            x.as_array()
                .ok_or_else(|| Error::Input("coordinate vector must be an array".into()))?
                .iter()
                .map(|s| Scalar::from_json(s, ctx))
                .collect()
        };
        let unit = vec_of(&v["unit"])?;
        let rows = v["mult"].as_array().ok_or_else(|| Error::Input("mult must be an array".into()))?;
        let mut mult = Vec::with_capacity(m);
        for r in rows {
            let r = r.as_array().ok_or_else(|| Error::Input("mult row must be an array".into()))?;
            mult.push(r.iter().map(vec_of).collect::<Result<Vec<_>>>()?);
        }
        let involution = Matrix::from_json(&v["involution"], ctx)?;
        let mut alg = FiniteStarAlgebra::new(labels, mult, involution, unit, ctx)?;
        if let Some(f) = v.get("matrix_form") {
            let size = f["size"].as_u64().ok_or_else(|| Error::Input("matrix_form needs size".into()))? as usize;
            let images = f["images"]
                .as_array()
                .ok_or_else(|| Error::Input("matrix_form needs images".into()))?
                .iter()
                .map(|x| Matrix::from_json(x, ctx))
                .collect::<Result<Vec<_>>>()?;
            if images.len() != m || images.iter().any(|i| i.rows() != size || i.cols() != size) {
                return Err(Error::Input("matrix_form images have the wrong shape".into()));
            }
            alg = alg.with_matrix_form(MatrixForm { size, images });
        }
        Ok(Arc::new(alg))
    }
}

/// M_n(A) with involution (conjugate transpose ∘ entrywise involution).
pub fn matrix_algebra(base: &Algebra, n: usize) -> Algebra {
    assert!(n >= 1, "matrix size must be at least 1");
    let m = base.dim();
    let ctx = base.ctx;
    let idx = |i: usize, j: usize, t: usize| (i * n + j) * m + t;
    let dim = n * n * m;
    let mut mult = vec![vec![Vec::new(); dim]; dim];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for t in 0..m {
                    for s in 0..m {
                        mult[idx(i, j, t)][idx(j, l, s)] =
                            base.mult[t][s].iter().map(|(k, c)| (idx(i, l, *k), c.clone())).collect();
                    }
                }
            }
        }
    }
    let mut inv = vec![Vec::new(); dim];
    for i in 0..n {
        for j in 0..n {
            for t in 0..m {
                inv[idx(i, j, t)] = base.inv[t].iter().map(|(k, c)| (idx(j, i, *k), c.clone())).collect();
            }
        }
    }
    let mut unit = vec![Scalar::zero(ctx); dim];
    for i in 0..n {
        for t in 0..m {
            unit[idx(i, i, t)] = base.unit[t].clone();
        }
    }
    let labels = (0..n)
        .flat_map(|i| (0..n).flat_map(move |j| (0..m).map(move |t| (i, j, t))))
        .map(|(i, j, t)| if m == 1 { format!("E{}{}", i + 1, j + 1) } else { format!("E{}{}⊗{}", i + 1, j + 1, base.labels[t]) })
        .collect();
    let matrix_form = base.matrix_form.as_ref().map(|f| {
        let k = f.size;
        let mut images = Vec::with_capacity(dim);
        for i in 0..n {
            for j in 0..n {
                for t in 0..m {
                    let mut img = Matrix::scalar_zeros(n * k, n * k, ctx);
                    for a in 0..k {
                        for b in 0..k {
                            img.set(i * k + a, j * k + b, f.images[t].get(a, b).clone());
                        }
                    }
                    images.push(img);
                }
            }
        }
        MatrixForm { size: n * k, images }
    });
    Arc::new(FiniteStarAlgebra {
        ctx,
        labels,
        mult,
        inv,
        unit,
        matrix_form,
        structure: Some(MatrixStructure { n, base: base.clone() }),
    })
}

/// Element of a finite *-algebra: coordinates in the basis of its parent.
#[derive(Clone)]
pub struct AlgElem {
    alg: Algebra,
    coords: Vec<Scalar>,
}

pub fn same_algebra(a: &Algebra, b: &Algebra) -> bool {
    Arc::ptr_eq(a, b) || (a.ctx == b.ctx && a.labels == b.labels && a.mult == b.mult && a.inv == b.inv)
}

impl AlgElem {
    pub fn new(alg: &Algebra, coords: Vec<Scalar>) -> Self {
        assert_eq!(coords.len(), alg.dim(), "coordinate vector length");
        AlgElem { alg: alg.clone(), coords }
    }

    pub fn zero(alg: &Algebra) -> Self {
        AlgElem { alg: alg.clone(), coords: alg.zero_coords() }
    }

    pub fn one(alg: &Algebra) -> Self {
        AlgElem { alg: alg.clone(), coords: alg.unit.clone() }
    }

    pub fn basis(alg: &Algebra, i: usize) -> Self {
        AlgElem { alg: alg.clone(), coords: alg.basis_coords(i) }
    }

    pub fn scalar(alg: &Algebra, s: &Scalar) -> Self {
        AlgElem { alg: alg.clone(), coords: alg.unit.iter().map(|u| u * s).collect() }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        AlgElem { alg: self.alg.clone(), coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub fn try_mul(&self, o: &AlgElem) -> Result<AlgElem> {
        if !Arc::ptr_eq(&self.alg, &o.alg) && !same_algebra(&self.alg, &o.alg) {
            return Err(Error::ParentMismatch);
        }
        Ok(AlgElem { alg: self.alg.clone(), coords: self.alg.mul_coords(&self.coords, &o.coords) })
    }

    pub fn to_matrix(&self) -> Option<ScalarMatrix> {
        self.alg.to_matrix_coords(&self.coords)
    }

    /// Splits an element of M_n(A) into its n×n matrix over A.
    pub fn to_blocks(&self) -> Option<Matrix<AlgElem>> {
        let st = self.alg.structure.as_ref()?;
        let (n, m) = (st.n, st.base.dim());
        let zero = AlgElem::zero(&st.base);
        Some(Matrix::from_fn(n, n, &zero, |i, j| {
            AlgElem::new(&st.base, self.coords[(i * n + j) * m..(i * n + j + 1) * m].to_vec())
        }))
    }

    /// Inverse of [`AlgElem::to_blocks`].
    pub fn from_blocks(alg: &Algebra, blocks: &Matrix<AlgElem>) -> Result<AlgElem> {
        let st = alg.structure.as_ref().ok_or_else(|| Error::Unsupported("algebra is not a matrix algebra".into()))?;
        if blocks.rows() != st.n || blocks.cols() != st.n {
            return Err(Error::Dimension(format!("expected {n}x{n} blocks", n = st.n)));
        }
        let mut coords = Vec::with_capacity(alg.dim());
        for i in 0..st.n {
            for j in 0..st.n {
                coords.extend_from_slice(blocks.get(i, j).coords());
            }
        }
        Ok(AlgElem::new(alg, coords))
    }
}

/// Matrix unit E_ij (with the base unit) in M_n(A).
pub fn elementary_matrix(alg: &Algebra, i: usize, j: usize) -> Result<AlgElem> {
    let st = alg.structure.as_ref().ok_or_else(|| Error::Unsupported("algebra is not a matrix algebra".into()))?;
    let zero = AlgElem::zero(&st.base);
    let mut blocks = Matrix::zeros(st.n, st.n, &zero);
    blocks.set(i, j, AlgElem::one(&st.base));
    AlgElem::from_blocks(alg, &blocks)
}

pub fn alg_mul(a: &AlgElem, b: &AlgElem) -> Result<AlgElem> {
    a.try_mul(b)
}

pub fn alg_involution(a: &AlgElem) -> AlgElem {
    a.star()
}

impl PartialEq for AlgElem {
    fn eq(&self, o: &Self) -> bool {
        self.coords == o.coords && (Arc::ptr_eq(&self.alg, &o.alg) || self.alg.labels == o.alg.labels)
    }
}

impl fmt::Debug for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(&self.alg.labels)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, l)| if c.is_one() { l.clone() } else { format!("({c}){l}") })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl StarRing for AlgElem {
    fn zero_like(&self) -> Self {
        AlgElem::zero(&self.alg)
    }
    fn one_like(&self) -> Self {
        AlgElem::one(&self.alg)
    }
    fn add(&self, o: &Self) -> Self {
        AlgElem { alg: self.alg.clone(), coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        AlgElem { alg: self.alg.clone(), coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("product of elements of different algebras")
    }
    fn neg(&self) -> Self {
        AlgElem { alg: self.alg.clone(), coords: self.coords.iter().map(|c| -c).collect() }
    }
    fn star(&self) -> Self {
        AlgElem { alg: self.alg.clone(), coords: self.alg.star_coords(&self.coords) }
    }
    fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }
}

const EXHAUSTIVE_TRIPLES: usize = 8000;

/// Checks associativity, the two-sided unit, and that the involution is a
/// conjugate-linear anti-automorphism of period two. Exhaustive on basis
/// triples for small algebras, seeded sampling otherwise.
pub fn verify_algebra(alg: &Algebra, seed: u64) -> Report {
    let m = alg.dim();
    let mut report = Report::new("verify-algebra").with_seed(seed);
    let basis: Vec<AlgElem> = (0..m).map(|i| AlgElem::basis(alg, i)).collect();
    let triples: Vec<(usize, usize, usize)> = if m * m * m <= EXHAUSTIVE_TRIPLES {
        (0..m).flat_map(|a| (0..m).flat_map(move |b| (0..m).map(move |c| (a, b, c)))).collect()
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..EXHAUSTIVE_TRIPLES).map(|_| (rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m))).collect()
    };
    let label = |i: usize| alg.labels[i].clone();

    let mut assoc = CheckEntry::pass("associativity");
    for &(a, b, c) in &triples {
        let l = basis[a].mul(&basis[b]).mul(&basis[c]);
        let r = basis[a].mul(&basis[b].mul(&basis[c]));
        if l != r {
            assoc = CheckEntry::fail("associativity").with_witness(json!([label(a), label(b), label(c)]));
            break;
        }
    }
    report.push(assoc);

    let one = AlgElem::one(alg);
    let unit_bad = basis.iter().position(|e| one.mul(e) != *e || e.mul(&one) != *e);
    report.push(match unit_bad {
        None => CheckEntry::pass("unit"),
        Some(i) => CheckEntry::fail("unit").with_witness(json!(label(i))),
    });

    let mut anti = CheckEntry::pass("involution_antimultiplicative");
    'outer: for a in 0..m {
        for b in 0..m {
            if basis[a].mul(&basis[b]).star() != basis[b].star().mul(&basis[a].star()) {
                anti = CheckEntry::fail("involution_antimultiplicative").with_witness(json!([label(a), label(b)]));
                break 'outer;
            }
        }
    }
    report.push(anti);

    let i_unit = Scalar::constant(gauss_int(0, 1), alg.ctx);
    let bad = basis.iter().position(|e| e.star().star() != *e || e.scale(&i_unit).star() != e.star().scale(&i_unit.conj()));
    report.push(match bad {
        None => CheckEntry::pass("involution_period_two_conj_linear"),
        Some(i) => CheckEntry::fail("involution_period_two_conj_linear").with_witness(json!(label(i))),
    });

    if alg.matrix_form.is_some() {
        let mut hom = CheckEntry::pass("matrix_form_star_homomorphism");
        'form: for a in 0..m {
            if basis[a].star().to_matrix() != basis[a].to_matrix().map(|x| x.adjoint()) {
                hom = CheckEntry::fail("matrix_form_star_homomorphism").with_witness(json!([label(a)]));
                break;
            }
            for b in 0..m {
                let lhs = basis[a].mul(&basis[b]).to_matrix().unwrap();
                let rhs = basis[a].to_matrix().unwrap().mul(&basis[b].to_matrix().unwrap());
                if lhs != rhs {
                    hom = CheckEntry::fail("matrix_form_star_homomorphism").with_witness(json!([label(a), label(b)]));
                    break 'form;
                }
            }
        }
        report.push(hom);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> TruncationContext {
        TruncationContext::new(2)
    }

    #[test]
    fn matrix_units_multiply() {
        let m2 = matrix_algebra(&FiniteStarAlgebra::scalars(ctx()), 2);
        let e = |i, j| elementary_matrix(&m2, i, j).unwrap();
        assert_eq!(e(0, 0).mul(&e(0, 1)), e(0, 1));
        for (i, j, k, l) in [(0, 1, 1, 0), (0, 1, 0, 1), (1, 0, 0, 0), (1, 1, 0, 1)] {
            let expected = if j == k { e(i, l) } else { AlgElem::zero(&m2) };
            assert_eq!(e(i, j).mul(&e(k, l)), expected);
        }
        assert_eq!(e(0, 1).star(), e(1, 0));
        let one = AlgElem::one(&m2);
        assert_eq!(one.mul(&e(1, 0)), e(1, 0));
    }

    #[test]
    fn size_one_matrix_algebra_is_the_base() {
        let base = FiniteStarAlgebra::diagonal(2, ctx());
        let m1 = matrix_algebra(&base, 1);
        assert_eq!(m1.dim(), base.dim());
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m1.product_of_basis(i, j), base.product_of_basis(i, j));
            }
        }
        assert_eq!(m1.involution_matrix(), base.involution_matrix());
    }

    #[test]
    fn verify_matrix_algebras() {
        let s = FiniteStarAlgebra::scalars(ctx());
        for n in 1..=4 {
            let r = verify_algebra(&matrix_algebra(&s, n), 0);
            assert!(r.passed(), "M{n}: {}", r.to_text());
        }
        let m2m2 = matrix_algebra(&matrix_algebra(&s, 2), 2);
        assert!(verify_algebra(&m2m2, 1).passed());
        assert_eq!(m2m2.matrix_form().unwrap().size, 4);
    }

    #[test]
    fn broken_involution_is_caught() {
        let c = ctx();
        let z = Scalar::zero(c);
        let one = Scalar::one(c);
        // Diagonal 2x2 algebra with an involution swapping the idempotents is
        // still anti-multiplicative; a non-involutive table is not.
        let inv = Matrix::from_rows(vec![vec![one.clone(), one.clone()], vec![z.clone(), z.clone()]], &z);
        let mult = vec![
            vec![vec![one.clone(), z.clone()], vec![z.clone(), z.clone()]],
            vec![vec![z.clone(), z.clone()], vec![z.clone(), one.clone()]],
        ];
        let alg = Arc::new(FiniteStarAlgebra::new(vec!["a".into(), "b".into()], mult, inv, vec![one.clone(), one], c).unwrap());
        assert!(!verify_algebra(&alg, 0).passed());
    }

    #[test]
    fn json_round_trip() {
        let m2 = matrix_algebra(&FiniteStarAlgebra::scalars(ctx()), 2);
        let back = FiniteStarAlgebra::from_json(&m2.to_json(), ctx()).unwrap();
        assert!(verify_algebra(&back, 0).passed());
        assert_eq!(back.involution_matrix(), m2.involution_matrix());
        let built = FiniteStarAlgebra::from_json(&json!({"builtin": "matrix", "n": 2}), ctx()).unwrap();
        assert_eq!(built.dim(), 4);
    }

    #[test]
    fn lemma_matrix_unit_expansion() {
        // nA = Σ_{i,j,k,l} E_ji* a_il E_kl for A in M_2(scalars).
        let c = ctx();
        let s = FiniteStarAlgebra::scalars(c);
        let m2 = matrix_algebra(&s, 2);
        let coords: Vec<Scalar> = [3, -1, 2, 5].iter().map(|&k| Scalar::from_ints(&[k, 1], c)).collect();
        let a = AlgElem::new(&m2, coords);
        let blocks = a.to_blocks().unwrap();
        let mut sum = AlgElem::zero(&m2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let e_ji = elementary_matrix(&m2, j, i).unwrap().star();
                        let a_il = AlgElem::scalar(&m2, &blocks.get(i, l).coords()[0]);
                        let e_kl = elementary_matrix(&m2, k, l).unwrap();
                        sum = sum.add(&e_ji.mul(&a_il).mul(&e_kl));
                    }
                }
            }
        }
        assert_eq!(sum, a.scale(&Scalar::from_int(2, c)));
    }
}
