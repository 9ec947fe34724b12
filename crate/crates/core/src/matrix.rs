//! Dense matrices over a *-ring.

use std::fmt::Debug;

use crate::scalars::Scalar;

/// Minimal *-ring interface shared by [`Scalar`] and algebra elements.
///
/// Zero and one are produced from an existing element because both carry
/// context (truncation order, parent algebra).
pub trait StarRing: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// The involution.
    fn star(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl StarRing for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero(self.ctx())
    }
    fn one_like(&self) -> Self {
        Scalar::one(self.ctx())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn star(&self) -> Self {
        self.conj()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    zero: T,
}

pub type ScalarMatrix = Matrix<Scalar>;

impl<T: StarRing> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, zero: &T) -> Self {
        let zero = zero.zero_like();
        Matrix { rows, cols, data: vec![zero.clone(); rows * cols], zero }
    }

    pub fn identity(n: usize, proto: &T) -> Self {
        let mut m = Self::zeros(n, n, proto);
        for i in 0..n {
            m.set(i, i, proto.one_like());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, zero: &T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data, zero: zero.zero_like() }
    }

    pub fn from_rows(rows: Vec<Vec<T>>, zero: &T) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect(), zero: zero.zero_like() }
    }

    pub fn column(entries: Vec<T>, zero: &T) -> Self {
        let n = entries.len();
        Matrix { rows: n, cols: 1, data: entries, zero: zero.zero_like() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn zero_elem(&self) -> &T {
        &self.zero
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(|c| c.to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Matrix<T> {
        Matrix::from_fn(self.rows, 1, &self.zero, |i, _| self.get(i, j).clone())
    }

    pub fn col_vec(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, o: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch in product");
        let mut out = Matrix::zeros(self.rows, o.cols, &self.zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch in sum");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
            zero: self.zero.clone(),
        }
    }

    pub fn sub(&self, o: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch in difference");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
            zero: self.zero.clone(),
        }
    }

    /// Conjugate transpose with the entrywise involution.
    pub fn adjoint(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, &self.zero, |i, j| self.get(j, i).star())
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), zero: self.zero.clone() }
    }

    /// Entrywise left multiplication `a · M`.
    pub fn scale_left(&self, a: &T) -> Matrix<T> {
        self.map(|x| a.mul(x))
    }

    /// Entrywise right multiplication `M · a`.
    pub fn scale_right(&self, a: &T) -> Matrix<T> {
        self.map(|x| x.mul(a))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(StarRing::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && *self == self.adjoint()
    }

    /// Assembles a block matrix from a grid of equally-shaped blocks.
    pub fn from_blocks(blocks: &[Vec<Matrix<T>>], zero: &T) -> Matrix<T> {
        let br = blocks.len();
        let bc = blocks.first().map_or(0, Vec::len);
        let (h, w) = blocks.first().and_then(|r| r.first()).map_or((0, 0), |b| (b.rows, b.cols));
        Matrix::from_fn(br * h, bc * w, zero, |i, j| blocks[i / h][j / w].get(i % h, j % w).clone())
    }

    pub fn block(&self, bi: usize, bj: usize, h: usize, w: usize) -> Matrix<T> {
        Matrix::from_fn(h, w, &self.zero, |i, j| self.get(bi * h + i, bj * w + j).clone())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), &self.zero, |i, j| self.get(rows[i], cols[j]).clone())
    }
}

impl Matrix<Scalar> {
    pub fn ctx(&self) -> crate::scalars::TruncationContext {
        self.zero.ctx()
    }

    pub fn scalar_identity(n: usize, ctx: crate::scalars::TruncationContext) -> Self {
        Matrix::identity(n, &Scalar::zero(ctx))
    }

    pub fn scalar_zeros(rows: usize, cols: usize, ctx: crate::scalars::TruncationContext) -> Self {
        Matrix::zeros(rows, cols, &Scalar::zero(ctx))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| serde_json::Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value, ctx: crate::scalars::TruncationContext) -> crate::Result<Self> {
        let rows = v.as_array().ok_or_else(|| crate::Error::Input("matrix must be an array of rows".into()))?;
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let r = r.as_array().ok_or_else(|| crate::Error::Input("matrix row must be an array".into()))?;
            out.push(r.iter().map(|x| Scalar::from_json(x, ctx)).collect::<crate::Result<Vec<_>>>()?);
        }
        let cols = out.first().map_or(0, Vec::len);
        if out.iter().any(|r| r.len() != cols) {
            return Err(crate::Error::Input("ragged matrix".into()));
        }
        Ok(Matrix::from_rows(out, &Scalar::zero(ctx)))
    }
}
