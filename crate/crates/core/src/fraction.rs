//! Exact linear algebra over the fraction field ℚ(i)(λ).
//!
//! Truncated series are lifted to polynomials in λ; kernels, ranks and
//! solutions are computed over rational functions, and only at the end are
//! results expanded back into series. This keeps degeneracy decisions free of
//! truncation artifacts: `λ^N·v` is never mistaken for a null vector.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalars::{Gaussian, Rational, Scalar, TruncationContext};

/// Polynomial in λ with Gaussian-rational coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    c: Vec<Gaussian>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { c: vec![Gaussian::one()] }
    }

    pub fn new(mut c: Vec<Gaussian>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_scalar(s: &Scalar) -> Self {
        Poly::new(s.coeffs().to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&Gaussian> {
        self.c.last()
    }

    /// Power of λ dividing the polynomial.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn coeffs(&self) -> &[Gaussian] {
        &self.c
    }

    pub fn scale(&self, k: &Gaussian) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|x| x * k).collect() }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i);
            let b = o.c.get(i);
            c.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::new(c)
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Gaussian::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Poly::new(c)
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = Gaussian::one() / d.lead().unwrap();
        let mut r = self.c.clone();
        let mut q = vec![Gaussian::zero(); self.c.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let f = r.last().unwrap() * &lead_inv;
            if !f.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    r[k + j] -= &f * dj;
                }
                q[k] = f;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (Poly::new(q), Poly::new(r))
    }

    /// Quotient of a division known to be exact.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        if d.degree() == Some(0) {
            return self.scale(&(Gaussian::one() / d.lead().unwrap()));
        }
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => Poly::zero(),
            Some(l) => self.scale(&(Gaussian::one() / l)),
        }
    }

    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.divrem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }
}

/// Reduced rational function `num / den` with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn zero() -> Self {
        RatFn { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFn { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn from_scalar(s: &Scalar) -> Self {
        Self::from_poly(Poly::from_scalar(s))
    }

    pub fn constant(c: Gaussian) -> Self {
        Self::from_poly(Poly::new(vec![c]))
    }

    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn::zero();
        }
        // Cheap path: constant denominator.
        if den.degree() == Some(0) {
            let inv = Gaussian::one() / den.lead().unwrap();
            return RatFn { num: num.scale(&inv), den: Poly::one() };
        }
        let g = Poly::gcd(&num, &den);
        let (num, _) = num.divrem(&g);
        let (den, _) = den.divrem(&g);
        let inv = Gaussian::one() / den.lead().unwrap();
        RatFn { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// λ-adic valuation; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        let vn = self.num.valuation()? as i64;
        let vd = self.den.valuation().unwrap_or(0) as i64;
        Some(vn - vd)
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num), self.den.clone());
        }
        RatFn::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        RatFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &RatFn) -> RatFn {
        assert!(!o.is_zero(), "division by zero rational function");
        RatFn::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    /// Power-series expansion modulo λ^{N+1}; `None` when the denominator
    /// vanishes at λ = 0.
    pub fn to_series(&self, ctx: TruncationContext) -> Option<Scalar> {
        let d0 = self.den.coeffs().first()?;
        if d0.is_zero() {
            return None;
        }
        let den = Scalar::from_coeffs(self.den.coeffs().iter().take(ctx.len()).cloned().collect(), ctx);
        let num = Scalar::from_coeffs(self.num.coeffs().iter().take(ctx.len()).cloned().collect(), ctx);
        Some(&num * &den.invert().ok()?)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = |p: &Poly| TruncationContext::new(p.degree().unwrap_or(0));
        let n = Scalar::from_coeffs(self.num.coeffs().to_vec(), ctx(&self.num));
        if self.den.degree() == Some(0) {
            write!(f, "{n}")
        } else {
            let d = Scalar::from_coeffs(self.den.coeffs().to_vec(), ctx(&self.den));
            write!(f, "({n})/({d})")
        }
    }
}

/// Reduced row echelon form with the pivot list `(row, column)`.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Vec<Vec<RatFn>>,
    pub pivots: Vec<(usize, usize)>,
    pub cols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.iter().map(|&(_, c)| c).collect()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let piv = self.pivot_columns();
        (0..self.cols).filter(|c| !piv.contains(c)).collect()
    }

    /// Null-space basis: one vector per free column, with a 1 in that slot.
    pub fn nullspace(&self) -> Vec<Vec<RatFn>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![RatFn::zero(); self.cols];
                v[f] = RatFn::one();
                for &(r, c) in &self.pivots {
                    v[c] = self.matrix[r][f].neg();
                }
                v
            })
            .collect()
    }
}

/// Row reduction with full pivoting on minimal λ-valuation. Choosing the
/// pivot of least valuation keeps every reduced entry in the local ring
/// (denominators nonvanishing at λ = 0) whenever that is possible.
pub fn rref(m: Vec<Vec<RatFn>>, cols: usize) -> Rref {
    rref_in(m, cols, cols)
}

/// As [`rref`], with pivots restricted to the first `allowed` columns.
///
/// Elimination is fraction-free over ℤ[i][λ]: every intermediate entry is a
/// minor of the cleared input and each division is exact, so no gcds are
/// taken until the final normalisation.
pub fn rref_in(m: Vec<Vec<RatFn>>, cols: usize, allowed: usize) -> Rref {
    let mut a: Vec<Vec<ZPoly>> = m.iter().map(|row| clear_denominators(row)).collect();
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut used_cols = vec![false; cols];
    let mut prev = ZPoly::one();
    for k in 0..rows {
        let mut best: Option<((usize, usize), usize, usize)> = None;
        for (r, row) in a.iter().enumerate().skip(k) {
            for (c, x) in row.iter().enumerate().take(allowed) {
                if used_cols[c] {
                    continue;
                }
                if let (Some(v), Some(d)) = (x.valuation(), x.degree()) {
                    if best.is_none_or(|(b, _, _)| (v, d) < b) {
                        best = Some(((v, d), r, c));
                    }
                }
            }
        }
        let Some((_, r, c)) = best else { break };
        a.swap(k, r);
        used_cols[c] = true;
        let pivot_row = a[k].clone();
        let p = pivot_row[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let f = row[c].clone();
            for (j, x) in row.iter_mut().enumerate() {
                let mut y = x.mul(&p);
                if !f.is_zero() && !pivot_row[j].is_zero() {
                    y = y.sub(&f.mul(&pivot_row[j]));
                }
                *x = y.div_exact(&prev);
            }
        }
        prev = p;
        pivots.push((k, c));
    }
    // Rows now carry a common factor: their pivot, or the last pivot for the
    // rows below the rank.
    let matrix = a
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let d = pivots.get(i).map_or_else(|| prev.clone(), |&(_, c)| row[c].clone()).to_poly();
            row.into_iter().map(|x| RatFn::new(x.to_poly(), d.clone())).collect()
        })
        .collect();
    Rref { matrix, pivots, cols }
}

/// Scales a row of rational functions to Gaussian-integer polynomials.
fn clear_denominators(row: &[RatFn]) -> Vec<ZPoly> {
    let mut l = Poly::one();
    for x in row {
        if !x.is_zero() && x.den.degree() != Some(0) {
            let g = Poly::gcd(&l, &x.den);
            l = l.mul(&x.den).div_exact(&g);
        }
    }
    let polys: Vec<Poly> = row.iter().map(|x| x.num.mul(&l.div_exact(&x.den))).collect();
    let mut den = BigInt::one();
    for c in polys.iter().flat_map(|p| p.coeffs()) {
        for q in [&c.re, &c.im] {
            // den / gcd(den, q.denom) via reduction of the ratio.
            let step = Rational::new(den.clone(), q.denom().clone());
            den *= step.denom();
        }
    }
    polys
        .iter()
        .map(|p| {
            ZPoly::new(
                p.coeffs()
                    .iter()
                    .map(|c| {
                        let int = |q: &Rational| (q * &den).to_integer();
                        Complex::new(int(&c.re), int(&c.im))
                    })
                    .collect(),
            )
        })
        .collect()
}

type GaussInt = Complex<BigInt>;

/// Polynomial in λ with Gaussian-integer coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ZPoly {
    c: Vec<GaussInt>,
}

impl ZPoly {
    fn new(mut c: Vec<GaussInt>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        ZPoly { c }
    }

    fn one() -> Self {
        ZPoly { c: vec![GaussInt::one()] }
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    fn mul(&self, o: &ZPoly) -> ZPoly {
        if self.is_zero() || o.is_zero() {
            return ZPoly { c: Vec::new() };
        }
        let mut c = vec![GaussInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        ZPoly::new(c)
    }

    fn sub(&self, o: &ZPoly) -> ZPoly {
        let n = self.c.len().max(o.c.len());
        let z = GaussInt::zero();
        ZPoly::new((0..n).map(|i| self.c.get(i).unwrap_or(&z) - o.c.get(i).unwrap_or(&z)).collect())
    }

    /// Quotient of a division known to be exact in ℤ[i][λ].
    fn div_exact(&self, d: &ZPoly) -> ZPoly {
        if d.c.len() == 1 && d.c[0].is_one() {
            return self.clone();
        }
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.c.last().unwrap();
        let mut r = self.c.clone();
        let mut q = vec![GaussInt::zero(); self.c.len().saturating_sub(dd)];
        while r.len() > dd {
            let k = r.len() - 1 - dd;
            let f = gauss_div_exact(r.last().unwrap(), lead);
            if !f.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    r[k + j] -= &f * dj;
                }
                q[k] = f;
            }
            r.pop();
        }
        debug_assert!(r.iter().all(Zero::is_zero), "inexact polynomial division");
        ZPoly::new(q)
    }

    fn to_poly(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .map(|x| Complex::new(Rational::from_integer(x.re.clone()), Rational::from_integer(x.im.clone())))
                .collect(),
        )
    }
}

fn gauss_div_exact(a: &GaussInt, b: &GaussInt) -> GaussInt {
    let norm = &b.re * &b.re + &b.im * &b.im;
    let num = a * b.conj();
    debug_assert!((&num.re % &norm).is_zero() && (&num.im % &norm).is_zero(), "inexact Gaussian division");
    Complex::new(num.re / &norm, num.im / norm)
}

pub fn lift(rows: &[Vec<Scalar>]) -> Vec<Vec<RatFn>> {
    rows.iter().map(|r| r.iter().map(RatFn::from_scalar).collect()).collect()
}

pub fn rank(rows: &[Vec<Scalar>], cols: usize) -> usize {
    rref(lift(rows), cols).rank()
}

/// Solves `A x = b` over the fraction field; `None` if inconsistent.
pub fn solve(a: &[Vec<RatFn>], b: &[RatFn], cols: usize) -> Option<Vec<RatFn>> {
    let aug: Vec<Vec<RatFn>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let red = rref_in(aug, cols + 1, cols);
    if red.matrix.iter().skip(red.rank()).any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![RatFn::zero(); cols];
    for &(r, c) in &red.pivots {
        x[c] = red.matrix[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::gauss_int;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| gauss_int(x, 0)).collect())
    }

    #[test]
    fn solve_with_lambda_coefficient() {
        let a = vec![vec![RatFn::from_poly(p(&[0, 1]))]];
        let x = solve(&a, &[RatFn::one()], 1).unwrap();
        assert_eq!(x[0].valuation(), Some(-1));
        let a = vec![vec![RatFn::one()], vec![RatFn::one()]];
        assert!(solve(&a, &[RatFn::one(), RatFn::zero()], 1).is_none());
    }

    #[test]
    fn gcd_and_reduction() {
        // (λ+1)(λ+2) / (λ+1)λ = (λ+2)/λ
        let num = p(&[2, 3, 1]);
        let den = p(&[0, 1, 1]);
        let r = RatFn::new(num, den);
        assert_eq!(r.num(), &p(&[2, 1]));
        assert_eq!(r.den(), &p(&[0, 1]));
        assert_eq!(r.valuation(), Some(-1));
        assert!(r.to_series(TruncationContext::new(3)).is_none());
    }

    #[test]
    fn series_expansion() {
        let r = RatFn::new(p(&[1]), p(&[1, 1]));
        let s = r.to_series(TruncationContext::new(3)).unwrap();
        assert_eq!(s, Scalar::from_ints(&[1, -1, 1, -1], TruncationContext::new(3)));
    }

    #[test]
    fn lambda_is_not_null() {
        let ctx = TruncationContext::new(2);
        let rows = vec![
            vec![Scalar::one(ctx), Scalar::zero(ctx)],
            vec![Scalar::zero(ctx), Scalar::monomial(gauss_int(1, 0), 2, ctx)],
        ];
        assert_eq!(rank(&rows, 2), 2);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let ctx = TruncationContext::new(2);
        let one = Scalar::one(ctx);
        let rows = vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]];
        let red = rref(lift(&rows), 2);
        let ns = red.nullspace();
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        assert!(v[0].add(&v[1]).is_zero());
    }

    #[test]
    fn fraction_free_nullspace_annihilates() {
        // Third row = λ·first + (1+λ)·second.
        let r1 = [p(&[1, 2]), p(&[0, 1]), p(&[3]), p(&[1, 0, 1])];
        let r2 = [p(&[2]), p(&[1, 1]), p(&[0, 0, 1]), p(&[5])];
        let r3: Vec<Poly> = r1.iter().zip(&r2).map(|(a, b)| a.mul(&p(&[0, 1])).add(&b.mul(&p(&[1, 1])))).collect();
        let m: Vec<Vec<RatFn>> =
            [r1.to_vec(), r2.to_vec(), r3].iter().map(|r| r.iter().cloned().map(RatFn::from_poly).collect()).collect();
        let red = rref(m.clone(), 4);
        assert_eq!(red.rank(), 2);
        for v in red.nullspace() {
            for row in &m {
                let dot = row.iter().zip(&v).fold(RatFn::zero(), |acc, (a, b)| acc.add(&a.mul(b)));
                assert!(dot.is_zero());
            }
        }
        for &(r, c) in &red.pivots {
            assert_eq!(red.matrix[r][c], RatFn::one());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = vec![vec![RatFn::one(), RatFn::zero()], vec![RatFn::zero(), RatFn::from_poly(p(&[0, 1]))]];
        let b = vec![RatFn::one(), RatFn::from_poly(p(&[0, 2]))];
        let x = solve(&a, &b, 2).unwrap();
        assert_eq!(x[1], RatFn::from_poly(p(&[2])));
        let a2 = vec![vec![RatFn::zero()]];
        assert!(solve(&a2, &[RatFn::one()], 1).is_none());
    }
}
