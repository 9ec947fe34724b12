//! Polynomial observables on flat phase space with series coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalars::{gauss, gauss_int, rat, Gaussian, Scalar, TruncationContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignatureKind {
    /// Real variables x₁..xₙ, p₁..pₙ.
    Canonical,
    /// Complex variables z₁..zₙ, z̄₁..z̄ₙ.
    Conjugate,
}

/// Variable layout: slots `0..n` hold xᵢ (resp. zᵢ), slots `n..2n` hold pᵢ
/// (resp. z̄ᵢ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseSpaceSignature {
    pub kind: SignatureKind,
    pub dof: usize,
}

impl PhaseSpaceSignature {
    pub fn canonical(dof: usize) -> Self {
        PhaseSpaceSignature { kind: SignatureKind::Canonical, dof }
    }

    pub fn conjugate(dof: usize) -> Self {
        PhaseSpaceSignature { kind: SignatureKind::Conjugate, dof }
    }

    pub fn nvars(&self) -> usize {
        2 * self.dof
    }

    /// Involution partner of a variable slot.
    pub fn partner(&self, slot: usize) -> usize {
        match self.kind {
            SignatureKind::Canonical => slot,
            SignatureKind::Conjugate => (slot + self.dof) % self.nvars(),
        }
    }

    pub fn var_name(&self, slot: usize) -> String {
        let n = self.dof;
        let (base, i) = match (self.kind, slot < n) {
            (SignatureKind::Canonical, true) => ("x", slot),
            (SignatureKind::Canonical, false) => ("p", slot - n),
            (SignatureKind::Conjugate, true) => ("z", slot),
            (SignatureKind::Conjugate, false) => ("zb", slot - n),
        };
        if n == 1 {
            base.to_string()
        } else {
            format!("{base}{}", i + 1)
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SignatureKind::Canonical => "canonical",
            SignatureKind::Conjugate => "conjugate",
        }
    }

    /// All exponent vectors of total degree ≤ `cap`, by degree then
    /// reverse-lexicographically.
    pub fn monomials_up_to(&self, cap: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for d in 0..=cap {
            let mut cur = vec![0u32; self.nvars()];
            fill_degree(&mut cur, 0, d, &mut out);
        }
        out
    }
}

fn fill_degree(cur: &mut Vec<u32>, slot: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if slot + 1 == cur.len() {
        cur[slot] = remaining;
        out.push(cur.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        cur[slot] = k;
        fill_degree(cur, slot + 1, remaining - k, out);
    }
    cur[slot] = 0;
}

pub type Exponents = Vec<u32>;

/// Polynomial in the phase-space variables with [`Scalar`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observable {
    sig: PhaseSpaceSignature,
    ctx: TruncationContext,
    terms: BTreeMap<Exponents, Scalar>,
}

fn falling(e: u32, d: u32) -> i64 {
    (0..d).map(|k| (e - k) as i64).product()
}

impl Observable {
    pub fn zero(sig: PhaseSpaceSignature, ctx: TruncationContext) -> Self {
        Observable { sig, ctx, terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar, sig: PhaseSpaceSignature) -> Self {
        Self::monomial(vec![0; sig.nvars()], c, sig)
    }

    pub fn one(sig: PhaseSpaceSignature, ctx: TruncationContext) -> Self {
        Self::constant(Scalar::one(ctx), sig)
    }

    pub fn monomial(exps: Exponents, c: Scalar, sig: PhaseSpaceSignature) -> Self {
        assert_eq!(exps.len(), sig.nvars(), "exponent vector length");
        let ctx = c.ctx();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Observable { sig, ctx, terms }
    }

    /// The coordinate function in a variable slot.
    pub fn var(slot: usize, sig: PhaseSpaceSignature, ctx: TruncationContext) -> Self {
        let mut e = vec![0; sig.nvars()];
        e[slot] = 1;
        Self::monomial(e, Scalar::one(ctx), sig)
    }

    pub fn sig(&self) -> PhaseSpaceSignature {
        self.sig
    }

    pub fn ctx(&self) -> TruncationContext {
        self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Scalar> {
        &self.terms
    }

    pub fn coeff(&self, exps: &[u32]) -> Scalar {
        self.terms.get(exps).cloned().unwrap_or_else(|| Scalar::zero(self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, exps: Exponents, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c.clone());
            }
        }
    }

    fn same_space(&self, o: &Observable) -> Result<()> {
        if self.sig != o.sig {
            return Err(Error::SignatureMismatch);
        }
        if self.ctx != o.ctx {
            return Err(Error::ContextMismatch(self.ctx.order, o.ctx.order));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Observable) -> Result<Observable> {
        self.same_space(o)?;
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn add(&self, o: &Observable) -> Observable {
        self.try_add(o).expect("observables in different spaces")
    }

    pub fn neg(&self) -> Observable {
        Observable { sig: self.sig, ctx: self.ctx, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Observable) -> Observable {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Observable {
        let mut out = Observable::zero(self.sig, self.ctx);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), &(c * s));
        }
        out
    }

    /// Pointwise (commutative) product.
    pub fn try_pointwise(&self, o: &Observable) -> Result<Observable> {
        self.same_space(o)?;
        let mut out = Observable::zero(self.sig, self.ctx);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn pointwise(&self, o: &Observable) -> Observable {
        self.try_pointwise(o).expect("observables in different spaces")
    }

    pub fn pow(&self, k: u32) -> Observable {
        let mut acc = Observable::one(self.sig, self.ctx);
        for _ in 0..k {
            acc = acc.pointwise(self);
        }
        acc
    }

    /// Partial derivative by a multi-index over the variable slots.
    pub fn derivative(&self, d: &[u32]) -> Observable {
        let mut out = Observable::zero(self.sig, self.ctx);
        'terms: for (e, c) in &self.terms {
            let mut factor = 1i64;
            let mut ne = e.clone();
            for (k, (&ek, &dk)) in e.iter().zip(d).enumerate() {
                if dk > ek {
                    continue 'terms;
                }
                factor *= falling(ek, dk);
                ne[k] = ek - dk;
            }
            out.add_term(ne, &c.scale(&gauss_int(factor, 0)));
        }
        out
    }

    pub fn partial(&self, slot: usize) -> Observable {
        let mut d = vec![0; self.sig.nvars()];
        d[slot] = 1;
        self.derivative(&d)
    }

    /// Complex conjugation: conjugates coefficients and, on conjugate
    /// signatures, swaps zᵢ and z̄ᵢ exponents.
    pub fn conj(&self) -> Observable {
        let mut out = Observable::zero(self.sig, self.ctx);
        for (e, c) in &self.terms {
            let ne: Exponents = (0..e.len()).map(|k| e[self.sig.partner(k)]).collect();
            out.add_term(ne, &c.conj());
        }
        out
    }

    /// Keeps only λ⁰ coefficients.
    pub fn classical_limit(&self) -> Observable {
        let mut out = Observable::zero(self.sig, self.ctx);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), &c.classical_limit());
        }
        out
    }

    /// Flat Laplacian: Σ(∂²ₓ + ∂²ₚ) on canonical signatures, Σ 4∂_z∂_z̄ on
    /// conjugate ones (the same operator under z = x + ip).
    pub fn laplacian(&self) -> Observable {
        let n = self.sig.dof;
        let mut out = Observable::zero(self.sig, self.ctx);
        for i in 0..n {
            match self.sig.kind {
                SignatureKind::Canonical => {
                    out = out.add(&self.partial(i).partial(i));
                    out = out.add(&self.partial(n + i).partial(n + i));
                }
                SignatureKind::Conjugate => {
                    out = out.add(&self.partial(i).partial(n + i).scale(&Scalar::from_int(4, self.ctx)));
                }
            }
        }
        out
    }

    /// Values of all 2n variable slots at a phase-space point. Canonical
    /// points list (x, p); conjugate points list z only.
    pub fn slot_values(sig: PhaseSpaceSignature, point: &[Gaussian]) -> Result<Vec<Gaussian>> {
        match sig.kind {
            SignatureKind::Canonical if point.len() == sig.nvars() => Ok(point.to_vec()),
            SignatureKind::Conjugate if point.len() == sig.dof => {
                Ok(point.iter().cloned().chain(point.iter().map(|z| z.conj())).collect())
            }
            _ => Err(Error::Dimension(format!("point of length {} for {} dof {}", point.len(), sig.name(), sig.dof))),
        }
    }

    pub fn evaluate(&self, point: &[Gaussian]) -> Result<Scalar> {
        let vals = Self::slot_values(self.sig, point)?;
        let mut acc = Scalar::zero(self.ctx);
        for (e, c) in &self.terms {
            let mut m = Gaussian::one();
            for (v, &k) in vals.iter().zip(e) {
                for _ in 0..k {
                    m *= v;
                }
            }
            if !m.is_zero() {
                acc += &c.scale(&m);
            }
        }
        Ok(acc)
    }

    /// Rewrites a canonical observable in z = x + ip, z̄ = x − ip.
    pub fn to_conjugate(&self) -> Result<Observable> {
        if self.sig.kind != SignatureKind::Canonical {
            return Err(Error::SignatureMismatch);
        }
        let n = self.sig.dof;
        let csig = PhaseSpaceSignature::conjugate(n);
        let ctx = self.ctx;
        let half = Scalar::constant(gauss(rat(1, 2), rat(0, 1)), ctx);
        let minus_half_i = Scalar::constant(gauss(rat(0, 1), rat(-1, 2)), ctx);
        let mut subs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let z = Observable::var(i, csig, ctx);
            let zb = Observable::var(n + i, csig, ctx);
            subs.push((i, z.add(&zb).scale(&half)));
            subs.push((n + i, z.sub(&zb).scale(&minus_half_i)));
        }
        subs.sort_by_key(|(k, _)| *k);
        let mut out = Observable::zero(csig, ctx);
        for (e, c) in &self.terms {
            let mut m = Observable::constant(c.clone(), csig);
            for (slot, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = m.pointwise(&subs[slot].1.pow(k));
                }
            }
            out = out.add(&m);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "signature": {"kind": self.sig.name(), "dof": self.sig.dof},
            "terms": self.terms.iter().map(|(e, c)| json!({"exponents": e, "coeff": c.to_json()})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, ctx: TruncationContext) -> Result<Observable> {
        let sig: PhaseSpaceSignature = serde_json::from_value(v["signature"].clone())
            .map_err(|e| Error::Input(format!("bad signature: {e}")))?;
        let terms = v["terms"].as_array().ok_or_else(|| Error::Input("terms must be an array".into()))?;
        let mut out = Observable::zero(sig, ctx);
        for t in terms {
            let e: Exponents = serde_json::from_value(t["exponents"].clone())
                .map_err(|e| Error::Input(format!("bad exponents: {e}")))?;
            if e.len() != sig.nvars() {
                return Err(Error::Input("exponent vector has wrong length".into()));
            }
            out.add_term(e, &Scalar::from_json(&t["coeff"], ctx)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(s, &k)| if k == 1 { self.sig.var_name(s) } else { format!("{}^{k}", self.sig.var_name(s)) })
                    .collect();
                if mono.is_empty() {
                    format!("({c})")
                } else if c.is_one() {
                    mono.join("·")
                } else {
                    format!("({c})·{}", mono.join("·"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Poisson bracket of the flat symplectic structure.
pub fn poisson_bracket(f: &Observable, g: &Observable) -> Result<Observable> {
    f.same_space(g)?;
    let n = f.sig.dof;
    let ctx = f.ctx;
    let mut out = Observable::zero(f.sig, ctx);
    for i in 0..n {
        let a = f.partial(i).pointwise(&g.partial(n + i));
        let b = f.partial(n + i).pointwise(&g.partial(i));
        out = out.add(&a.sub(&b));
    }
    if f.sig.kind == SignatureKind::Conjugate {
        out = out.scale(&Scalar::constant(gauss_int(0, -2), ctx));
    }
    Ok(out)
}

pub fn classical_limit_obs(f: &Observable) -> Observable {
    f.classical_limit()
}
