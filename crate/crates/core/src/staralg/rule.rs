//! Star products given by finite families of bidifferential operators.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::json;

use super::observable::{poisson_bracket, Observable, PhaseSpaceSignature, SignatureKind};
use crate::error::{Error, Result};
use crate::report::{CheckEntry, Report};
use crate::scalars::{gauss, gauss_int, rat, rat_int, Gaussian, Rational, Scalar, TruncationContext};

/// One term `coeff · (∂^left f)(∂^right g)` of a bidifferential operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidiffTerm {
    pub coeff: Gaussian,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl BidiffTerm {
    /// `{"coeff": <gaussian as a constant scalar>, "left": [..], "right": [..]}`
    pub fn to_json(&self) -> serde_json::Value {
        let c = Scalar::constant(self.coeff.clone(), TruncationContext::new(0));
        json!({"coeff": c.to_json()[0].clone(), "left": self.left, "right": self.right})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let c = Scalar::from_json(&json!([v["coeff"].clone()]), TruncationContext::new(0))?;
        let idx = |k: &str| -> Result<Vec<u32>> {
            serde_json::from_value(v[k].clone()).map_err(|e| Error::Input(format!("bad multi-index {k}: {e}")))
        };
        Ok(BidiffTerm { coeff: c.coeff(0), left: idx("left")?, right: idx("right")? })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StarProductRule {
    /// Weyl-symmetrized product on canonical coordinates.
    Moyal,
    /// Normal-ordered product on conjugate coordinates.
    Wick,
    /// Undeformed commutative product.
    Pointwise,
    /// `table[r]` lists the terms of C_r; higher orders are zero.
    CustomTable(Vec<Vec<BidiffTerm>>),
}

impl StarProductRule {
    pub fn name(&self) -> &'static str {
        match self {
            StarProductRule::Moyal => "moyal",
            StarProductRule::Wick => "wick",
            StarProductRule::Pointwise => "pointwise",
            StarProductRule::CustomTable(_) => "custom",
        }
    }

    pub fn check_signature(&self, sig: PhaseSpaceSignature) -> Result<()> {
        let ok = match self {
            StarProductRule::Moyal => sig.kind == SignatureKind::Canonical,
            StarProductRule::Wick => sig.kind == SignatureKind::Conjugate,
            StarProductRule::Pointwise => true,
            StarProductRule::CustomTable(t) => {
                t.iter().flatten().all(|term| term.left.len() == sig.nvars() && term.right.len() == sig.nvars())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::RuleSignature { rule: self.name().into(), signature: sig.name().into() })
        }
    }

    /// Terms of C_r on a signature.
    pub fn component(&self, sig: PhaseSpaceSignature, r: usize) -> Vec<BidiffTerm> {
        let n = sig.dof;
        match self {
            StarProductRule::Pointwise => {
                if r == 0 {
                    vec![BidiffTerm { coeff: Gaussian::one(), left: vec![0; 2 * n], right: vec![0; 2 * n] }]
                } else {
                    Vec::new()
                }
            }
            StarProductRule::CustomTable(t) => t.get(r).cloned().unwrap_or_default(),
            StarProductRule::Moyal => {
                // (1/r!)(i/2)^r B^r with B = Σ ∂xᵢ⊗∂pᵢ − ∂pᵢ⊗∂xᵢ expands, since the
                // 2n summands commute, into Π (∂xᵢ⊗∂pᵢ)^{kᵢ}/kᵢ! · (−∂pᵢ⊗∂xᵢ)^{lᵢ}/lᵢ!
                // over |k| + |l| = r.
                let half_i = gauss(rat(0, 1), rat(1, 2));
                let mut base = Gaussian::one();
                for _ in 0..r {
                    base *= &half_i;
                }
                compositions(2 * n, r as u32)
                    .into_iter()
                    .map(|kl| {
                        let (k, l) = kl.split_at(n);
                        let l_total: u32 = l.iter().sum();
                        let denom: Rational = kl.iter().map(|&m| factorial(m)).product();
                        let sign = if l_total % 2 == 0 { 1 } else { -1 };
                        let coeff = &base * gauss_real_rat(rat_int(sign) / denom);
                        let left: Vec<u32> = k.iter().chain(l).cloned().collect();
                        let right: Vec<u32> = l.iter().chain(k).cloned().collect();
                        BidiffTerm { coeff, left, right }
                    })
                    .collect()
            }
            StarProductRule::Wick => {
                // (2^r/r!) B_W^r with B_W = Σ ∂zᵢ⊗∂z̄ᵢ.
                compositions(n, r as u32)
                    .into_iter()
                    .map(|k| {
                        let denom: Rational = k.iter().map(|&m| factorial(m)).product();
                        let coeff = gauss_real_rat(rat_int(1 << r) / denom);
                        let left: Vec<u32> = k.iter().cloned().chain(std::iter::repeat_n(0, n)).collect();
                        let right: Vec<u32> = std::iter::repeat_n(0, n).chain(k.iter().cloned()).collect();
                        BidiffTerm { coeff, left, right }
                    })
                    .collect()
            }
        }
    }
}

fn gauss_real_rat(q: Rational) -> Gaussian {
    gauss(q, Rational::zero())
}

fn factorial(m: u32) -> Rational {
    (1..=m as i64).map(rat_int).fold(Rational::one(), |a, b| a * b)
}

/// All vectors of `parts` non-negative integers summing to `total`.
fn compositions(parts: usize, total: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(parts - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn apply_terms(f: &Observable, g: &Observable, terms: &[BidiffTerm]) -> Observable {
    let mut df: BTreeMap<&[u32], Observable> = BTreeMap::new();
    let mut dg: BTreeMap<&[u32], Observable> = BTreeMap::new();
    let mut out = Observable::zero(f.sig(), f.ctx());
    for t in terms {
        let a = df.entry(&t.left).or_insert_with(|| f.derivative(&t.left));
        if a.is_zero() {
            continue;
        }
        let a = a.clone();
        let b = dg.entry(&t.right).or_insert_with(|| g.derivative(&t.right));
        if b.is_zero() {
            continue;
        }
        out = out.add(&a.pointwise(b).scale(&Scalar::constant(t.coeff.clone(), f.ctx())));
    }
    out
}

fn check_pair(f: &Observable, g: &Observable, rule: &StarProductRule) -> Result<()> {
    if f.sig() != g.sig() {
        return Err(Error::SignatureMismatch);
    }
    if f.ctx() != g.ctx() {
        return Err(Error::ContextMismatch(f.ctx().order, g.ctx().order));
    }
    rule.check_signature(f.sig())
}

/// The bidifferential operator C_r applied to (f, g), without the λ^r.
pub fn bidiff_component(f: &Observable, g: &Observable, rule: &StarProductRule, r: usize) -> Result<Observable> {
    check_pair(f, g, rule)?;
    Ok(apply_terms(f, g, &rule.component(f.sig(), r)))
}

/// `f ⋆ g = Σ_{r ≤ N} λ^r C_r(f, g)` modulo λ^{N+1}.
pub fn star(f: &Observable, g: &Observable, rule: &StarProductRule, ctx: TruncationContext) -> Result<Observable> {
    check_pair(f, g, rule)?;
    if f.ctx() != ctx {
        return Err(Error::ContextMismatch(f.ctx().order, ctx.order));
    }
    let mut out = Observable::zero(f.sig(), ctx);
    for r in 0..=ctx.order {
        let terms = rule.component(f.sig(), r);
        if terms.is_empty() {
            continue;
        }
        let c = apply_terms(f, g, &terms);
        if !c.is_zero() {
            out = out.add(&c.scale(&Scalar::monomial(Gaussian::one(), r, ctx)));
        }
    }
    Ok(out)
}

pub fn star_commutator(f: &Observable, g: &Observable, rule: &StarProductRule, ctx: TruncationContext) -> Result<Observable> {
    Ok(star(f, g, rule, ctx)?.sub(&star(g, f, rule, ctx)?))
}

/// Shape of the random polynomials used by [`verify_star_axioms`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleSpec {
    pub degree: u32,
    pub count: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { degree: 4, count: 25, seed: 0 }
    }
}

/// Random polynomial with small Gaussian-integer coefficients up to order λ¹.
pub fn random_observable<R: Rng>(sig: PhaseSpaceSignature, ctx: TruncationContext, degree: u32, rng: &mut R) -> Observable {
    let monos = sig.monomials_up_to(degree);
    let nterms = rng.gen_range(1..=5usize.min(monos.len()));
    let mut f = Observable::zero(sig, ctx);
    for _ in 0..nterms {
        let e = monos[rng.gen_range(0..monos.len())].clone();
        let mut coeffs = vec![gauss_int(rng.gen_range(-3..=3), rng.gen_range(-2..=2))];
        if ctx.order >= 1 && rng.gen_bool(0.3) {
            coeffs.push(gauss_int(rng.gen_range(-2..=2), rng.gen_range(-2..=2)));
        }
        f.add_term(e, &Scalar::from_coeffs(coeffs, ctx));
    }
    f
}

fn witness(fs: &[&Observable]) -> serde_json::Value {
    serde_json::Value::Array(fs.iter().map(|f| json!(f.to_string())).collect())
}

/// Checks C₀ = fg, unit, the C₁/Poisson condition, the Hermitian property and
/// associativity on coordinate probes followed by random samples.
pub fn verify_star_axioms(
    rule: &StarProductRule,
    sig: PhaseSpaceSignature,
    ctx: TruncationContext,
    spec: SampleSpec,
) -> Report {
    use rand::SeedableRng;
    let mut report = Report::new(format!("star-verify {}", rule.name())).with_seed(spec.seed);
    if let Err(e) = rule.check_signature(sig) {
        report.push(CheckEntry::fail("signature").with_detail(e.to_string()));
        return report;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let one = Observable::one(sig, ctx);
    let mut pool: Vec<Observable> = (0..sig.nvars()).map(|s| Observable::var(s, sig, ctx)).collect();
    let probes = pool.len();
    for _ in 0..spec.count {
        pool.push(random_observable(sig, ctx, spec.degree, &mut rng));
    }
    // Pairs and triples: exhaustive over coordinate probes, then random.
    let mut triples: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..probes {
        for b in 0..probes {
            triples.push((a, b, (a + b) % probes.max(1)));
        }
    }
    for k in 0..spec.count {
        let base = probes + k;
        triples.push((base, probes + (k + 1) % spec.count, probes + (k + 2) % spec.count));
    }
    let i_unit = Scalar::constant(gauss_int(0, 1), ctx);
    let mut run = |name: &str, check: &mut dyn FnMut(&Observable, &Observable, &Observable) -> Result<Option<String>>| {
        let t0 = Instant::now();
        let mut entry = CheckEntry::pass(name);
        for &(a, b, c) in &triples {
            let (f, g, h) = (&pool[a], &pool[b], &pool[c]);
            match check(f, g, h) {
                Ok(None) => {}
                Ok(Some(detail)) => {
                    entry = CheckEntry::fail(name).with_detail(detail).with_witness(witness(&[f, g, h]));
                    break;
                }
                Err(e) => {
                    entry = CheckEntry::fail(name).with_detail(e.to_string());
                    break;
                }
            }
        }
        report.push(entry.with_timing(t0.elapsed()));
    };
    run("c0_pointwise", &mut |f, g, _| {
        let c0 = bidiff_component(f, g, rule, 0)?;
        Ok((c0 != f.pointwise(g)).then(|| "C0(f,g) != fg".to_string()))
    });
    run("unit", &mut |f, _, _| {
        let l = star(&one, f, rule, ctx)?;
        let r = star(f, &one, rule, ctx)?;
        Ok((l != *f || r != *f).then(|| "1*f != f or f*1 != f".to_string()))
    });
    run("c1_poisson", &mut |f, g, _| {
        let lhs = bidiff_component(f, g, rule, 1)?.sub(&bidiff_component(g, f, rule, 1)?);
        let rhs = poisson_bracket(f, g)?.scale(&i_unit);
        Ok((lhs != rhs).then(|| "C1(f,g) - C1(g,f) != i{f,g}".to_string()))
    });
    run("hermitian", &mut |f, g, _| {
        let lhs = star(f, g, rule, ctx)?.conj();
        let rhs = star(&g.conj(), &f.conj(), rule, ctx)?;
        Ok((lhs != rhs).then(|| "conj(f*g) != conj(g)*conj(f)".to_string()))
    });
    run("associativity", &mut |f, g, h| {
        let lhs = star(&star(f, g, rule, ctx)?, h, rule, ctx)?;
        let rhs = star(f, &star(g, h, rule, ctx)?, rule, ctx)?;
        let diff = lhs.sub(&rhs);
        if diff.is_zero() {
            return Ok(None);
        }
        let order = diff.terms().values().filter_map(Scalar::valuation).min().unwrap_or(0);
        Ok(Some(format!("first violated order λ^{order}")))
    });
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;

    fn ctx() -> TruncationContext {
        TruncationContext::new(4)
    }

    #[test]
    fn moyal_canonical_pair() {
        let sig = PhaseSpaceSignature::canonical(1);
        let x = Observable::var(0, sig, ctx());
        let p = Observable::var(1, sig, ctx());
        let xp = star(&x, &p, &StarProductRule::Moyal, ctx()).unwrap();
        let expected = x.pointwise(&p).add(&Observable::constant(Scalar::monomial(gauss(rat(0, 1), rat(1, 2)), 1, ctx()), sig));
        assert_eq!(xp, expected);
        let comm = star_commutator(&x, &p, &StarProductRule::Moyal, ctx()).unwrap();
        assert_eq!(comm, Observable::constant(Scalar::monomial(gauss_int(0, 1), 1, ctx()), sig));
    }

    #[test]
    fn wick_z_zbar() {
        let sig = PhaseSpaceSignature::conjugate(1);
        let z = Observable::var(0, sig, ctx());
        let zb = Observable::var(1, sig, ctx());
        let two_lambda = Observable::constant(Scalar::monomial(gauss_int(2, 0), 1, ctx()), sig);
        assert_eq!(star(&z, &zb, &StarProductRule::Wick, ctx()).unwrap(), z.pointwise(&zb).add(&two_lambda));
        assert_eq!(star(&zb, &z, &StarProductRule::Wick, ctx()).unwrap(), z.pointwise(&zb));
        assert_eq!(star_commutator(&z, &zb, &StarProductRule::Wick, ctx()).unwrap(), two_lambda);
    }

    #[test]
    fn unit_and_self_commutator() {
        let sig = PhaseSpaceSignature::canonical(2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let f = random_observable(sig, ctx(), 3, &mut rng);
        let one = Observable::one(sig, ctx());
        assert_eq!(star(&one, &f, &StarProductRule::Moyal, ctx()).unwrap(), f);
        assert!(star_commutator(&f, &f, &StarProductRule::Moyal, ctx()).unwrap().is_zero());
    }

    #[test]
    fn incompatible_rule_is_rejected() {
        let sig = PhaseSpaceSignature::conjugate(1);
        let z = Observable::var(0, sig, ctx());
        assert!(matches!(star(&z, &z, &StarProductRule::Moyal, ctx()), Err(Error::RuleSignature { .. })));
        let other = Observable::var(0, PhaseSpaceSignature::canonical(1), ctx());
        assert_eq!(star(&z, &other, &StarProductRule::Wick, ctx()), Err(Error::SignatureMismatch));
    }

    #[test]
    fn pointwise_fails_poisson_with_coordinate_witness() {
        let sig = PhaseSpaceSignature::canonical(1);
        let spec = SampleSpec { degree: 2, count: 3, seed: 1 };
        let r = verify_star_axioms(&StarProductRule::Pointwise, sig, ctx(), spec);
        let e = r.entry("c1_poisson").unwrap();
        assert_eq!(e.verdict, Verdict::Fail);
        let w = e.witness.as_ref().unwrap();
        assert_eq!(w[0], "x");
        assert_eq!(w[1], "p");
        assert_eq!(r.entry("associativity").unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn truncated_custom_table_reports_violated_order() {
        // Moyal cut after C₁ is not associative at order λ².
        let sig = PhaseSpaceSignature::canonical(1);
        let table = (0..2).map(|r| StarProductRule::Moyal.component(sig, r)).collect();
        let rule = StarProductRule::CustomTable(table);
        let r = verify_star_axioms(&rule, sig, ctx(), SampleSpec { degree: 3, count: 6, seed: 5 });
        let e = r.entry("associativity").unwrap();
        assert_eq!(e.verdict, Verdict::Fail);
        assert_eq!(e.detail.as_deref(), Some("first violated order λ^2"));
        assert_eq!(r.entry("c1_poisson").unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn wick_is_hermitian_and_moyal_passes_everything() {
        let spec = SampleSpec { degree: 3, count: 8, seed: 11 };
        let w = verify_star_axioms(&StarProductRule::Wick, PhaseSpaceSignature::conjugate(1), ctx(), spec);
        assert_eq!(w.entry("hermitian").unwrap().verdict, Verdict::Pass);
        let m = verify_star_axioms(&StarProductRule::Moyal, PhaseSpaceSignature::canonical(1), ctx(), spec);
        assert!(m.passed(), "{}", m.to_text());
    }
}
