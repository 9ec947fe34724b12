//! Rieffel induction: `E ⊗_A H` realized as `ρ(P)·Hᵖ`, its degeneracy
//! quotient, and the induced representation of the left algebra.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fraction::rank;
use crate::matrix::{Matrix, ScalarMatrix};
use crate::modrep::{
    cp_check_module, gns, kernel_quotient, null_vectors, verify_representation, AlgMatrix, BimoduleSpec, Gns,
    InnerProductModule, PreHilbertModule, Quotient, Representation,
};
use crate::positivity::{formal_psd_check, functional_gram, is_positive_functional, LinearFunctional, PSDVerdict};
use crate::report::{CheckEntry, Report, Verdict};
use crate::scalars::{Scalar, TruncationContext};
use crate::staralg::{lift_matrix, AlgElem, AlgebraElement, AlgebraRef, FiniteStarAlgebra};

/// `ρ(M)` for `M ∈ M_p(A)`, as a `pd × pd` block matrix.
pub fn block_lift(h: &Representation, m: &AlgMatrix) -> Result<ScalarMatrix> {
    let d = h.rank();
    let mut out = Matrix::scalar_zeros(m.rows() * d, m.cols() * d, h.ctx());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let b = h.act(m.get(i, j))?;
            for a in 0..d {
                for c in 0..d {
                    out.set(i * d + a, j * d + c, b.get(a, c).clone());
                }
            }
        }
    }
    Ok(out)
}

/// `diag(V, …, V)` with `p` blocks.
pub fn block_diagonal(v: &ScalarMatrix, p: usize) -> ScalarMatrix {
    let (r, c) = (v.rows(), v.cols());
    let mut out = Matrix::scalar_zeros(p * r, p * c, v.ctx());
    for k in 0..p {
        for a in 0..r {
            for b in 0..c {
                out.set(k * r + a, k * c + b, v.get(a, b).clone());
            }
        }
    }
    out
}

/// `E ⊗_A H` before the degeneracy quotient.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    /// Blocks `G ρ(Q_ij)` on `Hᵖ`.
    pub ambient_gram: ScalarMatrix,
    /// `ρ(P)`.
    pub block_projection: ScalarMatrix,
    /// `Hᵖ` with Gram `ρ(P)* Ĝ ρ(P)`.
    pub module: PreHilbertModule,
    /// `ρ(ρ_B(b))` per acting basis element of `B`.
    pub action: BTreeMap<usize, ScalarMatrix>,
}

fn check_algebras(e: &BimoduleSpec, h: &Representation) -> Result<()> {
    if e.module.algebra != h.algebra {
        return Err(Error::ParentMismatch);
    }
    if e.module.ctx() != h.ctx() {
        return Err(Error::ContextMismatch(e.module.ctx().order, h.ctx().order));
    }
    Ok(())
}

pub fn tensor_over_a(e: &BimoduleSpec, h: &Representation) -> Result<TensorProduct> {
    check_algebras(e, h)?;
    let p = e.module.ambient_rank();
    let d = h.rank();
    let rq = block_lift(h, &e.module.metric)?;
    let ambient_gram = block_diagonal(h.gram(), p).mul(&rq);
    let block_projection = block_lift(h, &e.module.projection)?;
    let gram = block_projection.adjoint().mul(&ambient_gram).mul(&block_projection);
    let module = PreHilbertModule::new(gram)?;
    let mut action = BTreeMap::new();
    for (&k, m) in &e.left_action {
        action.insert(k, block_lift(h, m)?);
    }
    debug_assert_eq!(module.rank(), p * d);
    Ok(TensorProduct { ambient_gram, block_projection, module, action })
}

/// `x ⊗ φ` as the block vector `(ρ(x_i) φ)_i`.
pub fn elementary_tensor(h: &Representation, x: &[AlgebraElement], phi: &[Scalar]) -> Result<Vec<Scalar>> {
    let z = Scalar::zero(h.ctx());
    let col = Matrix::column(phi.to_vec(), &z);
    let mut out = Vec::with_capacity(x.len() * h.rank());
    for xi in x {
        out.extend(h.act(xi)?.mul(&col).col_vec(0));
    }
    Ok(out)
}

/// Construction data of an induced representation.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub bimodule: BimoduleSpec,
    pub source: Representation,
    pub tensor: TensorProduct,
    pub quotient: Quotient,
}

#[derive(Clone, Debug)]
pub struct InducedRepresentation {
    pub rep: Representation,
    pub provenance: Provenance,
}

impl InducedRepresentation {
    /// Class of a block vector in the induced carrier.
    pub fn project(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.provenance.quotient.project(v)
    }

    pub fn to_json(&self) -> Value {
        let pr = &self.provenance;
        json!({
            "representation": self.rep.to_json(),
            "provenance": {
                "bimodule": pr.bimodule.to_json(),
                "source": pr.source.to_json(),
                "block_projection": pr.tensor.block_projection.to_json(),
                "ambient_gram": pr.tensor.ambient_gram.to_json(),
                "surjection": pr.quotient.surjection.to_json(),
                "inclusion": pr.quotient.inclusion.to_json(),
                "representatives": pr.quotient.representatives,
            }
        })
    }
}

fn require_positive(v: PSDVerdict, what: &str) -> Result<()> {
    match v {
        PSDVerdict::Positive(_) => Ok(()),
        PSDVerdict::NotPositive(_) => Err(Error::CpCheckFailed(format!("{what} is not completely positive"))),
        PSDVerdict::Indeterminate(r) => Err(Error::CpCheckFailed(format!("{what}: {r}"))),
    }
}

/// Tensor product followed by the degeneracy quotient, with complete
/// positivity of both inputs checked first.
pub fn rieffel_induce(e: &BimoduleSpec, h: &Representation) -> Result<InducedRepresentation> {
    check_algebras(e, h)?;
    require_positive(cp_check_module(&e.module), "bimodule inner product")?;
    require_positive(formal_psd_check(h.gram())?, "representation Gram")?;
    induce_unchecked(e, h)
}

/// [`rieffel_induce`] without the positivity prechecks.
pub fn induce_unchecked(e: &BimoduleSpec, h: &Representation) -> Result<InducedRepresentation> {
    let tensor = tensor_over_a(e, h)?;
    let (carrier, quotient) = kernel_quotient(&tensor.module)?;
    let nulls = null_vectors(&tensor.module)?;
    let z = Scalar::zero(h.ctx());
    let mut action = BTreeMap::new();
    for (&k, m) in &tensor.action {
        let preserves = nulls.iter().all(|n| tensor.module.gram.mul(&m.mul(&Matrix::column(n.clone(), &z))).is_zero());
        if !preserves {
            return Err(Error::NotAdjointable(format!("left action of {} does not preserve null vectors", e.left.label(k))));
        }
        action.insert(k, quotient.descend(m));
    }
    let rep = Representation::new(e.left.clone(), carrier, action)?;
    Ok(InducedRepresentation { rep, provenance: Provenance { bimodule: e.clone(), source: h.clone(), tensor, quotient } })
}

/// Positivity of inputs and output, and the representation axioms.
pub fn induction_report(ind: &InducedRepresentation, checks: &[&str]) -> Report {
    let mut report = Report::new("induce");
    let pr = &ind.provenance;
    let all = checks.is_empty();
    if all || checks.contains(&"cp") {
        report.push(cp_check_module(&pr.bimodule.module).to_entry("bimodule_cp"));
        report.push(match formal_psd_check(pr.source.gram()) {
            Ok(v) => v.to_entry("representation_cp"),
            Err(e) => CheckEntry::fail("representation_cp").with_detail(e.to_string()),
        });
    }
    if all || checks.contains(&"rep") {
        report.extend("induced.", verify_representation(&ind.rep));
    }
    if all || checks.contains(&"theorem34") {
        report.push(match formal_psd_check(ind.rep.gram()) {
            Ok(v) => v.to_entry("induced_gram_positive"),
            Err(e) => CheckEntry::fail("induced_gram_positive").with_detail(e.to_string()),
        });
    }
    report
}

/// `R_E(V) = S₂ · diag(V) · J₁` for a morphism `V: H₁ → H₂`.
pub fn induce_morphism(v: &ScalarMatrix, from: &InducedRepresentation, to: &InducedRepresentation) -> ScalarMatrix {
    let p = from.provenance.bimodule.module.ambient_rank();
    to.provenance.quotient.surjection.mul(&block_diagonal(v, p)).mul(&from.provenance.quotient.inclusion)
}

/// `U π₁(a) = π₂(a) U` on every basis element acting in both.
pub fn intertwines(u: &ScalarMatrix, pi1: &Representation, pi2: &Representation) -> bool {
    pi1.action.iter().all(|(k, a1)| match pi2.action.get(k) {
        Some(a2) => u.mul(a1) == a2.mul(u),
        None => true,
    })
}

pub fn verify_unitary_intertwiner(u: &ScalarMatrix, pi1: &Representation, pi2: &Representation) -> Report {
    let mut report = Report::new("verify-unitary-intertwiner");
    let dims = u.rows() == pi2.rank() && u.cols() == pi1.rank() && pi1.rank() == pi2.rank();
    report.push(CheckEntry::from_bool("dimensions", dims).with_detail(format!(
        "U is {}x{}, ranks {} and {}",
        u.rows(),
        u.cols(),
        pi1.rank(),
        pi2.rank()
    )));
    if !dims {
        return report;
    }
    report.push(CheckEntry::from_bool("same_algebra", pi1.algebra == pi2.algebra));
    let k1: Vec<usize> = pi1.action.keys().copied().collect();
    let k2: Vec<usize> = pi2.action.keys().copied().collect();
    report.push(CheckEntry::from_bool("action_domains", k1 == k2));
    let mut inter = CheckEntry::pass("intertwines");
    for (k, a1) in &pi1.action {
        if let Some(a2) = pi2.action.get(k) {
            if u.mul(a1) != a2.mul(u) {
                inter = CheckEntry::fail("intertwines").with_witness(json!(pi1.algebra.label(*k)));
                break;
            }
        }
    }
    report.push(inter);
    report.push(CheckEntry::from_bool("isometric", u.adjoint().mul(pi2.gram()).mul(u) == *pi1.gram()));
    let n = u.cols();
    report.push(CheckEntry::from_bool("invertible", rank(&u.row_vecs(), n) == n));
    report
}

/// The scalars acting on themselves.
pub fn trivial_representation(ctx: TruncationContext) -> Representation {
    let alg = AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx));
    let one = Matrix::scalar_identity(1, ctx);
    Representation::new(alg, PreHilbertModule { gram: one.clone() }, BTreeMap::from([(0, one)]))
        .expect("1x1 representation")
}

/// Induction from the scalars through `A` viewed as an `(A, scalars)`-bimodule
/// with Gram `ω(e_i* e_j)`, compared with [`gns`].
#[derive(Clone, Debug)]
pub struct GnsInduction {
    pub induced: InducedRepresentation,
    pub gns: Gns,
    /// `a ⊗ c ↦ ψ_{ac}` in the quotient bases.
    pub canonical: ScalarMatrix,
}

impl GnsInduction {
    pub fn verify(&self) -> Report {
        verify_unitary_intertwiner(&self.canonical, &self.induced.rep, &self.gns.rep)
    }
}

pub fn gns_via_induction(w: &LinearFunctional) -> Result<GnsInduction> {
    if !is_positive_functional(w, None)?.is_positive() {
        return Err(Error::NotPositiveFunctional);
    }
    let alg = &w.algebra;
    let ctx = alg.ctx();
    let scal = AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx));
    let elems: Vec<AlgebraElement> = (0..alg.dim()).map(|i| alg.basis_element(i)).collect();
    let omega = functional_gram(w, &elems)?;
    let m = elems.len();
    let sf = scal.finite().expect("scalars are finite").clone();
    let lift = |s: &ScalarMatrix| {
        let zero = AlgElem::zero(&sf);
        lift_matrix(&Matrix::from_fn(s.rows(), s.cols(), &zero, |i, j| AlgElem::scalar(&sf, s.get(i, j))))
    };
    let module = InnerProductModule {
        algebra: scal.clone(),
        projection: Matrix::identity(m, &scal.one()),
        metric: lift(&omega),
        metric_factor: None,
    };
    let pre = PreHilbertModule::new(omega.clone())?;
    let nulls = null_vectors(&pre)?;
    let z = Scalar::zero(ctx);
    let mut negligible = BTreeMap::new();
    let mut action = BTreeMap::new();
    for a in 0..alg.dim() {
        let Some(l) = crate::modrep::gns::left_action_matrix(w, a, &elems, &mut negligible)? else { continue };
        if nulls.iter().all(|n| omega.mul(&l.mul(&Matrix::column(n.clone(), &z))).is_zero()) {
            action.insert(a, lift(&l));
        }
    }
    let spec = BimoduleSpec::new(module, alg.clone(), action)?;
    let induced = rieffel_induce(&spec, &trivial_representation(ctx))?;
    let g = gns(w, None)?;
    let canonical = g.quotient.surjection.mul(&induced.provenance.quotient.inclusion);
    Ok(GnsInduction { induced, gns: g, canonical })
}

/// Parsed `{"bimodule", "representation", "checks"}` request.
#[derive(Clone, Debug)]
pub struct InductionRequest {
    pub bimodule: BimoduleSpec,
    pub representation: Representation,
    pub checks: Vec<String>,
}

impl InductionRequest {
    pub fn from_json(v: &Value, ctx: TruncationContext, default_cap: u32) -> Result<Self> {
        let bimodule = BimoduleSpec::from_json(&v["bimodule"], ctx, default_cap)?;
        let representation = Representation::from_json(&v["representation"], ctx, default_cap)?;
        let checks = match v.get("checks") {
            None | Some(Value::Null) => vec!["cp".into(), "rep".into(), "theorem34".into()],
            Some(c) => c
                .as_array()
                .ok_or_else(|| Error::Input("checks must be an array".into()))?
                .iter()
                .map(|s| s.as_str().map(String::from).ok_or_else(|| Error::Input("check names are strings".into())))
                .collect::<Result<_>>()?,
        };
        if let Some(bad) = checks.iter().find(|c| !["cp", "rep", "theorem34"].contains(&c.as_str())) {
            return Err(Error::Input(format!("unknown check {bad}")));
        }
        Ok(InductionRequest { bimodule, representation, checks })
    }

    /// Runs the induction; input positivity failures become report entries.
    pub fn run(&self) -> Result<(Report, Option<InducedRepresentation>)> {
        let checks: Vec<&str> = self.checks.iter().map(String::as_str).collect();
        match rieffel_induce(&self.bimodule, &self.representation) {
            Ok(ind) => Ok((induction_report(&ind, &checks), Some(ind))),
            Err(Error::CpCheckFailed(msg)) => {
                let mut r = Report::new("induce");
                let verdict = if msg.contains("not completely positive") { Verdict::Fail } else { Verdict::Indeterminate };
                r.push(CheckEntry::new("inputs_cp", verdict).with_detail(msg));
                Ok((r, None))
            }
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::positivity::function_algebra;
    use crate::scalars::gauss_int;
    use crate::staralg::{matrix_algebra, PhaseSpaceSignature, StarProductRule};

    fn m2(ctx: TruncationContext) -> AlgebraRef {
        AlgebraRef::Finite(matrix_algebra(&FiniteStarAlgebra::scalars(ctx), 2))
    }

    #[test]
    fn identity_bimodule_reproduces_h() {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        let h = gns(&LinearFunctional::normalized_trace(&a).unwrap(), None).unwrap().rep;
        let ind = rieffel_induce(&BimoduleSpec::identity(&a).unwrap(), &h).unwrap();
        assert_eq!(ind.rep.rank(), h.rank());
        let u = Matrix::scalar_identity(h.rank(), ctx);
        let u = induce_morphism(&u, &ind, &ind).mul(&Matrix::scalar_identity(h.rank(), ctx));
        assert!(verify_unitary_intertwiner(&u, &ind.rep, &ind.rep).passed());
        // Canonical map x ⊗ φ ↦ ρ(x)φ back to H.
        let canon = ind.provenance.quotient.inclusion.clone();
        assert!(verify_unitary_intertwiner(&canon, &ind.rep, &h).passed());
    }

    #[test]
    fn standard_bimodule_over_scalars() {
        let ctx = TruncationContext::new(2);
        let s = AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx));
        let ind = rieffel_induce(&BimoduleSpec::standard(&s, 2).unwrap(), &trivial_representation(ctx)).unwrap();
        assert_eq!(ind.rep.rank(), 2);
        assert!(induction_report(&ind, &[]).passed());
        assert_eq!(*ind.rep.gram(), Matrix::scalar_identity(2, ctx));
    }

    #[test]
    fn gns_and_induction_agree() {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        for w in [
            LinearFunctional::normalized_trace(&a).unwrap(),
            LinearFunctional::vector_state(&a, &[Scalar::one(ctx), Scalar::zero(ctx)]).unwrap(),
        ] {
            let gi = gns_via_induction(&w).unwrap();
            let r = gi.verify();
            assert!(r.passed(), "{}", r.to_text());
        }
    }

    #[test]
    fn wick_fock_via_induction() {
        let ctx = TruncationContext::new(6);
        let alg = function_algebra(PhaseSpaceSignature::conjugate(1), StarProductRule::Wick, ctx, 3).unwrap();
        let w = LinearFunctional::point(&alg, vec![gauss_int(0, 0)]).unwrap();
        let gi = gns_via_induction(&w).unwrap();
        assert_eq!(gi.induced.rep.rank(), 4);
        assert!(gi.verify().passed(), "{}", gi.verify().to_text());
    }

    #[test]
    fn negative_metric_rejected() {
        let ctx = TruncationContext::new(2);
        let s = AlgebraRef::Finite(FiniteStarAlgebra::scalars(ctx));
        let mut spec = BimoduleSpec::identity(&s).unwrap();
        spec.module.metric = spec.module.metric.map(|x| x.scale(&Scalar::from_int(-1, ctx)));
        spec.module.metric_factor = None;
        assert!(matches!(rieffel_induce(&spec, &trivial_representation(ctx)), Err(Error::CpCheckFailed(_))));
    }

    #[test]
    fn balanced_relation() {
        let ctx = TruncationContext::new(2);
        let a = m2(ctx);
        let h = gns(&LinearFunctional::normalized_trace(&a).unwrap(), None).unwrap().rep;
        let spec = BimoduleSpec::standard(&a, 2).unwrap();
        let t = tensor_over_a(&spec, &h).unwrap();
        let x = vec![a.basis_element(1), a.basis_element(2)];
        let b = a.basis_element(3);
        let phi: Vec<Scalar> = (0..h.rank()).map(|k| Scalar::from_int(k as i64 + 1, ctx)).collect();
        let xa: Vec<AlgebraElement> = x.iter().map(|e| e.try_mul(&b).unwrap()).collect();
        let lhs = elementary_tensor(&h, &xa, &phi).unwrap();
        let bphi = h.act(&b).unwrap().mul(&Matrix::column(phi.clone(), &Scalar::zero(ctx))).col_vec(0);
        let rhs = elementary_tensor(&h, &x, &bphi).unwrap();
        let diff: Vec<Scalar> = lhs.iter().zip(&rhs).map(|(p, q)| p - q).collect();
        assert!(t.module.inner(&diff, &diff).is_zero());
    }
}
