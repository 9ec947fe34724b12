//! Star products on polynomial observables and finite-dimensional *-algebras.

pub mod capped;
pub mod finite;
pub mod observable;
pub mod rule;

pub use capped::{flatten, lift_matrix, AlgebraElement, AlgebraRef, Capped, CappedFunctionAlgebra};
pub use finite::{
    alg_involution, alg_mul, elementary_matrix, matrix_algebra, same_algebra, verify_algebra, AlgElem, Algebra,
    FiniteStarAlgebra, MatrixForm, MatrixStructure,
};
pub use observable::{classical_limit_obs, poisson_bracket, Exponents, Observable, PhaseSpaceSignature, SignatureKind};
pub use rule::{star, star_commutator, verify_star_axioms, BidiffTerm, SampleSpec, StarProductRule};
