//! Positive functionals, formal positivity of Hermitian matrices, and the
//! positive deformation of point evaluations.

pub mod functional;
pub mod lemma;
pub mod psd;

pub use psd::{
    element_positivity_check, formal_psd_check, quadratic_form, quadratic_form_sesq, real_sign, CertificateTerm, PSDVerdict,
    PositivityCertificate,
};
pub use functional::{
    calibrate_weyl_wick_constant, deform_classical_functional, function_algebra, functional_eval, functional_gram,
    is_positive_functional, smooth, test_elements, verify_intertwining, witness_element, FunctionalBody,
    LinearFunctional,
};
pub use lemma::{functional_from_rep, lemma_decompose, LemmaDecomposition};
