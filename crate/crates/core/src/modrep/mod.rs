//! Pre-Hilbert modules, *-representations and the GNS construction.

pub mod gns;
pub mod hilbert;
pub mod module;

pub use gns::{gns, with_cap, Gns};
pub use hilbert::{
    adjoint_of, kernel_quotient, null_vectors, verify_representation, PreHilbertModule, Quotient, Representation,
};
pub use module::{
    alg_matrix_from_json, alg_matrix_to_json, classical_limit_metric, columns_matrix, cp_check, cp_check_module,
    factor_certificate, left_mul_matrix, module_gram, right_mul_matrix, verify_bimodule, AlgMatrix, BimoduleSpec,
    Column, InnerProductModule,
};
