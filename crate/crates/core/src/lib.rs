//! Exact arithmetic for formal deformation quantization: truncated formal
//! power series scalars, star products, formal positivity, GNS
//! representations, Rieffel induction and strong Morita equivalence.

pub mod error;
pub mod fraction;
pub mod matrix;
pub mod modrep;
pub mod morita;
pub mod positivity;
pub mod report;
pub mod rieffel;
pub mod scalars;
pub mod staralg;

pub use error::{Error, Result};
pub use matrix::{Matrix, ScalarMatrix, StarRing};
pub use report::{CheckEntry, Report, Verdict};
pub use scalars::{Gaussian, OrderedScalar, Rational, Scalar, Sign, TruncationContext, DEFAULT_ORDER};
