//! Benchmark fixtures.

use defq_core::staralg::{Observable, PhaseSpaceSignature};
use defq_core::{Scalar, ScalarMatrix, TruncationContext};

/// `(x + p)^k` in one canonical degree of freedom.
pub fn binomial(k: u32, ctx: TruncationContext) -> Observable {
    let sig = PhaseSpaceSignature::canonical(1);
    Observable::var(0, sig, ctx).add(&Observable::var(1, sig, ctx)).pow(k)
}

/// `Y* Y` with `Y` an `n x n` matrix carrying a λ correction on the diagonal.
pub fn gram(n: usize, ctx: TruncationContext) -> ScalarMatrix {
    let z = Scalar::zero(ctx);
    let y = ScalarMatrix::from_fn(n, n, &z, |i, j| {
        if i == j {
            Scalar::from_ints(&[1, (i + 1) as i64], ctx)
        } else if j > i {
            Scalar::from_int(((i * 7 + j * 3) % 5) as i64 - 2, ctx)
        } else {
            z.clone()
        }
    });
    y.adjoint().mul(&y)
}
