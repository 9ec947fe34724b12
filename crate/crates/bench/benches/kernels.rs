use criterion::{criterion_group, criterion_main, Criterion};
use defq_bench::{binomial, gram};
use defq_core::modrep::gns;
use defq_core::positivity::{formal_psd_check, function_algebra, LinearFunctional};
use defq_core::scalars::gauss_int;
use defq_core::staralg::{matrix_algebra, star, AlgebraRef, FiniteStarAlgebra, PhaseSpaceSignature, StarProductRule};
use defq_core::TruncationContext;

fn star_products(c: &mut Criterion) {
    let ctx = TruncationContext::new(5);
    let f = binomial(4, ctx);
    let g = binomial(3, ctx);
    c.bench_function("moyal_deg4_deg3", |b| b.iter(|| star(&f, &g, &StarProductRule::Moyal, ctx).unwrap()));
}

fn psd(c: &mut Criterion) {
    let ctx = TruncationContext::new(4);
    for n in [4usize, 8] {
        let h = gram(n, ctx);
        c.bench_function(&format!("psd_{n}"), |b| b.iter(|| formal_psd_check(&h).unwrap()));
    }
}

fn gns_runs(c: &mut Criterion) {
    let ctx = TruncationContext::new(3);
    let m3 = AlgebraRef::Finite(matrix_algebra(&FiniteStarAlgebra::scalars(ctx), 3));
    let tr = LinearFunctional::normalized_trace(&m3).unwrap();
    c.bench_function("gns_trace_m3", |b| b.iter(|| gns(&tr, None).unwrap()));

    let ctx = TruncationContext::new(6);
    let wick = function_algebra(PhaseSpaceSignature::conjugate(1), StarProductRule::Wick, ctx, 3).unwrap();
    let origin = LinearFunctional::point(&wick, vec![gauss_int(0, 0)]).unwrap();
    c.bench_function("gns_wick_cap3", |b| b.iter(|| gns(&origin, None).unwrap()));
}

criterion_group!(benches, star_products, psd, gns_runs);
criterion_main!(benches);
