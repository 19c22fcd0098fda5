use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hodge_cgo::algebra;
use hodge_cgo::bourgain::ConjugatedSymbol;
use hodge_cgo::calculus::{coderiv, ext_deriv};
use hodge_cgo::cgo::{self, Polarization, SolverSettings};
use hodge_cgo::media::apply_q;
use hodge_cgo::{rng, ClampSettings, Grid};
use hodge_cgo_bench::{geometry, random_field, reference_medium};

fn algebra_products(c: &mut Criterion) {
    let mut r = rng::stream(1, 0);
    let (u, v) = (rng::graded_form(&mut r), rng::graded_form(&mut r));
    c.bench_function("wedge", |b| b.iter(|| algebra::wedge(&u, &v)));
    c.bench_function("vee", |b| b.iter(|| algebra::vee(&u, &v)));
}

fn spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral");
    for n in [16, 32] {
        let g = Grid::new(n, 2.0 * std::f64::consts::PI).unwrap();
        let f = random_field(g, 2);
        group.bench_with_input(BenchmarkId::new("fft_roundtrip", n), &f, |b, f| b.iter(|| f.forward().inverse()));
        group.bench_with_input(BenchmarkId::new("d_then_delta", n), &f, |b, f| b.iter(|| coderiv(&ext_deriv(f))));
    }
    group.finish();
}

fn medium_kernels(c: &mut Criterion) {
    let dm = reference_medium(32);
    let g = dm.grid;
    let f = random_field(g, 3);
    let geo = geometry(&g, 16.0, dm.k);
    let mut group = c.benchmark_group("medium");
    group.sample_size(10);
    group.bench_function("apply_q_32", |b| b.iter(|| apply_q(&f, &dm)));
    let sym = ConjugatedSymbol::new(g, geo.zeta1, ClampSettings::default_for(&g));
    group.bench_function("resolvent_32", |b| b.iter(|| sym.resolve(&f)));
    let settings = SolverSettings::default_for(&g);
    let a = cgo::amplitude_a(&geo, Polarization::E).unwrap();
    group.bench_function("solve_cgo_32_s16", |b| b.iter(|| cgo::solve_cgo(&dm, &geo.zeta1, &a, &settings).unwrap()));
    group.finish();
}

criterion_group!(benches, algebra_products, spectral, medium_kernels);
criterion_main!(benches);
