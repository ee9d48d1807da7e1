use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdw_bench::DiracFixture;
use hdw_core::closedform::{evolve_dirac_2d, evolve_dirac_3d, ClosedFormOptions};
use hdw_core::fft::FftPlan;
use hdw_core::spectral::DiracEvolver;
use hdw_core::{dirac_kernel_momentum, eval_zeta_integral, make_gamma_set, radial_profile};
use std::hint::black_box;

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for (dims, len) in [(1, 4096), (2, 256), (3, 64)] {
        let plan = FftPlan::new(dims, len);
        let fx = DiracFixture::new(dims, 8.0, len, 1.0);
        let mut data = fx.psi0.component(0).to_vec();
        group.bench_function(BenchmarkId::from_parameter(format!("n{dims}_N{len}")), |b| {
            b.iter(|| {
                plan.forward(&mut data);
                plan.inverse(&mut data);
            })
        });
    }
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let g = make_gamma_set(3).unwrap();
    c.bench_function("kernel_matrix_n3", |b| b.iter(|| dirac_kernel_momentum(&g, black_box(&[1.0, -2.0, 0.5]), 1.7)));
}

fn spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_evolve");
    group.sample_size(10);
    for (n, len) in [(1, 4096), (2, 256), (3, 64)] {
        let fx = DiracFixture::new(n, 8.0, len, 1.0);
        let ev = DiracEvolver::new(&fx.gammas, &fx.psi0).unwrap();
        group.bench_function(BenchmarkId::from_parameter(format!("n{n}_N{len}")), |b| b.iter(|| ev.at(black_box(1.5))));
    }
    group.finish();
}

fn closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_form_probes");
    group.sample_size(10);
    let opts = ClosedFormOptions::default();
    let fx = DiracFixture::new(2, 10.0, 256, 0.5);
    let pts = fx.probe_line(16, 2.5);
    group.bench_function("n2_16_probes", |b| b.iter(|| evolve_dirac_2d(&fx.gammas, &fx.psi0, 2.0, &pts, &opts)));
    let fx = DiracFixture::new(3, 10.0, 64, 2.0);
    let pts = fx.probe_line(16, 3.5);
    group.bench_function("n3_16_probes", |b| b.iter(|| evolve_dirac_3d(&fx.gammas, &fx.psi0, 1.5, &pts, &opts)));
    group.finish();
}

fn zeta(c: &mut Criterion) {
    let mut group = c.benchmark_group("zeta_integral");
    for eps in [0.2, 2e-5] {
        group.bench_function(BenchmarkId::new("n2_t2_r1", eps), |b| b.iter(|| eval_zeta_integral(2, 2.0, 1.0, black_box(eps))));
    }
    group.finish();
}

fn profile(c: &mut Criterion) {
    let fx = DiracFixture::new(3, 8.0, 64, 1.0);
    c.bench_function("radial_profile_n3_N64", |b| b.iter(|| radial_profile(&fx.psi0, &[0.0; 3])));
}

criterion_group!(benches, fft, kernel, spectral, closed_form, zeta, profile);
criterion_main!(benches);
