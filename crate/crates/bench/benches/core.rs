use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nlde_bench::{entry, grid};
use nlde_core::analytic::AnalyticFn;
use nlde_core::kernels::KernelWeight;
use nlde_core::ray_solver::{solve_fan, solve_ray, RayOptions};
use nlde_core::spaces::{qk_seminorm, KernelForm};
use num_complex::Complex64;

fn ray_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("ray_solve");
    for name in ["exp_nonlinear", "cos_linear", "small_norm_qk"] {
        let e = entry(name);
        let init = e.init_at(0.3);
        group.bench_function(name, |b| {
            b.iter(|| solve_ray(&e.equation, black_box(0.3), e.nu, 0.999, &init, 1e-10).unwrap())
        });
    }
    let e = entry("exp_nonlinear");
    let thetas: Vec<f64> = (0..32).map(|m| std::f64::consts::TAU * m as f64 / 32.0).collect();
    let opts = RayOptions::with_tol(1e-10);
    group.bench_function("fan_32", |b| {
        b.iter(|| solve_fan(&e.equation, &thetas, 0.0, 0.99, |t| e.init_at(t), &opts))
    });
    group.finish();
}

fn disk_quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("disk_quadrature");
    for n in [32usize, 128] {
        let g = grid(0.999, n, n);
        group.bench_function(format!("gaussian_{n}x{n}"), |b| {
            b.iter(|| g.integrate(|node| (-node.z.norm_sqr()).exp()))
        });
    }
    group.bench_function("build_64x64", |b| b.iter(|| grid(black_box(0.999), 64, 64)));
    group.finish();
}

fn qk(c: &mut Criterion) {
    let mut group = c.benchmark_group("qk_seminorm");
    group.sample_size(20);
    let f = AnalyticFn::log_pole(1.0);
    let kernel = KernelWeight::Power { p: 0.5 };
    let a_grid: Vec<Complex64> = (0..8).map(|m| Complex64::from_polar(0.5, m as f64)).collect();
    let g = grid(0.99, 48, 64);
    for (label, form) in [("one_minus_phi", KernelForm::OneMinusPhiSq), ("green", KernelForm::Green)] {
        group.bench_function(label, |b| b.iter(|| qk_seminorm(&f, &kernel, &a_grid, &g, form, 1).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, ray_solve, disk_quadrature, qk);
criterion_main!(benches);
