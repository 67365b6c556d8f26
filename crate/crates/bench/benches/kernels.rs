use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hardylab_core::curves::{curve_infimum, default_lambda_grid, solve_lagrangian, Target};
use hardylab_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(n: u32) -> DomainSpec {
    DomainSpec::unit_square(1.0 / n as f64).with_shape(Shape::Puncture { at: vec![0.5, 0.5] })
}

fn random_field(d: &GridDomain, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_fn(d, |k, _| {
        if d.is_inside(k) {
            rng.gen_range(0.0..1.0)
        } else {
            0.0
        }
    })
}

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_domain");
    for n in [64u32, 256] {
        let spec = square(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, s| {
            b.iter(|| build_domain(black_box(s)).unwrap())
        });
    }
    g.finish();
}

fn maximal_operator(c: &mut Criterion) {
    let mut g = c.benchmark_group("maximal");
    for n in [32u32, 64] {
        let d = build_domain(&square(n)).unwrap();
        let w = distance_power_weight(&d, 1.0).unwrap();
        let f = random_field(&d, 1);
        for p in [1.0, 2.0] {
            g.bench_function(BenchmarkId::new(format!("p={p}"), n), |b| {
                b.iter(|| maximal(&d, black_box(&f), p, &w, 2.0).unwrap())
            });
        }
    }
    g.finish();
}

fn curves(c: &mut Criterion) {
    let d = build_domain(&square(32)).unwrap();
    let g = random_field(&d, 2);
    let x = d.locate([0.2, 0.35]).unwrap();
    let mut grp = c.benchmark_group("curves");
    for nu in [1.2, 2.0] {
        grp.bench_function(BenchmarkId::new("label_setting", nu), |b| {
            b.iter(|| curve_infimum(&d, black_box(&g), x, nu).unwrap())
        });
    }
    let budget = 2.0 * d.dist(x);
    let lambdas = default_lambda_grid();
    grp.bench_function("lagrangian", |b| {
        b.iter(|| {
            solve_lagrangian(&d, black_box(&g), x, Target::Complement, budget, &lambdas).unwrap()
        })
    });
    grp.finish();
}

fn certificate(c: &mut Criterion) {
    let h = HardyHypotheses {
        p0: 1.5,
        p: 2.0,
        c_gamma: 1.0,
        c_a: 1.0,
        nu: 2.0,
        kappa: 2.0,
        d10: 1.0,
    };
    let mut g = c.benchmark_group("certificate");
    g.bench_function("rational", |b| {
        b.iter(|| improvement_certificate(black_box(&h)).unwrap())
    });
    let float = HardyHypotheses {
        p: 2.0 + 2f64.powi(-40),
        ..h
    };
    g.bench_function("float256", |b| {
        b.iter(|| improvement_certificate(black_box(&float)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, build, maximal_operator, curves, certificate);
criterion_main!(benches);
