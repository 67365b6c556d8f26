mod common;

use common::*;
use hardylab_core::certificate::{alpha_bound, improvement_certificate, k_condition_holds};
use hardylab_core::curves::{curve_infimum, Target};
use hardylab_core::hardy::{alpha_estimate, integral_hardy_ratio, sample_points};
use hardylab_core::weights::measure_cells;
use hardylab_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn square(n: u32) -> GridDomain {
    build_domain(&DomainSpec::unit_square(1.0 / n as f64)).unwrap()
}

fn obstacle_domain(kind: u8, n: u32) -> GridDomain {
    let base = DomainSpec::unit_square(1.0 / n as f64);
    let spec = match kind % 4 {
        0 => base,
        1 => base.with_shape(Shape::Puncture { at: vec![0.5, 0.5] }),
        2 => base.with_shape(Shape::Segment {
            from: vec![0.2, 0.3],
            to: vec![0.7, 0.8],
        }),
        _ => DomainSpec::interval(0.0, 1.0, 1.0 / (4 * n) as f64),
    };
    build_domain(&spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dist_is_one_lipschitz(kind in 0u8..4, seed in any::<u64>()) {
        let d = obstacle_domain(kind, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = sample_points(&d, 40, &mut rng);
        for &a in &pts {
            for b in 0..d.len() {
                prop_assert!((d.dist(a) - d.dist(b)).abs() <= d.euclid(a, b) * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn refinement_moves_dist_by_at_most_h(kind in 0u8..3) {
        let coarse = obstacle_domain(kind, 16);
        let fine = obstacle_domain(kind, 32);
        let h = coarse.spacing();
        for k in 0..coarse.len() {
            let (i, j) = coarse.coords(k);
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let f = fine.index(2 * i + di, 2 * j + dj);
                prop_assert!((coarse.dist(k) - fine.dist(f)).abs() <= h);
            }
        }
    }

    #[test]
    fn maximal_is_sublinear(seed in any::<u64>(), kind in 0u8..4, p in prop::sample::select(vec![1.0, 2.0, 3.0]), beta in 0.0f64..2.0) {
        let d = obstacle_domain(kind, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = distance_power_weight(&d, beta).unwrap();
        let f = random_field(&d, &mut rng);
        let g = random_field(&d, &mut rng);
        let sum = f.zip_with(&g, |a, b| a + b);
        let mf = maximal(&d, &f, p, &w, 2.0).unwrap();
        let mg = maximal(&d, &g, p, &w, 2.0).unwrap();
        let ms = maximal(&d, &sum, p, &w, 2.0).unwrap();
        for k in 0..d.len() {
            prop_assert!(ms[k] <= mf[k] + mg[k], "cell {k}: {} > {} + {}", ms[k], mf[k], mg[k]);
        }
    }

    #[test]
    fn measure_is_additive_and_monotone(seed in any::<u64>(), beta in 0.0f64..3.0) {
        let d = square(16);
        let w = distance_power_weight(&d, beta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = sample_points(&d, 3, &mut rng);
        let c = d.center(pts[0]);
        let mut last = 0.0;
        for j in 1..10 {
            let m = measure(&d, &w, c, j as f64 * d.spacing()).unwrap();
            prop_assert!(m >= last);
            last = m;
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|k| k % 3 == 0);
        let whole: f64 = measure_cells(&d, &w, &(0..d.len()).collect::<Vec<_>>());
        let split = measure_cells(&d, &w, &a) + measure_cells(&d, &w, &b);
        prop_assert!((whole - split).abs() <= 1e-12 * whole);
    }

    #[test]
    fn larger_budget_never_costs_more(seed in any::<u64>(), kind in 0u8..4) {
        let d = obstacle_domain(kind, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_integrand(&d, &mut rng);
        let x = sample_points(&d, 1, &mut rng)[0];
        let mut last = f64::INFINITY;
        for nu in [1.0, 1.2, 1.6, 2.4, 4.0] {
            let r = curve_infimum(&d, &g, x, nu).unwrap();
            prop_assert!(r.integral <= last);
            if r.feasible {
                prop_assert!(r.integral <= r.length * (1.0 + 1e-12));
                prop_assert!(r.length <= nu * d.dist(x));
            }
            last = r.integral;
        }
    }

    #[test]
    fn integral_ratio_is_scale_invariant(k in -6i32..6, neg in any::<bool>(), p in prop::sample::select(vec![1.0, 2.0])) {
        let d = build_domain(&DomainSpec::interval(0.0, 1.0, 1.0 / 128.0)).unwrap();
        let w = distance_power_weight(&d, 1.0).unwrap();
        let e = Recipe::Collar { eps: 0.2 }.build(&d).unwrap();
        let c = if neg { -(2f64.powi(k)) } else { 2f64.powi(k) };
        let base = integral_hardy_ratio(&d, &w, p, &e.u, &e.g).unwrap();
        let scaled = integral_hardy_ratio(&d, &w, p, &e.u.scaled(c), &e.g.scaled(c.abs())).unwrap();
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn certificate_alpha_bound_is_homogeneous(tau in 1e-3f64..1e3, frac in 0.0f64..0.99, dexp in 0u32..3) {
        let h = HardyHypotheses { p0: 1.5, p: 2.0, c_gamma: 1.0, c_a: 1.0, nu: 2.0, kappa: 2.0, d10: (1u32 << dexp) as f64 };
        let c = improvement_certificate(&h).unwrap();
        prop_assert!(k_condition_holds(&h, c.k).unwrap());
        prop_assert!(!k_condition_holds(&h, c.k - 1).unwrap());
        let q = c.p - frac * c.window;
        let a = alpha_bound(&c, q, tau).unwrap();
        let one = alpha_bound(&c, q, 1.0).unwrap();
        prop_assert!((a.ln_abs - tau.ln() - one.ln_abs).abs() <= 1e-12 * one.ln_abs);
    }
}

#[test]
fn pointwise_constant_is_nonincreasing_in_p() {
    let d = build_domain(
        &DomainSpec::unit_square(1.0 / 16.0).with_shape(Shape::Puncture { at: vec![0.5, 0.5] }),
    )
    .unwrap();
    let corpus = TestFunctionCorpus::from_recipes(
        &d,
        &[
            Recipe::Collar { eps: 0.2 },
            Recipe::TentBump {
                center: vec![0.3, 0.6],
                radius: 0.2,
            },
            Recipe::LogCutoff {
                center: vec![0.5, 0.5],
                inner_cells: 1.0,
                outer: 0.3,
                boundary_eps: 0.1,
            },
        ],
    )
    .unwrap();
    for beta in [0.0, 1.0] {
        let w = distance_power_weight(&d, beta).unwrap();
        let ps = [1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0];
        let curve = hardy::hardy_constant_curve(&d, &w, &ps, 2.0, &corpus).unwrap();
        for pair in curve.windows(2) {
            assert!(pair[1].1 <= pair[0].1, "{pair:?}");
        }
    }
}

#[test]
fn alpha_estimate_exact_properties() {
    let d = square(16).with_qc_factor(1.0);
    let w = distance_power_weight(&d, 1.0).unwrap();
    let fam = CandidateFamily::new(vec![
        Generator::Collar { t: 0.15, c: 1.0 },
        Generator::Constant { c: 1.0 },
        Generator::RandomSteps { block: 2, seed: 9 },
    ]);
    let pts = sample_points(&d, 8, &mut ChaCha8Rng::seed_from_u64(5));
    let nu = 3.0;
    let mut last = 0.0;
    let mut by_tau = Vec::new();
    for tau in [0.0, 0.125, 0.25, 0.5, 1.0, 2.0] {
        let r = alpha_estimate(&d, &w, 2.0, nu, 4.0, tau, &fam, &pts).unwrap();
        assert!(r.estimate >= last);
        assert!(r.estimate <= nu * d.qc_factor().unwrap());
        last = r.estimate;
        by_tau.push(r.estimate);
    }
    // tau -> 2 tau with a family closed under halving.
    for pair in by_tau[1..].windows(2) {
        assert!(pair[1] <= 2.0 * pair[0], "{pair:?}");
    }
}

#[test]
fn doubling_of_lebesgue_measure() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = build_domain(&DomainSpec::interval(0.0, 1.0, 1.0 / 1024.0)).unwrap();
    let w = distance_power_weight(&d, 0.0).unwrap();
    let r = doubling_constant_with(&d, &w, 1.0, 200, 16.0 * d.spacing(), &mut rng).unwrap();
    assert!((r.d_hat - 2.0).abs() <= 0.2, "{}", r.d_hat);
    let d = square(64);
    let w = distance_power_weight(&d, 0.0).unwrap();
    let r = doubling_constant_with(&d, &w, 1.0, 200, 16.0 * d.spacing(), &mut rng).unwrap();
    assert!((r.d_hat - 4.0).abs() <= 0.4, "{}", r.d_hat);
}

#[test]
fn weight_is_monotone_in_beta() {
    let d = build_domain(&DomainSpec::rectangle([0.0, 0.0], [4.0, 4.0], 0.125)).unwrap();
    let betas = [0.0, 0.5, 1.0, 2.0, 3.5];
    let ws: Vec<Weight> = betas
        .iter()
        .map(|&b| distance_power_weight(&d, b).unwrap())
        .collect();
    for &k in d.inside_cells() {
        for pair in ws.windows(2) {
            let (a, b) = (pair[0].value(k), pair[1].value(k));
            if d.dist(k) >= 1.0 {
                assert!(b >= a);
            } else {
                assert!(b <= a);
            }
        }
    }
}

#[test]
fn axis_aligned_pairs_have_unit_ratio() {
    let d = square(16);
    for &src in d.inside_cells().iter().step_by(17) {
        let metric = d.path_metric_from(src);
        let (_, j) = d.coords(src);
        for i in 0..16 {
            let t = d.index(i, j);
            if t != src {
                assert!((metric[t] / d.euclid(src, t) - 1.0).abs() < 1e-12);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    assert!(quasiconvexity_estimate(&d, 100, &mut rng) >= 1.0);
}

#[test]
fn curve_reaches_complement_through_punctures() {
    let d = build_domain(
        &DomainSpec::unit_square(1.0 / 16.0).with_shape(Shape::Puncture { at: vec![0.5, 0.5] }),
    )
    .unwrap();
    let x = d.locate([0.53, 0.53]).unwrap();
    let g = ScalarField::constant(&d, 1.0);
    let r = curve_infimum(&d, &g, x, 1.0).unwrap();
    assert!(r.feasible);
    assert!((r.integral - d.dist(x)).abs() < 1e-15);
    assert_eq!(
        hardylab_core::curves::graph_distance(&d, x, Target::Complement).unwrap(),
        d.dist(x)
    );
}
