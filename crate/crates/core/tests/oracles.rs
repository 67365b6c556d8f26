mod common;

use common::*;
use hardylab_core::curves::{default_lambda_grid, solve, solve_lagrangian, Target};
use hardylab_core::domain::stencil::chamfer_max_ratio;
use hardylab_core::hardy::integral_hardy_ratio;
use hardylab_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn maximal_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let specs = [
        DomainSpec::unit_square(1.0 / 16.0),
        DomainSpec::unit_square(1.0 / 16.0).with_shape(Shape::Segment {
            from: vec![0.3, 0.5],
            to: vec![0.8, 0.5],
        }),
        DomainSpec::interval(0.0, 1.0, 1.0 / 64.0),
    ];
    for spec in specs {
        let d = build_domain(&spec).unwrap();
        for beta in [0.0, 1.0, 2.5] {
            let w = distance_power_weight(&d, beta).unwrap();
            for p in [1.0, 2.0, 3.0] {
                for kappa in [1.0, 1.5, 2.0] {
                    let f = random_field(&d, &mut rng);
                    let cap = rng.gen_bool(0.5).then(|| rng.gen_range(0.1..0.4));
                    let fast =
                        maximal_capped(&d, &f, p, &w, kappa, cap.unwrap_or(f64::INFINITY)).unwrap();
                    let slow = brute_maximal(&d, &f, p, &w, kappa, cap);
                    assert_eq!(fast.values(), &slow[..], "beta {beta} p {p} kappa {kappa}");
                }
            }
        }
    }
}

fn curve_instances() -> Vec<GridDomain> {
    [
        DomainSpec::unit_square(1.0 / 12.0),
        DomainSpec::unit_square(1.0 / 12.0).with_shape(Shape::Puncture { at: vec![0.5, 0.5] }),
        DomainSpec::unit_square(1.0 / 12.0).with_shape(Shape::Segment {
            from: vec![0.25, 0.6],
            to: vec![0.75, 0.6],
        }),
        DomainSpec::interval(0.0, 1.0, 1.0 / 32.0),
    ]
    .iter()
    .map(|s| build_domain(s).unwrap())
    .collect()
}

#[test]
fn label_setting_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in curve_instances() {
        for _ in 0..6 {
            let g = random_integrand(&d, &mut rng);
            let cells = d.inside_cells();
            let x = cells[rng.gen_range(0..cells.len())];
            let target = if rng.gen_bool(0.5) {
                Target::Complement
            } else {
                Target::Cell(cells[rng.gen_range(0..cells.len())])
            };
            let base = match target {
                Target::Complement => d.dist(x),
                Target::Cell(y) => d.euclid(x, y),
            };
            for nu in [1.0, 1.1, 1.5, 2.5] {
                let budget = nu * base;
                let r = solve(&d, &g, x, target, budget).unwrap();
                let oracle = exhaustive_curve(&d, &g, x, target, budget);
                match oracle {
                    Some(v) => {
                        assert!(r.feasible);
                        assert_eq!(r.integral, v, "nu {nu} target {target:?}");
                        assert!(r.length <= budget);
                    }
                    None => assert!(!r.feasible && r.integral.is_infinite()),
                }
                let lag =
                    solve_lagrangian(&d, &g, x, target, budget, &default_lambda_grid()).unwrap();
                assert!(lag.lower_bound <= r.integral);
                if lag.feasible {
                    assert!(r.integral <= lag.integral);
                }
            }
        }
    }
}

#[test]
fn chamfer_constant_matches_scan() {
    let scan = chamfer_ratio_scan(200_000);
    assert!((scan - chamfer_max_ratio()).abs() < 1e-9, "{scan}");
    assert!(scan > 1.0196);
}

#[test]
fn path_metric_matches_floyd_warshall() {
    let spec =
        DomainSpec::rectangle([0.0, 0.0], [1.0, 1.0], 1.0 / 10.0).with_shape(Shape::Segment {
            from: vec![0.35, 0.0],
            to: vec![0.35, 0.7],
        });
    let d = build_domain(&spec).unwrap();
    let (cells, m) = floyd_warshall(&d);
    for (i, &c) in cells.iter().enumerate().step_by(7) {
        let metric = d.path_metric_from(c);
        for (j, &t) in cells.iter().enumerate() {
            let (a, b) = (metric[t], m[i][j]);
            assert!(a == b || (a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
    }
    let exact = exact_quasiconvexity(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let est = quasiconvexity_estimate(&d, 400, &mut rng);
    assert!(
        est >= 1.0 && est <= exact * (1.0 + 1e-12),
        "{est} > {exact}"
    );
    // The wall forces long detours.
    assert!(exact > 1.5);
}

#[test]
fn integral_ratio_matches_quadrature() {
    let n = 1024;
    let d = build_domain(&DomainSpec::interval(0.0, 1.0, 1.0 / n as f64)).unwrap();
    let w = Weight::constant(&d, 1.0).unwrap();
    for a in [0.6, 0.75, 1.0, 1.5] {
        let dd = |x: f64| x.min(1.0 - x);
        let u = ScalarField::from_fn(&d, |_, c| dd(c[0]).powf(a));
        let g = ScalarField::from_fn(&d, |_, c| a * dd(c[0]).powf(a - 1.0));
        let got = integral_hardy_ratio(&d, &w, 2.0, &u, &g).unwrap();
        let want = interval_hardy_quotient(n, 2.0, |x| dd(x).powf(a), |x| a * dd(x).powf(a - 1.0));
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
        assert!((got - 1.0 / (a * a)).abs() < 1e-9);
    }
}
