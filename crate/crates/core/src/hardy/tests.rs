use super::*;
use crate::domain::{build_domain, DomainSpec, Shape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn square(n: u32) -> GridDomain {
    build_domain(&DomainSpec::unit_square(1.0 / n as f64)).unwrap()
}

#[test]
fn distance_function_has_unit_constant() {
    let d = square(16);
    let w = Weight::constant(&d, 1.0).unwrap();
    let c = TestFunctionCorpus::from_recipes(&d, &[Recipe::Dist]).unwrap();
    for p in [1.0, 2.0, 3.5] {
        let r = pointwise_hardy_constant(&d, &w, p, 2.0, &c).unwrap();
        assert!((r.constant - 1.0).abs() < 1e-15, "{}", r.constant);
        assert_eq!(r.skipped_cells, 0);
    }
}

#[test]
fn gradient_scaling_is_inverse() {
    let d = square(16);
    let w = distance_power_weight(&d, 1.0).unwrap();
    let e = Recipe::Collar { eps: 0.2 }.build(&d).unwrap();
    let doubled = CorpusEntry {
        label: "x2".into(),
        u: e.u.clone(),
        g: e.g.scaled(2.0),
    };
    let base = TestFunctionCorpus::from_entries(&d, vec![e], 0.0).unwrap();
    let big = TestFunctionCorpus::from_entries(&d, vec![doubled], 0.0).unwrap();
    let a = pointwise_hardy_constant(&d, &w, 2.0, 2.0, &base)
        .unwrap()
        .constant;
    let b = pointwise_hardy_constant(&d, &w, 2.0, 2.0, &big)
        .unwrap()
        .constant;
    assert_eq!(a, 2.0 * b);
}

#[test]
fn vanishing_gradients_are_degenerate() {
    let d = square(8);
    let w = Weight::constant(&d, 1.0).unwrap();
    let c = TestFunctionCorpus::from_entries_unchecked(vec![CorpusEntry {
        label: "zero".into(),
        u: ScalarField::zeros(&d),
        g: ScalarField::zeros(&d),
    }]);
    assert_eq!(
        pointwise_hardy_constant(&d, &w, 2.0, 2.0, &c),
        Err(LabError::DegenerateCorpus)
    );
}

#[test]
fn p_curve_csv_has_header() {
    let s = p_curve_csv(&[(1.5, 2.0), (2.0, 1.25)]);
    assert_eq!(s, "p,constant\n1.5,2\n2,1.25\n");
}

#[test]
fn integral_ratio_of_distance_is_one() {
    let d = build_domain(&DomainSpec::interval(0.0, 1.0, 1.0 / 32.0)).unwrap();
    let w = Weight::constant(&d, 1.0).unwrap();
    let e = Recipe::Dist.build(&d).unwrap();
    let r = integral_hardy_ratio(&d, &w, 2.0, &e.u, &e.g).unwrap();
    assert!((r - 1.0).abs() < 1e-14);
}

#[test]
fn zero_tau_gives_zero_alpha() {
    let d = square(16);
    let w = Weight::constant(&d, 1.0).unwrap();
    let fam = CandidateFamily::collars(&[0.1, 0.2]);
    let pts = sample_points(&d, 6, &mut ChaCha8Rng::seed_from_u64(1));
    let r = alpha_estimate(&d, &w, 2.0, 6.0, 4.0, 0.0, &fam, &pts).unwrap();
    assert_eq!(r.estimate, 0.0);
    assert!(r.warning.is_none());
    let r = alpha_estimate(&d, &w, 2.0, 6.0, 4.0, 0.5, &fam, &pts).unwrap();
    assert!(r.estimate > 0.0 && r.estimate <= 0.5 * 6.0);
}

#[test]
fn weight_constant_is_positive_and_finite() {
    let d = square(16);
    let w = distance_power_weight(&d, 0.5).unwrap();
    let fam = CandidateFamily::collars(&[0.1, 0.25]);
    let pts = sample_points(&d, 5, &mut ChaCha8Rng::seed_from_u64(2));
    let r = hardy_weight_constant(&d, &w, 2.0, 4.0, 6.0, &fam, &pts).unwrap();
    assert!(r.constant > 0.0 && r.constant.is_finite());
    assert_eq!(r.per_candidate.len(), 3);
}

#[test]
fn equivalence_bound_holds() {
    let d = square(16);
    let w = Weight::constant(&d, 1.0).unwrap();
    let g = Generator::RandomSteps { block: 2, seed: 3 }
        .build(&d)
        .unwrap();
    for &x in d.inside_cells().iter().step_by(37) {
        let r = equivalence_probe(&d, &w, 2.0, 4.0, 6.0, &g, x, 0.05).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn constant_functions_have_zero_poincare_quotient() {
    let d = square(32);
    let w = Weight::constant(&d, 1.0).unwrap();
    let u = ScalarField::constant(&d, 3.0);
    let g = ScalarField::constant(&d, 1.0);
    let x = d.locate([0.5, 0.5]).unwrap();
    let q = poincare_ball_quotient(&d, &w, 2.0, 1.0, &u, &g, x, 0.1).unwrap();
    assert_eq!(q, Some(0.0));
}

#[test]
fn poincare_constant_needs_room() {
    let d = square(8);
    let w = Weight::constant(&d, 1.0).unwrap();
    let c = TestFunctionCorpus::from_recipes(&d, &[Recipe::Dist]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(
        poincare_ball_constant(&d, &w, 2.0, 4.0, &c, 10, &mut rng),
        Err(LabError::NoAdmissibleBall(_))
    ));
    let d = square(32);
    let w = Weight::constant(&d, 1.0).unwrap();
    let c = TestFunctionCorpus::from_recipes(&d, &[Recipe::Collar { eps: 0.3 }]).unwrap();
    let r = poincare_ball_constant(&d, &w, 2.0, 1.0, &c, 40, &mut rng).unwrap();
    assert!(r.constant > 0.0 && r.constant < 1.0, "{}", r.constant);
}

#[test]
fn pointwise_poincare_on_linear_function() {
    let d = square(32);
    let w = Weight::constant(&d, 1.0).unwrap();
    let u = ScalarField::from_fn(&d, |_, c| c[0]);
    let g = ScalarField::constant(&d, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = pointwise_poincare_check(&d, &w, 2.0, 1.0, &u, &g, 1.0, 4.0, 50, &mut rng).unwrap();
    assert!(r.pass);
    assert!(r.worst_ratio <= 1.0 / (2.0 * r.c2) + 1e-12);
}

#[test]
fn beta_experiment_reports_both_sides() {
    let d = build_domain(
        &DomainSpec::unit_square(1.0 / 16.0).with_shape(Shape::Puncture { at: vec![0.5, 0.5] }),
    )
    .unwrap();
    let c =
        TestFunctionCorpus::from_recipes(&d, &[Recipe::Dist, Recipe::Collar { eps: 0.2 }]).unwrap();
    for beta in [0.0, 1.0] {
        let r = beta_hardy_experiment(&d, beta, 2.0, &c).unwrap();
        assert!(r.pointwise_constant > 0.0 && r.integral_ratio > 0.0);
        assert!(r.equivalence_gap.is_finite());
    }
}
