use hardylab_core::hardy::{pointwise_hardy_constant, Recipe, TestFunctionCorpus};
use hardylab_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Square window around a puncture. All sides are free, so the puncture is
/// the whole complement and no boundary collar competes with it.
fn punctured(n: u32) -> GridDomain {
    let mut spec =
        DomainSpec::unit_square(1.0 / n as f64).with_shape(Shape::Puncture { at: vec![0.5, 0.5] });
    for side in Side::ALL {
        spec = spec.with_free_side(side);
    }
    build_domain(&spec).unwrap()
}

fn log_cutoff() -> Recipe {
    Recipe::LogCutoff {
        center: vec![0.5, 0.5],
        inner_cells: 1.0,
        outer: 0.25,
        boundary_eps: 1.0,
    }
}

/// Pointwise 2-Hardy fails on a punctured square: the logarithmic cutoff
/// drives the measured constant up as the grid is refined.
#[test]
fn punctured_square_constant_grows_under_refinement() {
    let mut last = 0.0;
    for n in [32, 64, 128] {
        let d = punctured(n);
        let w = Weight::constant(&d, 1.0).unwrap();
        let c = TestFunctionCorpus::from_recipes(&d, &[log_cutoff()]).unwrap();
        let r = pointwise_hardy_constant(&d, &w, 2.0, 1.5, &c).unwrap();
        assert!(r.constant > last, "h = 1/{n}: {} <= {last}", r.constant);
        last = r.constant;
    }
}

/// On the plain square the same kind of corpus stays bounded.
#[test]
fn square_constant_is_stable_under_refinement() {
    let mut vals = Vec::new();
    for n in [32, 64] {
        let d = build_domain(&DomainSpec::unit_square(1.0 / n as f64)).unwrap();
        let w = Weight::constant(&d, 1.0).unwrap();
        let c = TestFunctionCorpus::from_recipes(&d, &[Recipe::Dist, Recipe::Collar { eps: 0.2 }])
            .unwrap();
        vals.push(
            pointwise_hardy_constant(&d, &w, 2.0, 2.0, &c)
                .unwrap()
                .constant,
        );
    }
    assert!((vals[1] / vals[0] - 1.0).abs() < 0.1, "{vals:?}");
}

#[test]
fn l_shaped_domain_is_not_convex() {
    let spec = DomainSpec {
        n: 2,
        h: 1.0 / 16.0,
        bbox: [vec![0.0, 0.0], vec![1.0, 1.0]],
        shapes: vec![
            Shape::Rect {
                min: vec![0.0, 0.0],
                max: vec![1.0, 0.5],
            },
            Shape::Rect {
                min: vec![0.0, 0.0],
                max: vec![0.5, 1.0],
            },
        ],
        free_sides: vec![],
    };
    let d = build_domain(&spec).unwrap();
    let inside = d.inside_cells().len();
    assert_eq!(inside, 3 * 64);
    let corner = d.locate([0.75, 0.75]).unwrap();
    assert!(!d.is_inside(corner));
    // Cells near the reentrant corner see it at the exact distance.
    let x = d.locate([0.53, 0.53]).unwrap();
    let c = d.center(x);
    let want = ((c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2)).sqrt();
    assert!(d.dist(x) <= want + 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let qc = quasiconvexity_estimate(&d, 300, &mut rng);
    assert!((1.0..1.5).contains(&qc), "{qc}");
}
