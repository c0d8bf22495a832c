use std::f64::consts::TAU;

use elastica::closed_space::ShootingOptions;
use elastica::curve::{DiscreteCurve, ElasticParams, Topology};
use elastica::fields::random_scalar;
use elastica::reparam::{
    compose, field_inner, flow, refine_grid, solve_bvp_shapes, CircleDiffeo, CircleField, MatchOptions, MatchingProblem,
};
use elastica::shapes;
use elastica::V2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Worst relative mismatch between the gradient and central differences of
/// the energy over a few smooth directions.
fn gradient_mismatch(c: &DiscreteCurve, d: &DiscreteCurve, psi: &CircleDiffeo) -> f64 {
    let p = ElasticParams::srv();
    let opts = ShootingOptions {
        eps_bvp: Some(1e-11),
        max_iter: 2000,
        ..Default::default()
    };
    let prob = MatchingProblem::new(c, d, p, opts, 1e-4).unwrap();
    let eval = prob.evaluate(psi, None).unwrap();
    let mu = prob.gradient(&eval).unwrap();
    let grid = psi.grid().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let eps = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let nu = CircleField::new(grid.clone(), random_scalar(&grid, 2, 1.0, &mut rng)).unwrap();
        let plus = compose(psi, &flow(&nu.scaled(-1.0), eps, None).unwrap()).unwrap();
        let minus = compose(psi, &flow(&nu, eps, None).unwrap()).unwrap();
        let warm = Some(eval.outcome.momentum.as_slice());
        let fd = (prob.energy(&plus, warm).unwrap() - prob.energy(&minus, warm).unwrap()) / (2.0 * eps);
        let an = -field_inner(&eval.curve, &mu, &nu, &p).unwrap();
        worst = worst.max((fd - an).abs() / an.abs());
    }
    worst
}

#[test]
fn fold_gradient_error_is_discretization_error() {
    let errs: Vec<f64> = [128, 256]
        .into_iter()
        .map(|n| {
            let c = shapes::ellipse(n, 2.0, 1.0).unwrap();
            let d = shapes::ellipse_fold(n, 0.8).unwrap();
            gradient_mismatch(&c, &d, &CircleDiffeo::rotation(c.grid(), 0.3))
        })
        .collect();
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

#[test]
fn matching_a_curve_with_itself_stops_at_once() {
    let c = shapes::star(64, 3, 0.2).unwrap();
    let r = solve_bvp_shapes(&c, &c, &ElasticParams::srv(), &MatchOptions::default()).unwrap();
    assert_eq!(r.initial_distance, 0.0);
    assert_eq!(r.iterations, 0);
    assert!(r.converged);
    assert_eq!(r.distance_history, vec![0.0]);
}

#[test]
fn matching_recovers_a_rotation_of_the_parameter() {
    let n = 96;
    let c = shapes::ellipse(n, 2.0, 1.0).unwrap();
    let d = DiscreteCurve::from_fn(n, Topology::Closed, |t| V2::new(2.0 * (t + 0.5).cos(), (t + 0.5).sin())).unwrap();
    let r = solve_bvp_shapes(&c, &d, &ElasticParams::new(1.0, 1.0).unwrap(), &MatchOptions::default()).unwrap();
    assert!(r.final_distance < 1e-2 * r.initial_distance, "{} → {}", r.initial_distance, r.final_distance);
    // ψ(x) ≈ x − 0.5 undoes the shift.
    let shift = r.psi.grid().iter().zip(r.psi.values()).map(|(x, y)| y - x).sum::<f64>() / r.psi.len() as f64;
    assert!((shift + 0.5).abs() < 2e-2, "{shift}");
    assert!(r.psi.is_monotone_dense(4));
}

#[test]
fn refinement_stays_within_the_cap() {
    let n0 = 32;
    let grid = elastica::curve::uniform_grid(n0, Topology::Closed);
    // Slope 20 at x = 0: far more refinement than the cap allows.
    let psi = CircleDiffeo::from_fn(&grid, |x| 2.0 * (20.0 * (0.5 * x).sin()).atan2((0.5 * x).cos())).unwrap();
    let mut cur = psi;
    let mut capped = false;
    for _ in 0..50 {
        let (next, ev) = refine_grid(&cur, n0, 2);
        assert!(next.len() <= 2 * n0);
        capped |= ev.capped;
        cur = next;
    }
    assert!(capped);
    assert!(cur.max_gap() > TAU / n0 as f64);
}
