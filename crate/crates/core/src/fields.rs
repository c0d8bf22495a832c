//! Seeded random smooth curves and vector fields for property checks.

use rand::Rng;

use crate::curve::{uniform_grid, DiscreteCurve, Topology, VectorField2};
use crate::error::Result;
use crate::V2;

/// Random trigonometric field with `modes` frequencies per component and
/// coefficients in `[-amp, amp]`.
///
/// On open grids the frequencies are halved, so the field need not be
/// periodic.
pub fn random_field<R: Rng>(grid: &[f64], topology: Topology, modes: usize, amp: f64, rng: &mut R) -> VectorField2 {
    let base = if topology.is_closed() { 1.0 } else { 0.5 };
    let coef: Vec<[f64; 4]> = (0..=modes)
        .map(|_| std::array::from_fn(|_| rng.random_range(-amp..amp)))
        .collect();
    grid.iter()
        .map(|&t| {
            coef.iter().enumerate().fold(V2::zeros(), |acc, (k, c)| {
                let w = base * k as f64 * t;
                acc + V2::new(c[0] * w.cos() + c[1] * w.sin(), c[2] * w.cos() + c[3] * w.sin())
            })
        })
        .collect()
}

/// Scalar version of [`random_field`] on a closed grid.
pub fn random_scalar<R: Rng>(grid: &[f64], modes: usize, amp: f64, rng: &mut R) -> Vec<f64> {
    let coef: Vec<[f64; 2]> = (0..=modes)
        .map(|_| std::array::from_fn(|_| rng.random_range(-amp..amp)))
        .collect();
    grid.iter()
        .map(|&t| {
            coef.iter()
                .enumerate()
                .map(|(k, c)| c[0] * (k as f64 * t).cos() + c[1] * (k as f64 * t).sin())
                .sum()
        })
        .collect()
}

/// A random smooth closed curve: an ellipse with random axes in `[1, 2]`
/// and a small random radial perturbation, which keeps it convex-ish and
/// regular.
pub fn random_closed_curve<R: Rng>(n: usize, rng: &mut R) -> Result<DiscreteCurve> {
    let ax = rng.random_range(1.0..2.0);
    let ay = rng.random_range(1.0..2.0);
    let pert: Vec<[f64; 2]> = (2..5)
        .map(|_| [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)])
        .collect();
    DiscreteCurve::from_fn(n, Topology::Closed, |t| {
        let r = 1.0
            + pert
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let w = (k + 2) as f64 * t;
                    c[0] * w.cos() + c[1] * w.sin()
                })
                .sum::<f64>();
        V2::new(ax * r * t.cos(), ay * r * t.sin())
    })
}

/// A random smooth open graph `θ ↦ (θ, y(θ))` with `|y′| ≤ 0.6`.
pub fn random_open_curve<R: Rng>(n: usize, rng: &mut R) -> Result<DiscreteCurve> {
    let coef: Vec<[f64; 2]> = (1..4)
        .map(|_| [rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)])
        .collect();
    let x0 = rng.random_range(-1.0..1.0);
    DiscreteCurve::from_fn(n, Topology::Open, |t| {
        let y = coef
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let w = 0.5 * (k + 1) as f64 * t;
                c[0] * w.cos() + c[1] * w.sin()
            })
            .sum::<f64>();
        V2::new(t + x0, y)
    })
}

/// Uniform closed grid helper re-exported for callers building fields.
pub fn closed_grid(n: usize) -> Vec<f64> {
    uniform_grid(n, Topology::Closed)
}
