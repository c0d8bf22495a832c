//! Sampled plane curves and their discrete differential calculus.
//!
//! A [`DiscreteCurve`] is a list of nodes `c(θ_j)` on a strictly increasing
//! parameter grid in `[0, 2π]`. Closed curves wrap around (the grid omits the
//! duplicate endpoint), open curves contain both `0` and `2π`.
//!
//! Derivatives use three-point Lagrange stencils on the (possibly
//! non-uniform) grid: centred in the interior, one-sided at the ends of open
//! curves, periodic for closed curves. All stencils are exact for quadratics.
//! Integration uses the trapezoid rule, periodic for closed curves.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{ElasticError, Result};
use crate::V2;

/// A tangent vector field along a curve, one value per node.
pub type VectorField2 = Vec<V2>;

/// Default regularity floor, relative to the mean speed.
pub const DEFAULT_REG_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Open,
    Closed,
}

impl Topology {
    pub fn is_closed(self) -> bool {
        matches!(self, Topology::Closed)
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Topology::Open => f.write_str("open"),
            Topology::Closed => f.write_str("closed"),
        }
    }
}

/// The `(a, b)` pair of the elastic metric: `a` weights bending, `b`
/// stretching. Requires `4b² ≥ a²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticParams {
    a: f64,
    b: f64,
}

impl ElasticParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && 4.0 * b * b >= a * a) {
            return Err(ElasticError::InvalidParams { a, b });
        }
        Ok(Self { a, b })
    }

    /// The square-root velocity case `a = 1, b = 1/2`.
    pub fn srv() -> Self {
        Self { a: 1.0, b: 0.5 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `√(4b² − a²)`, the weight of the third lifted component.
    pub fn cone_height(&self) -> f64 {
        (4.0 * self.b * self.b - self.a * self.a).max(0.0).sqrt()
    }

    /// True when the lift has no third component (`4b² = a²` exactly).
    pub fn is_planar(&self) -> bool {
        4.0 * self.b * self.b == self.a * self.a
    }

    /// Dimension of the lifted curve: 2 in the planar case, 3 otherwise.
    pub fn lift_dim(&self) -> usize {
        if self.is_planar() {
            2
        } else {
            3
        }
    }
}

/// Precomputed three-point derivative weights for one grid.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    idx: Vec<[usize; 3]>,
    coef: Vec<[f64; 3]>,
}

impl Stencil {
    pub(crate) fn new(grid: &[f64], topology: Topology) -> Self {
        let n = grid.len();
        let mut idx = Vec::with_capacity(n);
        let mut coef = Vec::with_capacity(n);
        for j in 0..n {
            let interior = topology.is_closed() || (j > 0 && j + 1 < n);
            if interior {
                let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
                let h1 = gap(grid, jm, j);
                let h2 = gap(grid, j, jp);
                idx.push([jm, j, jp]);
                coef.push([
                    -h2 / (h1 * (h1 + h2)),
                    (h2 - h1) / (h1 * h2),
                    h1 / (h2 * (h1 + h2)),
                ]);
            } else if j == 0 {
                let h1 = grid[1] - grid[0];
                let h2 = grid[2] - grid[1];
                idx.push([0, 1, 2]);
                coef.push([
                    -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                    (h1 + h2) / (h1 * h2),
                    -h1 / (h2 * (h1 + h2)),
                ]);
            } else {
                let h1 = grid[n - 2] - grid[n - 3];
                let h2 = grid[n - 1] - grid[n - 2];
                idx.push([n - 3, n - 2, n - 1]);
                coef.push([
                    h2 / (h1 * (h1 + h2)),
                    -(h1 + h2) / (h1 * h2),
                    (h1 + 2.0 * h2) / (h2 * (h1 + h2)),
                ]);
            }
        }
        Self { idx, coef }
    }

    pub(crate) fn apply<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        self.idx
            .iter()
            .zip(&self.coef)
            .map(|(i, c)| f[i[0]] * c[0] + f[i[1]] * c[1] + f[i[2]] * c[2])
            .collect()
    }
}

/// Forward gap from node `i` to node `j` on a closed or open grid.
fn gap(grid: &[f64], i: usize, j: usize) -> f64 {
    let d = grid[j] - grid[i];
    if d > 0.0 {
        d
    } else {
        d + TAU
    }
}

/// Trapezoid weights on a grid; periodic for closed topology.
pub fn quadrature_weights(grid: &[f64], topology: Topology) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|j| match topology {
            Topology::Closed => {
                0.5 * (gap(grid, (j + n - 1) % n, j) + gap(grid, j, (j + 1) % n))
            }
            Topology::Open => {
                let left = if j > 0 { grid[j] - grid[j - 1] } else { 0.0 };
                let right = if j + 1 < n { grid[j + 1] - grid[j] } else { 0.0 };
                0.5 * (left + right)
            }
        })
        .collect()
}

/// Uniform grid with `n` nodes for the given topology.
pub fn uniform_grid(n: usize, topology: Topology) -> Vec<f64> {
    match topology {
        Topology::Closed => (0..n).map(|j| TAU * j as f64 / n as f64).collect(),
        Topology::Open => (0..n)
            .map(|j| TAU * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Checks the grid invariants shared by curves and circle maps.
pub(crate) fn validate_grid(grid: &[f64], topology: Topology) -> Result<()> {
    let n = grid.len();
    if n < 4 {
        return Err(ElasticError::TooFewNodes(n));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(ElasticError::InvalidGrid("non-finite grid value".into()));
    }
    if let Some(j) = (1..n).find(|&j| grid[j] <= grid[j - 1]) {
        return Err(ElasticError::InvalidGrid(format!(
            "grid not strictly increasing at node {j}"
        )));
    }
    match topology {
        Topology::Closed => {
            if grid[0] < 0.0 || grid[n - 1] - grid[0] >= TAU {
                return Err(ElasticError::InvalidGrid(
                    "closed grid must span less than 2π".into(),
                ));
            }
        }
        Topology::Open => {
            if grid[0].abs() > 1e-12 || (grid[n - 1] - TAU).abs() > 1e-12 {
                return Err(ElasticError::InvalidGrid(
                    "open grid must start at 0 and end at 2π".into(),
                ));
            }
        }
    }
    Ok(())
}

/// A regular sampled plane curve.
#[derive(Debug, Clone)]
pub struct DiscreteCurve {
    points: Vec<V2>,
    grid: Vec<f64>,
    topology: Topology,
    stencil: Stencil,
}

/// Unit frame and turning angle of a curve.
#[derive(Debug, Clone)]
pub struct Frame {
    pub speed: Vec<f64>,
    pub tangent: VectorField2,
    pub normal: VectorField2,
    /// Continuous lift of the turning angle, `alpha[0]` in `(−π, π]`.
    pub angle: Vec<f64>,
    /// Total turning divided by 2π (closed curves only; 0 for open ones).
    pub turning_number: i64,
}

/// First variations of tangent, normal, speed and curvature along `h`.
#[derive(Debug, Clone)]
pub struct FirstVariations {
    pub tangent: VectorField2,
    pub normal: VectorField2,
    pub speed: Vec<f64>,
    pub curvature: Vec<f64>,
}

impl DiscreteCurve {
    pub fn new(points: Vec<V2>, grid: Vec<f64>, topology: Topology) -> Result<Self> {
        Self::with_reg_floor(points, grid, topology, DEFAULT_REG_FLOOR)
    }

    /// Like [`DiscreteCurve::new`] with a custom relative regularity floor.
    pub fn with_reg_floor(
        points: Vec<V2>,
        mut grid: Vec<f64>,
        topology: Topology,
        reg_floor: f64,
    ) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(ElasticError::Dimension {
                expected: grid.len(),
                got: points.len(),
            });
        }
        validate_grid(&grid, topology)?;
        if topology == Topology::Open {
            let n = grid.len();
            grid[0] = 0.0;
            grid[n - 1] = TAU;
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(ElasticError::InvalidGrid("non-finite point".into()));
        }
        let stencil = Stencil::new(&grid, topology);
        let curve = Self {
            points,
            grid,
            topology,
            stencil,
        };
        let speed: Vec<f64> = curve.derivative().iter().map(|d| d.norm()).collect();
        let mean = speed.iter().sum::<f64>() / speed.len() as f64;
        let floor = reg_floor * mean;
        if let Some((node, &s)) = speed
            .iter()
            .enumerate()
            .find(|(_, &s)| !(s > floor) || mean == 0.0)
        {
            return Err(ElasticError::Regularity {
                node,
                speed: s,
                floor,
            });
        }
        Ok(curve)
    }

    /// Samples on a uniform grid for the given topology.
    pub fn uniform(points: Vec<V2>, topology: Topology) -> Result<Self> {
        let grid = uniform_grid(points.len(), topology);
        Self::new(points, grid, topology)
    }

    /// Samples `f` on a uniform grid with `n` nodes.
    pub fn from_fn(n: usize, topology: Topology, f: impl Fn(f64) -> V2) -> Result<Self> {
        let grid = uniform_grid(n, topology);
        Self::sample(grid, topology, f)
    }

    /// Samples `f` on the given grid.
    pub fn sample(grid: Vec<f64>, topology: Topology, f: impl Fn(f64) -> V2) -> Result<Self> {
        let points = grid.iter().map(|&t| f(t)).collect();
        Self::new(points, grid, topology)
    }

    pub fn points(&self) -> &[V2] {
        &self.points
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same grid and topology, new node positions (revalidated).
    pub fn with_points(&self, points: Vec<V2>) -> Result<Self> {
        Self::new(points, self.grid.clone(), self.topology)
    }

    pub fn translated(&self, p: V2) -> Self {
        Self {
            points: self.points.iter().map(|x| x + p).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, rho: f64) -> Result<Self> {
        self.with_points(self.points.iter().map(|x| x * rho).collect())
    }

    /// Applies the stencil of this curve's grid to an arbitrary nodal field.
    pub fn diff<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        self.stencil.apply(f)
    }

    /// Node-wise estimate of `c′(θ_j)`.
    pub fn derivative(&self) -> VectorField2 {
        self.stencil.apply(&self.points)
    }

    pub fn speed(&self) -> Vec<f64> {
        self.derivative().iter().map(|d| d.norm()).collect()
    }

    pub fn frame(&self) -> Frame {
        let d = self.derivative();
        let speed: Vec<f64> = d.iter().map(|x| x.norm()).collect();
        let tangent: VectorField2 = d.iter().zip(&speed).map(|(x, s)| x / *s).collect();
        let normal = tangent.iter().map(|v| rot90(*v)).collect();
        let raw: Vec<f64> = tangent.iter().map(|v| v.y.atan2(v.x)).collect();
        let mut angle = Vec::with_capacity(raw.len());
        angle.push(raw[0]);
        for j in 1..raw.len() {
            let prev = angle[j - 1];
            angle.push(prev + wrap_angle(raw[j] - raw[j - 1]));
        }
        let turning_number = if self.topology.is_closed() {
            let n = raw.len();
            let total = angle[n - 1] - angle[0] + wrap_angle(raw[0] - raw[n - 1]);
            (total / TAU).round() as i64
        } else {
            0
        };
        Frame {
            speed,
            tangent,
            normal,
            angle,
            turning_number,
        }
    }

    /// `D_s f = f′ / |c′|` for a vector field.
    pub fn arc_derivative(&self, f: &[V2]) -> VectorField2 {
        let speed = self.speed();
        self.stencil
            .apply(f)
            .into_iter()
            .zip(speed)
            .map(|(d, s)| d / s)
            .collect()
    }

    /// `D_s f` for a scalar field.
    pub fn arc_derivative_scalar(&self, f: &[f64]) -> Vec<f64> {
        let speed = self.speed();
        self.stencil
            .apply(f)
            .into_iter()
            .zip(speed)
            .map(|(d, s)| d / s)
            .collect()
    }

    /// Curvature `κ = ⟨D_s v, n⟩`.
    pub fn curvature(&self) -> Vec<f64> {
        let fr = self.frame();
        curvature_from_frame(self, &fr)
    }

    pub fn quadrature_weights(&self) -> Vec<f64> {
        quadrature_weights(&self.grid, self.topology)
    }

    /// Trapezoid quadrature of `∫ f dθ`.
    pub fn integrate_dtheta(&self, f: &[f64]) -> f64 {
        self.quadrature_weights()
            .iter()
            .zip(f)
            .map(|(w, x)| w * x)
            .sum()
    }

    /// Trapezoid quadrature of `∫ f ds = ∫ f |c′| dθ`.
    pub fn integrate_ds(&self, f: &[f64]) -> f64 {
        let speed = self.speed();
        self.quadrature_weights()
            .iter()
            .zip(f)
            .zip(&speed)
            .map(|((w, x), s)| w * x * s)
            .sum()
    }

    pub fn length(&self) -> f64 {
        self.integrate_ds(&vec![1.0; self.len()])
    }

    /// First variations of `v`, `n`, `|c′|` and `κ` in direction `h`.
    ///
    /// The curvature variation is assembled through the product rule
    /// `D κ = ⟨D_s(Dv) − ⟨D_s h, v⟩ D_s v, n⟩ + ⟨D_s v, Dn⟩`, which in the
    /// continuum equals `⟨D_s²h, n⟩ − 2κ⟨D_s h, v⟩` and is the exact
    /// linearization of the discrete curvature.
    pub fn first_variations(&self, h: &[V2]) -> Result<FirstVariations> {
        self.check_field(h)?;
        let fr = self.frame();
        let dsh = self.arc_derivative(h);
        let hn: Vec<f64> = dsh.iter().zip(&fr.normal).map(|(d, n)| d.dot(n)).collect();
        let hv: Vec<f64> = dsh.iter().zip(&fr.tangent).map(|(d, v)| d.dot(v)).collect();
        let dv: VectorField2 = hn.iter().zip(&fr.normal).map(|(a, n)| n * *a).collect();
        let dn: VectorField2 = hn.iter().zip(&fr.tangent).map(|(a, v)| -v * *a).collect();
        let dspeed: Vec<f64> = hv.iter().zip(&fr.speed).map(|(a, s)| a * s).collect();
        let ds_v = self.arc_derivative(&fr.tangent);
        let ds_dv = self.arc_derivative(&dv);
        let dkappa = (0..self.len())
            .map(|j| (ds_dv[j] - ds_v[j] * hv[j]).dot(&fr.normal[j]) + ds_v[j].dot(&dn[j]))
            .collect();
        Ok(FirstVariations {
            tangent: dv,
            normal: dn,
            speed: dspeed,
            curvature: dkappa,
        })
    }

    pub(crate) fn check_field<T>(&self, h: &[T]) -> Result<()> {
        if h.len() != self.len() {
            return Err(ElasticError::Dimension {
                expected: self.len(),
                got: h.len(),
            });
        }
        Ok(())
    }

    /// Checks that two curves share topology and grid.
    pub fn check_same_grid(&self, other: &DiscreteCurve) -> Result<()> {
        if self.topology != other.topology {
            return Err(ElasticError::Topology(format!(
                "{} vs {}",
                self.topology, other.topology
            )));
        }
        if self.len() != other.len()
            || self
                .grid
                .iter()
                .zip(&other.grid)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(ElasticError::GridMismatch(format!(
                "{} vs {} nodes",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Piecewise-linear resampling onto a new parameter grid.
    pub fn resample_linear(&self, grid: Vec<f64>) -> Result<Self> {
        let points = grid
            .iter()
            .map(|&t| crate::interp::linear_eval(&self.grid, &self.points, t, self.topology))
            .collect();
        Self::new(points, grid, self.topology)
    }
}

pub(crate) fn curvature_from_frame(c: &DiscreteCurve, fr: &Frame) -> Vec<f64> {
    let dv = c.stencil.apply(&fr.tangent);
    dv.iter()
        .zip(&fr.normal)
        .zip(&fr.speed)
        .map(|((d, n), s)| d.dot(n) / s)
        .collect()
}

/// Rotation by π/2.
pub fn rot90(v: V2) -> V2 {
    V2::new(-v.y, v.x)
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64) -> DiscreteCurve {
        DiscreteCurve::from_fn(n, Topology::Closed, |t| V2::new(r * t.cos(), r * t.sin())).unwrap()
    }

    fn max_err(a: &[V2], b: impl Fn(usize) -> V2) -> f64 {
        a.iter()
            .enumerate()
            .map(|(j, x)| (x - b(j)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn circle_derivative() {
        let c = circle(256, 1.0);
        let d = c.derivative();
        let g = c.grid().to_vec();
        assert!(max_err(&d, |j| V2::new(-g[j].sin(), g[j].cos())) <= 1e-3);
    }

    #[test]
    fn linear_open_curve_is_exact() {
        let c = DiscreteCurve::from_fn(17, Topology::Open, |t| V2::new(t, 0.0)).unwrap();
        for d in c.derivative() {
            assert!((d - V2::new(1.0, 0.0)).norm() < 1e-13);
        }
        let fr = c.frame();
        assert!(fr.angle.iter().all(|a| a.abs() < 1e-13));
        assert!(c.curvature().iter().all(|k| k.abs() < 1e-10));
    }

    #[test]
    fn constant_curve_rejected() {
        let pts = vec![V2::new(1.0, 1.0); 10];
        assert!(matches!(
            DiscreteCurve::uniform(pts, Topology::Closed),
            Err(ElasticError::Regularity { .. })
        ));
    }

    #[test]
    fn three_nodes_rejected() {
        let pts = vec![V2::new(0.0, 0.0), V2::new(1.0, 0.0), V2::new(0.0, 1.0)];
        assert!(matches!(
            DiscreteCurve::uniform(pts, Topology::Closed),
            Err(ElasticError::TooFewNodes(3))
        ));
    }

    #[test]
    fn circle_frame() {
        let c = circle(256, 1.0);
        let fr = c.frame();
        let g = c.grid();
        for j in 0..c.len() {
            assert!((fr.speed[j] - 1.0).abs() < 1e-3);
            let n = V2::new(-g[j].cos(), -g[j].sin());
            assert!((fr.normal[j] - n).norm() < 1e-3);
            let shift = fr.angle[j] - (g[j] + PI / 2.0);
            assert!((shift - TAU * (shift / TAU).round()).abs() < 1e-3);
            assert!(fr.tangent[j].dot(&fr.normal[j]).abs() < 1e-15);
        }
        assert_eq!(fr.turning_number, 1);
    }

    #[test]
    fn double_circle_turns_twice() {
        let c = DiscreteCurve::from_fn(256, Topology::Closed, |t| {
            V2::new((2.0 * t).cos(), (2.0 * t).sin())
        })
        .unwrap();
        let fr = c.frame();
        assert_eq!(fr.turning_number, 2);
        let n = c.len();
        let inc = fr.angle[n - 1] - fr.angle[0] + wrap_angle(fr.angle[0] - fr.angle[n - 1]);
        assert!((inc - 4.0 * PI).abs() < 1e-9);
        assert!(fr.angle.windows(2).all(|w| (w[1] - w[0]).abs() < PI));
    }

    #[test]
    fn arc_derivative_of_sine_on_circle() {
        let c = circle(256, 1.0);
        let f: Vec<f64> = c.grid().iter().map(|t| t.sin()).collect();
        let d = c.arc_derivative_scalar(&f);
        let err = c
            .grid()
            .iter()
            .zip(&d)
            .map(|(t, x)| (x - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3);
        let zero = c.arc_derivative(&vec![V2::new(3.0, -1.0); c.len()]);
        assert!(zero.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn curvature_of_circle_and_ellipse() {
        for r in [1.0, 2.5] {
            let c = circle(256, r);
            assert!(c.curvature().iter().all(|k| (k - 1.0 / r).abs() <= 1e-2));
        }
        let e = DiscreteCurve::from_fn(512, Topology::Closed, |t| V2::new(2.0 * t.cos(), t.sin()))
            .unwrap();
        let kappa = e.curvature();
        for (t, k) in e.grid().iter().zip(&kappa) {
            let exact = 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
            assert!((k - exact).abs() <= 1e-2, "{k} vs {exact}");
        }
    }

    #[test]
    fn quadrature() {
        // The three-point speed is sin(h)/h, so the length carries an O(h²)
        // error of about 6e-4 at this resolution.
        let c = circle(256, 1.0);
        assert!((c.length() - TAU).abs() < 1e-3);
        let fine = circle(1024, 1.0);
        assert!((fine.length() - TAU).abs() < (c.length() - TAU).abs() / 15.0);
        assert_eq!(c.integrate_ds(&vec![0.0; 256]), 0.0);
        let e = DiscreteCurve::from_fn(512, Topology::Closed, |t| {
            V2::new(2.0 * t.cos() + 0.3, 0.7 * t.sin() + 0.1 * (2.0 * t).sin())
        })
        .unwrap();
        let total = e.integrate_ds(&e.curvature());
        assert!((total - TAU).abs() < 1e-3);
    }

    #[test]
    fn open_weights_sum_to_two_pi() {
        let g = uniform_grid(33, Topology::Open);
        let w = quadrature_weights(&g, Topology::Open);
        assert!((w.iter().sum::<f64>() - TAU).abs() < 1e-12);
    }

    #[test]
    fn scaling_direction_variations_on_circle() {
        let c = circle(256, 1.0);
        let h = c.points().to_vec();
        let var = c.first_variations(&h).unwrap();
        let fr = c.frame();
        let kappa = c.curvature();
        for j in 0..c.len() {
            assert!((var.speed[j] - fr.speed[j]).abs() < 1e-12);
            assert!((var.curvature[j] + kappa[j]).abs() < 1e-10);
            assert!(var.tangent[j].norm() < 1e-12);
        }
    }

    #[test]
    fn translations_have_zero_variation() {
        let c = circle(64, 1.3);
        let var = c.first_variations(&vec![V2::new(0.4, -2.0); 64]).unwrap();
        assert!(var.tangent.iter().all(|x| x.norm() < 1e-12));
        assert!(var.normal.iter().all(|x| x.norm() < 1e-12));
        assert!(var.speed.iter().all(|x| x.abs() < 1e-12));
        assert!(var.curvature.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn bad_grids() {
        let pts: Vec<V2> = (0..5).map(|j| V2::new(j as f64, (j * j) as f64)).collect();
        let g = vec![0.0, 1.0, 1.0, 2.0, 2.5];
        assert!(matches!(
            DiscreteCurve::new(pts.clone(), g, Topology::Closed),
            Err(ElasticError::InvalidGrid(_))
        ));
        let g = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(DiscreteCurve::new(pts, g, Topology::Open).is_err());
    }
}
