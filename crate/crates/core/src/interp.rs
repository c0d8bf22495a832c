//! Interpolation on parameter grids: piecewise linear and periodic cubic.

use std::f64::consts::TAU;

use crate::curve::Topology;
use crate::error::Result;
use crate::linalg::solve_cyclic_tridiagonal;
use crate::V2;

/// Index `i` of the cell `[grid[i], grid[i+1])` containing `t` (clamped).
fn locate(grid: &[f64], t: f64) -> usize {
    match grid.binary_search_by(|g| g.total_cmp(&t)) {
        Ok(i) => i.min(grid.len() - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(grid.len() - 2),
    }
}

/// Piecewise-linear evaluation. Closed grids are treated as 2π-periodic.
pub fn linear_eval<T>(grid: &[f64], values: &[T], t: f64, topology: Topology) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = grid.len();
    match topology {
        Topology::Open => {
            let t = t.clamp(grid[0], grid[n - 1]);
            let i = locate(grid, t);
            let s = (t - grid[i]) / (grid[i + 1] - grid[i]);
            values[i] * (1.0 - s) + values[i + 1] * s
        }
        Topology::Closed => {
            let t0 = grid[0];
            let t = t0 + (t - t0).rem_euclid(TAU);
            if t >= grid[n - 1] {
                let h = grid[0] + TAU - grid[n - 1];
                let s = (t - grid[n - 1]) / h;
                values[n - 1] * (1.0 - s) + values[0] * s
            } else {
                let i = locate(grid, t);
                let s = (t - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] * (1.0 - s) + values[i + 1] * s
            }
        }
    }
}

/// Periodic cubic spline through scalar samples on a closed grid.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    grid: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(grid: &[f64], values: &[f64]) -> Result<Self> {
        let n = grid.len();
        let h: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 < n {
                    grid[i + 1] - grid[i]
                } else {
                    grid[0] + TAU - grid[n - 1]
                }
            })
            .collect();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            sub[i] = h[im];
            diag[i] = 2.0 * (h[im] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((values[ip] - values[i]) / h[i] - (values[i] - values[im]) / h[im]);
        }
        let second = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;
        Ok(Self {
            grid: grid.to_vec(),
            values: values.to_vec(),
            second,
        })
    }

    fn cell(&self, t: f64) -> (usize, usize, f64, f64) {
        let n = self.grid.len();
        let t0 = self.grid[0];
        let t = t0 + (t - t0).rem_euclid(TAU);
        if t >= self.grid[n - 1] {
            let h = self.grid[0] + TAU - self.grid[n - 1];
            (n - 1, 0, h, t - self.grid[n - 1])
        } else {
            let i = locate(&self.grid, t);
            (i, i + 1, self.grid[i + 1] - self.grid[i], t - self.grid[i])
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, j, h, d) = self.cell(t);
        let a = (h - d) / h;
        let b = d / h;
        a * self.values[i]
            + b * self.values[j]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[j]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (i, j, h, d) = self.cell(t);
        let a = (h - d) / h;
        let b = d / h;
        (self.values[j] - self.values[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * self.second[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.second[j]
    }
}

/// Periodic cubic spline of a closed plane curve.
#[derive(Debug, Clone)]
pub struct PeriodicCurveSpline {
    x: PeriodicSpline,
    y: PeriodicSpline,
}

impl PeriodicCurveSpline {
    pub fn new(grid: &[f64], points: &[V2]) -> Result<Self> {
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        Ok(Self {
            x: PeriodicSpline::new(grid, &xs)?,
            y: PeriodicSpline::new(grid, &ys)?,
        })
    }

    pub fn eval(&self, t: f64) -> V2 {
        V2::new(self.x.eval(t), self.y.eval(t))
    }

    pub fn derivative(&self, t: f64) -> V2 {
        V2::new(self.x.derivative(t), self.y.derivative(t))
    }
}
