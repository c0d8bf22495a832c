//! Optimization over reparameterizations of the circle.
//!
//! The distance between unparameterized closed curves `C = [c]`, `D = [d]`
//! is `inf_ψ dist(c, d∘ψ)`. [`solve_bvp_shapes`] minimizes over `ψ` by
//! gradient descent: the right-trivialized gradient is the vertical part of
//! the logarithm, `c′μ = Ver_c(Log_c(d∘ψ))`, and each step composes `ψ`
//! with the flow of `−μ`.
//!
//! The vertical projection is a Galerkin problem on periodic piecewise
//! linear hat functions. Vector fields `k` along `c` are interpolated
//! linearly between nodes and the metric is integrated exactly on each cell
//! with the cell's chord as tangent, so the stiffness matrix is cyclic
//! tridiagonal.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::closed_space::{self, GeodesicPath, LogOutcome, ShootingOptions};
use crate::curve::{rot90, DiscreteCurve, ElasticParams, Topology, VectorField2};
use crate::error::{ElasticError, Result};
use crate::interp::{PeriodicCurveSpline, PeriodicSpline};
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal};
use crate::transforms::{self, LiftedCurve};
use crate::{V2, V3};

/// An orientation-preserving diffeomorphism of the circle, stored as the
/// values of a lift `ψ(x + 2π) = ψ(x) + 2π` on a closed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleDiffeo {
    grid: Vec<f64>,
    values: Vec<f64>,
}

fn check_monotone(grid: &[f64], values: &[f64]) -> Result<()> {
    crate::curve::validate_grid(grid, Topology::Closed)?;
    if values.len() != grid.len() {
        return Err(ElasticError::Dimension {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let n = values.len();
    for j in 0..n {
        let next = if j + 1 < n { values[j + 1] } else { values[0] + TAU };
        if !(next > values[j]) {
            return Err(ElasticError::MonotonicityLost { node: j });
        }
    }
    Ok(())
}

/// Periodic piecewise-linear evaluation of a lift with `2π` shift.
fn eval_lift(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    let x0 = grid[0];
    let turns = ((x - x0) / TAU).floor();
    let t = x - turns * TAU;
    let (xa, va, xb, vb) = if t >= grid[n - 1] {
        (grid[n - 1], values[n - 1], grid[0] + TAU, values[0] + TAU)
    } else {
        let i = match grid.binary_search_by(|g| g.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => (i - 1).min(n - 2),
        };
        (grid[i], values[i], grid[i + 1], values[i + 1])
    };
    let s = (t - xa) / (xb - xa);
    va + (vb - va) * s + turns * TAU
}

impl CircleDiffeo {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_monotone(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn identity(grid: &[f64]) -> Self {
        Self {
            grid: grid.to_vec(),
            values: grid.to_vec(),
        }
    }

    pub fn rotation(grid: &[f64], s: f64) -> Self {
        Self {
            grid: grid.to_vec(),
            values: grid.iter().map(|x| x + s).collect(),
        }
    }

    /// Samples a lift `f` (which must satisfy `f(x + 2π) = f(x) + 2π`).
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&x| f(x)).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_lift(&self.grid, &self.values, x)
    }

    /// Largest image gap `ψ(x_{i+1}) − ψ(x_i)`, including the wrap cell.
    pub fn max_gap(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|j| {
                if j + 1 < n {
                    self.values[j + 1] - self.values[j]
                } else {
                    self.values[0] + TAU - self.values[n - 1]
                }
            })
            .fold(0.0, f64::max)
    }

    /// Node-wise derivative by periodic central differences.
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
                let xm = if j == 0 { self.grid[jm] - TAU } else { self.grid[jm] };
                let vm = if j == 0 { self.values[jm] - TAU } else { self.values[jm] };
                let xp = if j + 1 == n { self.grid[jp] + TAU } else { self.grid[jp] };
                let vp = if j + 1 == n { self.values[jp] + TAU } else { self.values[jp] };
                (vp - vm) / (xp - xm)
            })
            .collect()
    }

    /// Strict positivity of the derivative sampled at `factor` points per
    /// cell.
    pub fn is_monotone_dense(&self, factor: usize) -> bool {
        let x0 = self.grid[0];
        let m = self.len() * factor;
        let mut prev = self.eval(x0);
        (1..=m).all(|k| {
            let v = self.eval(x0 + TAU * k as f64 / m as f64);
            let ok = v > prev;
            prev = v;
            ok
        })
    }

    /// Image nodes wrapped into `[0, 2π)`.
    fn wrapped(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.rem_euclid(TAU)).collect()
    }
}

/// `ψ∘η`, evaluated at the nodes of `η`'s grid.
pub fn compose(psi: &CircleDiffeo, eta: &CircleDiffeo) -> Result<CircleDiffeo> {
    let values = eta.values.iter().map(|&x| psi.eval(x)).collect();
    CircleDiffeo::new(eta.grid.clone(), values)
}

/// A vector field on the circle, one value per node of a closed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleField {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl CircleField {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(ElasticError::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.to_vec(),
            values: grid.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Time-`alpha` flow of `μ` from the identity, by classical Runge–Kutta.
///
/// `μ` is interpolated with a periodic cubic spline. With `substeps = None`
/// the step count keeps `max|μ|·α/substeps` below half the smallest cell.
pub fn flow(mu: &CircleField, alpha: f64, substeps: Option<usize>) -> Result<CircleDiffeo> {
    let values = flow_points(mu, alpha, substeps, &mu.grid)?;
    CircleDiffeo::new(mu.grid.clone(), values)
}

/// Transports arbitrary starting points along the flow of `μ` for time
/// `alpha`. Step selection is the same as in [`flow`].
pub fn flow_points(mu: &CircleField, alpha: f64, substeps: Option<usize>, starts: &[f64]) -> Result<Vec<f64>> {
    let grid = &mu.grid;
    crate::curve::validate_grid(grid, Topology::Closed)?;
    let spline = PeriodicSpline::new(grid, &mu.values)?;
    let n = grid.len();
    let min_gap = (0..n)
        .map(|j| {
            if j + 1 < n {
                grid[j + 1] - grid[j]
            } else {
                grid[0] + TAU - grid[n - 1]
            }
        })
        .fold(f64::INFINITY, f64::min);
    let steps = substeps.unwrap_or_else(|| {
        ((mu.max_abs() * alpha.abs()) / (0.5 * min_gap)).ceil().max(1.0) as usize
    });
    let h = alpha / steps as f64;
    let f = |x: f64| spline.eval(x);
    Ok(starts
        .iter()
        .map(|&x0| {
            let mut x = x0;
            for _ in 0..steps {
                let k1 = f(x);
                let k2 = f(x + 0.5 * h * k1);
                let k3 = f(x + 0.5 * h * k2);
                let k4 = f(x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            x
        })
        .collect())
}

/// Per-cell data of the finite element discretization: parameter width,
/// chord speed and chord frame.
struct Cells {
    width: Vec<f64>,
    speed: Vec<f64>,
    tangent: Vec<V2>,
    normal: Vec<V2>,
    /// `(left, right)` node indices.
    ends: Vec<(usize, usize)>,
}

fn cells(c: &DiscreteCurve) -> Cells {
    let n = c.len();
    let g = c.grid();
    let x = c.points();
    let count = if c.topology().is_closed() { n } else { n - 1 };
    let mut out = Cells {
        width: Vec::with_capacity(count),
        speed: Vec::with_capacity(count),
        tangent: Vec::with_capacity(count),
        normal: Vec::with_capacity(count),
        ends: Vec::with_capacity(count),
    };
    for i in 0..count {
        let j = (i + 1) % n;
        let w = if j > i { g[j] - g[i] } else { g[j] + TAU - g[i] };
        let chord = (x[j] - x[i]) / w;
        let s = chord.norm();
        let v = chord / s;
        out.width.push(w);
        out.speed.push(s);
        out.tangent.push(v);
        out.normal.push(rot90(v));
        out.ends.push((i, j));
    }
    out
}

/// The elastic metric of two fields interpolated linearly between nodes,
/// integrated exactly per cell against the chord frame.
pub fn fe_metric(c: &DiscreteCurve, h: &[V2], k: &[V2], p: &ElasticParams) -> Result<f64> {
    c.check_field(h)?;
    c.check_field(k)?;
    let cl = cells(c);
    let (a2, b2) = (p.a() * p.a(), p.b() * p.b());
    Ok((0..cl.width.len())
        .map(|i| {
            let (l, r) = cl.ends[i];
            let dh = h[r] - h[l];
            let dk = k[r] - k[l];
            let scale = cl.width[i] * cl.speed[i];
            (a2 * dh.dot(&cl.normal[i]) * dk.dot(&cl.normal[i])
                + b2 * dh.dot(&cl.tangent[i]) * dk.dot(&cl.tangent[i]))
                / scale
        })
        .sum())
}

/// [`fe_metric`] for `(a, b) = (1, ½)` from the explicit formula
/// `∫ ⟨h′, k′⟩/|c′| − ¾ ⟨h′, c′⟩⟨k′, c′⟩/|c′|³ dθ`.
pub fn fe_metric_srv(c: &DiscreteCurve, h: &[V2], k: &[V2]) -> Result<f64> {
    c.check_field(h)?;
    c.check_field(k)?;
    let cl = cells(c);
    Ok((0..cl.width.len())
        .map(|i| {
            let (l, r) = cl.ends[i];
            let w = cl.width[i];
            let dh = (h[r] - h[l]) / w;
            let dk = (k[r] - k[l]) / w;
            let cp = cl.tangent[i] * cl.speed[i];
            let s = cl.speed[i];
            w * (dh.dot(&dk) / s - 0.75 * dh.dot(&cp) * dk.dot(&cp) / (s * s * s))
        })
        .sum())
}

/// `G_c(c′μ, c′ν)` for nodal fields `μ`, `ν` (the inner product on vector
/// fields of the circle induced by the metric).
pub fn field_inner(c: &DiscreteCurve, mu: &CircleField, nu: &CircleField, p: &ElasticParams) -> Result<f64> {
    let d = c.derivative();
    let a: VectorField2 = d.iter().zip(&mu.values).map(|(d, m)| d * *m).collect();
    let b: VectorField2 = d.iter().zip(&nu.values).map(|(d, m)| d * *m).collect();
    fe_metric(c, &a, &b, p)
}

/// Vertical projection: the `μ` with `G_c(c′μ, c′ν) = G_c(h, c′ν)` for every
/// hat function `ν`.
///
/// Open curves use hats vanishing at both ends.
pub fn vertical_project(c: &DiscreteCurve, h: &[V2], p: &ElasticParams) -> Result<CircleField> {
    c.check_field(h)?;
    let n = c.len();
    let d = c.derivative();
    let cl = cells(c);
    let (a2, b2) = (p.a() * p.a(), p.b() * p.b());
    let form = |i: usize, x: V2, y: V2| -> f64 {
        (a2 * x.dot(&cl.normal[i]) * y.dot(&cl.normal[i])
            + b2 * x.dot(&cl.tangent[i]) * y.dot(&cl.tangent[i]))
            / (cl.width[i] * cl.speed[i])
    };
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..cl.width.len() {
        let (l, r) = cl.ends[i];
        // Over the cell, the vertical field of hat l changes by −c′_l and that
        // of hat r by +c′_r.
        let dl = -d[l];
        let dr = d[r];
        let dh = h[r] - h[l];
        diag[l] += form(i, dl, dl);
        diag[r] += form(i, dr, dr);
        sup[l] += form(i, dl, dr);
        sub[r] += form(i, dr, dl);
        rhs[l] += form(i, dh, dl);
        rhs[r] += form(i, dh, dr);
    }
    let mu = if c.topology().is_closed() {
        let solve = |shift: f64| {
            let dg: Vec<f64> = diag.iter().map(|x| x + shift).collect();
            solve_cyclic_tridiagonal(&sub, &dg, &sup, &rhs)
        };
        match solve(0.0) {
            Ok(x) => x,
            Err(_) => {
                let scale = diag.iter().sum::<f64>() / n as f64;
                log::warn!("vertical projection: regularizing a singular stiffness matrix");
                solve(1e-12 * scale)?
            }
        }
    } else {
        let inner = solve_tridiagonal(&sub[1..n - 1], &diag[1..n - 1], &sup[1..n - 1], &rhs[1..n - 1])?;
        let mut mu = vec![0.0; n];
        mu[1..n - 1].copy_from_slice(&inner);
        mu
    };
    CircleField::new(c.grid().to_vec(), mu)
}

/// Samples a closed curve spline at the image nodes of `ψ`, returning a
/// curve on `ψ`'s grid.
fn reparameterize(spline: &PeriodicCurveSpline, psi: &CircleDiffeo) -> Result<DiscreteCurve> {
    let pts = psi.wrapped().iter().map(|&t| spline.eval(t)).collect();
    DiscreteCurve::new(pts, psi.grid.clone(), Topology::Closed)
}

/// Precomputed data for evaluating `E(ψ) = ½ dist(c, d∘ψ)²`.
pub struct MatchingProblem {
    c_spline: PeriodicCurveSpline,
    d_spline: PeriodicCurveSpline,
    params: ElasticParams,
    opts: ShootingOptions,
    bvp_rel: f64,
}

/// Distance, logarithm and lifts at one `ψ`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub distance: f64,
    pub curve: DiscreteCurve,
    pub target: DiscreteCurve,
    pub lift: LiftedCurve,
    pub outcome: LogOutcome,
}

impl MatchingProblem {
    /// Without an explicit `eps_bvp` in `opts`, each logarithm is solved to
    /// `bvp_rel · ‖q₁ − q₀‖`, so the distance keeps its relative accuracy
    /// as the descent approaches the minimum.
    pub fn new(
        c: &DiscreteCurve,
        d: &DiscreteCurve,
        params: ElasticParams,
        opts: ShootingOptions,
        bvp_rel: f64,
    ) -> Result<Self> {
        if c.topology() != Topology::Closed || d.topology() != Topology::Closed {
            return Err(ElasticError::Topology(
                "shape matching needs closed curves".into(),
            ));
        }
        Ok(Self {
            c_spline: PeriodicCurveSpline::new(c.grid(), c.points())?,
            d_spline: PeriodicCurveSpline::new(d.grid(), d.points())?,
            params,
            opts,
            bvp_rel,
        })
    }

    /// `c` sampled on a grid.
    pub fn curve_on(&self, grid: &[f64]) -> Result<DiscreteCurve> {
        reparameterize(&self.c_spline, &CircleDiffeo::identity(grid))
    }

    /// `d∘ψ` on `ψ`'s grid.
    pub fn target(&self, psi: &CircleDiffeo) -> Result<DiscreteCurve> {
        reparameterize(&self.d_spline, psi)
    }

    /// Parameterized distance between `c` and `d∘ψ`, optionally warm
    /// started from a previous initial velocity on the same grid.
    pub fn evaluate(&self, psi: &CircleDiffeo, warm: Option<&[V3]>) -> Result<Evaluation> {
        let curve = self.curve_on(&psi.grid)?;
        let target = self.target(psi)?;
        let q0 = closed_space::closed_lift(&curve, &self.params, &self.opts)?;
        let q1 = closed_space::closed_lift(&target, &self.params, &self.opts)?;
        let opts = ShootingOptions {
            eps_bvp: Some(
                self.opts
                    .eps_bvp
                    .unwrap_or((self.bvp_rel * q0.l2_distance(&q1)).max(1e-13 * q1.l2_norm())),
            ),
            ..self.opts
        };
        let outcome = match closed_space::log_shooting_warm(&q0, &q1, warm, &opts) {
            Ok(o) => o,
            Err(ElasticError::NoConvergence { best, .. }) => {
                log::warn!(
                    "boundary value solver stopped at residual {:e}",
                    best.residual()
                );
                *best
            }
            Err(e) => return Err(e),
        };
        let distance = transforms::l2_inner(&q0.weights(), &outcome.momentum, &outcome.momentum).sqrt();
        Ok(Evaluation {
            distance,
            curve,
            target,
            lift: q0,
            outcome,
        })
    }

    /// `E(ψ) = ½ dist(c, d∘ψ)²`.
    pub fn energy(&self, psi: &CircleDiffeo, warm: Option<&[V3]>) -> Result<f64> {
        let e = self.evaluate(psi, warm)?;
        Ok(0.5 * e.distance * e.distance)
    }

    /// `μ = −∇E`: the vertical projection of `Log_c(d∘ψ)`.
    pub fn gradient(&self, eval: &Evaluation) -> Result<CircleField> {
        let h = transforms::r_inverse_differential(&eval.lift, &eval.outcome.momentum)?;
        vertical_project(&eval.curve, &h, &self.params)
    }
}

/// `μ = −∇_φ E` at `ψ` for `E = ½ dist(c, d∘ψ)²`; flowing `ψ` along `−μ`
/// decreases `E`.
pub fn reparam_gradient(
    c: &DiscreteCurve,
    d: &DiscreteCurve,
    psi: &CircleDiffeo,
    p: &ElasticParams,
    opts: &ShootingOptions,
) -> Result<CircleField> {
    let prob = MatchingProblem::new(c, d, *p, *opts, MatchOptions::default().bvp_rel)?;
    let eval = prob.evaluate(psi, None)?;
    prob.gradient(&eval)
}

/// One sweep of the refinement rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementEvent {
    pub iteration: usize,
    pub inserted: usize,
    pub removed: usize,
    pub size: usize,
    /// True when insertions were dropped because of the size cap.
    pub capped: bool,
}

/// Applies one refinement sweep to `ψ`: bisects every cell whose image is
/// longer than `2π/n₀` and removes nodes whose neighbours already resolve
/// both the grid and the image. The grid never exceeds `cap · n₀` nodes.
pub fn refine_grid(psi: &CircleDiffeo, n0: usize, cap: usize) -> (CircleDiffeo, RefinementEvent) {
    let h0 = TAU / n0 as f64;
    let n = psi.len();
    let g = &psi.grid;
    let v = &psi.values;
    let next = |j: usize| -> (f64, f64) {
        if j + 1 < n {
            (g[j + 1], v[j + 1])
        } else {
            (g[0] + TAU, v[0] + TAU)
        }
    };
    let prev = |j: usize| -> (f64, f64) {
        if j > 0 {
            (g[j - 1], v[j - 1])
        } else {
            (g[n - 1] - TAU, v[n - 1] - TAU)
        }
    };
    let tol = h0 * (1.0 + 1e-9);
    let split: Vec<bool> = (0..n).map(|j| next(j).1 - v[j] > tol).collect();
    let mut remove = vec![false; n];
    for j in 0..n {
        let (xn, vn) = next(j);
        let (xp, vp) = prev(j);
        let jm = (j + n - 1) % n;
        let touches_split = split[j] || split[jm];
        let neighbour_removed = j > 0 && remove[j - 1] || (j + 1 == n && remove[0]);
        if xn - xp < h0 && vn - vp < h0 && !touches_split && !neighbour_removed {
            remove[j] = true;
        }
    }
    let removed = remove.iter().filter(|r| **r).count();
    let limit = cap * n0;
    let mut room = limit.saturating_sub(n - removed);
    let mut capped = false;
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(n + n0);
    let mut inserted = 0;
    for j in 0..n {
        if !remove[j] {
            nodes.push((g[j], v[j]));
        }
        if split[j] {
            if room == 0 {
                capped = true;
                continue;
            }
            let (xn, vn) = next(j);
            let xm = 0.5 * (g[j] + xn);
            let vm = 0.5 * (v[j] + vn);
            if xm >= TAU {
                nodes.push((xm - TAU, vm - TAU));
            } else {
                nodes.push((xm, vm));
            }
            room -= 1;
            inserted += 1;
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (grid, values): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
    let size = grid.len();
    (
        CircleDiffeo { grid, values },
        RefinementEvent {
            iteration: 0,
            inserted,
            removed,
            size,
            capped,
        },
    )
}

/// Settings of [`solve_bvp_shapes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchOptions {
    pub shooting: ShootingOptions,
    /// Relative boundary value tolerance used when `shooting.eps_bvp` is
    /// unset; see [`MatchingProblem::new`].
    pub bvp_rel: f64,
    /// Stop when the relative decrease of an accepted step falls below this.
    pub tol_rel: f64,
    pub max_outer: usize,
    pub initial_step: f64,
    pub refine: bool,
    /// Grid size cap as a multiple of the initial size.
    pub refine_cap: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self {
            shooting: ShootingOptions::default(),
            bvp_rel: 1e-4,
            tol_rel: 1e-4,
            max_outer: 100,
            initial_step: 0.1,
            refine: true,
            refine_cap: 8,
        }
    }
}

/// Output of [`solve_bvp_shapes`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchResult {
    pub psi: CircleDiffeo,
    pub initial_distance: f64,
    /// Distance after every accepted step, starting with the initial one.
    pub distance_history: Vec<f64>,
    pub final_distance: f64,
    pub final_path: GeodesicPath,
    pub refinement_log: Vec<RefinementEvent>,
    pub iterations: usize,
    /// Set when the grid hit its size cap: stretching concentrates into a
    /// region that no finite refinement resolves.
    pub incompleteness_detected: bool,
    pub converged: bool,
}

/// Gradient descent over `Diff(S¹)` for `dist(c, d∘ψ)`.
pub fn solve_bvp_shapes(
    c: &DiscreteCurve,
    d: &DiscreteCurve,
    p: &ElasticParams,
    opts: &MatchOptions,
) -> Result<MatchResult> {
    let prob = MatchingProblem::new(c, d, *p, opts.shooting, opts.bvp_rel)?;
    let n0 = c.len();
    let mut psi = CircleDiffeo::identity(c.grid());
    let mut eval = prob.evaluate(&psi, None)?;
    let initial_distance = eval.distance;
    let mut history = vec![initial_distance];
    let mut refinement_log = Vec::new();
    let mut incompleteness = false;
    let mut alpha = opts.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    let mut best = initial_distance;

    while iterations < opts.max_outer {
        if eval.distance <= 1e-12 * (1.0 + initial_distance) {
            converged = true;
            break;
        }
        iterations += 1;
        let mu = prob.gradient(&eval)?;
        let mut accepted = None;
        for _ in 0..30 {
            let step = flow(&mu.scaled(-1.0), alpha, None).and_then(|eta| compose(&psi, &eta));
            match step {
                Ok(cand) => match prob.evaluate(&cand, Some(&eval.outcome.momentum)) {
                    Ok(e) if e.distance < best => {
                        accepted = Some((cand, e));
                        break;
                    }
                    Ok(_) => alpha *= 0.5,
                    Err(err) => {
                        log::debug!("step rejected: {err}");
                        alpha *= 0.5;
                    }
                },
                Err(err) => {
                    log::debug!("step rejected: {err}");
                    alpha *= 0.5;
                }
            }
        }
        let Some((cand, e)) = accepted else {
            converged = true;
            break;
        };
        let decrease = (best - e.distance) / best;
        best = e.distance;
        history.push(best);
        psi = cand;
        eval = e;
        alpha *= 1.5;
        if opts.refine {
            let (refined, mut ev) = refine_grid(&psi, n0, opts.refine_cap);
            ev.iteration = iterations;
            incompleteness |= ev.capped;
            if ev.inserted + ev.removed > 0 {
                psi = refined;
                eval = prob.evaluate(&psi, None)?;
                refinement_log.push(ev);
            }
        }
        if decrease < opts.tol_rel {
            converged = true;
            break;
        }
    }

    if opts.refine {
        // Resolve the final image completely before reporting.
        for _ in 0..64 {
            let (refined, mut ev) = refine_grid(&psi, n0, opts.refine_cap);
            ev.iteration = iterations;
            incompleteness |= ev.capped;
            if ev.inserted + ev.removed == 0 || (ev.inserted == 0 && ev.capped) {
                break;
            }
            psi = refined;
            refinement_log.push(ev);
            if ev.capped {
                break;
            }
        }
        if eval.curve.len() != psi.len() || eval.curve.grid() != psi.grid() {
            eval = prob.evaluate(&psi, None)?;
        }
    }

    Ok(MatchResult {
        psi,
        initial_distance,
        distance_history: history,
        final_distance: eval.distance,
        final_path: eval.outcome.path,
        refinement_log,
        iterations,
        incompleteness_detected: incompleteness,
        converged,
    })
}
