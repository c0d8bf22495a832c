//! Geodesics between parameterized closed curves.
//!
//! A lift `q = R^{a,b}(c)` comes from a closed curve exactly when
//! `F(q) = ∫ √(q₁² + q₂²) (q₁, q₂) dθ` vanishes. The constraint manifold `𝒞`
//! is a codimension 2 submanifold of the space of cone curves, and geodesics
//! on `𝒞` (with the flat `L²` metric) are the elastic geodesics between closed
//! curves modulo translations.
//!
//! Internally all computations run in the polar chart of the cone, where the
//! space of cone curves is flat and the only constraint left is `F`. In the
//! planar case the chart is the identity.
//!
//! Geodesics are shot with RATTLE and boundary value problems are solved by
//! the fixed-point iteration `p ← p + α Proj(q₀, q₁ − Exp(q₀, p))`.

use serde::{Deserialize, Serialize};

use crate::curve::{DiscreteCurve, ElasticParams, Topology, VectorField2};
use crate::error::{ElasticError, Result};
use crate::linalg::solve_dense;
use crate::open_space::{chart_velocity, cone_chart, cone_velocity, opening, radius, signed_angle, ConePoint};
use crate::transforms::{self, l2_inner, LiftedCurve};
use crate::{V2, V3};

/// Settings of the shooting and boundary value solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Number of RATTLE steps on `[0, 1]`.
    pub steps: usize,
    /// Tolerance on `|F|` for the position constraint.
    pub tol_f: f64,
    pub newton_max_iter: usize,
    /// Absolute tolerance of the boundary value solver; `None` means
    /// `1e-3 · ‖q₁‖`.
    pub eps_bvp: Option<f64>,
    pub max_iter: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            steps: 25,
            tol_f: 1e-10,
            newton_max_iter: 50,
            eps_bvp: None,
            max_iter: 500,
        }
    }
}

/// Per-step record of a RATTLE run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub constraint_norm: f64,
    pub energy: f64,
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub newton_iterations: usize,
}

/// A discrete geodesic on the constraint manifold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub states: Vec<LiftedCurve>,
    pub momenta: Vec<Vec<V3>>,
    /// `diagnostics[i]` describes `states[i]`; entry 0 has zero multipliers.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl GeodesicPath {
    pub fn end(&self) -> &LiftedCurve {
        self.states.last().expect("paths have at least one state")
    }

    /// `‖p₀‖_{L²}`, the length of a constant-speed geodesic on `[0, 1]`.
    pub fn length(&self) -> f64 {
        let w = self.states[0].weights();
        l2_inner(&w, &self.momenta[0], &self.momenta[0]).sqrt()
    }

    pub fn max_constraint(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.constraint_norm)
            .fold(0.0, f64::max)
    }
}

/// Result of the boundary value solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogOutcome {
    pub momentum: Vec<V3>,
    /// Residual `‖Exp(q₀, p) − q₁‖` after every accepted update.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub path: GeodesicPath,
}

impl LogOutcome {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::INFINITY)
    }
}

/// The closure functional `F(q)`.
pub fn constraint(q: &LiftedCurve) -> Result<V2> {
    q.check_cone()?;
    Ok(constraint_unchecked(q.values(), &q.weights()))
}

fn constraint_unchecked(values: &[V3], w: &[f64]) -> V2 {
    values
        .iter()
        .zip(w)
        .map(|(q, w)| q.xy() * (q.xy().norm() * w))
        .sum()
}

/// Unit normal of the cone surface at `q` (`None` in the planar case).
fn cone_normal(q: &V3, p: &ElasticParams) -> Option<V3> {
    if p.is_planar() {
        return None;
    }
    let s = 4.0 * p.b() * p.b() - p.a() * p.a();
    let n = V3::new(s * q.x, s * q.y, -p.a() * p.a() * q.z);
    Some(n / n.norm())
}

/// Orthogonal projection of `v` onto the tangent plane of the cone at `q`.
fn cone_project(v: &V3, q: &V3, p: &ElasticParams) -> V3 {
    match cone_normal(q, p) {
        Some(n) => v - n * n.dot(v),
        None => V3::new(v.x, v.y, 0.0),
    }
}

/// Normal space of `𝒞` inside the cone curves: the `L²` gradients of `F₁`,
/// `F₂` projected node-wise onto the cone, and a Gram–Schmidt orthonormal
/// basis of their span.
#[derive(Debug, Clone)]
pub struct NormalBasis {
    pub raw: [Vec<V3>; 2],
    pub orthonormal: [Vec<V3>; 2],
}

fn constraint_gradients(q: &LiftedCurve) -> [Vec<V3>; 2] {
    let p = q.params();
    let grad = |i: usize| -> Vec<V3> {
        q.values()
            .iter()
            .map(|v| {
                let rho = v.xy().norm();
                let qi = if i == 0 { v.x } else { v.y };
                let mut g = V3::new(v.x, v.y, 0.0) * (qi / rho);
                g[i] += rho;
                cone_project(&g, v, &p)
            })
            .collect()
    };
    [grad(0), grad(1)]
}

pub fn normal_basis(q: &LiftedCurve) -> Result<NormalBasis> {
    q.check_cone()?;
    let raw = constraint_gradients(q);
    let w = q.weights();
    let n0 = l2_inner(&w, &raw[0], &raw[0]).sqrt();
    if n0 < 1e-10 {
        return Err(ElasticError::DegenerateBasis(format!("|U1| = {n0:e}")));
    }
    let e0: Vec<V3> = raw[0].iter().map(|x| x / n0).collect();
    let c = l2_inner(&w, &raw[1], &e0);
    let rest: Vec<V3> = raw[1].iter().zip(&e0).map(|(x, e)| x - e * c).collect();
    let n1 = l2_inner(&w, &rest, &rest).sqrt();
    let n1_raw = l2_inner(&w, &raw[1], &raw[1]).sqrt();
    if n1 < 1e-10 * n1_raw.max(1.0) {
        return Err(ElasticError::DegenerateBasis(format!(
            "Gram-Schmidt residual {n1:e}"
        )));
    }
    let e1 = rest.iter().map(|x| x / n1).collect();
    Ok(NormalBasis {
        raw,
        orthonormal: [e0, e1],
    })
}

/// The vectors `∇F_i + λ_i e₃` with `λ_i = 2q_i√(4b² − a²)/a`: the
/// gradients made tangent to the cone by a purely vertical correction.
///
/// These are tangent to the cone and coincide with the `raw` vectors of
/// [`normal_basis`] in the planar case. For `4b² > a²` they are not
/// orthogonal to the tangent space of `𝒞`, which is why [`normal_basis`]
/// projects orthogonally instead.
pub fn vertical_corrected_gradients(q: &LiftedCurve) -> Result<[Vec<V3>; 2]> {
    q.check_cone()?;
    let p = q.params();
    let h = p.cone_height();
    let make = |i: usize| -> Vec<V3> {
        q.values()
            .iter()
            .map(|v| {
                let rho = v.xy().norm();
                let qi = if i == 0 { v.x } else { v.y };
                let mut g = V3::new(v.x, v.y, 0.0) * (qi / rho);
                g[i] += rho;
                g.z = 2.0 * qi * h / p.a();
                g
            })
            .collect()
    };
    Ok([make(0), make(1)])
}

/// Orthogonal projection of `p` onto `T_q 𝒞`.
pub fn proj(q: &LiftedCurve, p: &[V3]) -> Result<Vec<V3>> {
    if p.len() != q.len() {
        return Err(ElasticError::Dimension {
            expected: q.len(),
            got: p.len(),
        });
    }
    let basis = normal_basis(q)?;
    let prm = q.params();
    let w = q.weights();
    let mut out: Vec<V3> = p
        .iter()
        .zip(q.values())
        .map(|(v, x)| cone_project(v, x, &prm))
        .collect();
    for u in &basis.orthonormal {
        let c = l2_inner(&w, &out, u);
        for (o, e) in out.iter_mut().zip(u) {
            *o -= e * c;
        }
    }
    Ok(out)
}

/// Cone curve in polar chart coordinates, with a per-node angle branch that
/// is tracked continuously in time.
#[derive(Debug, Clone)]
struct Chart {
    params: ElasticParams,
    m: f64,
    w: Vec<f64>,
    grid: Vec<f64>,
    x: Vec<V2>,
    phi: Vec<f64>,
}

impl Chart {
    fn from_lift(q: &LiftedCurve) -> Self {
        let p = q.params();
        let m = opening(&p);
        let phi: Vec<f64> = q.values().iter().map(|v| v.y.atan2(v.x) / m).collect();
        let x = q
            .values()
            .iter()
            .zip(&phi)
            .map(|(v, f)| ConePoint { r: radius(v, &p), phi: *f }.planar())
            .collect();
        Self {
            params: p,
            m,
            w: q.weights(),
            grid: q.grid().to_vec(),
            x,
            phi,
        }
    }

    fn point(&self, j: usize) -> ConePoint {
        ConePoint {
            r: self.x[j].norm(),
            phi: self.phi[j],
        }
    }

    /// Moves the nodes to `x`, continuing each angle branch.
    fn moved(&self, x: Vec<V2>) -> Result<Self> {
        let scale = self.x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut phi = Vec::with_capacity(x.len());
        for (j, (new, old)) in x.iter().zip(&self.x).enumerate() {
            let r = new.norm();
            if !(r > 1e-12 * scale) {
                return Err(ElasticError::ConeViolation {
                    node: j,
                    residual: r,
                });
            }
            phi.push(self.phi[j] + signed_angle(old, new));
        }
        Ok(Self {
            x,
            phi,
            ..self.clone()
        })
    }

    fn lift(&self) -> LiftedCurve {
        let values = (0..self.x.len())
            .map(|j| cone_chart(&self.point(j), &self.params))
            .collect();
        LiftedCurve::new_unchecked(values, self.grid.clone(), self.params, Topology::Closed)
    }

    /// `F` evaluated from chart coordinates: `Σ w (r²/m²)(cos mφ, sin mφ)`.
    fn constraint(&self) -> V2 {
        let m2 = self.m * self.m;
        (0..self.x.len())
            .map(|j| {
                let (s, c) = (self.m * self.phi[j]).sin_cos();
                V2::new(c, s) * (self.w[j] * self.x[j].norm_squared() / m2)
            })
            .sum()
    }

    /// Node-wise gradients of the two constraint integrands.
    fn grads(&self) -> Vec<[V2; 2]> {
        let m = self.m;
        (0..self.x.len())
            .map(|j| {
                let r = self.x[j].norm();
                let (s, c) = self.phi[j].sin_cos();
                let er = V2::new(c, s);
                let ephi = V2::new(-s, c);
                let (sm, cm) = (m * self.phi[j]).sin_cos();
                [
                    er * (2.0 * r * cm / (m * m)) - ephi * (r * sm / m),
                    er * (2.0 * r * sm / (m * m)) + ephi * (r * cm / m),
                ]
            })
            .collect()
    }

    fn inner(&self, a: &[V2], b: &[V2]) -> f64 {
        self.w
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x.dot(y))
            .sum()
    }

    /// Removes the gradient components of `v`; returns the coefficients
    /// subtracted.
    fn project(&self, v: &[V2]) -> Result<(Vec<V2>, [f64; 2])> {
        let g = self.grads();
        let g0: Vec<V2> = g.iter().map(|x| x[0]).collect();
        let g1: Vec<V2> = g.iter().map(|x| x[1]).collect();
        let gram = vec![
            vec![self.inner(&g0, &g0), self.inner(&g0, &g1)],
            vec![self.inner(&g1, &g0), self.inner(&g1, &g1)],
        ];
        let rhs = vec![self.inner(&g0, v), self.inner(&g1, v)];
        let c = solve_dense(gram, rhs)
            .map_err(|e| ElasticError::DegenerateBasis(e.to_string()))?;
        let out = v
            .iter()
            .zip(&g)
            .map(|(x, g)| x - g[0] * c[0] - g[1] * c[1])
            .collect();
        Ok((out, [c[0], c[1]]))
    }

    /// Chart velocity of a field of lifted tangent vectors (projected onto
    /// the cone first).
    fn chart_field_of(&self, v: &[V3]) -> Vec<V2> {
        (0..self.x.len())
            .map(|j| {
                let pt = self.point(j);
                let q = cone_chart(&pt, &self.params);
                let t = cone_project(&v[j], &q, &self.params);
                chart_velocity(&q, &t, &pt, &self.params)
            })
            .collect()
    }

    fn to_cone_field(&self, v: &[V2]) -> Vec<V3> {
        (0..self.x.len())
            .map(|j| cone_velocity(&v[j], &self.point(j), &self.params))
            .collect()
    }
}

fn energy(ch: &Chart, p: &[V2]) -> f64 {
    0.5 * ch.inner(p, p)
}

struct StepOutput {
    chart: Chart,
    momentum: Vec<V2>,
    lambda: [f64; 2],
    mu: [f64; 2],
    iterations: usize,
    residual: f64,
}

/// One RATTLE step of size `h`.
fn rattle_step(
    ch: &Chart,
    p: &[V2],
    h: f64,
    lambda0: [f64; 2],
    opts: &ShootingOptions,
    step: usize,
) -> Result<StepOutput> {
    let g = ch.grads();
    let half = 0.5 * h * h;
    let base: Vec<V2> = ch.x.iter().zip(p).map(|(x, v)| x + v * h).collect();
    let mut lambda = lambda0;
    let mut iterations = 0;
    let (trial, residual) = loop {
        let x: Vec<V2> = base
            .iter()
            .zip(&g)
            .map(|(b, g)| b + (g[0] * lambda[0] + g[1] * lambda[1]) * half)
            .collect();
        let trial = ch.moved(x)?;
        let f = trial.constraint();
        let res = f.norm();
        if !res.is_finite() {
            return Err(ElasticError::NewtonDivergence {
                step,
                residual: res,
            });
        }
        if res <= opts.tol_f {
            break (trial, res);
        }
        if iterations >= opts.newton_max_iter {
            return Err(ElasticError::NewtonDivergence {
                step,
                residual: res,
            });
        }
        let gn = trial.grads();
        let mut jac = vec![vec![0.0; 2]; 2];
        for j in 0..g.len() {
            for k in 0..2 {
                for l in 0..2 {
                    jac[k][l] += trial.w[j] * gn[j][k].dot(&g[j][l]) * half;
                }
            }
        }
        let d = solve_dense(jac, vec![-f.x, -f.y]).map_err(|_| ElasticError::NewtonDivergence {
            step,
            residual: res,
        })?;
        lambda = [lambda[0] + d[0], lambda[1] + d[1]];
        iterations += 1;
    };
    let pbar: Vec<V2> = p
        .iter()
        .zip(&g)
        .map(|(v, g)| v + (g[0] * lambda[0] + g[1] * lambda[1]) * (0.5 * h))
        .collect();
    let (momentum, c) = trial.project(&pbar)?;
    Ok(StepOutput {
        chart: trial,
        momentum,
        lambda,
        mu: [-2.0 * c[0] / h, -2.0 * c[1] / h],
        iterations,
        residual,
    })
}

fn check_on_constraint(q: &LiftedCurve, opts: &ShootingOptions) -> Result<()> {
    let f = constraint(q)?;
    if f.norm() > opts.tol_f.max(1e-12 * q.l2_norm().powi(2)) * 1e3 {
        return Err(ElasticError::OffConstraint { residual: f.norm() });
    }
    Ok(())
}

/// Chart-coordinate shooting shared by [`exp_rattle`] and the solvers.
fn shoot(ch0: &Chart, p0: &[V2], steps: usize, opts: &ShootingOptions) -> Result<GeodesicPath> {
    if steps == 0 {
        return Err(ElasticError::InvalidGrid("at least one time step".into()));
    }
    let h = 1.0 / steps as f64;
    let mut ch = ch0.clone();
    let mut p = p0.to_vec();
    let mut lambda = [0.0; 2];
    let mut path = GeodesicPath {
        times: vec![0.0],
        states: vec![ch.lift()],
        momenta: vec![ch.to_cone_field(&p)],
        diagnostics: vec![StepDiagnostics {
            constraint_norm: ch.constraint().norm(),
            energy: energy(&ch, &p),
            lambda: [0.0; 2],
            mu: [0.0; 2],
            newton_iterations: 0,
        }],
    };
    for i in 0..steps {
        let out = rattle_step(&ch, &p, h, lambda, opts, i)?;
        lambda = out.lambda;
        ch = out.chart;
        p = out.momentum;
        path.times.push((i + 1) as f64 * h);
        path.states.push(ch.lift());
        path.momenta.push(ch.to_cone_field(&p));
        path.diagnostics.push(StepDiagnostics {
            constraint_norm: out.residual,
            energy: energy(&ch, &p),
            lambda: out.lambda,
            mu: out.mu,
            newton_iterations: out.iterations,
        });
    }
    Ok(path)
}

/// Geodesic shooting on `𝒞` with `steps` RATTLE steps on `[0, 1]`.
///
/// `p` is projected onto `T_q 𝒞` first.
pub fn exp_rattle(q: &LiftedCurve, p: &[V3], steps: usize, opts: &ShootingOptions) -> Result<GeodesicPath> {
    if q.topology() != Topology::Closed {
        return Err(ElasticError::Topology(
            "constrained shooting needs a closed lift".into(),
        ));
    }
    check_on_constraint(q, opts)?;
    let ch = Chart::from_lift(q);
    let v = ch.project(&ch.chart_field_of(p))?.0;
    shoot(&ch, &v, steps, opts)
}

/// Newton projection of a closed lift onto `𝒞` along the constraint
/// gradients.
pub fn project_to_constraint(q: &LiftedCurve, opts: &ShootingOptions) -> Result<LiftedCurve> {
    q.check_cone()?;
    let ch0 = Chart::from_lift(q);
    let g = ch0.grads();
    let mut lambda = [0.0; 2];
    let mut ch = ch0.clone();
    for it in 0..=opts.newton_max_iter {
        let f = ch.constraint();
        if f.norm() <= opts.tol_f {
            return Ok(ch.lift());
        }
        if it == opts.newton_max_iter {
            break;
        }
        let gn = ch.grads();
        let mut jac = vec![vec![0.0; 2]; 2];
        for j in 0..g.len() {
            for k in 0..2 {
                for l in 0..2 {
                    jac[k][l] += ch.w[j] * gn[j][k].dot(&g[j][l]);
                }
            }
        }
        let d = solve_dense(jac, vec![-f.x, -f.y])?;
        lambda = [lambda[0] + d[0], lambda[1] + d[1]];
        let x = ch0
            .x
            .iter()
            .zip(&g)
            .map(|(x, g)| x + g[0] * lambda[0] + g[1] * lambda[1])
            .collect();
        ch = ch0.moved(x)?;
    }
    Err(ElasticError::NewtonDivergence {
        step: 0,
        residual: ch.constraint().norm(),
    })
}

/// Boundary value solver: the initial velocity of the geodesic from `q0`
/// to `q1`.
pub fn log_shooting(q0: &LiftedCurve, q1: &LiftedCurve, opts: &ShootingOptions) -> Result<LogOutcome> {
    log_shooting_warm(q0, q1, None, opts)
}

/// [`log_shooting`] that also tries `warm` (a velocity field at `q0`, for
/// instance from a nearby problem) as starting point.
pub fn log_shooting_warm(
    q0: &LiftedCurve,
    q1: &LiftedCurve,
    warm: Option<&[V3]>,
    opts: &ShootingOptions,
) -> Result<LogOutcome> {
    q0.check_same_grid(q1)?;
    if q0.params() != q1.params() {
        return Err(ElasticError::InvalidParams {
            a: q1.params().a(),
            b: q1.params().b(),
        });
    }
    check_on_constraint(q0, opts)?;
    check_on_constraint(q1, opts)?;
    let eps = opts.eps_bvp.unwrap_or(1e-3 * q1.l2_norm());
    let ch = Chart::from_lift(q0);
    let steps = opts.steps;

    let residual_of = |path: &GeodesicPath| path.end().l2_distance(q1);
    let direction = |end: &LiftedCurve| -> Result<Vec<V2>> {
        let diff: Vec<V3> = q1
            .values()
            .iter()
            .zip(end.values())
            .map(|(a, b)| a - b)
            .collect();
        Ok(ch.project(&ch.chart_field_of(&diff))?.0)
    };

    let zero = vec![V2::zeros(); q0.len()];
    let rest = shoot(&ch, &zero, 1, opts)?;
    let mut best_p = zero;
    let mut best_path = rest;
    let mut best_res = residual_of(&best_path);
    let mut history = vec![best_res];
    if best_res <= eps {
        return Ok(LogOutcome {
            momentum: ch.to_cone_field(&best_p),
            residual_history: history,
            iterations: 0,
            converged: true,
            path: shoot(&ch, &best_p, steps, opts)?,
        });
    }

    // Initial guess: one long RATTLE step along the projected chord, then the
    // chord to its endpoint.
    let chord = direction(best_path.end())?;
    let guess = match shoot(&ch, &chord, 1, opts) {
        Ok(step) => {
            let diff: Vec<V3> = step
                .end()
                .values()
                .iter()
                .zip(q0.values())
                .map(|(a, b)| a - b)
                .collect();
            ch.project(&ch.chart_field_of(&diff))?.0
        }
        Err(_) => chord,
    };
    if let Ok(path) = shoot(&ch, &guess, steps, opts) {
        let res = residual_of(&path);
        if res < best_res {
            best_p = guess;
            best_path = path;
            best_res = res;
            history.push(res);
        }
    }
    if let Some(warm) = warm {
        if warm.len() == q0.len() {
            let p = ch.project(&ch.chart_field_of(warm))?.0;
            if let Ok(path) = shoot(&ch, &p, steps, opts) {
                let res = residual_of(&path);
                if res < best_res {
                    best_p = p;
                    best_path = path;
                    best_res = res;
                    history.push(res);
                }
            }
        }
    }
    if best_p.iter().all(|v| *v == V2::zeros()) {
        best_path = shoot(&ch, &best_p, steps, opts)?;
    }

    let mut alpha = 1.0;
    let mut iterations = 0;
    while best_res > eps && iterations < opts.max_iter && alpha > 1e-12 {
        iterations += 1;
        let d = direction(best_path.end())?;
        let cand: Vec<V2> = best_p.iter().zip(&d).map(|(p, d)| p + d * alpha).collect();
        match shoot(&ch, &cand, steps, opts) {
            Ok(path) => {
                let res = residual_of(&path);
                if res < best_res {
                    best_p = cand;
                    best_path = path;
                    best_res = res;
                    history.push(res);
                    alpha *= 1.2;
                } else {
                    alpha *= 0.5;
                }
            }
            Err(e) => {
                log::debug!("shooting failed at alpha {alpha}: {e}");
                alpha *= 0.5;
            }
        }
    }
    log::debug!(
        "log_shooting: {iterations} iterations, residual {best_res:e} (target {eps:e})"
    );
    let outcome = LogOutcome {
        momentum: ch.to_cone_field(&best_p),
        residual_history: history,
        iterations,
        converged: best_res <= eps,
        path: best_path,
    };
    if outcome.converged {
        Ok(outcome)
    } else {
        Err(ElasticError::NoConvergence {
            iterations,
            residual: best_res,
            best: Box::new(outcome),
        })
    }
}

/// Geodesic between two parameterized closed curves.
#[derive(Debug, Clone)]
pub struct ParamGeodesic {
    pub distance: f64,
    pub outcome: LogOutcome,
}

impl ParamGeodesic {
    pub fn path(&self) -> &GeodesicPath {
        &self.outcome.path
    }

    /// The curves along the path, each started at the origin.
    pub fn curves(&self) -> Result<Vec<DiscreteCurve>> {
        self.outcome
            .path
            .states
            .iter()
            .map(|q| transforms::r_inverse(q, V2::zeros()))
            .collect()
    }
}

/// Lift of a closed curve, moved onto `𝒞` if quadrature leaves a residual.
pub fn closed_lift(c: &DiscreteCurve, p: &ElasticParams, opts: &ShootingOptions) -> Result<LiftedCurve> {
    if c.topology() != Topology::Closed {
        return Err(ElasticError::Topology(
            "parameterized closed distance needs closed curves".into(),
        ));
    }
    let q = transforms::r_transform(c, p);
    q.check_cone()?;
    if constraint(&q)?.norm() > opts.tol_f {
        project_to_constraint(&q, opts)
    } else {
        Ok(q)
    }
}

/// Geodesic distance between parameterized closed curves modulo
/// translations.
pub fn param_distance(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    p: &ElasticParams,
    opts: &ShootingOptions,
) -> Result<ParamGeodesic> {
    c0.check_same_grid(c1)?;
    let q0 = closed_lift(c0, p, opts)?;
    let q1 = closed_lift(c1, p, opts)?;
    let outcome = log_shooting(&q0, &q1, opts)?;
    let w = q0.weights();
    let distance = l2_inner(&w, &outcome.momentum, &outcome.momentum).sqrt();
    Ok(ParamGeodesic { distance, outcome })
}

/// Distance between two closed lifts in the space of cone curves without
/// the closure constraint: `(Σ w d_cone(q₀, q₁)²)^{1/2}` node-wise.
pub fn unconstrained_distance(q0: &LiftedCurve, q1: &LiftedCurve) -> Result<f64> {
    q0.check_same_grid(q1)?;
    let p = q0.params();
    let mut total = 0.0;
    for ((a, b), w) in q0.values().iter().zip(q1.values()).zip(q0.weights()) {
        let (d, _) = crate::open_space::cone_distance(a, b, &p)?;
        total += w * d * d;
    }
    Ok(total.sqrt())
}

/// Second fundamental form of a submanifold of a flat weighted `L²` space,
/// computed from a tangent projector by central differences.
struct Submanifold<'a> {
    weights: Vec<f64>,
    /// Tangent projection at an arbitrary base point.
    project: Box<dyn Fn(&[V3], &[V3]) -> Result<Vec<V3>> + 'a>,
}

impl Submanifold<'_> {
    fn inner(&self, a: &[V3], b: &[V3]) -> f64 {
        l2_inner(&self.weights, a, b)
    }

    fn second_form(&self, q: &[V3], xh: &[V3], xk: &[V3], rel_step: f64) -> Result<Vec<V3>> {
        let qn = self.inner(q, q).sqrt();
        let hn = self.inner(xh, xh).sqrt();
        if hn == 0.0 {
            return Ok(vec![V3::zeros(); q.len()]);
        }
        let eps = rel_step * qn / hn;
        let plus: Vec<V3> = q.iter().zip(xh).map(|(a, b)| a + b * eps).collect();
        let minus: Vec<V3> = q.iter().zip(xh).map(|(a, b)| a - b * eps).collect();
        let kp = (self.project)(&plus, xk)?;
        let km = (self.project)(&minus, xk)?;
        let d: Vec<V3> = kp
            .iter()
            .zip(&km)
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect();
        let tangential = (self.project)(q, &d)?;
        Ok(d.iter().zip(&tangential).map(|(a, b)| a - b).collect())
    }

    fn sectional(&self, q: &[V3], h: &[V3], k: &[V3], rel_step: f64) -> Result<f64> {
        let xh = (self.project)(q, h)?;
        let xk = (self.project)(q, k)?;
        let nh = self.inner(&xh, &xh).sqrt();
        let nk = self.inner(&xk, &xk).sqrt();
        if nh == 0.0 || nk == 0.0 {
            return Err(ElasticError::DegenerateBasis("zero tangent direction".into()));
        }
        let e1: Vec<V3> = xh.iter().map(|x| x / nh).collect();
        let c = self.inner(&xk, &e1);
        let rest: Vec<V3> = xk.iter().zip(&e1).map(|(x, e)| x - e * c).collect();
        let nr = self.inner(&rest, &rest).sqrt();
        if nr < 1e-6 * nk {
            return Err(ElasticError::DegenerateBasis(
                "tangent directions are nearly parallel".into(),
            ));
        }
        let e2: Vec<V3> = rest.iter().map(|x| x / nr).collect();
        let s11 = self.second_form(q, &e1, &e1, rel_step)?;
        let s22 = self.second_form(q, &e2, &e2, rel_step)?;
        let s12 = self.second_form(q, &e1, &e2, rel_step)?;
        Ok(self.inner(&s22, &s11) - self.inner(&s12, &s12))
    }
}

fn planar_constraint_manifold(q: &LiftedCurve) -> Result<Submanifold<'_>> {
    if !q.params().is_planar() || q.topology() != Topology::Closed {
        return Err(ElasticError::Unsupported(
            "curvature of the constraint manifold is implemented for closed curves with 4b² = a² only"
                .into(),
        ));
    }
    Ok(Submanifold {
        weights: q.weights(),
        project: Box::new(move |base: &[V3], v: &[V3]| {
            let at = LiftedCurve::new_unchecked(base.to_vec(), q.grid().to_vec(), q.params(), Topology::Closed);
            proj(&at, v)
        }),
    })
}

/// Relative central-difference step used for second fundamental forms.
pub const FORM_STEP: f64 = 1e-5;

/// `S(X_h, X_k)`: normal part of the derivative of the tangent field
/// `X_k = Proj(·, k)` along `X_h = Proj(q, h)`.
pub fn second_fundamental_form(q: &LiftedCurve, h: &[V3], k: &[V3]) -> Result<Vec<V3>> {
    second_fundamental_form_with_step(q, h, k, FORM_STEP)
}

pub fn second_fundamental_form_with_step(q: &LiftedCurve, h: &[V3], k: &[V3], rel_step: f64) -> Result<Vec<V3>> {
    let sub = planar_constraint_manifold(q)?;
    let xh = (sub.project)(q.values(), h)?;
    sub.second_form(q.values(), &xh, k, rel_step)
}

/// Sectional curvature of `𝒞` in the plane spanned by `Proj(q, h)` and
/// `Proj(q, k)`, from the Gauss equation.
pub fn sectional_curvature_preshape(q: &LiftedCurve, h: &[V3], k: &[V3]) -> Result<f64> {
    let sub = planar_constraint_manifold(q)?;
    sub.sectional(q.values(), h, k, FORM_STEP)
}

/// Sectional curvature of the space of cone curves (no closure constraint)
/// from the same Gauss-equation machinery. The space is flat, so this is
/// zero up to differencing error.
pub fn sectional_curvature_cone_curves(q: &LiftedCurve, h: &[V3], k: &[V3]) -> Result<f64> {
    q.check_cone()?;
    let p = q.params();
    let sub = Submanifold {
        weights: q.weights(),
        project: Box::new(move |base: &[V3], v: &[V3]| {
            Ok(base
                .iter()
                .zip(v)
                .map(|(b, x)| cone_project(x, b, &p))
                .collect())
        }),
    };
    sub.sectional(q.values(), h, k, FORM_STEP)
}

/// The O'Neill correction `¾ ‖[X̃, Ỹ]^vert‖²_G` at `c`, where `X̃`, `Ỹ` are
/// the horizontal lifts of the constant fields `x`, `y`.
pub fn oneill_term(c: &DiscreteCurve, x: &[V2], y: &[V2], p: &ElasticParams) -> Result<f64> {
    oneill_term_with_step(c, x, y, p, FORM_STEP)
}

pub fn oneill_term_with_step(
    c: &DiscreteCurve,
    x: &[V2],
    y: &[V2],
    p: &ElasticParams,
    rel_step: f64,
) -> Result<f64> {
    c.check_field(x)?;
    c.check_field(y)?;
    let horizontal = |curve: &DiscreteCurve, h: &[V2]| -> Result<VectorField2> {
        let mu = crate::reparam::vertical_project(curve, h, p)?;
        let d = curve.derivative();
        Ok(h.iter()
            .zip(d.iter().zip(mu.values()))
            .map(|(h, (d, m))| h - d * *m)
            .collect())
    };
    let scale = c.points().iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let directional = |along: &[V2], field: &[V2]| -> Result<VectorField2> {
        let n = along.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if n == 0.0 {
            return Ok(vec![V2::zeros(); c.len()]);
        }
        let eps = rel_step * scale / n;
        let shift = |s: f64| c.with_points(c.points().iter().zip(along).map(|(a, b)| a + b * s).collect());
        let fp = horizontal(&shift(eps)?, field)?;
        let fm = horizontal(&shift(-eps)?, field)?;
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect())
    };
    let xt = horizontal(c, x)?;
    let yt = horizontal(c, y)?;
    let dxy = directional(&xt, y)?;
    let dyx = directional(&yt, x)?;
    let bracket: VectorField2 = dxy.iter().zip(&dyx).map(|(a, b)| a - b).collect();
    let mu = crate::reparam::vertical_project(c, &bracket, p)?;
    let d = c.derivative();
    let vert: VectorField2 = d.iter().zip(mu.values()).map(|(d, m)| d * *m).collect();
    Ok(0.75 * transforms::elastic_metric(c, &vert, &vert, p)?.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::uniform_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn circle(n: usize) -> DiscreteCurve {
        DiscreteCurve::from_fn(n, Topology::Closed, |t| V2::new(t.cos(), t.sin())).unwrap()
    }

    fn ellipse(n: usize) -> DiscreteCurve {
        DiscreteCurve::from_fn(n, Topology::Closed, |t| V2::new(2.0 * t.cos(), t.sin())).unwrap()
    }

    fn smooth_field(n: usize, rng: &mut ChaCha8Rng) -> Vec<V3> {
        let coef: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        uniform_grid(n, Topology::Closed)
            .iter()
            .map(|t| {
                V3::new(
                    coef[0] * t.cos() + coef[1] * (2.0 * t).sin() + coef[2] * (3.0 * t).cos() + coef[9],
                    coef[3] * t.sin() + coef[4] * (2.0 * t).cos() + coef[5] * (3.0 * t).sin() + coef[10],
                    coef[6] * t.cos() + coef[7] * (2.0 * t).sin() + coef[8] + coef[11],
                )
            })
            .collect()
    }

    #[test]
    fn constraint_values() {
        let q = transforms::r_transform(&circle(128), &ElasticParams::srv());
        assert!(constraint(&q).unwrap().norm() < 1e-13);
        let grid = uniform_grid(64, Topology::Closed);
        let flat = LiftedCurve::new(
            vec![V3::new(1.0, 0.0, 0.0); 64],
            grid,
            ElasticParams::srv(),
            Topology::Closed,
        )
        .unwrap();
        let f = constraint(&flat).unwrap();
        assert!((f - V2::new(TAU, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constraint_measures_endpoint_gap() {
        for (a, b) in [(1.0, 0.5), (1.0, 1.0), (2.0, 1.5)] {
            let p = ElasticParams::new(a, b).unwrap();
            let n = 256;
            let q = transforms::r_transform(&ellipse(n), &p);
            assert!(constraint(&q).unwrap().norm() < 1e-12);
            // Node-wise positive rescaling stays on the cone but opens the curve.
            let bent: Vec<V3> = q
                .values()
                .iter()
                .zip(q.grid())
                .map(|(v, t)| v * (1.0 + 0.3 * t.cos()))
                .collect();
            let q2 = LiftedCurve::new(bent, q.grid().to_vec(), p, Topology::Closed).unwrap();
            let fval = constraint(&q2).unwrap();
            assert!(fval.norm() > 0.1);
            let gap = transforms::closure_defect(&q2);
            assert!((gap * (a * a) - fval).norm() < 1e-12);
            // The reconstruction misses its start point by the same defect.
            let c = transforms::r_inverse(&q2, V2::zeros()).unwrap();
            let h = TAU / n as f64;
            let vel = |v: &V3| v.xy() * (v.xy().norm() / (a * a));
            let end = c.points()[n - 1] + (vel(&q2.values()[n - 1]) + vel(&q2.values()[0])) * (0.5 * h);
            assert!((end - gap).norm() < 1e-12);
            if 4.0 * b * b == a * a {
                assert!((fval - end * (2.0 * a * b)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn normal_basis_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (a, b) in [(1.0, 0.5), (1.0, 1.0), (2.0, 1.5)] {
            let p = ElasticParams::new(a, b).unwrap();
            let q = transforms::r_transform(&ellipse(200), &p);
            let nb = normal_basis(&q).unwrap();
            let w = q.weights();
            let g = |i: usize, j: usize| l2_inner(&w, &nb.orthonormal[i], &nb.orthonormal[j]);
            assert!((g(0, 0) - 1.0).abs() < 1e-10);
            assert!((g(1, 1) - 1.0).abs() < 1e-10);
            assert!(g(0, 1).abs() < 1e-10);
            let s = 4.0 * b * b - a * a;
            for u in nb.raw.iter().chain(&nb.orthonormal) {
                for (h, v) in u.iter().zip(q.values()) {
                    let res = s * (v.x * h.x + v.y * h.y) - a * a * v.z * h.z;
                    assert!(res.abs() < 1e-10 * v.norm() * h.norm().max(1.0));
                }
            }
            // Projected fields are tangent to 𝒞: F does not change to first order.
            let h = proj(&q, &smooth_field(200, &mut rng)).unwrap();
            let eps = 1e-6;
            let shift = |s: f64| -> V2 {
                let vals: Vec<V3> = q.values().iter().zip(&h).map(|(x, y)| x + y * s).collect();
                constraint_unchecked(&vals, &w)
            };
            let dirder = (shift(eps) - shift(-eps)) / (2.0 * eps);
            let hn = l2_inner(&w, &h, &h).sqrt();
            // Off-cone displacement is second order, so F is evaluated on the
            // raw sums of the first two components.
            assert!(dirder.norm() <= 1e-6 * hn, "{}", dirder.norm());
        }
    }

    #[test]
    fn vertical_correction_is_tangent_but_not_normal() {
        let p = ElasticParams::new(1.0, 1.0).unwrap();
        let q = transforms::r_transform(&ellipse(200), &p);
        let u = vertical_corrected_gradients(&q).unwrap();
        let s = 3.0;
        for (h, v) in u[0].iter().zip(q.values()) {
            assert!((s * (v.x * h.x + v.y * h.y) - v.z * h.z).abs() < 1e-12 * v.norm_squared().max(1.0) * 10.0);
        }
        // Pair with a tangent vector of 𝒞: the inner product does not vanish.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = proj(&q, &smooth_field(200, &mut rng)).unwrap();
        let w = q.weights();
        let tn = l2_inner(&w, &t, &t).sqrt();
        let un = l2_inner(&w, &u[0], &u[0]).sqrt();
        assert!(l2_inner(&w, &u[0], &t).abs() > 1e-3 * tn * un);
        // In the planar case the two constructions agree.
        let q2 = transforms::r_transform(&ellipse(200), &ElasticParams::srv());
        let u2 = vertical_corrected_gradients(&q2).unwrap();
        let nb = normal_basis(&q2).unwrap();
        for (x, y) in u2[1].iter().zip(&nb.raw[1]) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = ElasticParams::new(1.0, 1.0).unwrap();
        let q = transforms::r_transform(&ellipse(120), &p);
        let v = smooth_field(120, &mut rng);
        let once = proj(&q, &v).unwrap();
        let twice = proj(&q, &once).unwrap();
        let w = q.weights();
        let d: Vec<V3> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
        assert!(l2_inner(&w, &d, &d).sqrt() < 1e-10);
        let nb = normal_basis(&q).unwrap();
        let z = proj(&q, &nb.orthonormal[0]).unwrap();
        assert!(l2_inner(&w, &z, &z).sqrt() < 1e-10);
    }

    #[test]
    fn rattle_preserves_constraint_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = transforms::r_transform(&circle(300), &ElasticParams::srv());
        let opts = ShootingOptions::default();
        let v: Vec<V3> = smooth_field(300, &mut rng).iter().map(|x| x * 0.3).collect();
        let path = exp_rattle(&q, &v, 25, &opts).unwrap();
        assert!(path.max_constraint() <= 1e-8);
        let e0 = path.diagnostics[0].energy;
        let drift = path
            .diagnostics
            .iter()
            .map(|d| (d.energy - e0).abs() / e0)
            .fold(0.0, f64::max);
        eprintln!("energy drift {drift:e}");
        let zero = exp_rattle(&q, &vec![V3::zeros(); 300], 25, &opts).unwrap();
        assert!(zero.end().l2_distance(&q) < 1e-14);
    }

    #[test]
    fn rattle_is_time_reversible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [ElasticParams::srv(), ElasticParams::new(1.0, 1.0).unwrap()] {
            let q = transforms::r_transform(&ellipse(300), &p);
            let opts = ShootingOptions::default();
            let v: Vec<V3> = smooth_field(300, &mut rng).iter().map(|x| x * 0.3).collect();
            let fwd = exp_rattle(&q, &v, 25, &opts).unwrap();
            let back: Vec<V3> = fwd.momenta.last().unwrap().iter().map(|x| -x).collect();
            let rev = exp_rattle(fwd.end(), &back, 25, &opts).unwrap();
            assert!(rev.end().l2_distance(&q) < 1e-8, "{}", rev.end().l2_distance(&q));
        }
    }

    #[test]
    fn log_round_trip() {
        for p in [ElasticParams::srv(), ElasticParams::new(1.0, 1.0).unwrap()] {
            let c0 = ellipse(128);
            let c1 = DiscreteCurve::from_fn(128, Topology::Closed, |t| {
                V2::new(1.5 * t.cos() + 0.2 * (2.0 * t).cos(), 1.2 * t.sin())
            })
            .unwrap();
            let opts = ShootingOptions::default();
            let g = param_distance(&c0, &c1, &p, &opts).unwrap();
            let q1 = transforms::r_transform(&c1, &p);
            assert!(g.path().end().l2_distance(&q1) <= 1e-3 * q1.l2_norm());
            let same = param_distance(&c0, &c0, &p, &opts).unwrap();
            assert_eq!(same.distance, 0.0);
            assert_eq!(same.outcome.iterations, 0);
            // The default tolerance leaves an O(1e-3) error in the distance.
            let tight = ShootingOptions {
                eps_bvp: Some(1e-9),
                ..opts
            };
            let g = param_distance(&c0, &c1, &p, &tight).unwrap();
            let lower = unconstrained_distance(&transforms::r_transform(&c0, &p), &q1).unwrap();
            assert!(g.distance >= lower - 1e-8, "{} < {}", g.distance, lower);
        }
    }
}
