//! Transforms that pull a flat `L²` metric back to reparameterization
//! invariant metrics on curves.
//!
//! The central one is the `R^{a,b}` transform
//!
//! ```text
//! R(c) = |c′|^{1/2} ( a·(v, 0) + √(4b² − a²)·(0, 0, 1) )
//! ```
//!
//! whose pullback of `∫|·|² dθ` is the elastic metric
//! `∫ a²⟨D_s h, n⟩² + b²⟨D_s h, v⟩² ds`. Its image lies on the cone
//! `(4b² − a²)(q₁² + q₂²) = a² q₃²`, `q₃ > 0`; for `4b² = a²` the third
//! component vanishes and the lift is planar (the square-root velocity case).
//!
//! The Q-, K- and half-angle transforms are provided for metric evaluation
//! only; none of them is inverted here.

use serde::{Deserialize, Serialize};

use crate::curve::{quadrature_weights, DiscreteCurve, ElasticParams, Topology, VectorField2};
use crate::error::{ElasticError, Result};
use crate::{V2, V3};

/// Relative tolerance of the cone equation for lifted values.
pub const CONE_TOL: f64 = 1e-8;

/// An `R^{a,b}` image: one lifted value per node of the source grid.
///
/// Values are always stored as 3-vectors; in the planar case the third
/// component is zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftedCurve {
    values: Vec<V3>,
    grid: Vec<f64>,
    params: ElasticParams,
    topology: Topology,
}

/// Relative residual of the cone equation at one value.
pub fn cone_residual(q: &V3, p: &ElasticParams) -> f64 {
    let s = 4.0 * p.b() * p.b() - p.a() * p.a();
    let lhs = s * (q.x * q.x + q.y * q.y);
    let rhs = p.a() * p.a() * q.z * q.z;
    let scale = (lhs + rhs).max(f64::MIN_POSITIVE);
    (lhs - rhs).abs() / scale
}

impl LiftedCurve {
    pub fn new(
        values: Vec<V3>,
        grid: Vec<f64>,
        params: ElasticParams,
        topology: Topology,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ElasticError::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        crate::curve::validate_grid(&grid, topology)?;
        let lifted = Self {
            values,
            grid,
            params,
            topology,
        };
        lifted.check_cone()?;
        Ok(lifted)
    }

    pub(crate) fn new_unchecked(
        values: Vec<V3>,
        grid: Vec<f64>,
        params: ElasticParams,
        topology: Topology,
    ) -> Self {
        Self {
            values,
            grid,
            params,
            topology,
        }
    }

    /// Verifies the cone invariant (or non-vanishing in the planar case).
    pub fn check_cone(&self) -> Result<()> {
        let planar = self.params.is_planar();
        let scale = self.values.iter().map(|q| q.norm()).fold(0.0, f64::max);
        for (node, q) in self.values.iter().enumerate() {
            if planar {
                if q.z != 0.0 || q.norm() <= 1e-12 * scale.max(1e-300) || !q.norm().is_finite() {
                    return Err(ElasticError::ConeViolation {
                        node,
                        residual: q.z.abs(),
                    });
                }
            } else {
                let r = cone_residual(q, &self.params);
                if !(q.z > 0.0) || !(r <= CONE_TOL) {
                    return Err(ElasticError::ConeViolation { node, residual: r });
                }
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[V3] {
        &self.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn params(&self) -> ElasticParams {
        self.params
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 2 in the planar case, 3 otherwise.
    pub fn dim(&self) -> usize {
        self.params.lift_dim()
    }

    pub fn weights(&self) -> Vec<f64> {
        quadrature_weights(&self.grid, self.topology)
    }

    /// `L²` norm `(∫|q|² dθ)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        l2_inner(&self.weights(), &self.values, &self.values).sqrt()
    }

    /// `L²` distance to another lift on the same grid.
    pub fn l2_distance(&self, other: &LiftedCurve) -> f64 {
        let d: Vec<V3> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        l2_inner(&self.weights(), &d, &d).sqrt()
    }

    pub fn check_same_grid(&self, other: &LiftedCurve) -> Result<()> {
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
}

/// Weighted `L²` inner product of two nodal fields.
pub fn l2_inner(weights: &[f64], a: &[V3], b: &[V3]) -> f64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * x.dot(y))
        .sum()
}

fn ds_components(c: &DiscreteCurve, h: &[V2]) -> Result<(crate::curve::Frame, Vec<f64>, Vec<f64>)> {
    c.check_field(h)?;
    let fr = c.frame();
    let dsh = c.arc_derivative(h);
    let hn = dsh.iter().zip(&fr.normal).map(|(d, n)| d.dot(n)).collect();
    let hv = dsh.iter().zip(&fr.tangent).map(|(d, v)| d.dot(v)).collect();
    Ok((fr, hn, hv))
}

/// The `R^{a,b}` transform of a curve.
pub fn r_transform(c: &DiscreteCurve, p: &ElasticParams) -> LiftedCurve {
    let fr = c.frame();
    let h3 = p.cone_height();
    let values = fr
        .speed
        .iter()
        .zip(&fr.tangent)
        .map(|(s, v)| {
            let r = s.sqrt();
            V3::new(r * p.a() * v.x, r * p.a() * v.y, r * h3)
        })
        .collect();
    LiftedCurve::new_unchecked(values, c.grid().to_vec(), *p, c.topology())
}

/// Analytic differential `D_{c,h} R^{a,b}`.
pub fn r_differential(c: &DiscreteCurve, h: &[V2], p: &ElasticParams) -> Result<Vec<V3>> {
    let (fr, hn, hv) = ds_components(c, h)?;
    let h3 = p.cone_height();
    Ok((0..c.len())
        .map(|j| {
            let r = fr.speed[j].sqrt();
            let planar = fr.normal[j] * (p.a() * hn[j]) + fr.tangent[j] * (0.5 * p.a() * hv[j]);
            V3::new(r * planar.x, r * planar.y, r * 0.5 * h3 * hv[j])
        })
        .collect())
}

/// `c′ = |q|(q₁, q₂)/(2ab)`, the derivative encoded by a lifted value.
fn velocity_of(q: &V3, p: &ElasticParams) -> V2 {
    V2::new(q.x, q.y) * (q.norm() / (2.0 * p.a() * p.b()))
}

/// Cumulative trapezoid integral of nodal vectors on a grid.
fn cumulative(grid: &[f64], f: &[V2]) -> Vec<V2> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = V2::zeros();
    out.push(acc);
    for j in 1..f.len() {
        acc += (f[j - 1] + f[j]) * (0.5 * (grid[j] - grid[j - 1]));
        out.push(acc);
    }
    out
}

/// Reconstructs a curve from its lift, starting at `basepoint`.
///
/// For a closed lift that is not on the closure constraint the returned
/// points do not close up; see [`closure_defect`].
pub fn r_inverse(q: &LiftedCurve, basepoint: V2) -> Result<DiscreteCurve> {
    q.check_cone()?;
    let p = q.params();
    let vel: Vec<V2> = q.values().iter().map(|v| velocity_of(v, &p)).collect();
    let points = cumulative(q.grid(), &vel)
        .into_iter()
        .map(|x| x + basepoint)
        .collect();
    DiscreteCurve::new(points, q.grid().to_vec(), q.topology())
}

/// `c(2π) − c(0)` of the reconstructed curve (periodic trapezoid).
pub fn closure_defect(q: &LiftedCurve) -> V2 {
    let p = q.params();
    q.weights()
        .iter()
        .zip(q.values())
        .map(|(w, v)| velocity_of(v, &p) * *w)
        .sum()
}

/// Differential of `R⁻¹`: the curve variation `h` with `h(θ₀) = 0` whose
/// transform differential is `dq`.
pub fn r_inverse_differential(q: &LiftedCurve, dq: &[V3]) -> Result<VectorField2> {
    if dq.len() != q.len() {
        return Err(ElasticError::Dimension {
            expected: q.len(),
            got: dq.len(),
        });
    }
    let p = q.params();
    let k = 1.0 / (2.0 * p.a() * p.b());
    let dvel: Vec<V2> = q
        .values()
        .iter()
        .zip(dq)
        .map(|(v, d)| {
            let nv = v.norm();
            (V2::new(v.x, v.y) * (v.dot(d) / nv) + V2::new(d.x, d.y) * nv) * k
        })
        .collect();
    Ok(cumulative(q.grid(), &dvel))
}

/// The elastic metric `G^{a,b}_c(h, k)`.
pub fn elastic_metric(c: &DiscreteCurve, h: &[V2], k: &[V2], p: &ElasticParams) -> Result<f64> {
    let (_, hn, hv) = ds_components(c, h)?;
    let (_, kn, kv) = ds_components(c, k)?;
    let integrand: Vec<f64> = (0..c.len())
        .map(|j| p.a() * p.a() * hn[j] * kn[j] + p.b() * p.b() * hv[j] * kv[j])
        .collect();
    Ok(c.integrate_ds(&integrand))
}

/// Elastic metric evaluated through the operator `P^{a,b}_c` after
/// integration by parts (open curves): `∫⟨P h, h⟩ ds`, split into the
/// distributional interior term and the endpoint deltas.
pub fn elastic_metric_operator_form(c: &DiscreteCurve, h: &[V2], p: &ElasticParams) -> Result<f64> {
    if c.topology() != Topology::Open {
        return Err(ElasticError::Topology(
            "operator form with boundary terms applies to open curves".into(),
        ));
    }
    let (fr, hn, hv) = ds_components(c, h)?;
    let (a2, b2) = (p.a() * p.a(), p.b() * p.b());
    let ah: VectorField2 = (0..c.len())
        .map(|j| fr.normal[j] * (a2 * hn[j]) + fr.tangent[j] * (b2 * hv[j]))
        .collect();
    let interior: Vec<f64> = c
        .arc_derivative(&ah)
        .iter()
        .zip(h)
        .map(|(d, x)| -d.dot(x))
        .collect();
    let n = c.len();
    Ok(c.integrate_ds(&interior) + ah[n - 1].dot(&h[n - 1]) - ah[0].dot(&h[0]))
}

/// `Q(c) = √|c′| c`.
pub fn q_transform(c: &DiscreteCurve) -> VectorField2 {
    c.speed()
        .iter()
        .zip(c.points())
        .map(|(s, x)| x * s.sqrt())
        .collect()
}

/// `D_{c,h} Q = (h + ½⟨D_s h, v⟩ c) √|c′|`.
pub fn q_differential(c: &DiscreteCurve, h: &[V2]) -> Result<VectorField2> {
    let (fr, _, hv) = ds_components(c, h)?;
    Ok((0..c.len())
        .map(|j| (h[j] + c.points()[j] * (0.5 * hv[j])) * fr.speed[j].sqrt())
        .collect())
}

/// The metric induced by the Q-transform. Not translation invariant.
pub fn q_metric(c: &DiscreteCurve, h: &[V2], k: &[V2]) -> Result<f64> {
    let (_, _, hv) = ds_components(c, h)?;
    let (_, _, kv) = ds_components(c, k)?;
    let x = c.points();
    let integrand: Vec<f64> = (0..c.len())
        .map(|j| (h[j] + x[j] * (0.5 * hv[j])).dot(&(k[j] + x[j] * (0.5 * kv[j]))))
        .collect();
    Ok(c.integrate_ds(&integrand))
}

/// Half-angle transform `√|c′| (cos α/2, sin α/2)` of an open curve.
///
/// The branch of `α` is fixed by `α(θ₀) ∈ (−π, π]`. Its pullback metric is
/// `¼ ∫ |D_s h|² ds`.
pub fn younes_transform(c: &DiscreteCurve) -> Result<VectorField2> {
    if c.topology().is_closed() {
        return Err(ElasticError::Topology(
            "the half-angle transform is only defined for open curves".into(),
        ));
    }
    let fr = c.frame();
    Ok(fr
        .speed
        .iter()
        .zip(&fr.angle)
        .map(|(s, a)| V2::new((0.5 * a).cos(), (0.5 * a).sin()) * s.sqrt())
        .collect())
}

/// Differential of [`younes_transform`].
pub fn younes_differential(c: &DiscreteCurve, h: &[V2]) -> Result<VectorField2> {
    if c.topology().is_closed() {
        return Err(ElasticError::Topology(
            "the half-angle transform is only defined for open curves".into(),
        ));
    }
    let (fr, hn, hv) = ds_components(c, h)?;
    Ok((0..c.len())
        .map(|j| {
            let half = 0.5 * fr.angle[j];
            let e = V2::new(half.cos(), half.sin());
            let e_perp = V2::new(-half.sin(), half.cos());
            (e * (0.5 * hv[j]) + e_perp * (0.5 * hn[j])) * fr.speed[j].sqrt()
        })
        .collect())
}

/// `K(c) = √|c′| (v, κ)`.
pub fn k_transform(c: &DiscreteCurve) -> Vec<V3> {
    let fr = c.frame();
    let kappa = crate::curve::curvature_from_frame(c, &fr);
    (0..c.len())
        .map(|j| {
            let r = fr.speed[j].sqrt();
            V3::new(r * fr.tangent[j].x, r * fr.tangent[j].y, r * kappa[j])
        })
        .collect()
}

/// Differential of the K-transform.
pub fn k_differential(c: &DiscreteCurve, h: &[V2]) -> Result<Vec<V3>> {
    let (fr, hn, hv) = ds_components(c, h)?;
    let kappa = crate::curve::curvature_from_frame(c, &fr);
    let var = c.first_variations(h)?;
    Ok((0..c.len())
        .map(|j| {
            let r = fr.speed[j].sqrt();
            let planar = fr.tangent[j] * (0.5 * hv[j]) + fr.normal[j] * hn[j];
            let third = var.curvature[j] + 0.5 * kappa[j] * hv[j];
            V3::new(r * planar.x, r * planar.y, r * third)
        })
        .collect())
}

/// The second-order metric induced by the K-transform.
///
/// `⟨D_s²h, n⟩` enters through the curvature variation,
/// `⟨D_s²h, n⟩ = Dκ + 2κ⟨D_s h, v⟩`, so that the integrand is consistent with
/// the discrete curvature and the metric is exactly the pullback through
/// [`k_differential`].
pub fn k_metric(c: &DiscreteCurve, h: &[V2], k: &[V2]) -> Result<f64> {
    let fr = c.frame();
    let kappa = crate::curve::curvature_from_frame(c, &fr);
    let parts = |f: &[V2]| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (_, n1, v1) = ds_components(c, f)?;
        let var = c.first_variations(f)?;
        let n2 = (0..c.len())
            .map(|j| var.curvature[j] + 2.0 * kappa[j] * v1[j])
            .collect();
        Ok((n1, v1, n2))
    };
    let (hn, hv, hnn) = parts(h)?;
    let (kn, kv, knn) = parts(k)?;
    let integrand: Vec<f64> = (0..c.len())
        .map(|j| {
            let kap = kappa[j];
            hnn[j] * knn[j] - 1.5 * kap * (hnn[j] * kv[j] + knn[j] * hv[j])
                + hn[j] * kn[j]
                + 0.25 * (1.0 + 9.0 * kap * kap) * hv[j] * kv[j]
        })
        .collect();
    Ok(c.integrate_ds(&integrand))
}

/// A smooth map `f` on jets `(c, D_s c, …)` with analytic Jacobian.
pub trait JetMap {
    /// Number of jet slots: 1 for `f(c)`, 2 for `f(c, D_s c)`.
    fn order(&self) -> usize;
    fn out_dim(&self) -> usize;
    /// `jet` has `2 * order()` entries.
    fn eval(&self, jet: &[f64]) -> Vec<f64>;
    /// Row-major `out_dim × 2·order` Jacobian.
    fn jacobian(&self, jet: &[f64]) -> Vec<Vec<f64>>;
}

/// Generic transform `F(c) = √|c′| f(c, D_s c)`.
pub fn general_f_transform(c: &DiscreteCurve, f: &dyn JetMap) -> Result<Vec<Vec<f64>>> {
    check_order(f)?;
    let fr = c.frame();
    Ok((0..c.len())
        .map(|j| {
            let jet = jet_at(c, &fr, j, f.order());
            let r = fr.speed[j].sqrt();
            f.eval(&jet).into_iter().map(|x| r * x).collect()
        })
        .collect())
}

/// Differential of [`general_f_transform`] by the chain rule:
/// `√|c′| (½⟨D_s h, v⟩ f + J_f · (h, ⟨D_s h, n⟩ n))`.
pub fn general_f_differential(c: &DiscreteCurve, f: &dyn JetMap, h: &[V2]) -> Result<Vec<Vec<f64>>> {
    check_order(f)?;
    let (fr, hn, hv) = ds_components(c, h)?;
    Ok((0..c.len())
        .map(|j| {
            let jet = jet_at(c, &fr, j, f.order());
            let val = f.eval(&jet);
            let jac = f.jacobian(&jet);
            let mut dir = vec![h[j].x, h[j].y];
            if f.order() == 2 {
                let dv = fr.normal[j] * hn[j];
                dir.extend([dv.x, dv.y]);
            }
            let r = fr.speed[j].sqrt();
            val.iter()
                .zip(&jac)
                .map(|(v, row)| {
                    let jd: f64 = row.iter().zip(&dir).map(|(a, b)| a * b).sum();
                    r * (0.5 * hv[j] * v + jd)
                })
                .collect()
        })
        .collect())
}

/// Pullback metric `∫ ⟨DF·h, DF·k⟩ dθ` of a generic transform.
pub fn general_f_metric(c: &DiscreteCurve, f: &dyn JetMap, h: &[V2], k: &[V2]) -> Result<f64> {
    let dh = general_f_differential(c, f, h)?;
    let dk = general_f_differential(c, f, k)?;
    let integrand: Vec<f64> = dh
        .iter()
        .zip(&dk)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum())
        .collect();
    Ok(c.integrate_dtheta(&integrand))
}

fn check_order(f: &dyn JetMap) -> Result<()> {
    match f.order() {
        1 | 2 => Ok(()),
        o => Err(ElasticError::Dimension {
            expected: 2,
            got: o,
        }),
    }
}

fn jet_at(c: &DiscreteCurve, fr: &crate::curve::Frame, j: usize, order: usize) -> Vec<f64> {
    let x = c.points()[j];
    let mut jet = vec![x.x, x.y];
    if order == 2 {
        jet.extend([fr.tangent[j].x, fr.tangent[j].y]);
    }
    jet
}

/// `f(x₁, x₂) = x₂`: recovers the square-root velocity transform.
#[derive(Debug, Clone, Copy, Default)]
pub struct TangentJet;

impl JetMap for TangentJet {
    fn order(&self) -> usize {
        2
    }
    fn out_dim(&self) -> usize {
        2
    }
    fn eval(&self, jet: &[f64]) -> Vec<f64> {
        vec![jet[2], jet[3]]
    }
    fn jacobian(&self, _jet: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]
    }
}

/// `f(x) = x`: recovers the Q-transform.
#[derive(Debug, Clone, Copy, Default)]
pub struct PositionJet;

impl JetMap for PositionJet {
    fn order(&self) -> usize {
        1
    }
    fn out_dim(&self) -> usize {
        2
    }
    fn eval(&self, jet: &[f64]) -> Vec<f64> {
        vec![jet[0], jet[1]]
    }
    fn jacobian(&self, _jet: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![0.0, 1.0]]
    }
}
