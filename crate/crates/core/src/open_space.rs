//! Flat geometry of open curves modulo translations.
//!
//! Under `R^{a,b}` an open curve becomes a curve on the cone `C^{a,b}`. The
//! cone is flat: the polar chart `(r, φ) ↦ (r/m·cos mφ, r/m·sin mφ, h·r)`
//! with `m = 2b/a` and `h = √(4b² − a²)/(2b)` is a local isometry from the
//! punctured plane. Geodesics between curves are therefore node-wise straight
//! lines in chart coordinates `x = r(cos φ, sin φ)`, provided every node uses
//! the same branch of the angle.
//!
//! In the planar case `4b² = a²` the chart is the identity on `ℝ²` and all of
//! the above reduces to straight lines between square-root velocity lifts.

use std::f64::consts::PI;

use crate::curve::{DiscreteCurve, ElasticParams, Topology, VectorField2};
use crate::error::{ElasticError, Result};
use crate::transforms::{self, cone_residual, LiftedCurve, CONE_TOL};
use crate::{V2, V3};

/// A cone value in polar chart coordinates with a fixed angle branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub r: f64,
    pub phi: f64,
}

impl ConePoint {
    /// Planar chart coordinates `r (cos φ, sin φ)`.
    pub fn planar(&self) -> V2 {
        V2::new(self.phi.cos(), self.phi.sin()) * self.r
    }
}

/// Ratio `m = 2b/a` between chart angle and lifted angle.
pub(crate) fn opening(p: &ElasticParams) -> f64 {
    2.0 * p.b() / p.a()
}

fn check_on_cone(q: &V3, p: &ElasticParams) -> Result<()> {
    if p.is_planar() {
        if q.z != 0.0 || !(q.xy().norm() > 0.0) {
            return Err(ElasticError::ConeViolation {
                node: 0,
                residual: q.z.abs(),
            });
        }
    } else {
        let r = cone_residual(q, p);
        if !(q.z > 0.0) || !(r <= CONE_TOL) {
            return Err(ElasticError::ConeViolation { node: 0, residual: r });
        }
    }
    Ok(())
}

/// Radius of a cone value (its distance to the apex).
pub(crate) fn radius(q: &V3, p: &ElasticParams) -> f64 {
    if p.is_planar() {
        q.xy().norm()
    } else {
        2.0 * p.b() * q.z / p.cone_height()
    }
}

/// Chart coordinates of `q` on branch `k`.
pub fn cone_lift(q: &V3, p: &ElasticParams, k: i64) -> Result<ConePoint> {
    check_on_cone(q, p)?;
    Ok(ConePoint {
        r: radius(q, p),
        phi: (q.y.atan2(q.x) + 2.0 * PI * k as f64) / opening(p),
    })
}

/// Maps chart coordinates back onto the cone.
pub fn cone_chart(pt: &ConePoint, p: &ElasticParams) -> V3 {
    let m = opening(p);
    let z = if p.is_planar() {
        0.0
    } else {
        p.cone_height() / (2.0 * p.b()) * pt.r
    };
    V3::new(pt.r / m * (m * pt.phi).cos(), pt.r / m * (m * pt.phi).sin(), z)
}

/// Largest branch offset worth searching.
fn branch_range(p: &ElasticParams) -> i64 {
    (2.0 * p.b() / p.a()).ceil() as i64 + 1
}

/// Euclidean distance of two chart points (law of cosines).
pub fn chart_distance(x: &ConePoint, y: &ConePoint) -> f64 {
    (x.r * x.r + y.r * y.r - 2.0 * x.r * y.r * (x.phi - y.phi).cos())
        .max(0.0)
        .sqrt()
}

/// Pointwise cone distance and the minimizing branch offset `k`.
///
/// Ties are resolved towards the smallest `|k|`.
pub fn cone_distance(q: &V3, qbar: &V3, p: &ElasticParams) -> Result<(f64, i64)> {
    check_on_cone(q, p)?;
    check_on_cone(qbar, p)?;
    if p.is_planar() {
        return Ok(((q - qbar).norm(), 0));
    }
    let x = cone_lift(q, p, 0)?;
    let kmax = branch_range(p);
    let mut best = (f64::INFINITY, 0);
    for k in (0..=kmax).flat_map(|k| [k, -k]) {
        let y = cone_lift(qbar, p, k)?;
        let d = chart_distance(&x, &y);
        if d < best.0 {
            best = (d, k);
        }
    }
    Ok(best)
}

/// Continuous chart angles of a lift, before the branch shift.
fn unwrapped_angles(q: &LiftedCurve) -> Vec<f64> {
    let m = opening(&q.params());
    let mut out = Vec::with_capacity(q.len());
    let mut prev_raw = 0.0;
    let mut acc = 0.0;
    for (j, v) in q.values().iter().enumerate() {
        let raw = v.y.atan2(v.x);
        if j == 0 {
            acc = raw;
        } else {
            acc += crate::curve::wrap_angle(raw - prev_raw);
        }
        prev_raw = raw;
        out.push(acc / m);
    }
    out
}

fn chart_points(q: &LiftedCurve, shift: f64) -> Vec<ConePoint> {
    let p = q.params();
    q.values()
        .iter()
        .zip(unwrapped_angles(q))
        .map(|(v, phi)| ConePoint {
            r: radius(v, &p),
            phi: phi + shift,
        })
        .collect()
}

/// Signed angle from `x` to `y`.
pub(crate) fn signed_angle(x: &V2, y: &V2) -> f64 {
    (x.x * y.y - x.y * y.x).atan2(x.dot(y))
}

/// Closed-form geodesic between two open curves.
#[derive(Debug, Clone)]
pub struct OpenGeodesic {
    start: LiftedCurve,
    end: LiftedCurve,
    chart_start: Vec<ConePoint>,
    chart_end: Vec<ConePoint>,
    branch_k: i64,
    degenerate: Vec<usize>,
    basepoints: (V2, V2),
}

/// Builds the geodesic between two open curves on a common grid.
pub fn open_geodesic(c0: &DiscreteCurve, c1: &DiscreteCurve, p: &ElasticParams) -> Result<OpenGeodesic> {
    if c0.topology() != Topology::Open || c1.topology() != Topology::Open {
        return Err(ElasticError::Topology(
            "closed-form geodesics need open curves".into(),
        ));
    }
    c0.check_same_grid(c1)?;
    let q0 = transforms::r_transform(c0, p);
    let q1 = transforms::r_transform(c1, p);
    q0.check_cone()?;
    q1.check_cone()?;
    let w = q0.weights();
    let chart_start = chart_points(&q0, 0.0);
    let m = opening(p);

    let (branch_k, chart_end) = if p.is_planar() {
        (0, chart_points(&q1, 0.0))
    } else {
        let kmax = branch_range(p);
        let mut best: Option<(f64, i64, Vec<ConePoint>)> = None;
        for k in (0..=kmax).flat_map(|k| [k, -k]) {
            let cand = chart_points(&q1, 2.0 * PI * k as f64 / m);
            let total: f64 = w
                .iter()
                .zip(chart_start.iter().zip(&cand))
                .map(|(w, (x, y))| w * (x.planar() - y.planar()).norm_squared())
                .sum();
            if best.as_ref().is_none_or(|b| total < b.0) {
                best = Some((total, k, cand));
            }
        }
        let (_, k, cand) = best.expect("branch range is non-empty");
        (k, cand)
    };

    let degenerate = chart_start
        .iter()
        .zip(&chart_end)
        .enumerate()
        .filter(|(_, (x, y))| {
            let dphi = if p.is_planar() {
                signed_angle(&x.planar(), &y.planar())
            } else {
                y.phi - x.phi
            };
            dphi.abs() >= PI * (1.0 - 1e-12)
        })
        .map(|(j, _)| j)
        .collect();

    Ok(OpenGeodesic {
        start: q0,
        end: q1,
        chart_start,
        chart_end,
        branch_k,
        degenerate,
        basepoints: (c0.points()[0], c1.points()[0]),
    })
}

impl OpenGeodesic {
    pub fn endpoints(&self) -> (&LiftedCurve, &LiftedCurve) {
        (&self.start, &self.end)
    }

    /// The global branch offset applied to the second curve.
    pub fn branch_k(&self) -> i64 {
        self.branch_k
    }

    /// Nodes whose straight chart path passes through the cone apex.
    pub fn degenerate_nodes(&self) -> &[usize] {
        &self.degenerate
    }

    pub fn chart_start(&self) -> &[ConePoint] {
        &self.chart_start
    }

    pub fn chart_end(&self) -> &[ConePoint] {
        &self.chart_end
    }

    /// Geodesic distance: the flat `L²` distance of the chart representatives.
    pub fn distance(&self) -> f64 {
        self.start
            .weights()
            .iter()
            .zip(self.chart_start.iter().zip(&self.chart_end))
            .map(|(w, (x, y))| w * (x.planar() - y.planar()).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// The same distance assembled from the law of cosines on the fixed
    /// branch, without forming planar chart coordinates.
    pub fn distance_by_cosines(&self) -> f64 {
        self.start
            .weights()
            .iter()
            .zip(self.chart_start.iter().zip(&self.chart_end))
            .map(|(w, (x, y))| w * chart_distance(x, y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The lifted curve at time `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<LiftedCurve> {
        if !(0.0..=1.0).contains(&t) {
            return Err(ElasticError::InvalidGrid(format!(
                "geodesic time {t} outside [0, 1]"
            )));
        }
        if t == 0.0 {
            return Ok(self.start.clone());
        }
        if t == 1.0 {
            return Ok(self.end.clone());
        }
        if !self.degenerate.is_empty() {
            return Err(ElasticError::DegenerateInterior {
                nodes: self.degenerate.clone(),
            });
        }
        let p = self.start.params();
        let values = self
            .chart_start
            .iter()
            .zip(&self.chart_end)
            .map(|(x, y)| {
                let (a, b) = (x.planar(), y.planar());
                let z = a * (1.0 - t) + b * t;
                let pt = ConePoint {
                    r: z.norm(),
                    phi: x.phi + signed_angle(&a, &z),
                };
                cone_chart(&pt, &p)
            })
            .collect();
        Ok(LiftedCurve::new_unchecked(
            values,
            self.start.grid().to_vec(),
            p,
            Topology::Open,
        ))
    }

    /// The curve at time `t`, with its start point interpolated linearly
    /// between those of the end curves.
    pub fn eval_curve(&self, t: f64) -> Result<DiscreteCurve> {
        let q = self.eval(t)?;
        let base = self.basepoints.0 * (1.0 - t) + self.basepoints.1 * t;
        transforms::r_inverse(&q, base)
    }
}

/// Geodesic distance between two open curves modulo translations.
pub fn open_distance(c0: &DiscreteCurve, c1: &DiscreteCurve, p: &ElasticParams) -> Result<f64> {
    Ok(open_geodesic(c0, c1, p)?.distance())
}

/// Differential of the chart `x = r(cos φ, sin φ)` as a map of cone values.
pub(crate) fn chart_velocity(q: &V3, dq: &V3, pt: &ConePoint, p: &ElasticParams) -> V2 {
    let m = opening(p);
    let dr = if p.is_planar() {
        q.xy().dot(&dq.xy()) / pt.r
    } else {
        2.0 * p.b() / p.cone_height() * dq.z
    };
    let rho2 = q.x * q.x + q.y * q.y;
    let dphi = (q.x * dq.y - q.y * dq.x) / rho2 / m;
    let (s, c) = pt.phi.sin_cos();
    V2::new(c, s) * dr + V2::new(-s, c) * (pt.r * dphi)
}

/// Inverse of [`chart_velocity`].
pub(crate) fn cone_velocity(dx: &V2, pt: &ConePoint, p: &ElasticParams) -> V3 {
    let m = opening(p);
    let (s, c) = pt.phi.sin_cos();
    let dr = dx.dot(&V2::new(c, s));
    let dphi = dx.dot(&V2::new(-s, c)) / pt.r;
    let (sm, cm) = (m * pt.phi).sin_cos();
    let planar = V2::new(cm, sm) * (dr / m) + V2::new(-sm, cm) * (pt.r * dphi);
    let z = if p.is_planar() {
        0.0
    } else {
        p.cone_height() / (2.0 * p.b()) * dr
    };
    V3::new(planar.x, planar.y, z)
}

/// Straight chart lines through the lift of `c0` with the velocity induced
/// by `u0`, evaluated at time `t`.
fn exp_lift(c0: &DiscreteCurve, u0: &[V2], t: f64, p: &ElasticParams) -> Result<(LiftedCurve, Vec<V3>)> {
    if c0.topology() != Topology::Open {
        return Err(ElasticError::Topology(
            "the explicit geodesic applies to open curves".into(),
        ));
    }
    let q0 = transforms::r_transform(c0, p);
    q0.check_cone()?;
    let dq0 = transforms::r_differential(c0, u0, p)?;
    let pts = chart_points(&q0, 0.0);
    let mut t_max = f64::INFINITY;
    let mut values = Vec::with_capacity(q0.len());
    let mut rates = Vec::with_capacity(q0.len());
    for ((q, dq), pt) in q0.values().iter().zip(&dq0).zip(&pts) {
        let x0 = pt.planar();
        let dx = chart_velocity(q, dq, pt, p);
        let speed2 = dx.norm_squared();
        if speed2 > 0.0 {
            let t_star = -x0.dot(&dx) / speed2;
            let miss = (x0 + dx * t_star).norm();
            if t_star > 0.0 && miss <= 1e-12 * pt.r {
                t_max = t_max.min(t_star);
            }
        }
        let z = x0 + dx * t;
        let cur = ConePoint {
            r: z.norm(),
            phi: pt.phi + signed_angle(&x0, &z),
        };
        values.push(cone_chart(&cur, p));
        rates.push(cone_velocity(&dx, &cur, p));
    }
    if t >= t_max {
        return Err(ElasticError::ExistenceTimeExceeded { t_max });
    }
    let q = LiftedCurve::new_unchecked(values, c0.grid().to_vec(), *p, Topology::Open);
    Ok((q, rates))
}

/// Solution of the geodesic equation from `c0` with initial velocity `u0`,
/// translated so that its first point is the origin.
pub fn explicit_exp(c0: &DiscreteCurve, u0: &[V2], t: f64, p: &ElasticParams) -> Result<DiscreteCurve> {
    let (q, _) = exp_lift(c0, u0, t, p)?;
    transforms::r_inverse(&q, V2::zeros())
}

/// Curve and velocity `∂_t c` at time `t` of the explicit geodesic.
pub fn explicit_exp_with_velocity(
    c0: &DiscreteCurve,
    u0: &[V2],
    t: f64,
    p: &ElasticParams,
) -> Result<(DiscreteCurve, VectorField2)> {
    let (q, rates) = exp_lift(c0, u0, t, p)?;
    let c = transforms::r_inverse(&q, V2::zeros())?;
    let v = transforms::r_inverse_differential(&q, &rates)?;
    Ok((c, v))
}

/// Initial velocity of the geodesic from `c0` to `c1` (inverse of
/// [`explicit_exp`] at `t = 1`, up to translation).
pub fn open_log(c0: &DiscreteCurve, c1: &DiscreteCurve, p: &ElasticParams) -> Result<VectorField2> {
    let g = open_geodesic(c0, c1, p)?;
    let dq: Vec<V3> = g
        .chart_start
        .iter()
        .zip(&g.chart_end)
        .map(|(x, y)| cone_velocity(&(y.planar() - x.planar()), x, p))
        .collect();
    transforms::r_inverse_differential(&g.start, &dq)
}

/// `A_c h = a²⟨D_s h, n⟩ n + b²⟨D_s h, v⟩ v`.
pub fn momentum_operator(c: &DiscreteCurve, h: &[V2], p: &ElasticParams) -> Result<VectorField2> {
    c.check_field(h)?;
    let fr = c.frame();
    let dsh = c.arc_derivative(h);
    let (a2, b2) = (p.a() * p.a(), p.b() * p.b());
    Ok((0..c.len())
        .map(|j| {
            fr.normal[j] * (a2 * dsh[j].dot(&fr.normal[j]))
                + fr.tangent[j] * (b2 * dsh[j].dot(&fr.tangent[j]))
        })
        .collect())
}

/// `B_c(h, h) = (a²⟨D_s h, n⟩² + b²⟨D_s h, v⟩²) v − 2(b² − a²)⟨D_s h, n⟩⟨D_s h, v⟩ n`.
pub fn geodesic_force(c: &DiscreteCurve, h: &[V2], p: &ElasticParams) -> Result<VectorField2> {
    c.check_field(h)?;
    let fr = c.frame();
    let dsh = c.arc_derivative(h);
    let (a2, b2) = (p.a() * p.a(), p.b() * p.b());
    Ok((0..c.len())
        .map(|j| {
            let hn = dsh[j].dot(&fr.normal[j]);
            let hv = dsh[j].dot(&fr.tangent[j]);
            fr.tangent[j] * (a2 * hn * hn + b2 * hv * hv) - fr.normal[j] * (2.0 * (b2 - a2) * hn * hv)
        })
        .collect())
}

/// Relative residual of `(A_c c_t)_t + ½ B_c(c_t, c_t) = 0` along the
/// explicit geodesic, sampled at `samples` equally spaced times in `[0, t_end]`.
///
/// The time derivative of `A_c c_t` uses central differences; the sup is
/// taken over interior times and nodes and divided by the sup of the two
/// terms.
pub fn geodesic_equation_residual(
    c0: &DiscreteCurve,
    u0: &[V2],
    t_end: f64,
    samples: usize,
    p: &ElasticParams,
) -> Result<f64> {
    let dt = t_end / (samples - 1) as f64;
    let mut momenta = Vec::with_capacity(samples);
    let mut forces = Vec::with_capacity(samples);
    for i in 0..samples {
        let (c, v) = explicit_exp_with_velocity(c0, u0, dt * i as f64, p)?;
        momenta.push(momentum_operator(&c, &v, p)?);
        forces.push(geodesic_force(&c, &v, p)?);
    }
    let n = c0.len();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 1..samples - 1 {
        for j in 1..n - 1 {
            let rate = (momenta[i + 1][j] - momenta[i - 1][j]) / (2.0 * dt);
            let half_force = forces[i][j] * 0.5;
            worst = worst.max((rate + half_force).norm());
            scale = scale.max(rate.norm()).max(half_force.norm());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Energy of the explicit geodesic at time `t`, measured as `∫|∂_t q|² dθ`
/// on the lift. By the pullback identity this is `G_c(c_t, c_t)`.
pub fn explicit_energy(c0: &DiscreteCurve, u0: &[V2], t: f64, p: &ElasticParams) -> Result<f64> {
    let (q, rates) = exp_lift(c0, u0, t, p)?;
    Ok(transforms::l2_inner(&q.weights(), &rates, &rates))
}

/// `G_c(c_t, c_t)` evaluated on the reconstructed curve and velocity.
pub fn explicit_curve_energy(c0: &DiscreteCurve, u0: &[V2], t: f64, p: &ElasticParams) -> Result<f64> {
    let (c, v) = explicit_exp_with_velocity(c0, u0, t, p)?;
    transforms::elastic_metric(&c, &v, &v, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn params(a: f64, b: f64) -> ElasticParams {
        ElasticParams::new(a, b).unwrap()
    }

    fn open(n: usize, f: impl Fn(f64) -> V2) -> DiscreteCurve {
        DiscreteCurve::from_fn(n, Topology::Open, f).unwrap()
    }

    #[test]
    fn lift_of_sample_value() {
        let p = params(1.0, 1.0);
        let q = V3::new(1.0, 0.0, 3f64.sqrt());
        let pt = cone_lift(&q, &p, 0).unwrap();
        assert!((pt.r - 2.0).abs() < 1e-14);
        assert_eq!(pt.phi, 0.0);
        let shifted = cone_lift(&q, &p, 1).unwrap();
        assert!((shifted.phi - PI).abs() < 1e-14);
        assert!((cone_chart(&pt, &p) - q).norm() < 1e-12);
    }

    #[test]
    fn chart_round_trip_on_random_values() {
        for (a, b) in [(1.0, 1.0), (2.0, 1.5), (1.0, 0.5), (0.3, 2.0)] {
            let p = params(a, b);
            for i in 0..50 {
                let pt = ConePoint {
                    r: 0.1 + 0.07 * i as f64,
                    phi: -1.3 + 0.05 * i as f64,
                };
                let q = cone_chart(&pt, &p);
                let back = cone_lift(&q, &p, 0).unwrap();
                assert!((cone_chart(&back, &p) - q).norm() <= 1e-12 * q.norm());
            }
        }
    }

    #[test]
    fn cone_distance_cases() {
        let p = params(1.0, 1.0);
        let q = cone_chart(&ConePoint { r: 1.3, phi: 0.4 }, &p);
        assert_eq!(cone_distance(&q, &q, &p).unwrap(), (0.0, 0));
        let srv = ElasticParams::srv();
        let (d, _) = cone_distance(
            &V3::new(1.0, 0.0, 0.0),
            &V3::new(2f64.sqrt(), 0.0, 0.0),
            &srv,
        )
        .unwrap();
        assert!((d - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        // Chart points half a turn apart: the chord passes through the apex.
        let x = ConePoint { r: 1.0, phi: 0.0 };
        let y = ConePoint { r: 1.0, phi: PI };
        assert!((chart_distance(&x, &y) - 2.0).abs() < 1e-15);
        // On the cone they are the same point (the sector has angle π).
        let (d, _) = cone_distance(&cone_chart(&x, &p), &cone_chart(&y, &p), &p).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn cone_distance_is_chart_distance_of_nearest_branch() {
        let p = params(1.0, 1.0);
        let x = ConePoint { r: 1.0, phi: 0.2 };
        let y = ConePoint { r: 2.0, phi: 0.2 + 0.3 + PI };
        let (d, k) = cone_distance(&cone_chart(&x, &p), &cone_chart(&y, &p), &p).unwrap();
        let exact = (1.0f64 + 4.0 - 4.0 * 0.3f64.cos()).sqrt();
        assert!((d - exact).abs() < 1e-12, "{d} {exact} {k}");
    }

    #[test]
    fn segment_pair_distance() {
        let p = ElasticParams::srv();
        let c0 = open(201, |t| V2::new(t, 0.0));
        let c1 = open(201, |t| V2::new(2.0 * t, 0.0));
        let d = open_distance(&c0, &c1, &p).unwrap();
        let exact = TAU.sqrt() * (2f64.sqrt() - 1.0);
        assert!((d - exact).abs() < 1e-8);
        assert_eq!(open_distance(&c0, &c0, &p).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_endpoints_and_straight_chart_paths() {
        let p = params(1.0, 1.0);
        let c0 = open(65, |t| V2::new(t, 0.3 * t.sin()));
        let c1 = open(65, |t| V2::new((0.5 * t).cos() * 2.0, (0.5 * t).sin()));
        let g = open_geodesic(&c0, &c1, &p).unwrap();
        assert!(g.degenerate_nodes().is_empty());
        let (q0, q1) = g.endpoints();
        assert!(g.eval(0.0).unwrap().l2_distance(q0) < 1e-12);
        assert!(g.eval(1.0).unwrap().l2_distance(q1) < 1e-12);
        let mid = g.eval(0.5).unwrap();
        mid.check_cone().unwrap();
        for (j, q) in mid.values().iter().enumerate() {
            let pt = cone_lift(q, &p, 0).unwrap();
            let want = (g.chart_start()[j].planar() + g.chart_end()[j].planar()) * 0.5;
            assert!((pt.r - want.norm()).abs() < 1e-12);
        }
        assert!((g.distance() - g.distance_by_cosines()).abs() < 1e-10);
    }

    #[test]
    fn global_branch_beats_neighbours() {
        let p = params(1.0, 1.0);
        let c0 = open(65, |t| V2::new(t, 0.0));
        let c1 = open(65, |t| V2::new((0.9 * t).cos(), (0.9 * t).sin()) * 3.0);
        let g = open_geodesic(&c0, &c1, &p).unwrap();
        let q1 = transforms::r_transform(&c1, &p);
        let w = q1.weights();
        let total = |k: i64| -> f64 {
            let other = chart_points(&q1, 2.0 * PI * k as f64 / opening(&p));
            w.iter()
                .zip(g.chart_start().iter().zip(&other))
                .map(|(w, (x, y))| w * (x.planar() - y.planar()).norm_squared())
                .sum::<f64>()
                .sqrt()
        };
        for k in -branch_range(&p)..=branch_range(&p) {
            assert!(g.distance() <= total(k) + 1e-12);
        }
    }

    #[test]
    fn antipodal_pair_is_degenerate() {
        let p = ElasticParams::srv();
        let c0 = open(33, |t| V2::new(t, 0.0));
        let c1 = open(33, |t| V2::new(-t, 0.0));
        let g = open_geodesic(&c0, &c1, &p).unwrap();
        assert_eq!(g.degenerate_nodes().len(), 33);
        assert!(matches!(
            g.eval(0.5),
            Err(ElasticError::DegenerateInterior { .. })
        ));
        // The lifts are (1, 0) and (−1, 0): the straight path hits 0 at t = ½.
        let q0 = g.endpoints().0.values()[10];
        let q1 = g.endpoints().1.values()[10];
        assert!((q0 + q1).norm() < 1e-12);
    }

    #[test]
    fn zero_velocity_is_stationary() {
        let p = params(2.0, 1.5);
        let c0 = open(65, |t| V2::new(t, (0.5 * t).sin()));
        let c = explicit_exp(&c0, &vec![V2::zeros(); 65], 0.7, &p).unwrap();
        let same = transforms::r_inverse(&transforms::r_transform(&c0, &p), V2::zeros()).unwrap();
        for (x, y) in c.points().iter().zip(same.points()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn shrinking_reaches_apex() {
        for p in [ElasticParams::srv(), params(1.0, 1.0)] {
            let c0 = open(33, |t| V2::new(t, 0.0));
            let u: Vec<V2> = c0.points().iter().map(|x| -x).collect();
            assert!(explicit_exp(&c0, &u, 1.5, &p).is_ok());
            match explicit_exp(&c0, &u, 3.0, &p) {
                Err(ElasticError::ExistenceTimeExceeded { t_max }) => {
                    assert!((t_max - 2.0).abs() < 1e-9)
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn log_then_exp_reaches_target() {
        for p in [ElasticParams::srv(), params(1.0, 1.0), params(2.0, 1.5)] {
            let c0 = open(512, |t| V2::new(t, 0.4 * t.sin()));
            let c1 = open(512, |t| V2::new(1.5 * t, (0.5 * t).sin() - 0.2 * t));
            let u = open_log(&c0, &c1, &p).unwrap();
            let c = explicit_exp(&c0, &u, 1.0, &p).unwrap();
            let shift = c1.points()[0];
            let err = c
                .points()
                .iter()
                .zip(c1.points())
                .map(|(x, y)| (x - (y - shift)).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-4, "{err}");
        }
    }
}
