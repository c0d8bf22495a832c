//! Synthetic test shapes and arc-length resampling.

use std::f64::consts::{PI, TAU};

use crate::curve::{uniform_grid, DiscreteCurve, Topology};
use crate::error::{ElasticError, Result};
use crate::interp::{linear_eval, PeriodicCurveSpline};
use crate::V2;

/// The shapes `synth` knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Circle,
    Ellipse,
    EllipseFold,
    Star,
    Segment,
    Arc,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Circle,
        ShapeKind::Ellipse,
        ShapeKind::EllipseFold,
        ShapeKind::Star,
        ShapeKind::Segment,
        ShapeKind::Arc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::EllipseFold => "ellipse_fold",
            ShapeKind::Star => "star",
            ShapeKind::Segment => "segment",
            ShapeKind::Arc => "arc",
        }
    }

    pub fn topology(self) -> Topology {
        match self {
            ShapeKind::Segment | ShapeKind::Arc => Topology::Open,
            _ => Topology::Closed,
        }
    }

    /// The shape with default parameters.
    pub fn sample(self, n: usize) -> Result<DiscreteCurve> {
        match self {
            ShapeKind::Circle => circle(n, 1.0),
            ShapeKind::Ellipse => ellipse(n, 2.0, 1.0),
            ShapeKind::EllipseFold => ellipse_fold(n, 0.8),
            ShapeKind::Star => star(n, 5, 0.3),
            ShapeKind::Segment => segment(n),
            ShapeKind::Arc => arc(n, PI),
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = ElasticError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ElasticError::Parse {
                location: "shape kind".into(),
                message: format!("unknown shape `{s}`"),
            })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(ElasticError::TooFewNodes(n));
    }
    Ok(())
}

pub fn circle(n: usize, r: f64) -> Result<DiscreteCurve> {
    check_n(n)?;
    DiscreteCurve::from_fn(n, Topology::Closed, |t| V2::new(r * t.cos(), r * t.sin()))
}

pub fn ellipse(n: usize, ax: f64, ay: f64) -> Result<DiscreteCurve> {
    check_n(n)?;
    DiscreteCurve::from_fn(n, Topology::Closed, |t| V2::new(ax * t.cos(), ay * t.sin()))
}

/// The ellipse with semi-axes 2 and 1, pushed inwards at the top by a
/// Gaussian bump of height `depth` (relative to the minor axis) along the
/// normal.
pub fn ellipse_fold(n: usize, depth: f64) -> Result<DiscreteCurve> {
    check_n(n)?;
    if !(0.0..1.0).contains(&depth) {
        return Err(ElasticError::Parse {
            location: "ellipse_fold".into(),
            message: format!("depth must lie in [0, 1), got {depth}"),
        });
    }
    let width = 0.2;
    DiscreteCurve::from_fn(n, Topology::Closed, |t| {
        let e = V2::new(2.0 * t.cos(), t.sin());
        let de = V2::new(-2.0 * t.sin(), t.cos());
        let outward = V2::new(de.y, -de.x) / de.norm();
        let s = crate::curve::wrap_angle(t - PI / 2.0);
        let g = (-0.5 * (s / width).powi(2)).exp();
        e - outward * (depth * g)
    })
}

/// A star with `arms` lobes: radius `1 + amp·cos(arms·t)`.
pub fn star(n: usize, arms: u32, amp: f64) -> Result<DiscreteCurve> {
    check_n(n)?;
    DiscreteCurve::from_fn(n, Topology::Closed, |t| {
        let r = 1.0 + amp * (arms as f64 * t).cos();
        V2::new(r * t.cos(), r * t.sin())
    })
}

/// The segment `θ ↦ (θ, 0)`.
pub fn segment(n: usize) -> Result<DiscreteCurve> {
    check_n(n)?;
    DiscreteCurve::from_fn(n, Topology::Open, |t| V2::new(t, 0.0))
}

/// A unit-radius circular arc of the given opening angle.
pub fn arc(n: usize, angle: f64) -> Result<DiscreteCurve> {
    check_n(n)?;
    DiscreteCurve::from_fn(n, Topology::Open, |t| {
        let s = angle * t / TAU;
        V2::new(s.cos(), s.sin())
    })
}

/// Resamples `c` at constant speed on a uniform grid with the same number
/// of nodes.
///
/// Closed curves are interpolated with a periodic cubic spline and their
/// length measured on a 16× finer sampling of it; open curves are treated
/// as polygons.
pub fn arclength_reparam(c: &DiscreteCurve) -> Result<DiscreteCurve> {
    let n = c.len();
    let grid = uniform_grid(n, c.topology());
    match c.topology() {
        Topology::Closed => {
            let spline = PeriodicCurveSpline::new(c.grid(), c.points())?;
            let m = 16 * n;
            let t0 = c.grid()[0];
            let ts: Vec<f64> = (0..=m).map(|k| t0 + TAU * k as f64 / m as f64).collect();
            let mut cum = vec![0.0; m + 1];
            for k in 1..=m {
                cum[k] = cum[k - 1] + (spline.eval(ts[k]) - spline.eval(ts[k - 1])).norm();
            }
            let total = cum[m];
            let pts = grid
                .iter()
                .map(|g| {
                    let s = g / TAU * total;
                    let t = linear_eval(&cum, &ts, s, Topology::Open);
                    spline.eval(t)
                })
                .collect();
            DiscreteCurve::new(pts, grid, Topology::Closed)
        }
        Topology::Open => {
            let x = c.points();
            let mut cum = vec![0.0; n];
            for k in 1..n {
                cum[k] = cum[k - 1] + (x[k] - x[k - 1]).norm();
            }
            let total = cum[n - 1];
            let pts = grid
                .iter()
                .map(|g| linear_eval(&cum, x, g / TAU * total, Topology::Open))
                .collect();
            DiscreteCurve::new(pts, grid, Topology::Open)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_points_on_unit_circle() {
        let c = circle(300, 1.0).unwrap();
        assert_eq!(c.len(), 300);
        assert!(c.points().iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn fold_is_regular_with_one_dent() {
        let c = ellipse_fold(512, 0.8).unwrap();
        let min_speed = c.speed().into_iter().fold(f64::INFINITY, f64::min);
        assert!(min_speed > 0.1, "{min_speed}");
        let top = c.points()[128];
        assert!((top.y - 0.2).abs() < 1e-12);
        // Turning number stays 1: the dent does not create a loop.
        assert_eq!(c.frame().turning_number, 1);
    }

    #[test]
    fn segment_spans_the_parameter_interval() {
        let s = segment(100).unwrap();
        assert_eq!(s.topology(), Topology::Open);
        assert_eq!(s.points()[0], V2::zeros());
        assert!((s.points()[99].x - TAU).abs() < 1e-12);
    }

    #[test]
    fn arclength_gives_constant_speed() {
        let c = ellipse(256, 2.0, 1.0).unwrap();
        let r = arclength_reparam(&c).unwrap();
        let sp = r.speed();
        let mean = sp.iter().sum::<f64>() / sp.len() as f64;
        assert!(sp.iter().all(|s| (s / mean - 1.0).abs() < 1e-3));
        assert!((r.length() - c.length()).abs() < 1e-3 * c.length());
        let o = arclength_reparam(&arc(64, 2.0).unwrap()).unwrap();
        let sp = o.speed();
        assert!(sp.iter().all(|s| (s - sp[0]).abs() < 1e-2 * sp[0]));
    }

    #[test]
    fn kinds_parse_by_name() {
        for k in ShapeKind::ALL {
            assert_eq!(k.name().parse::<ShapeKind>().unwrap(), k);
            assert_eq!(k.sample(32).unwrap().topology(), k.topology());
        }
        assert!("blob".parse::<ShapeKind>().is_err());
    }
}
