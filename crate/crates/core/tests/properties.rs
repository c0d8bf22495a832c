use elastica::curve::{uniform_grid, DiscreteCurve, ElasticParams, Topology};
use elastica::io::{parse_shape_json, ShapeFile};
use elastica::open_space::open_distance;
use elastica::reparam::{compose, flow, CircleDiffeo, CircleField};
use elastica::transforms::{elastic_metric, r_transform};
use elastica::V2;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ElasticParams> {
    (0.2f64..3.0, 0.5f64..2.0).prop_filter_map("4b² ≥ a²", |(a, r)| ElasticParams::new(a, r * a).ok())
}

/// Smooth closed curve: a perturbed ellipse.
fn closed_curve(n: usize) -> impl Strategy<Value = DiscreteCurve> {
    (1.0f64..2.0, 1.0f64..2.0, -0.08f64..0.08, -0.08f64..0.08).prop_map(move |(ax, ay, e, f)| {
        DiscreteCurve::from_fn(n, Topology::Closed, |t| {
            let r = 1.0 + e * (2.0 * t).cos() + f * (3.0 * t).sin();
            V2::new(ax * r * t.cos(), ay * r * t.sin())
        })
        .unwrap()
    })
}

/// Open graph `θ ↦ (θ, y(θ))` with a small smooth `y`.
fn open_curve(n: usize) -> impl Strategy<Value = DiscreteCurve> {
    (-0.3f64..0.3, -0.3f64..0.3, -1.0f64..1.0).prop_map(move |(u, w, y0)| {
        DiscreteCurve::from_fn(n, Topology::Open, |t| V2::new(t, y0 + u * (0.5 * t).sin() + w * t.cos() * 0.3)).unwrap()
    })
}

fn field(n: usize, topology: Topology) -> impl Strategy<Value = Vec<V2>> {
    prop::array::uniform4(-1.0f64..1.0).prop_map(move |k| {
        let f = if topology.is_closed() { 1.0 } else { 0.5 };
        uniform_grid(n, topology)
            .iter()
            .map(|t| V2::new(k[0] * (f * t).cos() + k[1], k[2] * (2.0 * f * t).sin() + k[3] * t.cos()))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_is_quadratic_and_blind_to_translations(
        c in closed_curve(96),
        h in field(96, Topology::Closed),
        lambda in -3.0f64..3.0,
        shift in prop::array::uniform2(-5.0f64..5.0),
        p in params(),
    ) {
        let g = elastic_metric(&c, &h, &h, &p).unwrap();
        prop_assert!(g >= 0.0);
        let scaled: Vec<V2> = h.iter().map(|v| v * lambda).collect();
        let gs = elastic_metric(&c, &scaled, &scaled, &p).unwrap();
        prop_assert!((gs - lambda * lambda * g).abs() <= 1e-10 * (1.0 + g * lambda * lambda));
        let moved: Vec<V2> = h.iter().map(|v| v + V2::new(shift[0], shift[1])).collect();
        let gm = elastic_metric(&c, &moved, &moved, &p).unwrap();
        prop_assert!((gm - g).abs() <= 1e-9 * (1.0 + g));
    }

    #[test]
    fn transform_scales_with_square_root(c in closed_curve(64), rho in 0.05f64..20.0, p in params()) {
        let q = r_transform(&c, &p);
        let qs = r_transform(&c.scaled(rho).unwrap(), &p);
        for (a, b) in q.values().iter().zip(qs.values()) {
            prop_assert!((a * rho.sqrt() - b).norm() <= 1e-12 * rho.sqrt() * (1.0 + a.norm()));
        }
    }

    #[test]
    fn open_distance_is_a_metric(
        c0 in open_curve(64),
        c1 in open_curve(64),
        c2 in open_curve(64),
        p in params(),
    ) {
        let d01 = open_distance(&c0, &c1, &p).unwrap();
        let d10 = open_distance(&c1, &c0, &p).unwrap();
        let d12 = open_distance(&c1, &c2, &p).unwrap();
        let d02 = open_distance(&c0, &c2, &p).unwrap();
        prop_assert!(d01 >= 0.0);
        prop_assert!((d01 - d10).abs() <= 1e-12 * (1.0 + d01));
        prop_assert!(d02 <= d01 + d12 + 1e-12);
        prop_assert!(open_distance(&c0, &c0, &p).unwrap() <= 1e-12);
    }

    #[test]
    fn flows_stay_monotone_and_compose_with_identity(
        k in prop::array::uniform3(-1.0f64..1.0),
        alpha in 0.0f64..2.0,
    ) {
        let grid = uniform_grid(64, Topology::Closed);
        let mu = CircleField::from_fn(&grid, |x| k[0] + k[1] * x.cos() + k[2] * (2.0 * x).sin());
        let phi = flow(&mu, alpha, None).unwrap();
        let v = phi.values();
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(v[v.len() - 1] < v[0] + std::f64::consts::TAU);
        let id = CircleDiffeo::identity(&grid);
        let same = compose(&phi, &id).unwrap();
        for (a, b) in same.values().iter().zip(v) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn shape_files_round_trip(
        pts in prop::collection::vec(prop::array::uniform2(-1e3f64..1e3), 4..40),
        closed in any::<bool>(),
    ) {
        let shape = ShapeFile {
            name: "random".into(),
            topology: if closed { Topology::Closed } else { Topology::Open },
            points: pts,
            grid: None,
        }
        .normalized()
        .unwrap();
        let text = shape.to_json();
        let back = parse_shape_json(&text, "mem").unwrap();
        prop_assert_eq!(&back, &shape);
        prop_assert_eq!(back.to_json(), text);
    }
}
