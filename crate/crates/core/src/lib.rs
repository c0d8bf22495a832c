//! Elastic shape analysis of plane curves.
//!
//! The crate implements the family of reparameterization invariant elastic
//! metrics
//!
//! ```text
//! G_c(h, h) = ∫ a²⟨D_s h, n⟩² + b²⟨D_s h, v⟩² ds
//! ```
//!
//! on sampled curves, together with the transforms that flatten them,
//! closed-form geodesics for open curves, constrained geodesic shooting for
//! closed curves, and gradient descent over reparameterizations.
//!
//! ```
//! use elastica::{curve::{DiscreteCurve, ElasticParams, Topology}, transforms, V2};
//!
//! let c = DiscreteCurve::from_fn(128, Topology::Closed, |t| V2::new(t.cos(), t.sin())).unwrap();
//! let q = transforms::r_transform(&c, &ElasticParams::srv());
//! assert!((q.l2_norm().powi(2) - c.length()).abs() < 1e-9);
//! ```

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_space;
pub mod config;
pub mod curve;
pub mod error;
pub mod fields;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod open_space;
pub mod reparam;
pub mod selftest;
pub mod shapes;
pub mod transforms;

pub use error::{ElasticError, Result};

pub type V2 = nalgebra::Vector2<f64>;
pub type V3 = nalgebra::Vector3<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/open-curves.md")]
    mod open_curves {}
    #[doc = include_str!("../../../book/src/closed-curves.md")]
    mod closed_curves {}
    #[doc = include_str!("../../../book/src/matching.md")]
    mod matching {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
