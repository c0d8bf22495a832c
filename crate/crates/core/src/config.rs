//! Run configuration shared by the command line and the self-test.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::closed_space::ShootingOptions;
use crate::curve::ElasticParams;
use crate::error::{ElasticError, Result};
use crate::reparam::MatchOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub a: f64,
    pub b: f64,
    /// Time steps of a closed-curve geodesic.
    pub steps: usize,
    pub tol_f: f64,
    /// Absolute boundary value tolerance; unset means the solver default.
    pub eps_bvp: Option<f64>,
    pub bvp_rel: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    pub max_outer: usize,
    pub refine: bool,
    pub refine_cap: usize,
    pub arclen: bool,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = ShootingOptions::default();
        let m = MatchOptions::default();
        Self {
            a: 1.0,
            b: 0.5,
            steps: s.steps,
            tol_f: s.tol_f,
            eps_bvp: s.eps_bvp,
            bvp_rel: m.bvp_rel,
            tol_rel: m.tol_rel,
            max_iter: s.max_iter,
            newton_max_iter: s.newton_max_iter,
            max_outer: m.max_outer,
            refine: m.refine,
            refine_cap: m.refine_cap,
            arclen: false,
            out: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ElasticParams::new(self.a, self.b)?;
        let positive = [
            ("tol-f", self.tol_f),
            ("eps-bvp", self.eps_bvp.unwrap_or(1.0)),
            ("bvp-rel", self.bvp_rel),
            ("tol-rel", self.tol_rel),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(ElasticError::InvalidConfig(format!("{name} must be positive, got {v}")));
        }
        if self.steps == 0 || self.max_iter == 0 || self.newton_max_iter == 0 {
            return Err(ElasticError::InvalidConfig(
                "step and iteration counts must be positive".into(),
            ));
        }
        if self.refine_cap < 1 {
            return Err(ElasticError::InvalidConfig("refinement cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ElasticParams> {
        ElasticParams::new(self.a, self.b)
    }

    pub fn shooting(&self) -> ShootingOptions {
        ShootingOptions {
            steps: self.steps,
            tol_f: self.tol_f,
            newton_max_iter: self.newton_max_iter,
            eps_bvp: self.eps_bvp,
            max_iter: self.max_iter,
        }
    }

    pub fn matching(&self) -> MatchOptions {
        MatchOptions {
            shooting: self.shooting(),
            bvp_rel: self.bvp_rel,
            tol_rel: self.tol_rel,
            max_outer: self.max_outer,
            refine: self.refine,
            refine_cap: self.refine_cap,
            ..MatchOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_map() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.shooting(), ShootingOptions::default());
        assert_eq!(c.matching(), MatchOptions::default());
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            RunConfig { tol_f: 0.0, ..Default::default() },
            RunConfig { eps_bvp: Some(-1.0), ..Default::default() },
            RunConfig { a: 2.0, b: 0.5, ..Default::default() },
            RunConfig { steps: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
