use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::method::Method;

pub const GRID_POINTS: usize = 18;
pub const GRID_MIN: f64 = 1e-3;
pub const GRID_MAX: f64 = 1e5;

/// 18 log-uniform values from 1e-3 to 1e5 inclusive.
pub fn default_lambda_grid() -> Vec<f64> {
    let (lo, hi) = (GRID_MIN.log10(), GRID_MAX.log10());
    (0..GRID_POINTS)
        .map(|k| {
            if k == 0 {
                GRID_MIN
            } else if k == GRID_POINTS - 1 {
                GRID_MAX
            } else {
                10f64.powf(lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    /// Fixed L1 weight; `None` selects it over `lambda_grid` by leave-one-phoneme-out.
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub oasis_aggressiveness: f64,
    pub oasis_iterations: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::LsDiag,
            lambda: None,
            lambda_grid: default_lambda_grid(),
            oasis_aggressiveness: 0.1,
            oasis_iterations: 100_000,
            seed: 1,
            tolerance: 1e-10,
            max_sweeps: 10_000,
        }
    }
}

impl SolverConfig {
    pub fn for_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda: Some(lambda), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return bad(format!("lambda must be finite and >= 0, got {l}"));
            }
        }
        if self.lambda_grid.is_empty() {
            return bad("lambda grid is empty".into());
        }
        if self.lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return bad("lambda grid values must be positive".into());
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lambda grid must be strictly increasing".into());
        }
        if !(self.oasis_aggressiveness > 0.0 && self.oasis_aggressiveness.is_finite()) {
            return bad("OASIS aggressiveness must be positive".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive".into());
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be positive".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
