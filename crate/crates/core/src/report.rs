//! Paired raw/rearranged estimates and the decision rule shared by every
//! comparison.

use serde::{Deserialize, Serialize};

/// A value with its Monte Carlo standard error (zero for deterministic values).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }

    pub fn new(value: f64, std_error: f64) -> Self {
        Self { value, std_error }
    }

    /// `|self - target| <= k` standard errors.
    pub fn within_se(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }

    pub fn within_rel(&self, target: f64, rel: f64) -> bool {
        (self.value - target).abs() <= rel * target.abs()
    }
}

/// One side-by-side comparison. `margin` is oriented so that the inequality
/// under test reads `margin >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub raw: Estimate,
    pub rearranged: Estimate,
    pub margin: f64,
    /// Standard error of the margin (paired when both sides share paths).
    pub margin_se: f64,
    /// Deterministic allowance for discretization error.
    pub allowance: f64,
    /// Number of standard errors tolerated.
    pub z: f64,
    pub holds: bool,
    pub seed: Option<u64>,
}

impl ComparisonReport {
    pub fn new(raw: Estimate, rearranged: Estimate, margin: f64, margin_se: f64, allowance: f64, z: f64) -> Self {
        let holds = margin >= -(z * margin_se + allowance);
        Self { raw, rearranged, margin, margin_se, allowance, z, holds, seed: None }
    }

    /// Deterministic comparison `margin >= -allowance`.
    pub fn deterministic(raw: f64, rearranged: f64, margin: f64, allowance: f64) -> Self {
        Self::new(Estimate::exact(raw), Estimate::exact(rearranged), margin, 0.0, allowance, 0.0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// `|margin| <= k` margin standard errors, with no allowance.
    pub fn margin_within(&self, k: f64) -> bool {
        self.margin.abs() <= k * self.margin_se
    }
}
