use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.5;

/// Deliberate faults for mutation-testing the invariant checks.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Raise every updated supply dual one unit too far.
    DualUpdateOffByOne,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    /// Additive error target per unit of supply.
    pub delta: f64,
    /// Share of `delta` spent on mass scaling; the solver gets `(1 - epsilon) * delta`.
    pub epsilon: f64,
    /// Run the full invariant scans after every phase.
    pub debug_assertions: bool,
    pub seed: u64,
    #[doc(hidden)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl SolveConfig {
    pub fn new(delta: f64) -> Result<Self> {
        let cfg = SolveConfig {
            delta,
            epsilon: DEFAULT_EPSILON,
            debug_assertions: false,
            seed: 0,
            fault: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_debug_assertions(mut self, on: bool) -> Self {
        self.debug_assertions = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `δ′ = (1 − ε)δ`, the error budget of the integer solver.
    pub fn delta_prime(&self) -> f64 {
        (1.0 - self.epsilon) * self.delta
    }
}
