//! Local optimizers and the gate-synthesis drivers built on them.
//!
//! [`minimize_quasi_newton`] is an L-BFGS method with a backtracking
//! sufficient-decrease line search; [`minimize_derivative_free`] is a
//! Nelder-Mead simplex with projection onto a box. [`vqgo`] runs multistart
//! angle optimization for a fixed source-gate set and
//! [`concatenated_optimize`] wraps it in an outer search over drive amplitudes.

mod lbfgs;
mod nelder_mead;
mod vqgo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lbfgs::minimize_quasi_newton;
pub use nelder_mead::minimize_derivative_free;
pub use vqgo::{
    concatenated_optimize, vqgo, vqgo_with_start, ConcatenatedConfig, ConcatenatedResult, OptimizationResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub cost_tolerance: f64,
    pub restarts: usize,
    /// Number of curvature pairs kept by L-BFGS.
    pub memory_depth: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            gradient_tolerance: 1e-9,
            cost_tolerance: 1e-12,
            restarts: 8,
            memory_depth: 10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.max_iterations > 0
            && self.restarts > 0
            && self.memory_depth > 0
            && self.gradient_tolerance > 0.0
            && self.cost_tolerance > 0.0;
        if !positive || !self.gradient_tolerance.is_finite() || !self.cost_tolerance.is_finite() {
            return Err(Error::InvalidInput(format!("optimizer settings must be positive and finite: {self:?}")));
        }
        Ok(())
    }
}

/// Box constraint on drive amplitudes, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for AmplitudeBounds {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 200.0,
        }
    }
}

impl AmplitudeBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower >= 0.0 && self.lower < self.upper) {
            return Err(Error::InvalidInput(format!(
                "amplitude bounds need 0 <= lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn to_box(&self, dim: usize) -> BoxBounds {
        BoxBounds {
            lower: vec![self.lower; dim],
            upper: vec![self.upper; dim],
        }
    }
}

/// Per-coordinate box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                actual: self.upper.len(),
            });
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidInput(format!("invalid box side [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    }
}

/// Why a local optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    CostTolerance,
    MaxIterations,
    /// No step along any tried direction decreased the cost.
    LineSearchStalled,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::GradientTolerance | Termination::CostTolerance)
    }
}

/// Result of a single local minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Cost at the start point followed by the cost after each accepted step.
    pub cost_history: Vec<f64>,
}

impl MinimizeOutcome {
    pub fn converged(&self) -> bool {
        self.termination.is_converged()
    }
}

fn check_finite(cost: f64, grad: Option<&[f64]>) -> Result<()> {
    if !cost.is_finite() {
        return Err(Error::NonFinite(format!("cost evaluated to {cost}")));
    }
    if let Some(g) = grad {
        if let Some((i, v)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient component {i} evaluated to {v}")));
        }
    }
    Ok(())
}
