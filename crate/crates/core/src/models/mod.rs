//! Space-time applications: a linear wave-type equation and a KdV-type
//! equation, both discretised by dual-Petrov-Galerkin in space and in time.

pub mod gmres;
pub mod kdv;
pub mod wave;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gmres::{gmres, GmresOutcome};
pub use kdv::{kdv_spatial_operators, solve_kdv, KdvOperators, KdvProblem, KdvSolution, NewtonSettings};
pub use wave::{conditioning, solve_wave, wave_spatial_operator, ConditioningRow, WaveProblem, WaveSolution};

/// Initial profile `x ↦ u_0(x)` in physical coordinates.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Physical interval `(left, right)` mapped affinely onto `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub left: f64,
    pub right: f64,
}

impl Domain {
    pub const fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.left.is_finite() && self.right.is_finite() && self.left < self.right) {
            return Err(Error::InvalidParameter(format!(
                "domain must satisfy x_L < x_R, got ({}, {})",
                self.left, self.right
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length()
    }

    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * (x - self.left) / self.length() - 1.0).clamp(-1.0, 1.0)
    }

    pub fn to_physical(&self, xi: f64) -> f64 {
        self.left + (xi + 1.0) * self.half_length()
    }

    /// `n` equispaced points including both endpoints.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (self.left + self.right)],
            _ => (0..n)
                .map(|i| self.left + self.length() * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}
