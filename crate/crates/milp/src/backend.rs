use std::time::Duration;

use thiserror::Error;

use crate::branch;
use crate::model::{Model, Solution};
use crate::scipy::ScipyBackend;

/// Environment variable consulted by [`backend_from_env`].
pub const BACKEND_ENV: &str = "SNDRR_SOLVER";

#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Relative optimality gap at which a MIP solve may stop.
    pub rel_gap: f64,
    pub time_limit: Option<Duration>,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            rel_gap: 1e-6,
            time_limit: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend failed: {0}")]
    Backend(String),
    #[error("unknown solver backend `{0}` (expected `native` or `scipy`)")]
    UnknownBackend(String),
}

pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &Model, params: &SolveParams) -> Result<Solution, SolverError>;
}

/// Built-in bounded simplex with branch-and-bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct NativeBackend;

impl SolverBackend for NativeBackend {
    fn name(&self) -> &'static str {
        "native"
    }

    fn solve(&self, model: &Model, params: &SolveParams) -> Result<Solution, SolverError> {
        if model.is_mip() {
            branch::branch_and_bound(model, params)
        } else {
            branch::solve_lp(model, params)
        }
    }
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn SolverBackend>, SolverError> {
    match name.to_ascii_lowercase().as_str() {
        "native" | "" => Ok(Box::new(NativeBackend)),
        "scipy" | "highs" => Ok(Box::new(ScipyBackend::default())),
        other => Err(SolverError::UnknownBackend(other.to_string())),
    }
}

/// Backend named by `SNDRR_SOLVER`, defaulting to the native one.
pub fn backend_from_env() -> Result<Box<dyn SolverBackend>, SolverError> {
    backend_by_name(&std::env::var(BACKEND_ENV).unwrap_or_default())
}
