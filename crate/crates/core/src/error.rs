use thiserror::Error;

use crate::interval::Interval;

/// Errors raised by mean evaluation, iteration and the analyses built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanError {
    #[error("point ({x}, {y}) lies outside the domain {domain}")]
    OutsideDomain { x: f64, y: f64, domain: Interval },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mapping domain {domain} is not contained in the domain of {mean}")]
    IncompatibleDomain { mean: String, domain: Interval },

    #[error("sample is empty")]
    EmptySample,

    #[error("operation requires x != y, got x = y = {0}")]
    DiagonalPoint(f64),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("contraction constant must lie in [0, 1), got {0}")]
    InvalidContraction(f64),

    #[error("non-convergent, gap={gap}")]
    NonConvergent { gap: f64, period: usize },

    #[error("undecided after {iterations} iterations, gap={gap}")]
    Undecided { gap: f64, iterations: usize },

    #[error("root not bracketed on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NotBracketed { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("bisection did not reach tolerance within {iterations} iterations (residual {residual})")]
    RootNotConverged { iterations: usize, residual: f64 },

    #[error("{property} violated at ({x}, {y})")]
    AssumptionViolated {
        property: &'static str,
        x: f64,
        y: f64,
    },

    #[error("evaluation failed at ({x}, {y}): {source}")]
    AtPoint {
        x: f64,
        y: f64,
        #[source]
        source: Box<MeanError>,
    },

    #[error("table mean: {0}")]
    Table(String),
}

impl MeanError {
    pub(crate) fn at(self, x: f64, y: f64) -> Self {
        match self {
            e @ MeanError::AtPoint { .. } => e,
            e => MeanError::AtPoint {
                x,
                y,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = MeanError> = std::result::Result<T, E>;
