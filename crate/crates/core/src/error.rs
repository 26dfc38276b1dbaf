use thiserror::Error;

use crate::linear_approx::DecisionPoints;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate game state: p_win = {0} (must lie strictly inside (0, 1))")]
    DegenerateState(f64),

    #[error("jump volatility {alpha} too large for the linear approximation ({which} denominator = {denominator})")]
    VolatilityTooLarge {
        which: &'static str,
        alpha: f64,
        denominator: f64,
    },

    #[error("boundary system is singular (determinant {determinant:e}, condition estimate {condition:e})")]
    SingularBoundary { determinant: f64, condition: f64 },

    #[error("no sign change bracketing {point} on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    BracketFailure {
        point: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("linear system is singular or ill-conditioned ({0})")]
    SingularSystem(String),

    #[error("decision points out of order: {0}")]
    InvalidOrdering(String),

    #[error("solver did not converge after {iterations} iterations (last point change {last_change:e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        last_points: Box<DecisionPoints>,
    },

    #[error("local volatility weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no trajectory passed the window filter ({trajectories} trajectories, {states} states scanned)")]
    EmptyFilter { trajectories: usize, states: usize },

    #[error("trajectory format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::VolatilityTooLarge { .. }
                | Error::SingularBoundary { .. }
                | Error::BracketFailure { .. }
                | Error::SingularSystem(_)
                | Error::NonConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
