//! Cubeful equities and cube decision points for backgammon money games when
//! the cubeless win probability evolves by random jumps.
//!
//! Three solution methods share one parametrization ([`params`]):
//!
//! - [`linear_approx`]: closed-form piecewise-linear equities;
//! - [`nonlinear_approx`]: one more pass of the jump integral over the linear
//!   equities, with closed-form `F`/`G` terms;
//! - [`exact_solver`]: discretized integral equations solved as a dense
//!   linear system, iterating on the decision points.
//!
//! [`advisor`] turns any of them into cube actions, [`janowski`] maps the
//! model onto cube-life indexes, and [`sim`] plays synthetic money games.

pub mod advisor;
pub mod distributions;
pub mod error;
pub mod exact_solver;
pub mod janowski;
pub mod linear_approx;
pub mod nonlinear_approx;
pub mod params;
pub mod sim;

pub use distributions::{JumpDistribution, JumpKind};
pub use error::{Error, Result};
pub use linear_approx::{DecisionPoints, LinearModel, PiecewiseLinearEquity, PointId};
pub use params::{CubeOwner, CubeState, GammonProbs, VolatilityPair, WinLossParams};

/// Solution method for equities and decision points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Nonlinear,
    Exact,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Method::Linear),
            "nonlinear" => Ok(Method::Nonlinear),
            "exact" => Ok(Method::Exact),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("unknown method `{other}`"),
            }),
        }
    }
}
