//! Synthetic money games on a jump process, strategy duels, and the
//! volatility estimators that can be run on simulated or imported paths.

mod estimate;
mod process;
mod strategy;
mod trajectory;

pub use estimate::{
    estimate_local_volatility, estimate_remote_volatility, roll_pair_weight, roll_pair_weights, LocalVolatility,
    RemoteVolatility, Window, HIGH_WINDOW, LOW_WINDOW,
};
pub use process::{cubeless_trajectories, duel, duel_outcomes, play_game, DuelResult, GameOutcome, ProcessConfig};
pub use strategy::{Cubeless, DecisionView, JumpStrategy, Strategy};
pub use trajectory::{read_trajectories, write_trajectories, Trajectory};
