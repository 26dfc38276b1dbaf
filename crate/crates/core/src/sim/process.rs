use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::strategy::{DecisionView, Strategy};
use super::trajectory::Trajectory;
use crate::distributions::{JumpDistribution, JumpKind};
use crate::error::{Error, Result};
use crate::params::{CubeOwner, CubeState, WinLossParams};

pub const DEFAULT_CUBE_CAP: u32 = 64;
pub const DEFAULT_MAX_PLIES: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessConfig {
    pub kind: JumpKind,
    /// Expected absolute jump per ply.
    pub alpha_ply: f64,
    pub wl: WinLossParams,
    pub cube_cap: u32,
    pub max_plies: usize,
    /// Per-ply volatility sampled on a uniform grid over `[0, 1]`; replaces
    /// `alpha_ply` when present.
    pub volatility_profile: Option<Vec<f64>>,
}

impl ProcessConfig {
    pub fn new(kind: JumpKind, alpha_ply: f64, wl: WinLossParams) -> Result<Self> {
        let cfg = Self {
            kind,
            alpha_ply,
            wl,
            cube_cap: DEFAULT_CUBE_CAP,
            max_plies: DEFAULT_MAX_PLIES,
            volatility_profile: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_ply >= 0.0 && self.alpha_ply < 0.5) {
            return Err(Error::invalid("alpha_ply", format!("{} outside [0, 0.5)", self.alpha_ply)));
        }
        if self.cube_cap < 2 || !self.cube_cap.is_power_of_two() {
            return Err(Error::invalid("cube_cap", format!("{} is not a power of two >= 2", self.cube_cap)));
        }
        if self.max_plies < 10 {
            return Err(Error::invalid("max_plies", format!("{} < 10", self.max_plies)));
        }
        if let Some(profile) = &self.volatility_profile {
            if profile.len() < 2 || profile.iter().any(|a| !(*a >= 0.0 && *a < 0.5)) {
                return Err(Error::invalid(
                    "volatility_profile",
                    "need at least two values in [0, 0.5)",
                ));
            }
        }
        Ok(())
    }

    pub fn per_ply_distribution(&self) -> Option<JumpDistribution> {
        self.distribution_for(self.alpha_ply)
    }

    fn distribution_for(&self, alpha: f64) -> Option<JumpDistribution> {
        (alpha > 0.0).then(|| JumpDistribution::from_volatility(self.kind, alpha).expect("validated volatility"))
    }

    fn alpha_at(&self, p: f64) -> f64 {
        match &self.volatility_profile {
            None => self.alpha_ply,
            Some(v) => {
                let x = p * (v.len() - 1) as f64;
                let k = (x.floor() as usize).min(v.len() - 2);
                v[k] + (v[k + 1] - v[k]) * (x - k as f64)
            }
        }
    }

    fn jump(&self, fixed: Option<&JumpDistribution>, p: f64, rng: &mut ChaCha8Rng) -> f64 {
        match (&self.volatility_profile, fixed) {
            (None, Some(d)) => d.sample(rng),
            (None, None) => 0.0,
            (Some(_), _) => self.distribution_for(self.alpha_at(p)).map_or(0.0, |d| d.sample(rng)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    /// Points won by side A.
    pub points_a: f64,
    pub truncated: bool,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    A,
    B,
}

/// One game with side A moving first. `P` is A's probability of winning.
pub fn play_game(cfg: &ProcessConfig, a: &dyn Strategy, b: &dyn Strategy, seed: u64) -> GameOutcome {
    run_game(cfg, a, b, seed, Side::A, true)
}

fn run_game(cfg: &ProcessConfig, a: &dyn Strategy, b: &dyn Strategy, seed: u64, first: Side, record: bool) -> GameOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed = cfg.per_ply_distribution();
    let mut p = 0.5;
    let mut value = 1u32;
    let mut owner: Option<Side> = None;
    let mut to_act = first;
    let mut path = record.then(|| vec![p]);

    let finish = |points_a: f64, truncated: bool, path: Option<Vec<f64>>| GameOutcome {
        points_a,
        truncated,
        trajectory: Trajectory {
            game_id: seed,
            p_win: path.unwrap_or_default(),
        },
    };

    for _ in 0..cfg.max_plies {
        let (me, them) = match to_act {
            Side::A => (a, b),
            Side::B => (b, a),
        };
        let my_p = if to_act == Side::A { p } else { 1.0 - p };
        let my_wl = if to_act == Side::A { cfg.wl } else { cfg.wl.swapped() };
        let sign = if to_act == Side::A { 1.0 } else { -1.0 };

        let may_double = owner.is_none_or(|o| o == to_act) && value < cfg.cube_cap;
        if may_double {
            let cube_owner = if owner.is_some() { CubeOwner::PlayerOwns } else { CubeOwner::Centered };
            let view = DecisionView {
                p: my_p,
                wl: my_wl,
                cube: CubeState::new(cube_owner, value).expect("power of two"),
            };
            if me.should_double(&view) {
                let taker_view = DecisionView {
                    p: 1.0 - my_p,
                    wl: my_wl.swapped(),
                    cube: CubeState::new(CubeOwner::OpponentOwns, value).expect("power of two"),
                };
                if !them.should_take(&taker_view) {
                    return finish(sign * f64::from(value), false, path);
                }
                value *= 2;
                owner = Some(if to_act == Side::A { Side::B } else { Side::A });
            }
        }

        p = (p + cfg.jump(fixed.as_ref(), p, &mut rng)).clamp(0.0, 1.0);
        if let Some(path) = path.as_mut() {
            path.push(p);
        }
        if p == 0.0 {
            return finish(-cfg.wl.l() * f64::from(value), false, path);
        }
        if p == 1.0 {
            return finish(cfg.wl.w() * f64::from(value), false, path);
        }
        to_act = if to_act == Side::A { Side::B } else { Side::A };
    }
    let cubeless = p * cfg.wl.w() - (1.0 - p) * cfg.wl.l();
    finish(cubeless * f64::from(value), true, path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuelResult {
    pub games: u64,
    pub mean_ppg: f64,
    /// Absent for a single game.
    pub stderr_ppg: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub truncated: u64,
}

impl DuelResult {
    pub fn truncation_rate(&self) -> f64 {
        self.truncated as f64 / self.games as f64
    }
}

/// Plays `n_games`, game `g` seeded with `seed + g`; A moves first in even
/// games. Results do not depend on the thread count.
pub fn duel(cfg: &ProcessConfig, a: &dyn Strategy, b: &dyn Strategy, n_games: u64, seed: u64) -> Result<DuelResult> {
    let outcomes = duel_outcomes(cfg, a, b, n_games, seed)?;
    let n = n_games as f64;
    let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / n;
    let stderr_ppg = (n_games > 1).then(|| {
        let var = outcomes.iter().map(|o| (o.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    });
    Ok(DuelResult {
        games: n_games,
        mean_ppg: mean,
        stderr_ppg,
        seed,
        truncated: outcomes.iter().filter(|o| o.1).count() as u64,
    })
}

/// Per-game points for A and truncation flags, in game order. Duels run
/// with the same seed share their dice, so paired differences between
/// strategies have far less noise than the separate means.
pub fn duel_outcomes(
    cfg: &ProcessConfig,
    a: &dyn Strategy,
    b: &dyn Strategy,
    n_games: u64,
    seed: u64,
) -> Result<Vec<(f64, bool)>> {
    cfg.validate()?;
    if n_games == 0 {
        return Err(Error::invalid("n_games", "must be at least 1"));
    }
    Ok((0..n_games)
        .into_par_iter()
        .map(|g| {
            let first = if g % 2 == 0 { Side::A } else { Side::B };
            let o = run_game(cfg, a, b, seed.wrapping_add(g), first, false);
            (o.points_a, o.truncated)
        })
        .collect())
}

/// Cube-free paths of the process, for the volatility estimators.
pub fn cubeless_trajectories(cfg: &ProcessConfig, n_games: u64, seed: u64) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let none = super::strategy::Cubeless;
    Ok((0..n_games)
        .into_par_iter()
        .map(|g| run_game(cfg, &none, &none, seed.wrapping_add(g), Side::A, true).trajectory)
        .collect())
}
