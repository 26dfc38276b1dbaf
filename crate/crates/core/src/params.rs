//! Game-state parametrization shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio of the best constant volatility for the linear approximation to the
/// best one for the nonlinear approximation, as measured in bot self-play.
pub const STATISTICAL_VOLATILITY_SCALE: f64 = 11.3 / 9.1;

/// Cubeless outcome probabilities. Gammon probabilities include backgammons.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GammonProbs {
    pub p_win: f64,
    pub p_gammon_win: f64,
    pub p_backgammon_win: f64,
    pub p_gammon_loss: f64,
    pub p_backgammon_loss: f64,
}

impl GammonProbs {
    pub fn no_gammons(p_win: f64) -> Self {
        Self {
            p_win,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("p_win", self.p_win),
            ("p_gammon_win", self.p_gammon_win),
            ("p_backgammon_win", self.p_backgammon_win),
            ("p_gammon_loss", self.p_gammon_loss),
            ("p_backgammon_loss", self.p_backgammon_loss),
        ];
        for (name, p) in all {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, format!("{p} is not a probability")));
            }
        }
        if self.p_backgammon_win > self.p_gammon_win || self.p_gammon_win > self.p_win {
            return Err(Error::invalid(
                "p_gammon_win",
                "need p_backgammon_win <= p_gammon_win <= p_win",
            ));
        }
        if self.p_backgammon_loss > self.p_gammon_loss || self.p_gammon_loss > 1.0 - self.p_win {
            return Err(Error::invalid(
                "p_gammon_loss",
                "need p_backgammon_loss <= p_gammon_loss <= 1 - p_win",
            ));
        }
        Ok(())
    }

    /// Opponent's view of the same position.
    pub fn reflected(&self) -> Self {
        Self {
            p_win: 1.0 - self.p_win,
            p_gammon_win: self.p_gammon_loss,
            p_backgammon_win: self.p_backgammon_loss,
            p_gammon_loss: self.p_gammon_win,
            p_backgammon_loss: self.p_backgammon_win,
        }
    }
}

/// Expected points won given a win (`w`) and lost given a loss (`l`), held
/// constant as the win probability moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinLossParams {
    w: f64,
    l: f64,
}

impl WinLossParams {
    pub fn new(w: f64, l: f64) -> Result<Self> {
        for (name, v) in [("w", w), ("l", l)] {
            if !(1.0..=3.0).contains(&v) {
                return Err(Error::invalid(name, format!("{v} outside [1, 3]")));
            }
        }
        Ok(Self { w, l })
    }

    /// No gammons: one point either way.
    pub fn unit() -> Self {
        Self { w: 1.0, l: 1.0 }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// `W + L + 1/2`, the slope of the live-cube equity away from the cube points.
    pub fn live_slope(&self) -> f64 {
        self.w + self.l + 0.5
    }

    /// The opponent's parameters.
    pub fn swapped(&self) -> Self {
        Self {
            w: self.l,
            l: self.w,
        }
    }
}

pub fn derive_win_loss(g: &GammonProbs) -> Result<WinLossParams> {
    g.validate()?;
    let p = g.p_win;
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::DegenerateState(p));
    }
    let w = (p + g.p_gammon_win + g.p_backgammon_win) / p;
    let l = (1.0 - p + g.p_gammon_loss + g.p_backgammon_loss) / (1.0 - p);
    WinLossParams::new(w, l)
}

/// Volatilities feeding the linear approximation must be inflated from their
/// statistical estimates by this factor; apply exactly once.
pub fn scale_statistical_volatility(alpha_stat: f64) -> f64 {
    alpha_stat * STATISTICAL_VOLATILITY_SCALE
}

/// Expected absolute jump in win probability per full round, at the current
/// state (`local`) and after a reversal of fortune (`remote`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityPair {
    pub local: f64,
    pub remote: f64,
}

impl VolatilityPair {
    pub fn new(local: f64, remote: f64) -> Result<Self> {
        for (name, v) in [("alpha_local", local), ("alpha_remote", remote)] {
            if !(0.0..0.5).contains(&v) {
                return Err(Error::invalid(name, format!("{v} outside [0, 0.5)")));
            }
        }
        Ok(Self { local, remote })
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }

    pub fn is_constant(&self) -> bool {
        self.local == self.remote
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubeOwner {
    Centered,
    PlayerOwns,
    OpponentOwns,
}

impl std::str::FromStr for CubeOwner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" | "center" => Ok(CubeOwner::Centered),
            "owned" | "player" | "player-owns" => Ok(CubeOwner::PlayerOwns),
            "opponent" | "unavailable" | "opponent-owns" => Ok(CubeOwner::OpponentOwns),
            other => Err(Error::invalid("cube", format!("unknown cube state `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeState {
    owner: CubeOwner,
    value: u32,
}

impl CubeState {
    pub fn new(owner: CubeOwner, value: u32) -> Result<Self> {
        if !value.is_power_of_two() {
            return Err(Error::invalid("cube value", format!("{value} is not a power of two")));
        }
        Ok(Self { owner, value })
    }

    pub fn centered() -> Self {
        Self {
            owner: CubeOwner::Centered,
            value: 1,
        }
    }

    pub fn owner(&self) -> CubeOwner {
        self.owner
    }

    pub fn value(&self) -> u32 {
        self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn probs(p: f64, gw: f64, bw: f64, gl: f64, bl: f64) -> GammonProbs {
        GammonProbs {
            p_win: p,
            p_gammon_win: gw,
            p_backgammon_win: bw,
            p_gammon_loss: gl,
            p_backgammon_loss: bl,
        }
    }

    #[test]
    fn win_loss_examples() {
        let wl = derive_win_loss(&GammonProbs::no_gammons(0.5)).unwrap();
        assert_eq!((wl.w(), wl.l()), (1.0, 1.0));

        let wl = derive_win_loss(&probs(0.5, 0.15, 0.01, 0.12, 0.01)).unwrap();
        assert_abs_diff_eq!(wl.w(), 1.32, epsilon = 1e-12);
        assert_abs_diff_eq!(wl.l(), 1.26, epsilon = 1e-12);

        // Typical opening: about 27% of games are gammons either way.
        let wl = derive_win_loss(&probs(0.5, 0.13, 0.005, 0.13, 0.005)).unwrap();
        assert_abs_diff_eq!(wl.w(), 1.27, epsilon = 1e-12);
        assert_abs_diff_eq!(wl.l(), 1.27, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert!(matches!(
            derive_win_loss(&GammonProbs::no_gammons(1.0)),
            Err(Error::DegenerateState(_))
        ));
        assert!(matches!(
            derive_win_loss(&GammonProbs::no_gammons(0.0)),
            Err(Error::DegenerateState(_))
        ));
        assert!(derive_win_loss(&probs(0.5, 0.6, 0.0, 0.0, 0.0)).is_err());
        assert!(derive_win_loss(&probs(0.5, 0.1, 0.2, 0.0, 0.0)).is_err());
        assert!(WinLossParams::new(0.9, 1.0).is_err());
        assert!(VolatilityPair::new(0.5, 0.1).is_err());
        assert!(CubeState::new(CubeOwner::Centered, 3).is_err());
        assert!(CubeState::new(CubeOwner::Centered, 8).is_ok());
    }

    #[test]
    fn statistical_scaling() {
        assert_abs_diff_eq!(scale_statistical_volatility(0.091), 0.113, epsilon = 1e-15);
        assert_eq!(scale_statistical_volatility(0.0), 0.0);
        assert_abs_diff_eq!(scale_statistical_volatility(0.094), 0.116_725_274_7, epsilon = 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn gammon_probs() -> impl Strategy<Value = GammonProbs> {
            (0.05f64..0.95, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(
                |(p, a, b, c, d)| {
                    let gw = p * a * 0.9;
                    let gl = (1.0 - p) * c * 0.9;
                    probs(p, gw, gw * b, gl, gl * d)
                },
            )
        }

        proptest! {
            #[test]
            fn more_gammons_never_lower_w(g in gammon_probs(), extra in 0.0f64..0.05) {
                let base = derive_win_loss(&g).unwrap();
                let mut more = g;
                more.p_gammon_win = (g.p_gammon_win + extra).min(g.p_win);
                let bumped = derive_win_loss(&more).unwrap();
                prop_assert!(bumped.w() >= base.w());
            }

            #[test]
            fn reflection_swaps_w_and_l(g in gammon_probs()) {
                let a = derive_win_loss(&g).unwrap();
                let b = derive_win_loss(&g.reflected()).unwrap();
                prop_assert!((a.w() - b.l()).abs() < 1e-12);
                prop_assert!((a.l() - b.w()).abs() < 1e-12);
            }
        }
    }
}
