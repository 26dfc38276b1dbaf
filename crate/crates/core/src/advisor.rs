//! Cube recommendations from any of the three equity methods.

use serde::Serialize;

use crate::distributions::{JumpDistribution, JumpKind};
use crate::error::{Error, Result};
use crate::exact_solver::{self, DistProfile, EquitySolution, SolverOptions};
use crate::linear_approx::{DecisionPoints, LinearModel};
use crate::nonlinear_approx::NonlinearModel;
use crate::params::{derive_win_loss, CubeOwner, CubeState, GammonProbs, VolatilityPair, WinLossParams};
use crate::Method;

/// Method-specific settings that the linear method ignores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub kind: JumpKind,
    pub buckets: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            kind: JumpKind::DoubleExponential,
            buckets: exact_solver::DEFAULT_BUCKETS,
        }
    }
}

/// Cubeful equities and decision points for one `(W, L, α)` under one method.
#[derive(Debug, Clone)]
pub enum Evaluator {
    Linear(Box<LinearModel>),
    Nonlinear(Box<NonlinearModel>),
    Exact(Box<EquitySolution>),
}

impl Evaluator {
    /// The exact solver takes one jump law per state; when the two
    /// volatilities differ it uses the remote one, which fixes the take and
    /// cash points.
    pub fn new(wl: WinLossParams, vols: VolatilityPair, method: Method, opts: EvalOptions) -> Result<Self> {
        Ok(match method {
            Method::Linear => Evaluator::Linear(Box::new(LinearModel::new(wl, vols)?)),
            Method::Nonlinear => Evaluator::Nonlinear(Box::new(NonlinearModel::new(wl, vols, opts.kind)?)),
            Method::Exact => {
                // A zero volatility is approximated by a very narrow law.
                let alpha = vols.remote.max(1e-6);
                let dist = JumpDistribution::from_volatility(opts.kind, alpha)?;
                let initial = crate::linear_approx::decision_points_linear(wl, vols)?;
                let solver = SolverOptions {
                    initial: Some(initial),
                    ..SolverOptions::with_buckets(opts.buckets)
                };
                Evaluator::Exact(Box::new(exact_solver::solve(wl, &DistProfile::Constant(dist), &solver)?))
            }
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Evaluator::Linear(_) => Method::Linear,
            Evaluator::Nonlinear(_) => Method::Nonlinear,
            Evaluator::Exact(_) => Method::Exact,
        }
    }

    pub fn points(&self) -> Result<DecisionPoints> {
        match self {
            Evaluator::Linear(m) => Ok(m.points),
            Evaluator::Nonlinear(m) => m.decision_points(),
            Evaluator::Exact(s) => Ok(s.points),
        }
    }

    /// Cube-normalized equity with the cube in the given state.
    pub fn equity(&self, cube: CubeOwner, p: f64) -> f64 {
        match self {
            Evaluator::Linear(m) => match cube {
                CubeOwner::Centered => m.centered.value(p),
                CubeOwner::PlayerOwns => m.owned.value(p),
                CubeOwner::OpponentOwns => m.unavailable.value(p),
            },
            Evaluator::Nonlinear(m) => m.eval(cube, p),
            Evaluator::Exact(s) => s.equity(cube, p),
        }
    }

    /// Equity per current cube after the player doubles and is taken:
    /// twice the unavailable equity at the new level.
    pub fn doubled_taken(&self, p: f64) -> f64 {
        2.0 * match self {
            Evaluator::Linear(m) => m.unavailable.value(p),
            Evaluator::Nonlinear(m) => m.unavailable_remote.value(p),
            Evaluator::Exact(s) => s.equity(CubeOwner::OpponentOwns, p),
        }
    }

    /// Equity per current cube after the opponent doubles and the player takes.
    pub fn taken_double(&self, p: f64) -> f64 {
        2.0 * match self {
            Evaluator::Linear(m) => m.owned_remote.value(p),
            Evaluator::Nonlinear(m) => m.owned_remote.value(p),
            Evaluator::Exact(s) => s.equity(CubeOwner::PlayerOwns, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DoublerAction {
    NoDouble,
    Double,
    TooGoodToDouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TakerAction {
    Take,
    Pass,
    NotApplicable,
}

/// Equities of the three lines, per current cube, from the player's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdviceEquities {
    pub no_double: f64,
    pub double_take: f64,
    pub double_pass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeAdvice {
    pub p_win: f64,
    pub cube: CubeState,
    /// `None` when the opponent owns the cube: the player can only respond.
    pub doubler_action: Option<DoublerAction>,
    pub taker_action: TakerAction,
    pub method: Method,
    pub equities: AdviceEquities,
    pub points_used: DecisionPoints,
}

impl CubeAdvice {
    pub fn summary(&self) -> &'static str {
        match (self.doubler_action, self.taker_action) {
            (None, TakerAction::Take) => "take",
            (None, _) => "pass",
            (Some(DoublerAction::Double), TakerAction::Pass) => "double/pass",
            (Some(DoublerAction::Double), _) => "double/take",
            (Some(DoublerAction::TooGoodToDouble), _) => "too good/pass",
            (Some(DoublerAction::NoDouble), _) => "no double",
        }
    }
}

pub fn recommend(g: &GammonProbs, cube: CubeState, vols: VolatilityPair, method: Method) -> Result<CubeAdvice> {
    recommend_with(g, cube, vols, method, EvalOptions::default())
}

pub fn recommend_with(
    g: &GammonProbs,
    cube: CubeState,
    vols: VolatilityPair,
    method: Method,
    opts: EvalOptions,
) -> Result<CubeAdvice> {
    let wl = derive_win_loss(g)?;
    let eval = Evaluator::new(wl, vols, method, opts)?;
    advise(&eval, g.p_win, cube)
}

/// Advice at `p` from a prepared evaluator.
pub fn advise(eval: &Evaluator, p: f64, cube: CubeState) -> Result<CubeAdvice> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DegenerateState(p));
    }
    let pts = eval.points()?;
    let (doubler_action, taker_action, equities) = match cube.owner() {
        CubeOwner::OpponentOwns => {
            // Ties go to the taker.
            let take = p >= pts.tp;
            let equities = AdviceEquities {
                no_double: eval.equity(CubeOwner::OpponentOwns, p),
                double_take: eval.taken_double(p),
                double_pass: -1.0,
            };
            (None, if take { TakerAction::Take } else { TakerAction::Pass }, equities)
        }
        owner => {
            let (double_at, too_good_at) = match owner {
                CubeOwner::Centered => (pts.id_o, pts.tgc_o),
                _ => (pts.rd_o, pts.tg_o),
            };
            let action = if p >= too_good_at {
                DoublerAction::TooGoodToDouble
            } else if p >= double_at {
                DoublerAction::Double
            } else {
                DoublerAction::NoDouble
            };
            let taker = match action {
                DoublerAction::Double if p <= pts.cp => TakerAction::Take,
                DoublerAction::Double => TakerAction::Pass,
                _ => TakerAction::NotApplicable,
            };
            let equities = AdviceEquities {
                no_double: eval.equity(owner, p),
                double_take: eval.doubled_taken(p),
                double_pass: 1.0,
            };
            (Some(action), taker, equities)
        }
    };
    Ok(CubeAdvice {
        p_win: p,
        cube,
        doubler_action,
        taker_action,
        method: eval.method(),
        equities,
        points_used: pts,
    })
}

/// Cubeful equity of the position; per current cube if `normalized`, in
/// points otherwise.
pub fn equity(g: &GammonProbs, cube: CubeState, vols: VolatilityPair, method: Method, normalized: bool) -> Result<f64> {
    equity_with(g, cube, vols, method, normalized, EvalOptions::default())
}

pub fn equity_with(
    g: &GammonProbs,
    cube: CubeState,
    vols: VolatilityPair,
    method: Method,
    normalized: bool,
    opts: EvalOptions,
) -> Result<f64> {
    let wl = derive_win_loss(g)?;
    let eval = Evaluator::new(wl, vols, method, opts)?;
    let e = eval.equity(cube.owner(), g.p_win);
    Ok(if normalized { e } else { e * f64::from(cube.value()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn owned(value: u32) -> CubeState {
        CubeState::new(CubeOwner::PlayerOwns, value).unwrap()
    }

    fn opponent() -> CubeState {
        CubeState::new(CubeOwner::OpponentOwns, 1).unwrap()
    }

    fn linear(p: f64, cube: CubeState, alpha: f64) -> CubeAdvice {
        recommend(&GammonProbs::no_gammons(p), cube, VolatilityPair::constant(alpha).unwrap(), Method::Linear).unwrap()
    }

    #[test]
    fn examples() {
        let a = linear(0.9, owned(1), 0.1);
        assert_eq!(a.doubler_action, Some(DoublerAction::Double));
        assert_eq!(a.taker_action, TakerAction::Pass);
        assert_eq!(a.summary(), "double/pass");
        assert!(a.points_used.cp < 0.9 && a.points_used.tg_o == 1.0);

        let a = linear(0.15, opponent(), 0.1);
        assert_eq!(a.doubler_action, None);
        assert_eq!(a.taker_action, TakerAction::Pass);
        assert_eq!(a.summary(), "pass");

        for alpha in [0.0, 0.05, 0.1, 0.2] {
            let a = linear(0.5, CubeState::centered(), alpha);
            assert_eq!(a.doubler_action, Some(DoublerAction::NoDouble));
            assert_eq!(a.summary(), "no double");
        }
    }

    #[test]
    fn double_implies_doubling_is_better() {
        let vols = VolatilityPair::constant(0.1).unwrap();
        for method in [Method::Linear, Method::Nonlinear] {
            for k in 1..100 {
                let p = k as f64 / 100.0;
                for cube in [CubeState::centered(), owned(2)] {
                    let a = recommend(&GammonProbs::no_gammons(p), cube, vols, method).unwrap();
                    if a.doubler_action == Some(DoublerAction::Double) {
                        let e = &a.equities;
                        assert!(e.double_take.min(e.double_pass) >= e.no_double - 1e-9, "{method:?} {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn taker_threshold_and_tie() {
        let vols = VolatilityPair::constant(0.1).unwrap();
        let eval = Evaluator::new(WinLossParams::unit(), vols, Method::Linear, EvalOptions::default()).unwrap();
        let tp = eval.points().unwrap().tp;
        assert_eq!(advise(&eval, tp, opponent()).unwrap().taker_action, TakerAction::Take);
        assert_eq!(advise(&eval, tp - 1e-9, opponent()).unwrap().taker_action, TakerAction::Pass);
        // At the take point both responses are worth the same.
        let a = advise(&eval, tp, opponent()).unwrap();
        assert_abs_diff_eq!(a.equities.double_take, a.equities.double_pass, epsilon = 1e-9);
        // Take iff the post-double owned equity is at least -1/2.
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let take = advise(&eval, p, opponent()).unwrap().taker_action == TakerAction::Take;
            assert_eq!(take, eval.taken_double(p) / 2.0 >= -0.5);
        }
    }

    #[test]
    fn doubler_actions_are_monotone() {
        let g = |p| GammonProbs {
            p_win: p,
            p_gammon_win: 0.2 * p,
            p_backgammon_win: 0.0,
            p_gammon_loss: 0.1 * (1.0 - p),
            p_backgammon_loss: 0.0,
        };
        let vols = VolatilityPair::new(0.12, 0.09).unwrap();
        for method in [Method::Linear, Method::Nonlinear] {
            for cube in [CubeState::centered(), owned(1)] {
                let mut last = 0;
                for k in 1..200 {
                    let a = recommend(&g(k as f64 / 200.0), cube, vols, method).unwrap();
                    let rank = a.doubler_action.unwrap() as u8;
                    assert!(rank >= last);
                    last = rank;
                }
                assert_eq!(last, DoublerAction::TooGoodToDouble as u8);
            }
        }
    }

    #[test]
    fn equity_values() {
        let vols0 = VolatilityPair::constant(0.0).unwrap();
        let centered2 = CubeState::new(CubeOwner::Centered, 2).unwrap();
        let e = equity(&GammonProbs::no_gammons(0.5), centered2, vols0, Method::Linear, false).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-12);

        let g = GammonProbs {
            p_win: 0.75,
            p_gammon_win: 0.15,
            p_backgammon_win: 0.0,
            p_gammon_loss: 0.025,
            p_backgammon_loss: 0.0,
        };
        let vols = VolatilityPair::constant(0.08).unwrap();
        let opts = EvalOptions {
            buckets: 100,
            ..EvalOptions::default()
        };
        let e = equity_with(&g, owned(4), vols, Method::Exact, true, opts).unwrap();
        let wl = derive_win_loss(&g).unwrap();
        let dist = JumpDistribution::from_volatility(JumpKind::DoubleExponential, 0.08).unwrap();
        let s = exact_solver::solve_constant(wl, dist, 100).unwrap();
        assert_abs_diff_eq!(e, s.equity(CubeOwner::PlayerOwns, 0.75), epsilon = 1e-12);
        let pts = equity_with(&g, owned(4), vols, Method::Exact, false, opts).unwrap();
        assert_abs_diff_eq!(pts, 4.0 * e, epsilon = 1e-12);

        let wl = WinLossParams::new(1.3, 1.2).unwrap();
        for method in [Method::Linear, Method::Nonlinear] {
            let eval = Evaluator::new(wl, vols, method, EvalOptions::default()).unwrap();
            for cube in [CubeOwner::Centered, CubeOwner::PlayerOwns, CubeOwner::OpponentOwns] {
                assert_abs_diff_eq!(eval.equity(cube, 0.0), -1.2, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn methods_agree_away_from_decision_points() {
        let wl = WinLossParams::new(1.3, 1.15).unwrap();
        let opts = EvalOptions {
            buckets: 200,
            ..EvalOptions::default()
        };
        for alpha in [0.05, 0.12] {
            let vols = VolatilityPair::constant(alpha).unwrap();
            let evals: Vec<Evaluator> = [Method::Linear, Method::Nonlinear, Method::Exact]
                .iter()
                .map(|&m| Evaluator::new(wl, vols, m, opts).unwrap())
                .collect();
            for cube in [CubeState::centered(), owned(1), opponent()] {
                for k in 1..200 {
                    let p = k as f64 / 200.0;
                    let advice: Vec<CubeAdvice> = evals.iter().map(|e| advise(e, p, cube).unwrap()).collect();
                    let agree = advice.iter().all(|a| a.summary() == advice[0].summary());
                    if !agree {
                        let near = advice.iter().any(|a| {
                            crate::PointId::ALL.iter().any(|&id| (a.points_used.get(id) - p).abs() <= 0.03)
                        });
                        assert!(near, "alpha {alpha} {cube:?} p {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_probability() {
        let vols = VolatilityPair::constant(0.1).unwrap();
        assert!(recommend(&GammonProbs::no_gammons(1.0), owned(1), vols, Method::Linear).is_err());
    }
}
