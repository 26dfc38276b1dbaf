use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::advisor::{advise, DoublerAction, EvalOptions, Evaluator, TakerAction};
use crate::params::{scale_statistical_volatility, CubeState, VolatilityPair, WinLossParams};
use crate::Method;

/// The position as seen by the side making a cube decision. When deciding a
/// take, `cube` is owned by the doubler at its pre-double value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionView {
    pub p: f64,
    pub wl: WinLossParams,
    pub cube: CubeState,
}

pub trait Strategy: Send + Sync {
    fn name(&self) -> String;
    fn should_double(&self, view: &DecisionView) -> bool;
    fn should_take(&self, view: &DecisionView) -> bool;
}

/// Never doubles, always takes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cubeless;

impl Strategy for Cubeless {
    fn name(&self) -> String {
        "none".into()
    }

    fn should_double(&self, _: &DecisionView) -> bool {
        false
    }

    fn should_take(&self, _: &DecisionView) -> bool {
        true
    }
}

/// Plays the jump model's decision points for an assumed constant round
/// volatility.
#[derive(Debug)]
pub struct JumpStrategy {
    alpha: f64,
    method: Method,
    opts: EvalOptions,
    cache: RwLock<HashMap<(u64, u64), Arc<Evaluator>>>,
}

impl JumpStrategy {
    pub fn new(alpha: f64, method: Method) -> Self {
        Self::with_options(alpha, method, EvalOptions::default())
    }

    pub fn with_options(alpha: f64, method: Method, opts: EvalOptions) -> Self {
        Self {
            alpha,
            method,
            opts,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// From a statistically estimated volatility; the linear method needs it
    /// inflated first.
    pub fn from_statistical(alpha_stat: f64, method: Method) -> Self {
        let alpha = match method {
            Method::Linear => scale_statistical_volatility(alpha_stat),
            _ => alpha_stat,
        };
        Self::new(alpha, method)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn evaluator(&self, wl: WinLossParams) -> Arc<Evaluator> {
        let key = (wl.w().to_bits(), wl.l().to_bits());
        if let Some(e) = self.cache.read().expect("cache lock").get(&key) {
            return e.clone();
        }
        let vols = VolatilityPair::constant(self.alpha).expect("strategy volatility in range");
        let eval = Arc::new(Evaluator::new(wl, vols, self.method, self.opts).expect("jump model solvable"));
        self.cache.write().expect("cache lock").entry(key).or_insert(eval).clone()
    }
}

impl Strategy for JumpStrategy {
    fn name(&self) -> String {
        format!("jump-{:?}-{}", self.method, self.alpha).to_lowercase()
    }

    fn should_double(&self, view: &DecisionView) -> bool {
        let advice = advise(&self.evaluator(view.wl), view.p, view.cube).expect("interior probability");
        advice.doubler_action == Some(DoublerAction::Double)
    }

    fn should_take(&self, view: &DecisionView) -> bool {
        let advice = advise(&self.evaluator(view.wl), view.p, view.cube).expect("interior probability");
        advice.taker_action == TakerAction::Take
    }
}
