use serde::Serialize;

use super::trajectory::Trajectory;
use crate::error::{Error, Result};

/// Closed range of win probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn contains(&self, p: f64) -> bool {
        (self.lo..=self.hi).contains(&p)
    }
}

pub const LOW_WINDOW: Window = Window { lo: 0.20, hi: 0.35 };
pub const HIGH_WINDOW: Window = Window { lo: 0.65, hi: 0.80 };

/// Probability of a specific pair of consecutive rolls, one per player.
pub fn roll_pair_weight(first_is_double: bool, second_is_double: bool) -> f64 {
    match (first_is_double, second_is_double) {
        (true, true) => 1.0 / 1296.0,
        (false, false) => 1.0 / 324.0,
        _ => 1.0 / 648.0,
    }
}

/// Weights of all 441 distinct roll pairs (21 rolls each).
pub fn roll_pair_weights() -> Vec<f64> {
    let rolls: Vec<bool> = (1..=6).flat_map(|a| (a..=6).map(move |b| a == b)).collect();
    let weights: Vec<f64> = rolls
        .iter()
        .flat_map(|&x| rolls.iter().map(move |&y| roll_pair_weight(x, y)))
        .collect();
    debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    weights
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalVolatility {
    /// Weighted standard deviation of the outcomes.
    pub sigma_j: f64,
    /// Weighted mean; not assumed equal to the starting probability.
    pub p_a: f64,
}

/// From `(weight, P after two plies)` pairs covering every roll sequence.
pub fn estimate_local_volatility(outcomes: &[(f64, f64)]) -> Result<LocalVolatility> {
    if outcomes.is_empty() {
        return Err(Error::Empty("outcome list"));
    }
    let total: f64 = outcomes.iter().map(|o| o.0).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum(total));
    }
    let p_a: f64 = outcomes.iter().map(|(w, p)| w * p).sum();
    let var: f64 = outcomes.iter().map(|(w, p)| w * (p - p_a).powi(2)).sum();
    Ok(LocalVolatility {
        sigma_j: var.sqrt(),
        p_a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemoteVolatility {
    pub mean_abs_jump: f64,
    /// Standard deviation of the two-ply change about its mean.
    pub std_jump: f64,
    pub samples: usize,
}

/// Two-ply changes at states reached by swinging from one window to the
/// other. A path arms on entering either window and yields a sample each
/// time it then lands in the opposite one, which re-arms it there.
pub fn estimate_remote_volatility(trajectories: &[Trajectory], low: Window, high: Window) -> Result<RemoteVolatility> {
    if trajectories.is_empty() {
        return Err(Error::Empty("trajectory list"));
    }
    let mut deltas = Vec::new();
    let mut states = 0;
    for t in trajectories {
        let p = &t.p_win;
        states += p.len();
        // true: last window visited was the low one.
        let mut armed: Option<bool> = None;
        for i in 0..p.len() {
            let here = if low.contains(p[i]) {
                Some(true)
            } else if high.contains(p[i]) {
                Some(false)
            } else {
                None
            };
            let Some(in_low) = here else { continue };
            if armed == Some(!in_low) && i + 2 < p.len() {
                deltas.push(p[i + 2] - p[i]);
            }
            armed = Some(in_low);
        }
    }
    if deltas.is_empty() {
        return Err(Error::EmptyFilter {
            trajectories: trajectories.len(),
            states,
        });
    }
    let n = deltas.len() as f64;
    let mean_abs_jump = deltas.iter().map(|d| d.abs()).sum::<f64>() / n;
    let mean = deltas.iter().sum::<f64>() / n;
    let std_jump = (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RemoteVolatility {
        mean_abs_jump,
        std_jump,
        samples: deltas.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn roll_weights() {
        assert_eq!(roll_pair_weight(true, true), 1.0 / 1296.0);
        assert_eq!(roll_pair_weight(false, false), 1.0 / 324.0);
        assert_eq!(roll_pair_weight(true, false), 1.0 / 648.0);
        assert_eq!(roll_pair_weight(false, true), 1.0 / 648.0);
        let w = roll_pair_weights();
        assert_eq!(w.len(), 441);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn local_examples() {
        let v = estimate_local_volatility(&[(0.25, 0.6); 4]).unwrap();
        assert_abs_diff_eq!(v.sigma_j, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.p_a, 0.6, epsilon = 1e-12);
        let v = estimate_local_volatility(&[(0.5, 0.4), (0.5, 0.6)]).unwrap();
        assert_abs_diff_eq!(v.sigma_j, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(v.p_a, 0.5, epsilon = 1e-12);
        assert!(matches!(estimate_local_volatility(&[(0.5, 0.4)]), Err(Error::WeightSum(_))));
        assert!(estimate_local_volatility(&[]).is_err());
        let all: Vec<(f64, f64)> = roll_pair_weights().into_iter().map(|w| (w, 0.3)).collect();
        assert!(estimate_local_volatility(&all).is_ok());
    }

    #[test]
    fn remote_oscillating_path() {
        let mut p = Vec::new();
        for _ in 0..3 {
            p.extend((0..=10).map(|k| 0.25 + 0.05 * k as f64));
            p.extend((1..10).map(|k| 0.75 - 0.05 * k as f64));
        }
        let t = Trajectory { game_id: 0, p_win: p };
        let r = estimate_remote_volatility(&[t], LOW_WINDOW, HIGH_WINDOW).unwrap();
        assert_abs_diff_eq!(r.mean_abs_jump, 0.10, epsilon = 1e-9);
        assert!(r.samples > 0);
    }

    #[test]
    fn remote_needs_a_swing() {
        let t = Trajectory {
            game_id: 0,
            p_win: (0..50).map(|k| 0.4 + 0.2 * ((k % 5) as f64 / 4.0)).collect(),
        };
        let err = estimate_remote_volatility(&[t], LOW_WINDOW, HIGH_WINDOW).unwrap_err();
        assert!(matches!(err, Error::EmptyFilter { trajectories: 1, states: 50 }));
        assert!(estimate_remote_volatility(&[], LOW_WINDOW, HIGH_WINDOW).is_err());
    }
}
