//! Linear approximation to the jump model.
//!
//! Each cubeful equity is taken to be piecewise linear: the owned-cube curve
//! kinks at the cash point, the unavailable-cube curve at the take point, and
//! the centered curve at the live take and cash points. The kinks are placed
//! by estimating the equity at the live-cube decision points with the live
//! equities inside the jump integral, which leaves only the jump volatility as
//! a distribution parameter.
//!
//! Player-side doubling points come from exact affine intersections of these
//! curves. Opponent-side points are the same computation run on the reflected
//! curves (`P -> 1 - P`, equity negated, `W <-> L`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{VolatilityPair, WinLossParams};

/// Affine piece `a + b * P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
}

impl Segment {
    pub fn at(&self, p: f64) -> f64 {
        self.a + self.b * p
    }
}

/// Continuous piecewise-linear equity on `[0, 1]`, extrapolated linearly
/// beyond the end points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearEquity {
    breakpoints: Vec<f64>,
    segments: Vec<Segment>,
}

impl PiecewiseLinearEquity {
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Segment>) -> Result<Self> {
        if breakpoints.len() < 2 || segments.len() + 1 != breakpoints.len() {
            return Err(Error::invalid("segments", "need one segment per interval"));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::invalid("breakpoints", "must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::invalid("breakpoints", "must be strictly increasing"));
        }
        Ok(Self {
            breakpoints,
            segments,
        })
    }

    /// Interpolant through `(p, equity)` knots; first knot at 0, last at 1.
    pub fn through(knots: &[(f64, f64)]) -> Result<Self> {
        let breakpoints = knots.iter().map(|k| k.0).collect();
        let segments = knots
            .windows(2)
            .map(|w| {
                let b = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                Segment { a: w[0].1 - b * w[0].0, b }
            })
            .collect();
        Self::new(breakpoints, segments)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_index(&self, p: f64) -> usize {
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        interior.partition_point(|&x| x <= p)
    }

    pub fn segment_at(&self, p: f64) -> Segment {
        self.segments[self.segment_index(p)]
    }

    pub fn value(&self, p: f64) -> f64 {
        self.segment_at(p).at(p)
    }

    /// The opponent's view: `E'(P) = -E(1 - P)`.
    pub fn reflected(&self) -> Self {
        let breakpoints = self.breakpoints.iter().rev().map(|&x| 1.0 - x).collect();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                a: -s.a - s.b,
                b: s.b,
            })
            .collect();
        Self {
            breakpoints,
            segments,
        }
    }

    /// Largest jump between the two sides of an interior breakpoint.
    pub fn continuity_defect(&self) -> f64 {
        self.segments
            .windows(2)
            .zip(&self.breakpoints[1..])
            .map(|(s, &x)| (s[0].at(x) - s[1].at(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Identifies one of the ten cube decision points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointId {
    TgU,
    Tp,
    RdU,
    RdO,
    Cp,
    TgO,
    TgcU,
    IdU,
    IdO,
    TgcO,
}

impl PointId {
    pub const ALL: [PointId; 10] = [
        PointId::TgU,
        PointId::Tp,
        PointId::RdU,
        PointId::RdO,
        PointId::Cp,
        PointId::TgO,
        PointId::TgcU,
        PointId::IdU,
        PointId::IdO,
        PointId::TgcO,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PointId::TgU => "tg_u",
            PointId::Tp => "tp",
            PointId::RdU => "rd_u",
            PointId::RdO => "rd_o",
            PointId::Cp => "cp",
            PointId::TgO => "tg_o",
            PointId::TgcU => "tgc_u",
            PointId::IdU => "id_u",
            PointId::IdO => "id_o",
            PointId::TgcO => "tgc_o",
        }
    }
}

/// The ten cube decision points, as cubeless win probabilities of the player.
///
/// `_o` points belong to the player and `_u` points to the opponent; `tgc_*`
/// and `id_*` apply to a centered cube.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecisionPoints {
    pub tg_u: f64,
    pub tp: f64,
    pub rd_u: f64,
    pub rd_o: f64,
    pub cp: f64,
    pub tg_o: f64,
    pub tgc_u: f64,
    pub id_u: f64,
    pub id_o: f64,
    pub tgc_o: f64,
    /// Points that had no solution and were clamped to a domain end.
    #[serde(skip)]
    clamped: u16,
}

impl DecisionPoints {
    pub fn get(&self, id: PointId) -> f64 {
        match id {
            PointId::TgU => self.tg_u,
            PointId::Tp => self.tp,
            PointId::RdU => self.rd_u,
            PointId::RdO => self.rd_o,
            PointId::Cp => self.cp,
            PointId::TgO => self.tg_o,
            PointId::TgcU => self.tgc_u,
            PointId::IdU => self.id_u,
            PointId::IdO => self.id_o,
            PointId::TgcO => self.tgc_o,
        }
    }

    pub fn set(&mut self, id: PointId, value: f64) {
        let slot = match id {
            PointId::TgU => &mut self.tg_u,
            PointId::Tp => &mut self.tp,
            PointId::RdU => &mut self.rd_u,
            PointId::RdO => &mut self.rd_o,
            PointId::Cp => &mut self.cp,
            PointId::TgO => &mut self.tg_o,
            PointId::TgcU => &mut self.tgc_u,
            PointId::IdU => &mut self.id_u,
            PointId::IdO => &mut self.id_o,
            PointId::TgcO => &mut self.tgc_o,
        };
        *slot = value;
    }

    pub fn mark_clamped(&mut self, id: PointId) {
        self.clamped |= 1 << id as u16;
    }

    pub fn is_clamped(&self, id: PointId) -> bool {
        self.clamped & (1 << id as u16) != 0
    }

    pub fn clamped(&self) -> Vec<PointId> {
        PointId::ALL
            .into_iter()
            .filter(|&id| self.is_clamped(id))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &DecisionPoints) -> f64 {
        PointId::ALL
            .iter()
            .map(|&id| (self.get(id) - other.get(id)).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the ordering every consistent solution must satisfy, allowing
    /// a slack of `tol` in each comparison.
    pub fn check_ordering(&self, tol: f64) -> Result<()> {
        use PointId::*;
        let chain = [TgU, Tp, RdU, RdO, Cp, TgO];
        let pairs = chain
            .windows(2)
            .map(|w| (w[0], w[1]))
            .chain([(TgcU, Tp), (IdU, IdO), (Cp, TgcO), (IdO, RdO)]);
        for (lo, hi) in pairs {
            if self.get(lo) > self.get(hi) + tol {
                return Err(Error::InvalidOrdering(format!(
                    "{} = {} > {} = {}",
                    lo.name(),
                    self.get(lo),
                    hi.name(),
                    self.get(hi)
                )));
            }
        }
        if let Some(&id) = PointId::ALL.iter().find(|&&id| !(0.0..=1.0).contains(&self.get(id))) {
            return Err(Error::InvalidOrdering(format!("{} = {} outside [0, 1]", id.name(), self.get(id))));
        }
        Ok(())
    }
}

/// Take point in the live-cube limit, `(L - 1/2) / (W + L + 1/2)`.
pub fn live_take_point(wl: WinLossParams) -> f64 {
    (wl.l() - 0.5) / wl.live_slope()
}

/// Cash point in the live-cube limit, `(L + 1) / (W + L + 1/2)`.
pub fn live_cash_point(wl: WinLossParams) -> f64 {
    (wl.l() + 1.0) / wl.live_slope()
}

/// Slope of the owned-cube equity below the cash point when the anchor at
/// the live cash point is built with volatility `alpha`.
fn owned_lower_slope(wl: WinLossParams, alpha: f64) -> f64 {
    let s = wl.live_slope();
    s - alpha * s * s / (4.0 * (wl.w() - 0.5) * (wl.l() + 1.0))
}

/// Slope of the unavailable-cube equity above the take point.
fn unavailable_upper_slope(wl: WinLossParams, alpha_remote: f64) -> f64 {
    let s = wl.live_slope();
    s - alpha_remote / 4.0 * s * s / ((wl.l() - 0.5) * (wl.w() + 1.0))
}

pub fn take_point(wl: WinLossParams, alpha_remote: f64) -> Result<f64> {
    let (w, l) = (wl.w(), wl.l());
    let s = wl.live_slope();
    let inner = l + 1.0 - alpha_remote / 4.0 * s / (w - 0.5);
    if inner <= 0.0 {
        return Err(Error::VolatilityTooLarge {
            which: "take point",
            alpha: alpha_remote,
            denominator: inner,
        });
    }
    Ok((l - 0.5) * (l + 1.0) / (s * inner))
}

pub fn cash_point(wl: WinLossParams, alpha_remote: f64) -> Result<f64> {
    let (w, l) = (wl.w(), wl.l());
    let s = wl.live_slope();
    let denom = 2.0 * (2.0 * l * w + 2.0 * l - w - 1.0) - alpha_remote * s;
    if denom <= 0.0 {
        return Err(Error::VolatilityTooLarge {
            which: "cash point",
            alpha: alpha_remote,
            denominator: denom,
        });
    }
    Ok((l + 1.0) / s - alpha_remote * (w - 0.5) / denom)
}

/// Player-owned cube equity: a line from `(0, -L)` through the equity
/// estimate at the live cash point (built with `alpha_anchor`), kinked at the
/// model cash point and joined to `(1, W)`.
pub fn owned_equity_curve(
    wl: WinLossParams,
    alpha_anchor: f64,
    alpha_remote: f64,
) -> Result<PiecewiseLinearEquity> {
    let cp = cash_point(wl, alpha_remote)?;
    let lower = Segment {
        a: -wl.l(),
        b: owned_lower_slope(wl, alpha_anchor),
    };
    let b2 = (wl.w() - lower.at(cp)) / (1.0 - cp);
    let upper = Segment { a: wl.w() - b2, b: b2 };
    PiecewiseLinearEquity::new(vec![0.0, cp, 1.0], vec![lower, upper])
}

/// Opponent-owned cube equity, kinked at the model take point.
pub fn unavailable_equity_curve(wl: WinLossParams, alpha_remote: f64) -> Result<PiecewiseLinearEquity> {
    let tp = take_point(wl, alpha_remote)?;
    let b2 = unavailable_upper_slope(wl, alpha_remote);
    let upper = Segment { a: wl.w() - b2, b: b2 };
    let lower = Segment {
        a: -wl.l(),
        b: (upper.at(tp) + wl.l()) / tp,
    };
    PiecewiseLinearEquity::new(vec![0.0, tp, 1.0], vec![lower, upper])
}

/// Centered cube equity: the line through the equity estimates at the live
/// take point (remote volatility) and live cash point (local volatility),
/// joined to `(0, -L)` and `(1, W)`.
pub fn centered_equity_curve(
    wl: WinLossParams,
    alpha_local: f64,
    alpha_remote: f64,
) -> Result<PiecewiseLinearEquity> {
    let (w, l) = (wl.w(), wl.l());
    let s = wl.live_slope();
    let tp_live = live_take_point(wl);
    let cp_live = live_cash_point(wl);
    let at_cash = 1.0 - alpha_local * s * (w + 1.0) / (6.0 * (w - 0.5));
    let at_take = -1.0 + alpha_remote * s * (l + 1.0) / (6.0 * (l - 0.5));
    PiecewiseLinearEquity::through(&[(0.0, -l), (tp_live, at_take), (cp_live, at_cash), (1.0, w)])
}

/// First point in `knots` order at which `d` reaches zero from the side
/// given by `rising` (below zero if rising, above if falling). `d` must be
/// affine between consecutive knots, which makes the interpolation exact.
pub(crate) fn first_crossing(d: impl Fn(f64) -> f64, knots: &[f64], rising: bool) -> Option<f64> {
    let oriented = |x: f64| if rising { d(x) } else { -d(x) };
    let mut prev_x = knots[0];
    let mut prev = oriented(prev_x);
    if prev >= 0.0 {
        return Some(prev_x);
    }
    for &x in &knots[1..] {
        let v = oriented(x);
        if v >= 0.0 {
            return Some(if v == 0.0 {
                x
            } else {
                prev_x + (x - prev_x) * (-prev) / (v - prev)
            });
        }
        prev_x = x;
        prev = v;
    }
    None
}

/// Sorted union of breakpoints from `curves` restricted to `[lo, hi]`.
fn merged_knots(curves: &[&PiecewiseLinearEquity], lo: f64, hi: f64) -> Vec<f64> {
    let mut knots: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.breakpoints().iter().copied())
        .filter(|&x| x > lo && x < hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
}

/// Doubling thresholds for one side, all in that side's own frame.
struct DoublerPoints {
    redouble: (f64, bool),
    too_good: (f64, bool),
    initial: (f64, bool),
    too_good_centered: (f64, bool),
}

/// `current`: the side's own-cube equity at the current level; `doubled`:
/// the post-double unavailable-cube equity; `cash`: the side's cash point.
fn doubler_points(
    current: &PiecewiseLinearEquity,
    doubled: &PiecewiseLinearEquity,
    centered: &PiecewiseLinearEquity,
    cash: f64,
    win_points: f64,
) -> DoublerPoints {
    let below = merged_knots(&[current, doubled, centered], 0.0, cash);
    let above = merged_knots(&[current, centered], cash, 1.0);

    let solve = |found: Option<f64>, fallback: f64| match found {
        Some(p) => (p, false),
        None => (fallback, true),
    };
    let redouble = solve(
        first_crossing(|p| current.value(p) - 2.0 * doubled.value(p), &below, false),
        cash,
    );
    let initial = solve(
        first_crossing(|p| centered.value(p) - 2.0 * doubled.value(p), &below, false),
        cash,
    );
    let (too_good, too_good_centered) = if win_points <= 1.0 {
        ((1.0, false), (1.0, false))
    } else {
        (
            solve(first_crossing(|p| current.value(p) - 1.0, &above, true), 1.0),
            solve(first_crossing(|p| centered.value(p) - 1.0, &above, true), 1.0),
        )
    };
    DoublerPoints {
        redouble,
        too_good,
        initial,
        too_good_centered,
    }
}

/// All linear-approximation curves and decision points for one game state.
#[derive(Debug, Clone, Serialize)]
pub struct LinearModel {
    pub wl: WinLossParams,
    pub vols: VolatilityPair,
    /// Owned-cube equity at the current level (local anchor).
    pub owned: PiecewiseLinearEquity,
    /// Owned-cube equity after the opponent doubles (remote anchor).
    pub owned_remote: PiecewiseLinearEquity,
    pub unavailable: PiecewiseLinearEquity,
    pub centered: PiecewiseLinearEquity,
    pub points: DecisionPoints,
}

impl LinearModel {
    pub fn new(wl: WinLossParams, vols: VolatilityPair) -> Result<Self> {
        let (al, ar) = (vols.local, vols.remote);
        let tp = take_point(wl, ar)?;
        let cp = cash_point(wl, ar)?;
        let owned = owned_equity_curve(wl, al, ar)?;
        let owned_remote = owned_equity_curve(wl, ar, ar)?;
        let unavailable = unavailable_equity_curve(wl, ar)?;
        let centered = centered_equity_curve(wl, al, ar)?;

        let mine = doubler_points(&owned, &unavailable, &centered, cp, wl.w());
        let theirs = doubler_points(
            &unavailable.reflected(),
            &owned_remote.reflected(),
            &centered.reflected(),
            1.0 - tp,
            wl.l(),
        );

        let mut points = DecisionPoints {
            tp,
            cp,
            ..Default::default()
        };
        let assign = |points: &mut DecisionPoints, id, (p, clamped): (f64, bool), mirror: bool| {
            points.set(id, if mirror { 1.0 - p } else { p });
            if clamped {
                points.mark_clamped(id);
            }
        };
        assign(&mut points, PointId::RdO, mine.redouble, false);
        assign(&mut points, PointId::TgO, mine.too_good, false);
        assign(&mut points, PointId::IdO, mine.initial, false);
        assign(&mut points, PointId::TgcO, mine.too_good_centered, false);
        assign(&mut points, PointId::RdU, theirs.redouble, true);
        assign(&mut points, PointId::TgU, theirs.too_good, true);
        assign(&mut points, PointId::IdU, theirs.initial, true);
        assign(&mut points, PointId::TgcU, theirs.too_good_centered, true);

        Ok(Self {
            wl,
            vols,
            owned,
            owned_remote,
            unavailable,
            centered,
            points,
        })
    }
}

pub fn decision_points_linear(wl: WinLossParams, vols: VolatilityPair) -> Result<DecisionPoints> {
    Ok(LinearModel::new(wl, vols)?.points)
}
