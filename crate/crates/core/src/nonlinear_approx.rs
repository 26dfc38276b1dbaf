//! Second pass of the jump integral over the linear approximation.
//!
//! Each equity is the expectation of the post-jump payoff: the linear
//! equities, doubled equities, or the ±1 cash/pass values, depending on where
//! the jump lands relative to the linear decision points. With affine payoffs
//! every region integrates in closed form through `F` and `G`. Below `P = 0`
//! and above `P = 1` the payoff is extended by lines whose slopes are fixed by
//! requiring `E(0) = -L` and `E(1) = W`.
//!
//! Evaluations at the current cube level use the local volatility;
//! evaluations standing in for a doubled cube use the remote volatility.

use serde::Serialize;

use crate::distributions::{JumpDistribution, JumpKind};
use crate::error::{Error, Result};
use crate::linear_approx::{DecisionPoints, LinearModel, PiecewiseLinearEquity, PointId, Segment};
use crate::params::{CubeOwner, VolatilityPair, WinLossParams};

/// Jump law used inside the integrals; a zero volatility degenerates to a
/// point mass, where the integral returns the payoff itself.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    Jump(JumpDistribution),
    PointMass,
}

impl Kernel {
    fn with_volatility(kind: JumpKind, alpha: f64) -> Result<Self> {
        if alpha == 0.0 {
            Ok(Kernel::PointMass)
        } else {
            JumpDistribution::from_volatility(kind, alpha).map(Kernel::Jump)
        }
    }

    fn cdf(&self, j: f64) -> f64 {
        match self {
            Kernel::Jump(d) => d.cdf(j),
            Kernel::PointMass if j > 0.0 => 1.0,
            Kernel::PointMass if j < 0.0 => 0.0,
            Kernel::PointMass => 0.5,
        }
    }

    fn partial_moment(&self, j: f64) -> f64 {
        match self {
            Kernel::Jump(d) => d.partial_moment(j),
            Kernel::PointMass => 0.0,
        }
    }
}

/// Affine payoff on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Piece {
    lo: f64,
    hi: f64,
    seg: Segment,
}

/// Post-jump payoff on `[0, 1]` as contiguous affine pieces.
#[derive(Debug, Clone, Default, Serialize)]
struct Profile {
    pieces: Vec<Piece>,
}

impl Profile {
    fn constant(&mut self, lo: f64, hi: f64, value: f64) {
        if hi > lo {
            self.pieces.push(Piece {
                lo,
                hi,
                seg: Segment { a: value, b: 0.0 },
            });
        }
    }

    /// `factor * curve` on `[lo, hi]`, split at the curve's own breakpoints.
    fn curve(&mut self, lo: f64, hi: f64, curve: &PiecewiseLinearEquity, factor: f64) {
        if hi <= lo {
            return;
        }
        let mut start = lo;
        for &x in curve.breakpoints().iter().filter(|&&x| x > lo && x < hi).chain([&hi]) {
            let s = curve.segment_at(0.5 * (start + x));
            self.pieces.push(Piece {
                lo: start,
                hi: x,
                seg: Segment {
                    a: factor * s.a,
                    b: factor * s.b,
                },
            });
            start = x;
        }
    }

    fn first_slope(&self) -> f64 {
        self.pieces.first().map_or(0.0, |p| p.seg.b)
    }

    fn last_slope(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.seg.b)
    }

    /// `∫ f(J) payoff(P + J) dJ` over jumps landing inside `[0, 1]`.
    fn integrate(&self, k: &Kernel, p: f64) -> f64 {
        self.pieces
            .iter()
            .map(|piece| {
                let (hi, lo) = (piece.hi - p, piece.lo - p);
                piece.seg.at(p) * (k.cdf(hi) - k.cdf(lo))
                    + piece.seg.b * (k.partial_moment(hi) - k.partial_moment(lo))
            })
            .sum()
    }
}

/// Linear extensions of the payoff outside `[0, 1]`: `a_minus + b_minus P`
/// below zero and `a_plus + b_plus P` above one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCoefficients {
    pub a_minus: f64,
    pub b_minus: f64,
    pub a_plus: f64,
    pub b_plus: f64,
}

/// Tail weights multiplying the free slopes; see [`solve_boundaries`].
fn tail_weights(k: &Kernel, p: f64) -> (f64, f64) {
    let lower = p * k.cdf(-p) + k.partial_moment(-p);
    let upper = (p - 1.0) * (1.0 - k.cdf(1.0 - p)) - k.partial_moment(1.0 - p);
    (lower, upper)
}

/// Everything in the integral except the free slopes' contributions.
fn fixed_part(profile: &Profile, k: &Kernel, wl: WinLossParams, p: f64) -> f64 {
    profile.integrate(k, p) - wl.l() * k.cdf(-p) + wl.w() * (1.0 - k.cdf(1.0 - p))
}

/// Fixes the two free tail slopes from `E(0) = -L` and `E(1) = W`.
fn solve_boundaries(profile: &Profile, k: &Kernel, wl: WinLossParams) -> Result<BoundaryCoefficients> {
    let (l, w) = (wl.l(), wl.w());
    let (b_minus, b_plus) = match k {
        // Tails carry no mass; the slopes are the limits of the smooth case.
        Kernel::PointMass => (profile.first_slope(), profile.last_slope()),
        Kernel::Jump(_) => {
            let (m00, m01) = tail_weights(k, 0.0);
            let (m10, m11) = tail_weights(k, 1.0);
            let r0 = -l - fixed_part(profile, k, wl, 0.0);
            let r1 = w - fixed_part(profile, k, wl, 1.0);
            let det = m00 * m11 - m01 * m10;
            let norm = (m00.abs() + m01.abs()).max(m10.abs() + m11.abs());
            let inv_norm = (m11.abs() + m01.abs()).max(m10.abs() + m00.abs()) / det.abs();
            let condition = norm * inv_norm;
            if !det.is_normal() || !condition.is_finite() || condition >= 1e14 {
                return Err(Error::SingularBoundary {
                    determinant: det,
                    condition,
                });
            }
            ((r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det)
        }
    };
    Ok(BoundaryCoefficients {
        a_minus: -l,
        b_minus,
        a_plus: w - b_plus,
        b_plus,
    })
}

/// One nonlinear cubeful equity: a payoff profile, the jump law it is
/// integrated against, and the solved tail extensions.
#[derive(Debug, Clone, Serialize)]
pub struct NonlinearEquity {
    pub cube: CubeOwner,
    pub wl: WinLossParams,
    pub boundary: BoundaryCoefficients,
    #[serde(skip)]
    kernel: Kernel,
    profile: Profile,
}

impl NonlinearEquity {
    fn new(cube: CubeOwner, wl: WinLossParams, kernel: Kernel, profile: Profile) -> Result<Self> {
        let boundary = solve_boundaries(&profile, &kernel, wl)?;
        Ok(Self {
            cube,
            wl,
            boundary,
            kernel,
            profile,
        })
    }

    pub fn value(&self, p: f64) -> f64 {
        let (lower, upper) = tail_weights(&self.kernel, p);
        fixed_part(&self.profile, &self.kernel, self.wl, p)
            + self.boundary.b_minus * lower
            + self.boundary.b_plus * upper
    }
}

/// Player holds the cube: no double below `rd_o`, double/take up to `cp`,
/// double/pass up to `tg_o`, then too good.
fn owned_profile(own: &PiecewiseLinearEquity, unavailable: &PiecewiseLinearEquity, pts: &DecisionPoints) -> Profile {
    let mut p = Profile::default();
    p.curve(0.0, pts.rd_o, own, 1.0);
    p.curve(pts.rd_o, pts.cp, unavailable, 2.0);
    p.constant(pts.cp, pts.tg_o, 1.0);
    p.curve(pts.tg_o, 1.0, own, 1.0);
    p
}

/// Opponent holds the cube; mirror image of [`owned_profile`].
fn unavailable_profile(
    unavailable: &PiecewiseLinearEquity,
    own: &PiecewiseLinearEquity,
    pts: &DecisionPoints,
) -> Profile {
    let mut p = Profile::default();
    p.curve(0.0, pts.tg_u, unavailable, 1.0);
    p.constant(pts.tg_u, pts.tp, -1.0);
    p.curve(pts.tp, pts.rd_u, own, 2.0);
    p.curve(pts.rd_u, 1.0, unavailable, 1.0);
    p
}

fn centered_profile(
    centered: &PiecewiseLinearEquity,
    own: &PiecewiseLinearEquity,
    unavailable: &PiecewiseLinearEquity,
    pts: &DecisionPoints,
) -> Profile {
    let mut p = Profile::default();
    p.curve(0.0, pts.tgc_u, centered, 1.0);
    p.constant(pts.tgc_u, pts.tp, -1.0);
    p.curve(pts.tp, pts.id_u, own, 2.0);
    p.curve(pts.id_u, pts.id_o, centered, 1.0);
    p.curve(pts.id_o, pts.cp, unavailable, 2.0);
    p.constant(pts.cp, pts.tgc_o, 1.0);
    p.curve(pts.tgc_o, 1.0, centered, 1.0);
    p
}

/// Nonlinear equities for all cube states of one game state.
#[derive(Debug, Clone, Serialize)]
pub struct NonlinearModel {
    pub linear: LinearModel,
    pub kind: JumpKind,
    /// Current cube level, local volatility.
    pub owned: NonlinearEquity,
    pub unavailable: NonlinearEquity,
    pub centered: NonlinearEquity,
    /// Doubled-cube stand-ins, remote volatility.
    pub owned_remote: NonlinearEquity,
    pub unavailable_remote: NonlinearEquity,
}

impl NonlinearModel {
    pub fn new(wl: WinLossParams, vols: VolatilityPair, kind: JumpKind) -> Result<Self> {
        let linear = LinearModel::new(wl, vols)?;
        let local = Kernel::with_volatility(kind, vols.local)?;
        let remote = Kernel::with_volatility(kind, vols.remote)?;
        let pts = &linear.points;

        let owned_local = owned_profile(&linear.owned, &linear.unavailable, pts);
        let owned_remote = owned_profile(&linear.owned_remote, &linear.unavailable, pts);
        let unavailable = unavailable_profile(&linear.unavailable, &linear.owned_remote, pts);
        let centered = centered_profile(&linear.centered, &linear.owned_remote, &linear.unavailable, pts);

        Ok(Self {
            kind,
            owned: NonlinearEquity::new(CubeOwner::PlayerOwns, wl, local, owned_local)?,
            unavailable: NonlinearEquity::new(CubeOwner::OpponentOwns, wl, local, unavailable.clone())?,
            centered: NonlinearEquity::new(CubeOwner::Centered, wl, local, centered)?,
            owned_remote: NonlinearEquity::new(CubeOwner::PlayerOwns, wl, remote, owned_remote)?,
            unavailable_remote: NonlinearEquity::new(CubeOwner::OpponentOwns, wl, remote, unavailable)?,
            linear,
        })
    }

    pub fn eval_owned(&self, p: f64) -> f64 {
        self.owned.value(p)
    }

    pub fn eval_unavailable(&self, p: f64) -> f64 {
        self.unavailable.value(p)
    }

    pub fn eval_centered(&self, p: f64) -> f64 {
        self.centered.value(p)
    }

    pub fn eval(&self, cube: CubeOwner, p: f64) -> f64 {
        match cube {
            CubeOwner::Centered => self.eval_centered(p),
            CubeOwner::PlayerOwns => self.eval_owned(p),
            CubeOwner::OpponentOwns => self.eval_unavailable(p),
        }
    }

    /// The residual whose root defines decision point `id`.
    fn condition(&self, id: PointId, p: f64) -> f64 {
        match id {
            PointId::Tp => self.owned_remote.value(p) + 0.5,
            PointId::Cp => self.unavailable_remote.value(p) - 0.5,
            PointId::RdO => self.owned.value(p) - 2.0 * self.unavailable_remote.value(p),
            PointId::TgO => self.owned.value(p) - 1.0,
            PointId::TgU => self.unavailable_remote.value(p) + 1.0,
            PointId::RdU => self.unavailable_remote.value(p) - 2.0 * self.owned_remote.value(p),
            PointId::IdO => self.centered.value(p) - 2.0 * self.unavailable_remote.value(p),
            PointId::IdU => self.centered.value(p) - 2.0 * self.owned_remote.value(p),
            PointId::TgcO => self.centered.value(p) - 1.0,
            PointId::TgcU => self.centered.value(p) + 1.0,
        }
    }

    /// Re-solves every decision point on the nonlinear equities by bisection
    /// within ±0.1 of the linear estimate.
    pub fn decision_points(&self) -> Result<DecisionPoints> {
        let lin = &self.linear.points;
        let vols = self.linear.vols;
        if vols.local == 0.0 && vols.remote == 0.0 {
            return Ok(*lin);
        }
        let (w, l) = (self.linear.wl.w(), self.linear.wl.l());
        let mut out = DecisionPoints::default();
        for id in PointId::ALL {
            let fixed = match id {
                PointId::TgO | PointId::TgcO if w <= 1.0 => Some(1.0),
                PointId::TgU | PointId::TgcU if l <= 1.0 => Some(0.0),
                _ => None,
            };
            let value = match fixed {
                Some(v) => v,
                None => {
                    let guess = lin.get(id);
                    let lo = (guess - BRACKET).max(0.0);
                    let hi = (guess + BRACKET).min(1.0);
                    bisect(|p| self.condition(id, p), lo, hi, BISECTION_TOL).map_err(|(f_lo, f_hi)| {
                        Error::BracketFailure {
                            point: id.name(),
                            lo,
                            hi,
                            f_lo,
                            f_hi,
                        }
                    })?
                }
            };
            out.set(id, value);
        }
        Ok(out)
    }
}

const BRACKET: f64 = 0.1;
const BISECTION_TOL: f64 = 1e-7;

/// Bisection for a sign change of `f` on `[lo, hi]`. On failure returns the
/// two endpoint values.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> std::result::Result<f64, (f64, f64)> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err((f_lo, f_hi));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn decision_points_nonlinear(wl: WinLossParams, vols: VolatilityPair) -> Result<DecisionPoints> {
    NonlinearModel::new(wl, vols, JumpKind::DoubleExponential)?.decision_points()
}
