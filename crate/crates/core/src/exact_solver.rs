//! Exact cubeful equities from the discretized integral equations.
//!
//! `P ∈ [0, 1]` is cut into `N` buckets. Inside a bucket the post-jump equity
//! is interpolated linearly between its node values, so each bucket's share
//! of the jump integral is a closed-form combination of `F` and `G`. Below
//! zero and above one the equity is extrapolated linearly from the first and
//! last interior nodes. For fixed decision points the equations are linear in
//! the node equities: the owned and unavailable equities form one coupled
//! system, and the centered equity a second one that takes the first two as
//! known. Decision points are then re-read from the solved equities and the
//! process repeats until they stop moving.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::distributions::JumpDistribution;
use crate::error::{Error, Result};
use crate::linear_approx::{decision_points_linear, DecisionPoints, PointId};
use crate::params::{CubeOwner, VolatilityPair, WinLossParams};

pub const DEFAULT_BUCKETS: usize = 500;
pub const MIN_BUCKETS: usize = 50;
pub const DEFAULT_MAX_ITERATIONS: usize = 25;
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn uniform(n: usize) -> Result<Self> {
        if n < MIN_BUCKETS {
            return Err(Error::invalid("n", format!("need at least {MIN_BUCKETS} buckets, got {n}")));
        }
        let mut points: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        points[n] = 1.0;
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Piecewise-linear interpolation of node `values` at `p`.
    pub fn interpolate(&self, values: &[f64], p: f64) -> f64 {
        let n = self.n();
        let k = self.points[1..n].partition_point(|&x| x <= p);
        let (x0, x1) = (self.points[k], self.points[k + 1]);
        values[k] + (values[k + 1] - values[k]) * (p - x0) / (x1 - x0)
    }
}

/// Jump law at each grid node (the row's kernel).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DistProfile {
    Constant(JumpDistribution),
    PerNode(Vec<JumpDistribution>),
}

impl DistProfile {
    pub fn at(&self, i: usize) -> &JumpDistribution {
        match self {
            DistProfile::Constant(d) => d,
            DistProfile::PerNode(v) => &v[i],
        }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        match self {
            DistProfile::PerNode(v) if v.len() != grid.points.len() => Err(Error::invalid(
                "dist_profile",
                format!("{} entries for {} grid nodes", v.len(), grid.points.len()),
            )),
            _ => Ok(()),
        }
    }

    /// Average jump volatility over the nodes, used for the default guess.
    pub fn mean_volatility(&self) -> f64 {
        match self {
            DistProfile::Constant(d) => d.jump_volatility(),
            DistProfile::PerNode(v) => v.iter().map(|d| d.jump_volatility()).sum::<f64>() / v.len() as f64,
        }
    }
}

/// What the post-jump equity at a node resolves to.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Payoff {
    Owned(f64),
    Unavailable(f64),
    Centered(f64),
    Cash(f64),
}

fn owned_payoff(p: f64, pts: &DecisionPoints) -> Payoff {
    if p < pts.rd_o {
        Payoff::Owned(1.0)
    } else if p < pts.cp {
        Payoff::Unavailable(2.0)
    } else if p < pts.tg_o {
        Payoff::Cash(1.0)
    } else {
        Payoff::Owned(1.0)
    }
}

fn unavailable_payoff(p: f64, pts: &DecisionPoints) -> Payoff {
    if p < pts.tg_u {
        Payoff::Unavailable(1.0)
    } else if p < pts.tp {
        Payoff::Cash(-1.0)
    } else if p < pts.rd_u {
        Payoff::Owned(2.0)
    } else {
        Payoff::Unavailable(1.0)
    }
}

fn centered_payoff(p: f64, pts: &DecisionPoints) -> Payoff {
    if p < pts.tgc_u {
        Payoff::Centered(1.0)
    } else if p < pts.tp {
        Payoff::Cash(-1.0)
    } else if p < pts.id_u {
        Payoff::Owned(2.0)
    } else if p < pts.id_o {
        Payoff::Centered(1.0)
    } else if p < pts.cp {
        Payoff::Unavailable(2.0)
    } else if p < pts.tgc_o {
        Payoff::Cash(1.0)
    } else {
        Payoff::Centered(1.0)
    }
}

/// Integration weights for row `i`: `nodes[k]` multiplies the post-jump
/// equity at node `k`; `first`/`zero` multiply `E_1`/`E_0` in the lower
/// extrapolation and `last`/`end` multiply `E_{N-1}`/`E_N` in the upper one.
struct RowWeights {
    nodes: Vec<f64>,
    zero: f64,
    first: f64,
    last: f64,
    end: f64,
}

fn row_weights(grid: &Grid, d: &JumpDistribution, i: usize) -> RowWeights {
    let pts = &grid.points;
    let n = grid.n();
    let pi = pts[i];
    let f: Vec<f64> = pts.iter().map(|&x| d.cdf(x - pi)).collect();
    let g: Vec<f64> = pts.iter().map(|&x| d.partial_moment(x - pi)).collect();

    let mut nodes = vec![0.0; n + 1];
    for j in 1..=n {
        let h = pts[j] - pts[j - 1];
        let df = f[j] - f[j - 1];
        let dg = g[j] - g[j - 1];
        nodes[j] += ((pi - pts[j - 1]) * df + dg) / h;
        nodes[j - 1] += ((pts[j] - pi) * df - dg) / h;
    }

    let h0 = pts[1] - pts[0];
    let (f_lo, g_lo) = (d.cdf(-pi), d.partial_moment(-pi));
    let hn = pts[n] - pts[n - 1];
    let (f_hi, g_hi) = (d.cdf(1.0 - pi), d.partial_moment(1.0 - pi));
    RowWeights {
        nodes,
        first: (g_lo + (pi - pts[0]) * f_lo) / h0,
        zero: ((pts[1] - pi) * f_lo - g_lo) / h0,
        last: (g_hi + (pts[n] - pi) * (1.0 - f_hi)) / hn,
        end: ((pi - pts[n - 1]) * (1.0 - f_hi) - g_hi) / hn,
    }
}

/// Assembles and solves the coupled owned/unavailable system for fixed
/// decision points. Returns full node arrays including the end points.
pub fn assemble_and_solve_ou(
    wl: WinLossParams,
    profile: &DistProfile,
    grid: &Grid,
    pts: &DecisionPoints,
) -> Result<(Vec<f64>, Vec<f64>)> {
    profile.check(grid)?;
    check_points(pts, &OU_CHAIN)?;
    let n = grid.n();
    let m = n - 1;
    let (l, w) = (wl.l(), wl.w());
    // Unknowns: E_O at nodes 1..N-1, then E_U at nodes 1..N-1.
    let var = |block: usize, k: usize| block * m + k - 1;
    let o_var = |k: usize| var(0, k);
    let u_var = |k: usize| var(1, k);
    let known = |k: usize| if k == 0 { -l } else { w };

    let mut a = DMatrix::<f64>::zeros(2 * m, 2 * m);
    let mut b = DVector::<f64>::zeros(2 * m);

    for i in 1..n {
        let wts = row_weights(grid, profile.at(i), i);
        for (block, selector) in [
            (0, owned_payoff as fn(f64, &DecisionPoints) -> Payoff),
            (1, unavailable_payoff),
        ] {
            let row = var(block, i);
            a[(row, row)] += 1.0;
            for (k, &wk) in wts.nodes.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let (target, factor) = match selector(grid.points[k], pts) {
                    Payoff::Cash(c) => {
                        b[row] += wk * c;
                        continue;
                    }
                    Payoff::Owned(f) => (0, f),
                    Payoff::Unavailable(f) => (1, f),
                    Payoff::Centered(_) => unreachable!("centered payoff in owned/unavailable system"),
                };
                if k == 0 || k == n {
                    b[row] += wk * factor * known(k);
                } else {
                    a[(row, var(target, k))] -= wk * factor;
                }
            }
            // Linear extrapolation through (P_0, E_0), (P_1, E_1) and
            // (P_{N-1}, E_{N-1}), (P_N, E_N) of this row's own equity.
            a[(row, var(block, 1))] -= wts.first;
            a[(row, var(block, n - 1))] -= wts.last;
            b[row] += wts.zero * -l + wts.end * w;
        }
    }

    let x = solve_dense(a, b)?;
    let mut e_o = vec![-l; n + 1];
    let mut e_u = vec![-l; n + 1];
    e_o[n] = w;
    e_u[n] = w;
    for k in 1..n {
        e_o[k] = x[o_var(k)];
        e_u[k] = x[u_var(k)];
    }
    Ok((e_o, e_u))
}

/// Solves the centered system given solved owned/unavailable arrays.
pub fn assemble_and_solve_c(
    wl: WinLossParams,
    profile: &DistProfile,
    grid: &Grid,
    pts: &DecisionPoints,
    e_o: &[f64],
    e_u: &[f64],
) -> Result<Vec<f64>> {
    profile.check(grid)?;
    check_points(pts, &C_CHAIN)?;
    let n = grid.n();
    let m = n - 1;
    let (l, w) = (wl.l(), wl.w());
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);

    for i in 1..n {
        let row = i - 1;
        let wts = row_weights(grid, profile.at(i), i);
        a[(row, row)] += 1.0;
        for (k, &wk) in wts.nodes.iter().enumerate() {
            match centered_payoff(grid.points[k], pts) {
                Payoff::Cash(c) => b[row] += wk * c,
                Payoff::Owned(f) => b[row] += wk * f * e_o[k],
                Payoff::Unavailable(f) => b[row] += wk * f * e_u[k],
                Payoff::Centered(f) if k == 0 => b[row] += wk * f * -l,
                Payoff::Centered(f) if k == n => b[row] += wk * f * w,
                Payoff::Centered(f) => a[(row, k - 1)] -= wk * f,
            }
        }
        a[(row, 0)] -= wts.first;
        a[(row, m - 1)] -= wts.last;
        b[row] += wts.zero * -l + wts.end * w;
    }

    let x = solve_dense(a, b)?;
    let mut e_c = vec![-l; n + 1];
    e_c[n] = w;
    e_c[1..n].copy_from_slice(x.as_slice());
    Ok(e_c)
}

fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("LU factorization hit a zero pivot".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("solution is not finite".into()));
    }
    Ok(x)
}

const OU_CHAIN: [PointId; 6] = [PointId::TgU, PointId::Tp, PointId::RdU, PointId::RdO, PointId::Cp, PointId::TgO];
const C_CHAIN: [PointId; 6] = [PointId::TgcU, PointId::Tp, PointId::IdU, PointId::IdO, PointId::Cp, PointId::TgcO];

/// The region boundaries one system reads must be ordered and inside [0, 1].
/// Relations across the two systems only hold at the converged solution.
fn check_points(pts: &DecisionPoints, chain: &[PointId]) -> Result<()> {
    for id in chain {
        let v = pts.get(*id);
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidOrdering(format!("{} = {v} outside [0, 1]", id.name())));
        }
    }
    for pair in chain.windows(2) {
        let (lo, hi) = (pts.get(pair[0]), pts.get(pair[1]));
        if lo > hi + 1e-9 {
            return Err(Error::InvalidOrdering(format!(
                "{} = {lo} > {} = {hi}",
                pair[0].name(),
                pair[1].name()
            )));
        }
    }
    Ok(())
}

/// First grid position where `d` reaches zero from the side given by
/// `rising`, scanning nodes from `start`; linear between nodes.
fn node_crossing(grid: &Grid, d: &[f64], start: f64, rising: bool) -> Option<f64> {
    let x = grid.points();
    let from = x.partition_point(|&p| p < start);
    let oriented = |k: usize| if rising { d[k] } else { -d[k] };
    if from >= x.len() {
        return None;
    }
    let mut prev = oriented(from);
    if prev >= 0.0 {
        return Some(x[from]);
    }
    for k in from + 1..x.len() {
        let v = oriented(k);
        if v >= 0.0 {
            return Some(if v == 0.0 {
                x[k]
            } else {
                x[k - 1] + (x[k] - x[k - 1]) * (-prev) / (v - prev)
            });
        }
        prev = v;
    }
    None
}

/// Re-reads decision points from solved node arrays. `e_c` may be absent,
/// in which case the centered points are copied from `previous`.
pub fn refine_points(
    wl: WinLossParams,
    grid: &Grid,
    e_o: &[f64],
    e_u: &[f64],
    e_c: Option<&[f64]>,
    previous: &DecisionPoints,
) -> DecisionPoints {
    let mut out = *previous;
    let diff = |f: &dyn Fn(usize) -> f64| (0..e_o.len()).map(f).collect::<Vec<f64>>();
    let solve = |out: &mut DecisionPoints, id: PointId, found: Option<f64>, fallback: f64| {
        match found {
            Some(p) => out.set(id, p),
            None => {
                out.set(id, fallback);
                out.mark_clamped(id);
            }
        }
    };
    let (w, l) = (wl.w(), wl.l());

    let tp = node_crossing(grid, &diff(&|k| e_o[k] + 0.5), 0.0, true);
    solve(&mut out, PointId::Tp, tp, 0.0);
    let cp = node_crossing(grid, &diff(&|k| e_u[k] - 0.5), 0.0, true);
    solve(&mut out, PointId::Cp, cp, 1.0);
    let (tp, cp) = (out.tp, out.cp);

    let rd_o = node_crossing(grid, &diff(&|k| e_o[k] - 2.0 * e_u[k]), 0.0, false).filter(|&p| p <= cp);
    solve(&mut out, PointId::RdO, rd_o, cp);
    let rd_u = node_crossing(grid, &diff(&|k| e_u[k] - 2.0 * e_o[k]), 0.0, false).filter(|&p| p >= tp);
    solve(&mut out, PointId::RdU, rd_u, tp);
    if w <= 1.0 {
        out.tg_o = 1.0;
    } else {
        let tg_o = node_crossing(grid, &diff(&|k| e_o[k] - 1.0), cp, true);
        solve(&mut out, PointId::TgO, tg_o, 1.0);
    }
    if l <= 1.0 {
        out.tg_u = 0.0;
    } else {
        let tg_u = node_crossing(grid, &diff(&|k| e_u[k] + 1.0), 0.0, true).filter(|&p| p <= tp);
        solve(&mut out, PointId::TgU, tg_u, 0.0);
    }

    if let Some(e_c) = e_c {
        let id_o = node_crossing(grid, &diff(&|k| e_c[k] - 2.0 * e_u[k]), 0.0, false).filter(|&p| p <= cp);
        solve(&mut out, PointId::IdO, id_o, cp);
        let id_u = node_crossing(grid, &diff(&|k| e_c[k] - 2.0 * e_o[k]), 0.0, false).filter(|&p| p >= tp);
        solve(&mut out, PointId::IdU, id_u, tp);
        if w <= 1.0 {
            out.tgc_o = 1.0;
        } else {
            let tgc_o = node_crossing(grid, &diff(&|k| e_c[k] - 1.0), cp, true);
            solve(&mut out, PointId::TgcO, tgc_o, 1.0);
        }
        if l <= 1.0 {
            out.tgc_u = 0.0;
        } else {
            let tgc_u = node_crossing(grid, &diff(&|k| e_c[k] + 1.0), 0.0, true).filter(|&p| p <= tp);
            solve(&mut out, PointId::TgcU, tgc_u, 0.0);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct EquitySolution {
    pub wl: WinLossParams,
    pub grid: Grid,
    pub e_o: Vec<f64>,
    pub e_u: Vec<f64>,
    pub e_c: Vec<f64>,
    pub points: DecisionPoints,
    pub iterations_ou: usize,
    pub iterations_c: usize,
    /// Largest defect of the integral equations at the decision points used
    /// for the final solves.
    pub residual: f64,
}

impl EquitySolution {
    pub fn equity(&self, cube: CubeOwner, p: f64) -> f64 {
        let values = match cube {
            CubeOwner::Centered => &self.e_c,
            CubeOwner::PlayerOwns => &self.e_o,
            CubeOwner::OpponentOwns => &self.e_u,
        };
        self.grid.interpolate(values, p)
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub n: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial: Option<DecisionPoints>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n: DEFAULT_BUCKETS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: CONVERGENCE_TOL,
            initial: None,
        }
    }
}

impl SolverOptions {
    pub fn with_buckets(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }
}

const OU_POINTS: [PointId; 6] = [PointId::TgU, PointId::Tp, PointId::RdU, PointId::RdO, PointId::Cp, PointId::TgO];
const C_POINTS: [PointId; 4] = [PointId::TgcU, PointId::IdU, PointId::IdO, PointId::TgcO];

fn max_change(a: &DecisionPoints, b: &DecisionPoints, ids: &[PointId]) -> f64 {
    ids.iter().map(|&id| (a.get(id) - b.get(id)).abs()).fold(0.0, f64::max)
}

/// Full fixed-point solve: owned/unavailable first, then centered.
pub fn solve(wl: WinLossParams, profile: &DistProfile, opts: &SolverOptions) -> Result<EquitySolution> {
    let grid = Grid::uniform(opts.n)?;
    profile.check(&grid)?;
    let mut pts = match opts.initial {
        Some(p) => p,
        None => {
            let alpha = profile.mean_volatility();
            decision_points_linear(wl, VolatilityPair::constant(alpha)?)?
        }
    };

    let mut iterations_ou = 0;
    let (e_o, e_u, used_ou) = loop {
        iterations_ou += 1;
        let (e_o, e_u) = assemble_and_solve_ou(wl, profile, &grid, &pts)?;
        let next = refine_points(wl, &grid, &e_o, &e_u, None, &pts);
        let change = max_change(&pts, &next, &OU_POINTS);
        let used = pts;
        pts = next;
        if change < opts.tolerance {
            break (e_o, e_u, used);
        }
        if iterations_ou >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations: iterations_ou,
                last_change: change,
                last_points: Box::new(pts),
            });
        }
    };

    let mut iterations_c = 0;
    let (e_c, used_c) = loop {
        iterations_c += 1;
        let e_c = assemble_and_solve_c(wl, profile, &grid, &pts, &e_o, &e_u)?;
        let next = refine_points(wl, &grid, &e_o, &e_u, Some(&e_c), &pts);
        let change = max_change(&pts, &next, &C_POINTS);
        let used = pts;
        pts = next;
        if change < opts.tolerance {
            break (e_c, used);
        }
        if iterations_c >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations: iterations_c,
                last_change: change,
                last_points: Box::new(pts),
            });
        }
    };

    let mut used = used_c;
    for id in OU_POINTS {
        used.set(id, used_ou.get(id));
    }
    let residual = operator_defect(wl, profile, &grid, &used, &e_o, &e_u, &e_c);
    Ok(EquitySolution {
        wl,
        grid,
        e_o,
        e_u,
        e_c,
        points: pts,
        iterations_ou,
        iterations_c,
        residual,
    })
}

/// Convenience wrapper: constant jump law, default options.
pub fn solve_constant(wl: WinLossParams, dist: JumpDistribution, n: usize) -> Result<EquitySolution> {
    solve(wl, &DistProfile::Constant(dist), &SolverOptions::with_buckets(n))
}

/// Applies the discretized integral operator to the given arrays bucket by
/// bucket and returns the largest difference from the arrays themselves.
pub fn operator_defect(
    wl: WinLossParams,
    profile: &DistProfile,
    grid: &Grid,
    pts: &DecisionPoints,
    e_o: &[f64],
    e_u: &[f64],
    e_c: &[f64],
) -> f64 {
    let x = grid.points();
    let n = grid.n();
    let resolve = |payoff: Payoff, k: usize| match payoff {
        Payoff::Owned(f) => f * e_o[k],
        Payoff::Unavailable(f) => f * e_u[k],
        Payoff::Centered(f) => f * e_c[k],
        Payoff::Cash(c) => c,
    };
    let mut worst = 0.0f64;
    for i in 1..n {
        let d = profile.at(i);
        let pi = x[i];
        for (values, selector) in [
            (e_o, owned_payoff as fn(f64, &DecisionPoints) -> Payoff),
            (e_u, unavailable_payoff),
            (e_c, centered_payoff),
        ] {
            let post: Vec<f64> = (0..=n).map(|k| resolve(selector(x[k], pts), k)).collect();
            let mut acc = 0.0;
            for j in 1..=n {
                let h = x[j] - x[j - 1];
                let df = d.cdf(x[j] - pi) - d.cdf(x[j - 1] - pi);
                let dg = d.partial_moment(x[j] - pi) - d.partial_moment(x[j - 1] - pi);
                acc += ((pi - x[j - 1]) * post[j] + (x[j] - pi) * post[j - 1]) / h * df
                    + (post[j] - post[j - 1]) / h * dg;
            }
            let (f_lo, g_lo) = (d.cdf(-pi), d.partial_moment(-pi));
            let h0 = x[1] - x[0];
            acc += values[1] / h0 * (g_lo + pi * f_lo) - wl.l() / h0 * (-g_lo + (x[1] - pi) * f_lo);
            let (f_hi, g_hi) = (d.cdf(1.0 - pi), d.partial_moment(1.0 - pi));
            let hn = x[n] - x[n - 1];
            acc += values[n - 1] / hn * (g_hi + (x[n] - pi) * (1.0 - f_hi))
                + wl.w() / hn * (-g_hi + (pi - x[n - 1]) * (1.0 - f_hi));
            worst = worst.max((values[i] - acc).abs());
        }
    }
    worst
}
