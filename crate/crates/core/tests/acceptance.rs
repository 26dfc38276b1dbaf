//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jumpcube::advisor::recommend;
use jumpcube::exact_solver::{solve, solve_constant, DistProfile, EquitySolution, SolverOptions};
use jumpcube::janowski::{implied_index_table, implied_indexes, round_half_up};
use jumpcube::linear_approx::decision_points_linear;
use jumpcube::nonlinear_approx::{decision_points_nonlinear, NonlinearModel};
use jumpcube::sim::{
    cubeless_trajectories, duel, duel_outcomes, estimate_remote_volatility, JumpStrategy, ProcessConfig, HIGH_WINDOW,
    LOW_WINDOW,
};
use jumpcube::{CubeOwner, CubeState, GammonProbs, JumpDistribution, JumpKind, LinearModel, Method, VolatilityPair, WinLossParams};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn wl(w: f64, l: f64) -> WinLossParams {
    WinLossParams::new(w, l).unwrap()
}

fn laplace(alpha: f64) -> JumpDistribution {
    JumpDistribution::from_volatility(JumpKind::DoubleExponential, alpha).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const GRID: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 2.0];

// Rows L, columns W, each entry x1/x2.
const TABLE_ALPHA_10: [[(f64, f64); 5]; 5] = [
    [(0.69, 0.69), (0.75, 0.66), (0.78, 0.64), (0.79, 0.62), (0.80, 0.59)],
    [(0.66, 0.75), (0.73, 0.73), (0.77, 0.72), (0.78, 0.70), (0.79, 0.69)],
    [(0.64, 0.78), (0.72, 0.77), (0.76, 0.76), (0.78, 0.74), (0.79, 0.73)],
    [(0.62, 0.79), (0.70, 0.78), (0.74, 0.78), (0.77, 0.77), (0.78, 0.76)],
    [(0.59, 0.80), (0.69, 0.79), (0.73, 0.79), (0.76, 0.78), (0.78, 0.78)],
];

const SWEEP_ALPHAS: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];
const SWEEP_TABLE: [[f64; 5]; 5] = [
    [1.0, 1.0, 1.0, 1.0, 1.0],
    [0.84, 0.87, 0.88, 0.88, 0.89],
    [0.69, 0.73, 0.76, 0.77, 0.78],
    [0.53, 0.60, 0.63, 0.65, 0.66],
    [0.38, 0.47, 0.51, 0.53, 0.55],
];

/// Printed values are two-decimal roundings; entries that sit exactly on a
/// half land a few ulps past 0.005 in floating point.
const PRINTED_TOL: f64 = 0.005 + 1e-12;

fn criterion_1() -> Check {
    let mut worst = 0.0f64;
    let mut display_mismatch = Vec::new();
    let table = implied_index_table(&GRID, &GRID, 0.10).map_err(|e| e.to_string())?;
    for (r, row) in TABLE_ALPHA_10.iter().enumerate() {
        for (c, &(x1, x2)) in row.iter().enumerate() {
            let raw = table.raw[r][c];
            worst = worst.max((raw.x1 - x1).abs()).max((raw.x2 - x2).abs());
            if round_half_up(raw.x1, 2) != x1 || round_half_up(raw.x2, 2) != x2 {
                display_mismatch.push(format!("L={} W={}", GRID[r], GRID[c]));
            }
        }
    }
    for (i, &alpha) in SWEEP_ALPHAS.iter().enumerate() {
        for (j, &x) in GRID.iter().enumerate() {
            let raw = implied_indexes(wl(x, x), alpha);
            worst = worst.max((raw.x1 - SWEEP_TABLE[i][j]).abs()).max((raw.x2 - SWEEP_TABLE[i][j]).abs());
            if round_half_up(raw.x1, 2) != SWEEP_TABLE[i][j] {
                display_mismatch.push(format!("alpha={alpha} W=L={x}"));
            }
        }
    }
    ensure(
        worst <= PRINTED_TOL && display_mismatch.is_empty(),
        format!("50 entries, max |raw - printed| = {worst:.6}, rounded mismatches {display_mismatch:?}"),
    )
}

fn criterion_2() -> Check {
    let x = implied_indexes(wl(1.27, 1.27), 0.113);
    ensure((x.x1 - 0.70).abs() <= 0.005 && x.x1 == x.x2, format!("x = {:.5}", x.x1))
}

fn criterion_3() -> Check {
    let unit = WinLossParams::unit();
    let zero = VolatilityPair::constant(0.0).unwrap();
    let lin = decision_points_linear(unit, zero).map_err(|e| e.to_string())?;
    let nl = decision_points_nonlinear(unit, zero).map_err(|e| e.to_string())?;
    let ex = solve_constant(unit, laplace(1e-6), 500).map_err(|e| e.to_string())?.points;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (name, p) in [("linear", lin), ("nonlinear", nl), ("exact", ex)] {
        worst = worst.max((p.tp - 0.2).abs()).max((p.cp - 0.8).abs());
        detail.push_str(&format!("{name} tp={:.4} cp={:.4}; ", p.tp, p.cp));
    }
    ensure(worst <= 1e-3, format!("{detail}max error {worst:.2e}"))
}

fn criterion_4() -> Check {
    let g = JumpDistribution::gaussian(1.0).unwrap();
    let d = JumpDistribution::double_exponential(1.0).unwrap();
    let rg = g.jump_volatility() / g.std_dev();
    let rd = d.jump_volatility() / d.std_dev();
    ensure(
        (rg - 0.7979).abs() <= 1e-4 && (rd - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-4,
        format!("gaussian alpha/sigma = {rg:.5}, double-exponential = {rd:.5}"),
    )
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let w = wl(1.2, 1.1);
    let lap = solve_constant(w, laplace(0.08), 400).map_err(|e| e.to_string())?;
    let gau = solve_constant(w, JumpDistribution::from_volatility(JumpKind::Gaussian, 0.08).unwrap(), 400)
        .map_err(|e| e.to_string())?;
    let d = max_diff(&lap.e_c, &gau.e_c);
    let secs = start.elapsed().as_secs_f64();
    ensure(d < 0.02 && secs < 60.0, format!("max |dE_C| = {d:.5} (N=400, {secs:.1}s)"))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let w = wl(1.4, 1.0);
    let vols = VolatilityPair::constant(0.2).unwrap();
    let exact = solve_constant(w, laplace(0.2), 500).map_err(|e| e.to_string())?;
    let lin = LinearModel::new(w, vols).map_err(|e| e.to_string())?;
    let nl = NonlinearModel::new(w, vols, JumpKind::DoubleExponential).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut detail = String::new();
    for (cube, name, values) in [
        (CubeOwner::Centered, "centered", &exact.e_c),
        (CubeOwner::PlayerOwns, "owned", &exact.e_o),
        (CubeOwner::OpponentOwns, "unavailable", &exact.e_u),
    ] {
        let curve = match cube {
            CubeOwner::Centered => &lin.centered,
            CubeOwner::PlayerOwns => &lin.owned,
            CubeOwner::OpponentOwns => &lin.unavailable,
        };
        let mut dev_lin = 0.0f64;
        let mut dev_nl = 0.0f64;
        for (&p, &e) in exact.grid.points().iter().zip(values.iter()) {
            dev_lin = dev_lin.max((curve.value(p) - e).abs());
            dev_nl = dev_nl.max((nl.eval(cube, p) - e).abs());
        }
        ok &= dev_nl < dev_lin && dev_nl < 0.05;
        detail.push_str(&format!("{name}: nonlinear {dev_nl:.4} linear {dev_lin:.4}; "));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(ok && secs < 120.0, format!("{detail}{secs:.1}s"))
}

fn criterion_7() -> Check {
    let w = wl(1.2, 1.1);
    let a = solve_constant(w, laplace(0.08), 400).map_err(|e| e.to_string())?;
    let b = solve_constant(w, laplace(0.08), 800).map_err(|e| e.to_string())?;
    let iterations = a.iterations_ou.max(a.iterations_c);
    let moved = a.points.max_abs_diff(&b.points);
    ensure(
        iterations <= 10 && a.residual < 1e-8 && moved < 1e-3,
        format!(
            "iterations {}+{}, residual {:.1e}, max point change 400->800 {:.2e}",
            a.iterations_ou, a.iterations_c, a.residual, moved
        ),
    )
}

fn structural_violations(sol: &EquitySolution, w: f64, l: f64) -> Vec<String> {
    let mut v = Vec::new();
    let n = sol.grid.n();
    if let Err(e) = sol.points.check_ordering(1e-9) {
        v.push(e.to_string());
    }
    for (name, e) in [("O", &sol.e_o), ("U", &sol.e_u), ("C", &sol.e_c)] {
        if e[0] != -l || e[n] != w {
            v.push(format!("E_{name} end points"));
        }
        if e.windows(2).any(|p| p[1] < p[0] - 1e-9) {
            v.push(format!("E_{name} not monotone"));
        }
    }
    if (0..=n).any(|k| sol.e_u[k] > sol.e_c[k] + 1e-9 || sol.e_c[k] > sol.e_o[k] + 1e-9) {
        v.push("E_U <= E_C <= E_O".into());
    }
    v
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100;
    let opts = SolverOptions::with_buckets(n);
    let mut failures = Vec::new();
    let mut worst_sym = 0.0f64;
    for draw in 0..200 {
        let (w, l, alpha) = (rng.random_range(1.0..=2.0), rng.random_range(1.0..=2.0), rng.random_range(0.02..=0.2));
        let profile = DistProfile::Constant(laplace(alpha));
        let vols = VolatilityPair::constant(alpha).unwrap();
        let mut bad = Vec::new();
        match solve(wl(w, l), &profile, &opts) {
            Ok(sol) => bad.extend(structural_violations(&sol, w, l)),
            Err(e) => bad.push(e.to_string()),
        }
        for (name, pts) in [
            ("linear", decision_points_linear(wl(w, l), vols)),
            ("nonlinear", decision_points_nonlinear(wl(w, l), vols)),
        ] {
            match pts {
                Ok(p) => {
                    if let Err(e) = p.check_ordering(1e-9) {
                        bad.push(format!("{name}: {e}"));
                    }
                }
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        // Symmetric twin of the draw.
        match solve(wl(w, w), &profile, &opts) {
            Ok(sol) => {
                let asym = (sol.points.tp - (1.0 - sol.points.cp)).abs();
                worst_sym = worst_sym.max(asym);
                if asym > 2.0 / n as f64 {
                    bad.push(format!("symmetric tp vs 1 - cp off by {asym:.2e}"));
                }
                bad.extend(structural_violations(&sol, w, w));
            }
            Err(e) => bad.push(e.to_string()),
        }
        if !bad.is_empty() {
            failures.push(format!("draw {draw} W={w:.3} L={l:.3} alpha={alpha:.3}: {}", bad.join(", ")));
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "200 draws (exact N={n}, linear, nonlinear), {} failing, worst symmetric |tp - (1 - cp)| {worst_sym:.2e}{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

/// `E|X + Y|` for two independent draws, by numerical convolution.
fn two_ply_abs_jump(d: &JumpDistribution) -> f64 {
    let h = d.scale() / 200.0;
    let m = (40.0 * d.scale() / h) as i64;
    let f: Vec<f64> = (-m..=m).map(|i| d.pdf(i as f64 * h)).collect();
    let mut total = 0.0;
    for (i, fi) in f.iter().enumerate() {
        for (j, fj) in f.iter().enumerate() {
            let s = (i as i64 + j as i64 - 2 * m) as f64 * h;
            total += s.abs() * fi * fj;
        }
    }
    total * h * h
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();

    let cfg = ProcessConfig::new(JumpKind::DoubleExponential, 0.05, WinLossParams::unit()).unwrap();
    let s = JumpStrategy::new(0.075, Method::Linear);
    let r = duel(&cfg, &s, &s, 100_000, 99).map_err(|e| e.to_string())?;
    let se = r.stderr_ppg.unwrap();
    ok &= r.mean_ppg.abs() <= 3.0 * se && r.truncation_rate() < 1e-3;
    detail.push_str(&format!("self-duel {:+.4} ± {:.4} ppg, truncated {}; ", r.mean_ppg, se, r.truncated));

    let oracle = two_ply_abs_jump(&cfg.per_ply_distribution().unwrap());
    let mut paths = Vec::new();
    let mut seed = 0;
    let est = loop {
        paths.extend(cubeless_trajectories(&cfg, 20_000, seed).map_err(|e| e.to_string())?);
        seed += 20_000;
        let est = estimate_remote_volatility(&paths, LOW_WINDOW, HIGH_WINDOW).map_err(|e| e.to_string())?;
        if est.samples >= 100_000 {
            break est;
        }
    };
    let rel = (est.mean_abs_jump - oracle).abs() / oracle;
    ok &= rel < 0.05;
    detail.push_str(&format!(
        "remote estimate {:.5} vs oracle {oracle:.5} ({:.2}% off, {} samples); ",
        est.mean_abs_jump,
        100.0 * rel,
        est.samples
    ));

    // Score against a fixed opponent as the assumed volatility varies, with
    // common dice so paired differences are measured precisely.
    let cfg = ProcessConfig::new(JumpKind::DoubleExponential, 0.16, WinLossParams::unit()).unwrap();
    let opponent = JumpStrategy::new(0.0, Method::Linear);
    let n = 400_000u64;
    let alphas = [0.05, 0.10, 0.15, 0.20];
    let runs: Vec<Vec<f64>> = alphas
        .iter()
        .map(|&a| {
            duel_outcomes(&cfg, &JumpStrategy::new(a, Method::Linear), &opponent, n, 5)
                .map(|o| o.into_iter().map(|x| x.0).collect())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let paired = |combo: &[(usize, f64)]| {
        let d: Vec<f64> = (0..n as usize).map(|g| combo.iter().map(|&(i, c)| c * runs[i][g]).sum()).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    };
    let scores: Vec<f64> = runs.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let best = (0..alphas.len()).max_by(|&i, &j| scores[i].total_cmp(&scores[j])).unwrap();
    let interior = best > 0 && best < alphas.len() - 1;
    let mut concave = true;
    for i in 1..alphas.len() - 1 {
        let (m, se) = paired(&[(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)]);
        concave &= m + 3.0 * se < 0.0;
    }
    let (up, up_se) = paired(&[(best, 1.0), (best.saturating_sub(1), -1.0)]);
    let (down, down_se) = paired(&[(best, 1.0), ((best + 1).min(alphas.len() - 1), -1.0)]);
    let clear = interior && up > 3.0 * up_se && down > 3.0 * down_se;
    ok &= concave && clear;
    detail.push_str(&format!(
        "alpha sweep {:?} -> ppg {:?}, optimum {} (concave {concave}); {:.0}s",
        alphas,
        scores.iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>(),
        alphas[best],
        start.elapsed().as_secs_f64()
    ));
    ensure(ok, detail)
}

fn criterion_10() -> Check {
    let vols = VolatilityPair::constant(0.1).unwrap();
    let owned = CubeState::new(CubeOwner::PlayerOwns, 1).unwrap();
    let opponent = CubeState::new(CubeOwner::OpponentOwns, 1).unwrap();
    let cases = [
        (0.9, owned, "double/pass"),
        (0.15, opponent, "pass"),
        (0.5, CubeState::centered(), "no double"),
    ];
    let mut got = Vec::new();
    for (p, cube, want) in cases {
        let a = recommend(&GammonProbs::no_gammons(p), cube, vols, Method::Linear).map_err(|e| e.to_string())?;
        got.push((p, a.summary(), want));
    }
    ensure(got.iter().all(|(_, g, w)| g == w), format!("{got:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("implied index tables", criterion_1),
        ("implied index anchor", criterion_2),
        ("zero-volatility limits", criterion_3),
        ("jump volatility ratios", criterion_4),
        ("distribution insensitivity", criterion_5),
        ("approximation ordering", criterion_6),
        ("solver convergence", criterion_7),
        ("structural invariants", criterion_8),
        ("simulator statistics", criterion_9),
        ("advisor examples", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
