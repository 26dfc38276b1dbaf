//! `jumpcube`: cube decision points, equity curves, implied cube-life
//! indexes, position advice, duels and volatility estimates.

mod output;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use jumpcube::advisor::{advise, EvalOptions, Evaluator};
use jumpcube::exact_solver::DEFAULT_BUCKETS;
use jumpcube::janowski::implied_index_table;
use jumpcube::linear_approx::{live_cash_point, live_take_point};
use jumpcube::params::{derive_win_loss, scale_statistical_volatility};
use jumpcube::sim::{self, Cubeless, JumpStrategy, ProcessConfig, Strategy, Window};
use jumpcube::{CubeOwner, CubeState, DecisionPoints, Error, GammonProbs, JumpKind, Method, PointId, VolatilityPair, WinLossParams};

use output::{Format, Table};

#[derive(Parser)]
#[command(name = "jumpcube", version, about = "Backgammon cube decisions under a jump model of win probability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All ten decision points for a game state.
    Points(PointsArgs),
    /// Cubeful equity of the three cube states on a uniform grid of P.
    Curve(CurveArgs),
    /// Implied Janowski cube-life indexes.
    ImpliedX(ImpliedArgs),
    /// Cube advice for one position.
    Advise(AdviseArgs),
    /// Duel two cube strategies on the synthetic jump process.
    Simulate(SimulateArgs),
    /// Remote jump volatility from a trajectory file.
    Estimate(EstimateArgs),
}

#[derive(Args, Clone)]
struct VolArgs {
    /// Jump volatility for both roles.
    #[arg(long, conflicts_with_all = ["alpha_local", "alpha_remote"])]
    alpha: Option<f64>,
    /// Volatility at the current state.
    #[arg(long, requires = "alpha_remote")]
    alpha_local: Option<f64>,
    /// Volatility after a reversal, which sets the take and cash points.
    #[arg(long, requires = "alpha_local")]
    alpha_remote: Option<f64>,
    /// Multiply the volatilities by 11.3/9.1 first (statistical estimates fed to the linear method).
    #[arg(long)]
    scale_statistical: bool,
}

impl VolArgs {
    fn pair(&self) -> Result<VolatilityPair, Error> {
        let (local, remote) = match (self.alpha, self.alpha_local, self.alpha_remote) {
            (Some(a), _, _) => (a, a),
            (None, Some(l), Some(r)) => (l, r),
            _ => (0.1, 0.1),
        };
        let scale = |a: f64| if self.scale_statistical { scale_statistical_volatility(a) } else { a };
        VolatilityPair::new(scale(local), scale(remote))
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[command(flatten)]
    vols: VolArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Linear)]
    method: MethodArg,
    /// Jump law for the nonlinear and exact methods.
    #[arg(long, value_enum, default_value_t = DistArg::Laplace)]
    dist: DistArg,
    /// Grid buckets for the exact method.
    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    buckets: usize,
}

impl ModelArgs {
    fn build(&self) -> Result<(WinLossParams, VolatilityPair, Evaluator), Error> {
        let wl = WinLossParams::new(self.w, self.l)?;
        let vols = self.vols.pair()?;
        let eval = Evaluator::new(wl, vols, self.method.into(), self.eval_options())?;
        Ok((wl, vols, eval))
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            kind: self.dist.into(),
            buckets: self.buckets,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Linear,
    Nonlinear,
    Exact,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Linear => Method::Linear,
            MethodArg::Nonlinear => Method::Nonlinear,
            MethodArg::Exact => Method::Exact,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum DistArg {
    #[value(alias = "double-exponential")]
    Laplace,
    #[value(alias = "normal")]
    Gaussian,
}

impl From<DistArg> for JumpKind {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Laplace => JumpKind::DoubleExponential,
            DistArg::Gaussian => JumpKind::Gaussian,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum CubeArg {
    Centered,
    Owned,
    Opponent,
}

impl From<CubeArg> for CubeOwner {
    fn from(c: CubeArg) -> Self {
        match c {
            CubeArg::Centered => CubeOwner::Centered,
            CubeArg::Owned => CubeOwner::PlayerOwns,
            CubeArg::Opponent => CubeOwner::OpponentOwns,
        }
    }
}

#[derive(Args)]
struct PointsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of rows, including both end points.
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u32).range(2..))]
    n_points: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ImpliedArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.25, 1.5, 1.75, 2.0])]
    w: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.25, 1.5, 1.75, 2.0])]
    l: Vec<f64>,
    /// Instead of one W x L table, vary alpha over these values with W = L.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_missing_value = "0,0.05,0.1,0.15,0.2")]
    sweep: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct AdviseArgs {
    /// Cubeless probability of winning.
    #[arg(long)]
    p: f64,
    /// Probability of winning a gammon or backgammon.
    #[arg(long, default_value_t = 0.0)]
    gammon_win: f64,
    #[arg(long, default_value_t = 0.0)]
    backgammon_win: f64,
    #[arg(long, default_value_t = 0.0)]
    gammon_loss: f64,
    #[arg(long, default_value_t = 0.0)]
    backgammon_loss: f64,
    #[arg(long, value_enum, default_value_t = CubeArg::Centered)]
    cube: CubeArg,
    #[arg(long, default_value_t = 1)]
    cube_value: u32,
    #[command(flatten)]
    vols: VolArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Linear)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = DistArg::Laplace)]
    dist: DistArg,
    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    buckets: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Expected absolute jump per ply.
    #[arg(long, default_value_t = 0.05)]
    alpha_ply: f64,
    #[arg(long, value_enum, default_value_t = DistArg::Laplace)]
    dist: DistArg,
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    /// `none`, `jump:ALPHA[:METHOD]`, or `stat:ALPHA[:METHOD]` for a
    /// statistical estimate.
    #[arg(long, default_value = "jump:0.075")]
    strategy_a: String,
    #[arg(long, default_value = "jump:0.075")]
    strategy_b: String,
    #[arg(long, default_value_t = 10_000)]
    games: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    cube_cap: u32,
    #[arg(long, default_value_t = 5000)]
    max_plies: usize,
    /// Also write the cube-free paths for the same seeds to this CSV file.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV with header `game_id,ply,p_win`.
    trajectories: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.20, 0.35])]
    low: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.65, 0.80])]
    high: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Points(a) => cmd_points(a),
        Command::Curve(a) => cmd_curve(a),
        Command::ImpliedX(a) => cmd_implied_x(a),
        Command::Advise(a) => cmd_advise(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

#[derive(Serialize)]
struct Iterations {
    owned_unavailable: usize,
    centered: usize,
    residual: f64,
}

#[derive(Serialize)]
struct LivePoints {
    tp: f64,
    cp: f64,
}

#[derive(Serialize)]
struct PointsReport {
    method: Method,
    w: f64,
    l: f64,
    alpha_local: f64,
    alpha_remote: f64,
    points: DecisionPoints,
    live: LivePoints,
    clamped: Vec<&'static str>,
    iterations: Option<Iterations>,
}

fn cmd_points(args: PointsArgs) -> Result<String, Error> {
    let (wl, vols, eval) = args.model.build()?;
    let points = eval.points()?;
    let report = PointsReport {
        method: eval.method(),
        w: wl.w(),
        l: wl.l(),
        alpha_local: vols.local,
        alpha_remote: vols.remote,
        points,
        live: LivePoints {
            tp: live_take_point(wl),
            cp: live_cash_point(wl),
        },
        clamped: points.clamped().into_iter().map(PointId::name).collect(),
        iterations: match &eval {
            Evaluator::Exact(s) => Some(Iterations {
                owned_unavailable: s.iterations_ou,
                centered: s.iterations_c,
                residual: s.residual,
            }),
            _ => None,
        },
    };
    Ok(match args.format {
        Format::Json => output::json(&report),
        Format::Csv => {
            let mut t = Table::new(["point", "value"]);
            for id in PointId::ALL {
                t.row([id.name().to_string(), points.get(id).to_string()]);
            }
            t.row(["live_tp".into(), report.live.tp.to_string()]);
            t.row(["live_cp".into(), report.live.cp.to_string()]);
            t.csv()
        }
        Format::Text => {
            let mut out = format!(
                "method {:?}  W={} L={}  alpha local={} remote={}\n",
                report.method, report.w, report.l, report.alpha_local, report.alpha_remote
            )
            .to_lowercase();
            for id in PointId::ALL {
                let flag = if points.is_clamped(id) { "  (clamped)" } else { "" };
                out.push_str(&format!("{:>6}  {:.5}{flag}\n", id.name(), points.get(id)));
            }
            out.push_str(&format!("live take {:.5}  live cash {:.5}\n", report.live.tp, report.live.cp));
            if let Some(it) = &report.iterations {
                out.push_str(&format!(
                    "iterations {} + {}, residual {:.2e}\n",
                    it.owned_unavailable, it.centered, it.residual
                ));
            }
            out
        }
    })
}

fn cmd_curve(args: CurveArgs) -> Result<String, Error> {
    let (_, _, eval) = args.model.build()?;
    let n = args.n_points as usize;
    let mut t = Table::new(["p", "e_centered", "e_owned", "e_unavailable"]);
    for k in 0..n {
        let p = if k == n - 1 { 1.0 } else { k as f64 / (n - 1) as f64 };
        t.row_f64([
            p,
            eval.equity(CubeOwner::Centered, p),
            eval.equity(CubeOwner::PlayerOwns, p),
            eval.equity(CubeOwner::OpponentOwns, p),
        ]);
    }
    Ok(t.render(args.format))
}

fn cmd_implied_x(args: ImpliedArgs) -> Result<String, Error> {
    if let Some(alphas) = args.sweep {
        if alphas.is_empty() {
            return Err(Error::Empty("alpha sweep"));
        }
        let mut header = vec!["alpha".to_string()];
        header.extend(args.w.iter().map(|w| format!("w=l={w}")));
        let mut t = Table::new(header);
        for &alpha in &alphas {
            let row = implied_index_table(&args.w, &args.w, alpha)?;
            let diag: Vec<f64> = (0..args.w.len()).map(|i| row.raw[i][i].x1).collect();
            t.row_f64(std::iter::once(alpha).chain(diag));
        }
        return Ok(match args.format {
            Format::Text => t.text_rounded(2),
            f => t.render(f),
        });
    }
    let table = implied_index_table(&args.w, &args.l, args.alpha)?;
    Ok(match args.format {
        Format::Json => output::json(&table),
        Format::Csv => table.to_csv(),
        Format::Text => table.to_text(),
    })
}

#[derive(Serialize)]
struct AdviceReport {
    summary: &'static str,
    w: f64,
    l: f64,
    #[serde(flatten)]
    advice: jumpcube::advisor::CubeAdvice,
}

fn cmd_advise(args: AdviseArgs) -> Result<String, Error> {
    let g = GammonProbs {
        p_win: args.p,
        p_gammon_win: args.gammon_win,
        p_backgammon_win: args.backgammon_win,
        p_gammon_loss: args.gammon_loss,
        p_backgammon_loss: args.backgammon_loss,
    };
    let wl = derive_win_loss(&g)?;
    let vols = args.vols.pair()?;
    let cube = CubeState::new(args.cube.into(), args.cube_value)?;
    let opts = EvalOptions {
        kind: args.dist.into(),
        buckets: args.buckets,
    };
    let eval = Evaluator::new(wl, vols, args.method.into(), opts)?;
    let advice = advise(&eval, args.p, cube)?;
    let report = AdviceReport {
        summary: advice.summary(),
        w: wl.w(),
        l: wl.l(),
        advice,
    };
    Ok(match args.format {
        Format::Json => output::json(&report),
        Format::Csv => {
            let e = &report.advice.equities;
            let mut t = Table::new(["summary", "p_win", "w", "l", "no_double", "double_take", "double_pass"]);
            t.row([
                report.summary.to_string(),
                args.p.to_string(),
                wl.w().to_string(),
                wl.l().to_string(),
                e.no_double.to_string(),
                e.double_take.to_string(),
                e.double_pass.to_string(),
            ]);
            t.csv()
        }
        Format::Text => {
            let e = &report.advice.equities;
            format!(
                "{}\n  no double    {:+.4}\n  double/take  {:+.4}\n  double/pass  {:+.4}\n  W={:.4} L={:.4}\n",
                report.summary, e.no_double, e.double_take, e.double_pass, wl.w(), wl.l()
            )
        }
    })
}

fn parse_strategy(spec: &str) -> Result<Box<dyn Strategy>, Error> {
    let bad = |reason: String| Error::InvalidParameter {
        name: "strategy",
        reason,
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["none"] => Ok(Box::new(Cubeless)),
        [kind @ ("jump" | "stat"), alpha, rest @ ..] if rest.len() <= 1 => {
            let alpha: f64 = alpha.parse().map_err(|_| bad(format!("bad volatility in `{spec}`")))?;
            let method = match rest.first() {
                Some(m) => m.parse()?,
                None => Method::Linear,
            };
            VolatilityPair::constant(alpha)?;
            Ok(Box::new(if *kind == "stat" {
                JumpStrategy::from_statistical(alpha, method)
            } else {
                JumpStrategy::new(alpha, method)
            }))
        }
        _ => Err(bad(format!("`{spec}`: expected none, jump:ALPHA[:METHOD] or stat:ALPHA[:METHOD]"))),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<String, Error> {
    let mut cfg = ProcessConfig::new(args.dist.into(), args.alpha_ply, WinLossParams::new(args.w, args.l)?)?;
    cfg.cube_cap = args.cube_cap;
    cfg.max_plies = args.max_plies;
    let a = parse_strategy(&args.strategy_a)?;
    let b = parse_strategy(&args.strategy_b)?;
    let result = sim::duel(&cfg, a.as_ref(), b.as_ref(), args.games, args.seed)?;
    if let Some(path) = &args.trajectories {
        let paths = sim::cubeless_trajectories(&cfg, args.games, args.seed)?;
        sim::write_trajectories(BufWriter::new(File::create(path)?), &paths)?;
    }
    if result.truncated > 0 {
        eprintln!("note: {} of {} games truncated", result.truncated, result.games);
    }
    Ok(match args.format {
        Format::Json => output::json(&result),
        Format::Csv => {
            let mut t = Table::new(["games", "mean_ppg", "stderr_ppg", "seed"]);
            t.row([
                result.games.to_string(),
                result.mean_ppg.to_string(),
                result.stderr_ppg.map_or(String::new(), |s| s.to_string()),
                result.seed.to_string(),
            ]);
            t.csv()
        }
        Format::Text => format!(
            "{} vs {}: {:+.4} ppg{} over {} games (seed {}, truncated {})\n",
            a.name(),
            b.name(),
            result.mean_ppg,
            result.stderr_ppg.map_or(String::new(), |s| format!(" ± {s:.4}")),
            result.games,
            result.seed,
            result.truncated
        ),
    })
}

fn cmd_estimate(args: EstimateArgs) -> Result<String, Error> {
    let window = |v: &[f64], name| {
        if v[0] <= v[1] {
            Ok(Window { lo: v[0], hi: v[1] })
        } else {
            Err(Error::InvalidParameter {
                name,
                reason: format!("{} > {}", v[0], v[1]),
            })
        }
    };
    let (low, high) = (window(&args.low, "low")?, window(&args.high, "high")?);
    let paths = sim::read_trajectories(BufReader::new(File::open(&args.trajectories)?))?;
    let r = sim::estimate_remote_volatility(&paths, low, high)?;
    Ok(match args.format {
        Format::Json => output::json(&r),
        Format::Csv => {
            let mut t = Table::new(["mean_abs_jump", "std_jump", "samples"]);
            t.row([r.mean_abs_jump.to_string(), r.std_jump.to_string(), r.samples.to_string()]);
            t.csv()
        }
        Format::Text => format!(
            "mean |dP| over two plies {:.5}\nstd dev {:.5}\nsamples {} from {} games\n",
            r.mean_abs_jump,
            r.std_jump,
            r.samples,
            paths.len()
        ),
    })
}
