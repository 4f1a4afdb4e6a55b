use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use wallsim::asymptotic::{
    jacobi_limit, regime, symmetric_pearcey, theta, MacroParams, PearceyParams, PearceyQuadrature,
};
use wallsim::dynamics::{simulate_with_rule, BottomRule};
use wallsim::kernel::{
    correlation, kernel_k, KernelMethod, KernelPoint, Precision, QuadratureSpec,
};
use wallsim::montecarlo::trajectory_rng;
use wallsim::transition::{LevelKernel, TransitionMatrix};
use wallsim::verify::{run_suites, Suite, VerifyConfig};
use wallsim::{height_function, InterlacedState, ModelParams, Rational};

#[derive(Parser)]
#[command(
    name = "wallsim",
    version,
    about = "Interlacing particles with a reflecting wall"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories from the densely packed start.
    Simulate(SimulateArgs),
    /// Exact level transition matrix on a truncated box.
    Transition(TransitionArgs),
    /// Correlation kernel entries and the correlation function.
    Kernel(KernelArgs),
    /// Limit kernels.
    Asymptotic(AsymptoticArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Height function of simulated states on a grid of sites.
    ExportSurface(SurfaceArgs),
}

#[derive(Args, Clone)]
#[group(required = false, multiple = false)]
struct ParamArgs {
    /// Geometric parameter q in [0, 1), e.g. 1/2 or 0.3.
    #[arg(long)]
    q: Option<String>,
    /// Jump parameter alpha = 2q/(1-q).
    #[arg(long)]
    alpha: Option<String>,
}

impl ParamArgs {
    fn params(&self) -> anyhow::Result<ModelParams> {
        Ok(match (&self.q, &self.alpha) {
            (Some(q), _) => ModelParams::new(ModelParams::parse_rational(q)?)?,
            (_, Some(a)) => ModelParams::from_alpha(ModelParams::parse_rational(a)?)?,
            _ => ModelParams::from_ratio(1, 2)?,
        })
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutArgs {
    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Reflected,
    HalfStepPositionTimeNBlocker,
    TimeNPosition,
}

impl From<RuleArg> for BottomRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Reflected => BottomRule::Reflected,
            RuleArg::HalfStepPositionTimeNBlocker => BottomRule::HalfStepPositionTimeNBlocker,
            RuleArg::TimeNPosition => BottomRule::TimeNPosition,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    trajectories: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Right-jump rule for the bottom particle of odd levels.
    #[arg(long, value_enum, default_value_t = RuleArg::Reflected)]
    rule: RuleArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Particle,
    Jacobi,
}

#[derive(Args)]
struct TransitionArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    level: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Particle)]
    kind: KindArg,
    /// Largest part in the truncated index set.
    #[arg(long, default_value_t = 4)]
    cap: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Contour,
    Residue,
}

#[derive(Args, Clone)]
struct QuadArgs {
    #[arg(long, default_value_t = 512)]
    nx: usize,
    #[arg(long, default_value_t = 512)]
    nu: usize,
    #[arg(long, default_value_t = 1.5)]
    contour_radius: f64,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Contour)]
    method: MethodArg,
}

impl QuadArgs {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            n_x: self.nx,
            n_u: self.nu,
            contour_radius: self.contour_radius,
            precision: match self.precision {
                PrecisionArg::Double => Precision::Double,
                PrecisionArg::Extended => Precision::Extended,
            },
            method: match self.method {
                MethodArg::Contour => KernelMethod::Contour,
                MethodArg::Residue => KernelMethod::Residue,
            },
        }
    }
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Time n.
    #[arg(long, default_value_t = 1)]
    steps: u32,
    /// Points as level:site, comma separated (e.g. 3:0,3:2).
    #[arg(long, value_delimiter = ',', required = true)]
    points: Vec<String>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[command(subcommand)]
    which: AsymptoticCommand,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Subcommand)]
enum AsymptoticCommand {
    /// Discrete Jacobi limit at macroscopic (t, ell).
    Jacobi {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        ell: f64,
        /// Relative points as dr:a:s with a in {-,+}, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<String>,
    },
    /// Symmetric Pearcey kernel.
    Pearcey {
        #[arg(long, allow_hyphen_values = true)]
        sigma1: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta1: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma2: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta2: f64,
        #[arg(long, default_value_t = 4)]
        panels: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or "all".
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 5)]
    max_level: usize,
    #[arg(long, default_value_t = 4)]
    max_part: u64,
    /// Override Monte Carlo trajectory counts.
    #[arg(long)]
    trajectories: Option<u64>,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
    /// Comma separated q values for the exact suites.
    #[arg(long, value_delimiter = ',', default_value = "1/4,1/2")]
    q: Vec<String>,
    #[command(flatten)]
    quad: QuadArgs,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 20)]
    levels: usize,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest site in the grid.
    #[arg(long, default_value_t = 40)]
    max_site: u64,
    #[command(flatten)]
    out: OutArgs,
}

fn write_json<T: Serialize>(w: &mut dyn Write, v: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)?;
    Ok(())
}

fn simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let params = a.params.params()?;
    let mut w = a.out.writer()?;
    let format = a.out.format_or(Format::Jsonl);
    let mut csv = (format == Format::Csv).then(|| csv::Writer::from_writer(Vec::new()));
    if let Some(c) = csv.as_mut() {
        c.write_record(["trajectory", "time", "level", "index", "shifted_position"])?;
    }
    let mut all = Vec::new();
    for t in 0..a.trajectories {
        let mut rng = trajectory_rng(a.seed, t);
        let traj = simulate_with_rule(&params, a.levels, a.steps, a.rule.into(), &mut rng)?;
        match format {
            Format::Csv => {
                let c = csv.as_mut().expect("csv writer");
                for s in &traj {
                    for k in 1..=s.num_levels() {
                        for (i, x) in s.simple_level(k).iter().enumerate() {
                            c.serialize((t, s.time(), k, i + 1, x))?;
                        }
                    }
                }
            }
            Format::Jsonl => {
                for s in &traj {
                    serde_json::to_writer(&mut w, &json!({"trajectory": t, "state": s}))?;
                    writeln!(w)?;
                }
            }
            Format::Json => all.push(traj),
        }
    }
    match format {
        Format::Csv => w.write_all(&csv.expect("csv writer").into_inner()?)?,
        Format::Json => write_json(
            &mut w,
            &json!({"q": params.q().to_string(), "trajectories": all}),
        )?,
        Format::Jsonl => {}
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TransitionEntry {
    lambda: String,
    beta: String,
    value_num: String,
    value_den: String,
}

fn transition(a: &TransitionArgs) -> anyhow::Result<()> {
    let params = a.params.params()?;
    let kind = match a.kind {
        KindArg::Particle => LevelKernel::Particle,
        KindArg::Jacobi => LevelKernel::Jacobi,
    };
    let m: TransitionMatrix<Rational> = TransitionMatrix::build(a.level, kind, params.q(), a.cap)?;
    let label = |p: &wallsim::Partition| {
        p.parts()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut rows = Vec::new();
    for (i, from) in m.index.iter().enumerate() {
        for (j, to) in m.index.iter().enumerate() {
            let v = &m.entries[i][j];
            rows.push(TransitionEntry {
                lambda: label(from),
                beta: label(to),
                value_num: v.numer().to_string(),
                value_den: v.denom().to_string(),
            });
        }
    }
    let mut w = a.out.writer()?;
    match a.out.format_or(Format::Csv) {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            for r in &rows {
                c.serialize(r)?;
            }
            c.flush()?;
        }
        Format::Json => write_json(
            &mut w,
            &json!({"level": a.level, "q": params.q().to_string(), "cap": a.cap, "entries": rows}),
        )?,
        Format::Jsonl => {
            for r in &rows {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_point(s: &str) -> anyhow::Result<KernelPoint> {
    let (k, site) = s.split_once(':').context("points are level:site")?;
    Ok(KernelPoint::at_level(
        k.trim().parse()?,
        site.trim().parse()?,
    )?)
}

fn kernel(a: &KernelArgs) -> anyhow::Result<()> {
    let params = a.params.params()?;
    let alpha = params.alpha_f64();
    let quad = a.quad.spec();
    quad.validate()?;
    let pts = a
        .points
        .iter()
        .map(|p| parse_point(p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (i, p1) in pts.iter().enumerate() {
        for (j, p2) in pts.iter().enumerate() {
            let v = kernel_k(p1, p2, a.steps, alpha, &quad)?;
            entries.push(json!({"i": i, "j": j, "p1": p1, "p2": p2, "value": v.value,
                                "imag_residue": v.imag_residue, "accurate": v.is_accurate()}));
        }
    }
    let rho = correlation(&pts, a.steps, alpha, &quad)?;
    let mut w = a.out.writer()?;
    match a.out.format_or(Format::Json) {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record(["i", "j", "value", "imag_residue"])?;
            for e in &entries {
                c.write_record(
                    [&e["i"], &e["j"], &e["value"], &e["imag_residue"]].map(|v| v.to_string()),
                )?;
            }
            c.flush()?;
        }
        _ => write_json(
            &mut w,
            &json!({"alpha": alpha, "n": a.steps, "quadrature": quad, "entries": entries,
                    "correlation": rho}),
        )?,
    }
    w.flush()?;
    Ok(())
}

fn parse_relative(s: &str, base: usize) -> anyhow::Result<KernelPoint> {
    let parts: Vec<&str> = s.split(':').collect();
    let [dr, a, site] = parts[..] else {
        bail!("relative points are dr:a:s, got {s}");
    };
    let a = match a {
        "-" | "-1/2" => wallsim::HalfParam::MinusHalf,
        "+" | "+1/2" => wallsim::HalfParam::PlusHalf,
        _ => bail!("a must be - or +, got {a}"),
    };
    Ok(KernelPoint::new(
        base + dr.parse::<usize>()?,
        a,
        site.parse()?,
    ))
}

fn asymptotic(a: &AsymptoticArgs) -> anyhow::Result<()> {
    let report = match &a.which {
        AsymptoticCommand::Jacobi {
            alpha,
            t,
            ell,
            points,
        } => {
            let m = MacroParams::new(*t, *ell, *alpha)?;
            let pts = points
                .iter()
                .map(|p| parse_relative(p, 0))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut entries = Vec::new();
            for p1 in &pts {
                for p2 in &pts {
                    entries.push(json!({"p1": p1, "p2": p2, "value": jacobi_limit(p1, p2, &m)?}));
                }
            }
            json!({"macro": m, "theta": theta(&m)?, "regime": format!("{:?}", regime(&m)),
                   "entries": entries})
        }
        AsymptoticCommand::Pearcey {
            sigma1,
            eta1,
            sigma2,
            eta2,
            panels,
        } => {
            let p = PearceyParams::new(*sigma1, *eta1, *sigma2, *eta2);
            let quad = PearceyQuadrature {
                panels_per_unit: *panels,
                ..Default::default()
            };
            json!({"params": p, "value": symmetric_pearcey(&p, &quad)?})
        }
    };
    let mut w = a.out.writer()?;
    write_json(&mut w, &report)?;
    w.flush()?;
    Ok(())
}

enum Outcome {
    Ok,
    VerificationFailed,
}

fn verify(a: &VerifyArgs) -> anyhow::Result<Outcome> {
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        a.suite
            .split(',')
            .map(|s| {
                Suite::from_name(s.trim()).ok_or_else(|| UsageError(format!("unknown suite {s}")))
            })
            .collect::<Result<_, _>>()?
    };
    let cfg = VerifyConfig {
        qs: a.q.clone(),
        max_level: a.max_level,
        max_part: a.max_part,
        trajectories: a.trajectories,
        seed: a.seed,
        quad: a.quad.spec(),
    };
    let report = run_suites(&suites, &cfg)?;
    for r in &report.results {
        println!("{}", r.summary_line());
    }
    if let Some(p) = &a.out {
        let mut w =
            BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
        write_json(&mut w, &report)?;
        w.flush()?;
    }
    Ok(if report.all_blocking_passed {
        Outcome::Ok
    } else {
        Outcome::VerificationFailed
    })
}

fn export_surface(a: &SurfaceArgs) -> anyhow::Result<()> {
    let params = a.params.params()?;
    let mut rng = trajectory_rng(a.seed, 0);
    let traj = simulate_with_rule(&params, a.levels, a.steps, BottomRule::Reflected, &mut rng)?;
    let last: &InterlacedState = traj.last().expect("at least the start state");
    let mut w = a.out.writer()?;
    match a.out.format_or(Format::Csv) {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record(["level", "site", "height"])?;
            for k in 1..=last.num_levels() {
                for s in 0..=a.max_site {
                    c.serialize((k, s, height_function(last, k, s)?))?;
                }
            }
            c.flush()?;
        }
        _ => {
            let grid = (1..=last.num_levels())
                .map(|k| {
                    (0..=a.max_site)
                        .map(|s| height_function(last, k, s))
                        .collect()
                })
                .collect::<wallsim::Result<Vec<Vec<usize>>>>()?;
            write_json(
                &mut w,
                &json!({"q": params.q().to_f64(), "time": last.time(), "height": grid}),
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a)?,
        Command::Transition(a) => transition(a)?,
        Command::Kernel(a) => kernel(a)?,
        Command::Asymptotic(a) => asymptotic(a)?,
        Command::Verify(a) => return verify(a),
        Command::ExportSurface(a) => export_surface(a)?,
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<UsageError>().is_some()
                || matches!(
                    e.downcast_ref::<wallsim::Error>(),
                    Some(
                        wallsim::Error::InvalidArguments(_) | wallsim::Error::NotInterlaced { .. }
                    )
                )
                || e.downcast_ref::<std::num::ParseIntError>().is_some();
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
