//! `rqa`: correlation sums, determinism and recurrence plots for interval
//! maps, plus the exact constructions shipped with `rqa-core`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rqa_core::constructions::oscillating::{c1_table, write_c1_csv};
use rqa_core::constructions::{build_delahaye, build_oscillating};
use rqa_core::dynamics::{detect_periodic, preset, MapJson, PiecewiseLinearMap, PRESETS};
use rqa_core::finite_omega::{orbit_to_rational, OrbitReport, PeriodicOrbitData};
use rqa_core::interval_config::{epsilon_pairs, extremal_configuration, zero_configuration, ConfigurationJson};
use rqa_core::report::{write_correlation_csv, write_json, write_ratio_csv, ConfigReport, CorrelationRow, RatioRow};
use rqa_core::rqa::{
    correlation_sum, estimate_asymptotics, recurrence_determinism, recurrence_matrix, rqa_det, MapSource, RqaParams,
    DEFAULT_TAIL_FRACTION,
};
use rqa_core::solenoidal::{asymptotic_corr_sum, write_counts_csv, AdmissibleSystem};
use rqa_core::{parse_rational, Error, Scalar};

#[derive(Parser)]
#[command(name = "rqa", version, about = "Recurrence quantification for interval maps")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation sums C_m over a schedule of segment lengths (CSV).
    Corrsum(SeriesArgs),
    /// Recurrence determinism rdet_m = C_m / C_1 (CSV).
    Rdet(SeriesArgs),
    /// DET_m = m·rdet_m - (m-1)·rdet_{m+1} (CSV).
    Det(SeriesArgs),
    /// Recurrence plot as a P1 bitmap.
    Rplot(PlotArgs),
    /// ε-pair set of an interval configuration (JSON).
    Config(ConfigArgs),
    /// Pair counts and enclosures for the Delahaye-type admissible system (CSV).
    Solenoid(SolenoidArgs),
    /// The map whose correlation sums at ε = 1/2 oscillate.
    #[command(visible_alias = "prop42")]
    Oscillating(OscillatingArgs),
    /// Counts and determinism limits for the Delahaye-type system (JSON).
    #[command(visible_alias = "prop52")]
    Delahaye(DelahayeArgs),
    /// Asymptotic correlation sum for an attracting periodic orbit (JSON).
    Omega(OmegaArgs),
    /// Orbit points x, f(x), … (CSV).
    Trajectory(TrajectoryArgs),
}

#[derive(Args)]
struct MapArgs {
    /// Map as JSON {"breakpoints": [...], "values": [...]}.
    #[arg(long, conflicts_with = "preset")]
    map: Option<PathBuf>,

    /// A shipped map: three-cycle, two-cycle or tent.
    #[arg(long)]
    preset: Option<String>,

    /// Base point.
    #[arg(long)]
    x: String,

    /// Use f64 arithmetic; allows decimal ε and x.
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    source: MapArgs,

    /// Window lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    m: Vec<usize>,

    #[arg(long)]
    epsilon: String,

    /// Strictly increasing segment lengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,

    /// Emit the n-series with liminf/limsup tail estimates instead (single m).
    #[arg(long)]
    estimate: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    source: MapArgs,

    #[arg(long, default_value_t = 1)]
    m: usize,

    #[arg(long)]
    epsilon: String,

    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct ConfigArgs {
    /// Generate the configuration with 4(n-1) pairs.
    #[arg(long, group = "kind")]
    extremal: bool,

    /// Generate a configuration with no pairs.
    #[arg(long, group = "kind")]
    zero: bool,

    /// Read intervals from JSON [["lo", "hi"], ...].
    #[arg(long, group = "kind")]
    input: Option<PathBuf>,

    #[arg(long)]
    n: Option<usize>,

    #[arg(long)]
    epsilon: String,
}

#[derive(Args)]
struct SolenoidArgs {
    #[arg(long, default_value_t = 5)]
    r: u32,

    #[arg(long, default_value_t = 13)]
    depth_cap: usize,

    #[arg(long, default_value_t = 1)]
    m: usize,

    #[arg(long)]
    epsilon: String,

    /// Depths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Positions,
    Map,
    C1Table,
    Report,
}

#[derive(Args)]
struct OscillatingArgs {
    #[arg(long)]
    depth: usize,

    #[arg(long, value_enum, default_value = "c1-table")]
    emit: Emit,
}

#[derive(Args)]
struct DelahayeArgs {
    #[arg(long, default_value_t = 5)]
    r: u32,

    #[arg(long)]
    k: usize,

    #[arg(long, default_value_t = 2)]
    m: usize,

    /// Depth for the counts; defaults to k + 1.
    #[arg(long)]
    t: Option<usize>,

    #[arg(long, default_value_t = 13)]
    depth_cap: usize,
}

#[derive(Args)]
struct OmegaArgs {
    /// Cycle points in dynamical order, comma separated exact fractions.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["map", "preset"])]
    orbit: Vec<String>,

    #[arg(long, conflicts_with = "preset")]
    map: Option<PathBuf>,

    #[arg(long)]
    preset: Option<String>,

    /// Base point when detecting the cycle from a map (f64).
    #[arg(long)]
    x: Option<f64>,

    /// Trajectory length used for detection.
    #[arg(long, default_value_t = 2000)]
    len: usize,

    /// Residual tolerance for detection.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,

    #[arg(long, default_value_t = 1)]
    m: usize,

    #[arg(long)]
    epsilon: String,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    source: MapArgs,

    #[arg(long)]
    n: usize,
}

/// Exact fraction from the command line; decimals need `--float`.
fn exact(text: &str, what: &str) -> Result<BigRational> {
    if text.contains(['.', 'e', 'E']) {
        bail!("{what} {text:?} must be an exact fraction such as 1/2 (use --float for decimals)");
    }
    parse_rational(text).with_context(|| format!("parsing {what}"))
}

fn float(text: &str, what: &str) -> Result<f64> {
    if text.contains('/') {
        return Ok(Scalar::to_f64(&parse_rational(text)?));
    }
    text.parse().with_context(|| format!("parsing {what} {text:?}"))
}

fn load_map(path: &Option<PathBuf>, name: &Option<String>) -> Result<PiecewiseLinearMap<BigRational>> {
    match (path, name) {
        (Some(path), _) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let json: MapJson = serde_json::from_reader(file).context("reading map JSON")?;
            Ok(json.to_map()?)
        }
        (None, Some(name)) => preset(name)
            .with_context(|| format!("unknown preset {name:?}; choose one of {}", PRESETS.join(", "))),
        (None, None) => bail!("give --map or --preset"),
    }
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_schedule(n: &[usize]) -> Result<()> {
    if n.windows(2).any(|w| w[0] >= w[1]) {
        bail!("segment lengths must be strictly increasing");
    }
    Ok(())
}

/// Runs the table subcommands in either arithmetic.
fn series<T: Scalar>(
    kind: &Command,
    args: &SeriesArgs,
    map: PiecewiseLinearMap<T>,
    x: T,
    epsilon: T,
    out: &mut dyn Write,
) -> Result<()> {
    check_schedule(&args.n)?;
    let label = args.epsilon.clone();
    let longest = args.n.last().copied().unwrap_or(1);
    let widest = args.m.iter().copied().max().unwrap_or(1);
    // one trajectory serves every row; DET needs one extra point
    let trajectory = map.iterate(&x, longest + widest)?;
    if args.estimate {
        let [m] = args.m[..] else {
            bail!("--estimate takes a single --m");
        };
        let source = MapSource { map, base: x };
        let est = estimate_asymptotics(&source, m, &epsilon, &args.n, DEFAULT_TAIL_FRACTION)?;
        est.write_csv(&mut *out)?;
        eprintln!("liminf_est {} limsup_est {}", est.liminf_est, est.limsup_est);
        return Ok(());
    }
    match kind {
        Command::Corrsum(_) => {
            let mut rows = Vec::new();
            for &m in &args.m {
                for &n in &args.n {
                    let value = correlation_sum(&trajectory, &RqaParams::new(m, epsilon.clone(), n)?)?;
                    rows.push(CorrelationRow { m, n, epsilon: label.clone(), value });
                }
            }
            write_correlation_csv(&rows, out)?;
        }
        Command::Rdet(_) | Command::Det(_) => {
            let det = matches!(kind, Command::Det(_));
            let mut rows = Vec::new();
            for &m in &args.m {
                for &n in &args.n {
                    let p = RqaParams::new(m, epsilon.clone(), n)?;
                    let value = if det {
                        rqa_det(&trajectory, &p)?
                    } else {
                        recurrence_determinism(&trajectory, &p)?.ratio()
                    };
                    rows.push(RatioRow { m, n, epsilon: label.clone(), value });
                }
            }
            write_ratio_csv(if det { "det" } else { "rdet" }, &rows, out)?;
        }
        _ => unreachable!("series handles table subcommands only"),
    }
    Ok(())
}

fn with_arithmetic(kind: &Command, args: &SeriesArgs, out: &mut dyn Write) -> Result<()> {
    let map = load_map(&args.source.map, &args.source.preset)?;
    if args.source.float {
        let x = float(&args.source.x, "x")?;
        let eps = float(&args.epsilon, "epsilon")?;
        series(kind, args, map.to_f64()?, x, eps, out)
    } else {
        let x = exact(&args.source.x, "x")?;
        let eps = exact(&args.epsilon, "epsilon")?;
        series(kind, args, map, x, eps, out)
    }
}

fn plot<T: Scalar>(args: &PlotArgs, map: PiecewiseLinearMap<T>, x: T, eps: T, out: &mut dyn Write) -> Result<()> {
    let p = RqaParams::new(args.m, eps, args.n)?;
    let trajectory = map.iterate(&x, p.required_len())?;
    recurrence_matrix(&trajectory, &p)?.write_pgm(out)?;
    Ok(())
}

fn trajectory<T: Scalar>(args: &TrajectoryArgs, map: PiecewiseLinearMap<T>, x: T, out: &mut dyn Write) -> Result<()> {
    map.iterate(&x, args.n)?.write_csv(out)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct MapReport {
    depth: usize,
    #[serde(flatten)]
    map: MapJson,
    slope: String,
    fixed_point: String,
}

fn run(cli: Cli) -> Result<()> {
    let mut out = sink(&cli.output)?;
    match &cli.command {
        kind @ (Command::Corrsum(args) | Command::Rdet(args) | Command::Det(args)) => {
            with_arithmetic(kind, args, &mut out)?;
        }
        Command::Rplot(args) => {
            let map = load_map(&args.source.map, &args.source.preset)?;
            if args.source.float {
                let (x, eps) = (float(&args.source.x, "x")?, float(&args.epsilon, "epsilon")?);
                plot(args, map.to_f64()?, x, eps, &mut out)?;
            } else {
                let (x, eps) = (exact(&args.source.x, "x")?, exact(&args.epsilon, "epsilon")?);
                plot(args, map, x, eps, &mut out)?;
            }
        }
        Command::Trajectory(args) => {
            let map = load_map(&args.source.map, &args.source.preset)?;
            if args.source.float {
                trajectory(args, map.to_f64()?, float(&args.source.x, "x")?, &mut out)?;
            } else {
                trajectory(args, map, exact(&args.source.x, "x")?, &mut out)?;
            }
        }
        Command::Config(args) => {
            let eps = exact(&args.epsilon, "epsilon")?;
            let config = if let Some(path) = &args.input {
                let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let json: ConfigurationJson = serde_json::from_reader(file).context("reading configuration JSON")?;
                json.to_config()?
            } else {
                let n = args.n.context("--n is required with --extremal or --zero")?;
                if args.extremal {
                    extremal_configuration(n, &eps)?
                } else if args.zero {
                    zero_configuration(n, &eps)?
                } else {
                    bail!("choose --extremal, --zero or --input");
                }
            };
            let set = epsilon_pairs(&config, &eps)?;
            write_json(&ConfigReport::new(&config, &set), &mut out)?;
        }
        Command::Solenoid(args) => {
            let system = AdmissibleSystem::delahaye(args.r, args.depth_cap);
            let eps = exact(&args.epsilon, "epsilon")?;
            write_counts_csv(&asymptotic_corr_sum(&system, args.m, &eps, &args.t)?, &mut out)?;
        }
        Command::Oscillating(args) => {
            let inst = build_oscillating(args.depth)?;
            match args.emit {
                Emit::Positions => {
                    let points = inst.positions(inst.capacity())?;
                    rqa_core::dynamics::Trajectory::from_points(points)?.write_csv(&mut out)?;
                }
                Emit::Map => {
                    let m = inst.numeric_map(args.depth)?;
                    write_json(
                        &MapReport {
                            depth: m.depth,
                            map: MapJson::from_map(&m.map),
                            slope: rqa_core::format_rational(&m.slope),
                            fixed_point: rqa_core::format_rational(&m.fixed_point),
                        },
                        &mut out,
                    )?;
                }
                Emit::C1Table => write_c1_csv(&c1_table(args.depth), &mut out)?,
                Emit::Report => write_json(&inst.report()?, &mut out)?,
            }
        }
        Command::Delahaye(args) => {
            let inst = build_delahaye(args.r, args.depth_cap)?;
            write_json(&inst.report(args.k, args.m, args.t)?, &mut out)?;
        }
        Command::Omega(args) => {
            let eps = exact(&args.epsilon, "epsilon")?;
            let orbit = if !args.orbit.is_empty() {
                let points = args
                    .orbit
                    .iter()
                    .map(|s| exact(s, "orbit point"))
                    .collect::<Result<Vec<_>>>()?;
                PeriodicOrbitData::new(points)?
            } else {
                let map = load_map(&args.map, &args.preset)?.to_f64()?;
                let x = args.x.context("--x is required when detecting from a map")?;
                let t = map.iterate(&x, args.len)?;
                let detected = detect_periodic(&t, &args.tol)
                    .context("no periodic tail found; raise --len or --tol")?;
                orbit_to_rational(&PeriodicOrbitData::from_detected(&detected)?)?
            };
            let report = OrbitReport::new(&orbit, args.m, &eps)?;
            if !report.excluded.is_empty() && report.excluded.contains(&report.epsilon) {
                eprintln!("warning: epsilon equals a Bowen distance between cycle points; the limit may not exist");
            }
            write_json(&report, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let guard = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<Error>(), Some(Error::ResourceGuard { .. })));
            ExitCode::from(if guard { 2 } else { 1 })
        }
    }
}
