//! `fpplab`: generate graphs, query geodesics, run experiments, verify
//! graphs and build powerlike envelopes.

mod manifest;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fpplab::experiments::{self, column_docs, csv_schema, ExperimentConfig, CSV_FILES};
use fpplab::fpp::{passage_time, sample_speeds};
use fpplab::geom::DEFAULT_DELTA_G;
use fpplab::pointproc::{sample_and_accept, verify_hole_property, DEFAULT_MARGIN, DEFAULT_SLAB};
use fpplab::scaling::{default_block_base, powerlike_check, sublin_majorant};
use fpplab::seed::stream;
use fpplab::verify::{verify_graph, VerifyOptions};
use fpplab::{AcceptedGraph, EdgeKind, Error, Point, SeedChain, SigmaCurve, SpeedDistribution, Window};
use serde::Serialize;
use serde_json::json;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  I/O or other runtime error
  2  invalid flags, configuration or schema mismatch
  3  the point process did not saturate the window
  4  query disconnected or outside the window
  5  excessive censoring in an experiment
  6  verify found a hard invariant failure

FPPLAB_SEED overrides the seed of gen, geodesic and experiment.
RUST_LOG controls logging (stderr only).";

#[derive(Parser)]
#[command(
    name = "fpplab",
    version,
    about = "First passage percolation on augmented Delaunay graphs"
)]
#[command(after_help = EXIT_CODES)]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a saturated accepted set and write its graph as JSON.
    Gen(GenArgs),
    /// Passage time and geodesic between two points of a graph.
    Geodesic(GeodesicArgs),
    /// Run an experiment from a TOML config.
    #[command(after_long_help = column_help())]
    Experiment(ExperimentArgs),
    /// Check the hole, separation, cell size, dilation and density
    /// properties of a graph.
    Verify(VerifyArgs),
    /// Sublinearly powerlike majorant of a sigma curve.
    Envelope(EnvelopeArgs),
    /// Print the CSV column schema as JSON.
    Schema,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    width: f64,
    #[arg(long)]
    height: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Augmentation threshold, in (0, 1).
    #[arg(long, default_value_t = DEFAULT_DELTA_G)]
    delta_g: f64,
    /// Width of the sampled band around the window.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GeodesicArgs {
    #[arg(long)]
    graph: PathBuf,
    /// exp[:mean], halfnormal[:scale] or uniform:a:b.
    #[arg(long, default_value = "exp:1")]
    speed: SpeedDistribution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_point)]
    from: Point,
    #[arg(long, value_parser = parse_point)]
    to: Point,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Dilation pairs per distance stratum.
    #[arg(long, default_value_t = 200)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distance from the sampled boundary at which edges and cells count as
    /// interior.
    #[arg(long, default_value_t = 3.0)]
    interior: f64,
}

#[derive(Args)]
struct EnvelopeArgs {
    /// A sigma.json written by `experiment`.
    #[arg(long)]
    curve: PathBuf,
    #[arg(long)]
    chi: f64,
    #[arg(long)]
    epsilon: f64,
    /// Block base M; chosen automatically when absent.
    #[arg(long)]
    m: Option<f64>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let p = Point::new(f(x)?, f(y)?);
    if p.x.is_finite() && p.y.is_finite() {
        Ok(p)
    } else {
        Err(format!("non-finite point `{s}`"))
    }
}

fn column_help() -> String {
    let mut s = String::from("Output columns:\n");
    for (file, _) in CSV_FILES {
        let _ = writeln!(s, "\n  {file}.csv");
        for (c, d) in column_docs(file).unwrap_or_default() {
            let _ = writeln!(s, "    {c:<22} {d}");
        }
    }
    s.push_str("\nAlso written: summary.json, sigma.json and manifest.json (SHA-256 of every output).");
    s
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::Config(_)
        | Error::Schema { .. }
        | Error::UnknownDistribution(_)
        | Error::DegenerateWindow(_)
        | Error::Json(_) => 2,
        Error::SaturationFailure { .. } => 3,
        Error::Disconnected(..) | Error::OutsideWindow(..) => 4,
        Error::ExcessiveCensoring { .. } => 5,
        _ => 1,
    }
}

enum Failure {
    Lib(Error),
    /// Ran to completion but found violations.
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn seed_override(seed: u64) -> Result<u64, Failure> {
    match std::env::var("FPPLAB_SEED") {
        Ok(v) => {
            let s = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("FPPLAB_SEED is not a u64: `{v}`")))?;
            log::info!("FPPLAB_SEED={s} overrides seed {seed}");
            Ok(s)
        }
        Err(_) => Ok(seed),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))).into())
}

fn print_json(v: &impl Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    match writeln!(std::io::stdout(), "{s}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn gen(a: GenArgs, json_out: bool) -> Result<(), Failure> {
    if !(a.delta_g > 0.0 && a.delta_g < 1.0) {
        return Err(
            Error::InvalidParameter(format!("--delta-g must lie in (0, 1), got {}", a.delta_g)).into(),
        );
    }
    let seed = seed_override(a.seed)?;
    let window = Window::new(Point::ORIGIN, Point::new(a.width, a.height), a.margin)?;
    let chain = SeedChain::new(seed);
    let (_, accepted) = sample_and_accept(window, 1.0, DEFAULT_SLAB, chain.derive(stream::POINTS, 0))?;
    let hole = verify_hole_property(&accepted, 1.0)?;
    let mut graph = AcceptedGraph::build(&accepted, a.delta_g)?;
    graph.seed_chain = Some(chain);
    std::fs::write(&a.out, graph.to_json()? + "\n")?;
    let count = |k| graph.edges.iter().filter(|e| e.kind == k).count();
    let summary = json!({
        "out": a.out,
        "seed": seed,
        "vertices": graph.len(),
        "edges": { "delaunay": count(EdgeKind::Delaunay), "augmentation": count(EdgeKind::Augmentation) },
        "max_empty_radius": hole.max_empty_radius,
        "hole_property": hole.pass,
    });
    if json_out {
        print_json(&summary)?;
    } else {
        println!("wrote {}", a.out.display());
        println!("vertices            {}", graph.len());
        println!("delaunay edges      {}", count(EdgeKind::Delaunay));
        println!("augmentation edges  {}", count(EdgeKind::Augmentation));
        println!("max empty radius    {:.6}", hole.max_empty_radius);
    }
    Ok(())
}

fn geodesic(a: GeodesicArgs) -> Result<(), Failure> {
    let graph = AcceptedGraph::from_json(&read(&a.graph)?)?;
    let seed = seed_override(a.seed)?;
    let speed_seed = SeedChain::new(seed).derive(stream::SPEEDS, 0);
    let speeds = sample_speeds(&graph, a.speed, speed_seed)?;
    let g = passage_time(&graph, &speeds, a.from, a.to)?;
    let hops: Vec<_> = g
        .path
        .windows(2)
        .map(|w| {
            let e = graph
                .edge_between(w[0] as usize, w[1] as usize)
                .expect("geodesic hop is an edge");
            json!({
                "a": w[0],
                "b": w[1],
                "kind": graph.edges[e].kind,
                "length": graph.edges[e].length,
                "speed": speeds.speeds[e],
            })
        })
        .collect();
    print_json(&json!({
        "from": g.x,
        "to": g.y,
        "speed": a.speed.to_string(),
        "seed": seed,
        "time": g.time.to_f64(),
        "time_ticks": g.time.ticks().to_string(),
        "path": g.path,
        "wandering": g.wandering,
        "censored": g.censored,
        "edges": hops,
    }))
}

fn experiment(a: ExperimentArgs, json_out: bool) -> Result<(), Failure> {
    let text = read(&a.config)?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    cfg.seed = seed_override(cfg.seed)?;
    let started = manifest::unix_now();
    let t = Instant::now();
    let out = experiments::run(&cfg, a.jobs)?;
    let wall = t.elapsed().as_secs_f64();
    let files = out.write(&a.out)?;
    let m = manifest::RunManifest::new(&cfg, a.jobs, started, wall, &a.out, &files)?;
    let path = m.write(&a.out)?;
    for w in &out.summary.warnings {
        log::warn!("{w}");
    }
    if json_out {
        print_json(&m)?;
    } else {
        println!("{} replicas in {wall:.1}s", cfg.replicas);
        for f in &m.outputs {
            println!("  {}  {}", &f.sha256[..16], f.file);
        }
        println!("manifest {}", path.display());
    }
    Ok(())
}

fn verify(a: VerifyArgs, json_out: bool) -> Result<(), Failure> {
    let graph = AcceptedGraph::from_json(&read(&a.graph)?)?;
    let opts = VerifyOptions {
        pairs_per_distance: a.pairs,
        seed: a.seed,
        interior: a.interior,
        ..VerifyOptions::default()
    };
    let r = verify_graph(&graph, &opts)?;
    if json_out {
        print_json(&r)?;
    } else {
        let mark = |ok: bool| if ok { "ok  " } else { "FAIL" };
        println!(
            "{} hole          max empty radius {:.6} (< 1)",
            mark(r.hole.pass),
            r.hole.max_empty_radius
        );
        for (name, c) in [
            ("separation", &r.separation),
            ("cell size", &r.cell_size),
            ("dilation", &r.dilation),
        ] {
            println!(
                "{} {name:<13} {} checked, {} violations, worst {:.6} (limit {:.6})",
                mark(c.violations == 0),
                c.checked,
                c.violations,
                c.worst,
                c.limit
            );
        }
        println!("     delaunay-only dilation {:.4}", r.delaunay_dilation);
        if let Some(d) = r.density {
            println!(
                "     density r={}: mean {:.3}, max {:.3} over {} centres",
                d.radius, d.mean, d.max, d.centers
            );
        }
    }
    if r.pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn envelope(a: EnvelopeArgs) -> Result<(), Failure> {
    let curve: SigmaCurve = serde_json::from_str(&read(&a.curve)?).map_err(Error::from)?;
    let samples: Vec<(f64, f64)> = curve
        .entries
        .iter()
        .filter(|e| e.r > 1.0 && e.sigma > 0.0)
        .map(|e| (e.r, e.sigma))
        .collect();
    let m = match a.m {
        Some(m) => m,
        None => default_block_base(&samples, a.chi, a.epsilon)?,
    };
    let env = sublin_majorant(&samples, a.chi, m, a.epsilon)?;
    let params = env.params();
    let check = powerlike_check(&env.as_curve()?, &params)?;
    print_json(&json!({
        "envelope": env,
        "params": params,
        "rho_tilde": env.as_curve()?.entries,
        "check": check,
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let json_out = cli.json;
    let res = match cli.command {
        Command::Gen(a) => gen(a, json_out),
        Command::Geodesic(a) => geodesic(a),
        Command::Experiment(a) => experiment(a, json_out),
        Command::Verify(a) => verify(a, json_out),
        Command::Envelope(a) => envelope(a),
        Command::Schema => print_json(&csv_schema()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => {
            log::error!("verification failed");
            ExitCode::from(6)
        }
        Err(Failure::Lib(e)) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
