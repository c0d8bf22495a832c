//! `elastica`: distances, geodesics and matching of plane curves from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 geodesic incompleteness detected.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastica::config::RunConfig;
use elastica::curve::Topology;
use elastica::ElasticError;

#[derive(Parser, Debug)]
#[command(name = "elastica", version, about = "Elastic shape analysis of plane curves")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Bending weight of the elastic metric.
    #[arg(long, global = true, default_value_t = 1.0)]
    a: f64,
    /// Stretching weight of the elastic metric (4b² ≥ a²).
    #[arg(long, global = true, default_value_t = 0.5)]
    b: f64,
    /// Time steps of closed-curve geodesics.
    #[arg(long, global = true, default_value_t = 25)]
    steps: usize,
    /// Tolerance on the closure constraint.
    #[arg(long = "tol-f", global = true, default_value_t = 1e-10)]
    tol_f: f64,
    /// Absolute tolerance of the boundary value solver.
    #[arg(long = "eps-bvp", global = true)]
    eps_bvp: Option<f64>,
    /// Relative stopping threshold of the matching descent.
    #[arg(long = "tol-rel", global = true, default_value_t = 1e-4)]
    tol_rel: f64,
    /// Iteration cap of the boundary value solver.
    #[arg(long = "max-iter", global = true, default_value_t = 500)]
    max_iter: usize,
    /// Adaptive grid refinement during matching (default on).
    #[arg(long, global = true, overrides_with = "no_refine")]
    refine: bool,
    #[arg(long = "no-refine", global = true, overrides_with = "refine")]
    no_refine: bool,
    /// Grid size cap for refinement, as a multiple of the input size.
    #[arg(long = "refine-cap", global = true, default_value_t = 8)]
    refine_cap: usize,
    /// Resample inputs proportionally to arc length.
    #[arg(long, global = true)]
    arclen: bool,
    /// Topology assumed for CSV inputs.
    #[arg(long, global = true, value_parser = parse_topology, default_value = "closed")]
    topology: Topology,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
}

impl GlobalArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            a: self.a,
            b: self.b,
            steps: self.steps,
            tol_f: self.tol_f,
            eps_bvp: self.eps_bvp,
            tol_rel: self.tol_rel,
            max_iter: self.max_iter,
            refine: !self.no_refine,
            refine_cap: self.refine_cap,
            arclen: self.arclen,
            out: self.out.clone(),
            seed: self.seed,
            ..RunConfig::default()
        }
    }
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    match s {
        "open" => Ok(Topology::Open),
        "closed" => Ok(Topology::Closed),
        _ => Err(format!("expected `open` or `closed`, got `{s}`")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pairwise distance table.
    Dist(commands::DistArgs),
    /// Geodesic between two shapes, written as JSON and an SVG strip.
    Geodesic(commands::GeodesicArgs),
    /// Optimal reparameterization between two closed shapes.
    Match(commands::MatchArgs),
    /// Write a synthetic shape file.
    Synth(commands::SynthArgs),
    /// Run the acceptance checks.
    Selftest(commands::SelftestArgs),
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Incomplete(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Incomplete(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Incomplete(m) => m,
        }
    }
}

impl From<ElasticError> for Failure {
    fn from(e: ElasticError) -> Self {
        use ElasticError::*;
        let msg = e.to_string();
        match e {
            Regularity { .. }
            | TooFewNodes(_)
            | InvalidGrid(_)
            | InvalidParams { .. }
            | InvalidConfig(_)
            | Topology(_)
            | GridMismatch(_)
            | Unsupported(_)
            | Dimension { .. }
            | Parse { .. }
            | Io(_)
            | Json(_) => Failure::Usage(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = cli.global.config();
    let ctx = commands::Context {
        cfg,
        csv_topology: cli.global.topology,
    };
    let result = ctx
        .cfg
        .validate()
        .map_err(Failure::from)
        .and_then(|()| match &cli.command {
            Command::Dist(a) => commands::dist(&ctx, a),
            Command::Geodesic(a) => commands::geodesic(&ctx, a),
            Command::Match(a) => commands::matching(&ctx, a),
            Command::Synth(a) => commands::synth(&ctx, a),
            Command::Selftest(a) => commands::selftest(&ctx, a),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("elastica: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
