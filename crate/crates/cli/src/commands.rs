use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use elastica::closed_space::{self, GeodesicPath};
use elastica::config::RunConfig;
use elastica::curve::{DiscreteCurve, Topology};
use elastica::io::{self, DistanceTable, GeodesicRecord, PairStatus, ShapeFile};
use elastica::open_space;
use elastica::reparam::{self, MatchResult};
use elastica::selftest::{Selftest, SelftestConfig};
use elastica::shapes::{self, ShapeKind};
use elastica::transforms;
use elastica::{ElasticError, V2};

use crate::Failure;

pub struct Context {
    pub cfg: RunConfig,
    pub csv_topology: Topology,
}

impl Context {
    fn out_dir(&self) -> PathBuf {
        self.cfg.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Shape arguments: a JSON or CSV file, or `synth:<kind>` for a built-in
/// shape sampled with `--synth-n` nodes.
#[derive(Args, Debug)]
pub struct ShapeInputs {
    #[arg(long = "synth-n", default_value_t = 300)]
    synth_n: usize,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(required = true, num_args = 2..)]
    shapes: Vec<String>,
    /// Distances modulo reparameterization (closed shapes only).
    #[arg(long = "match")]
    matched: bool,
    /// Compute both directions of every pair.
    #[arg(long = "audit-symmetry")]
    audit: bool,
    /// Require open shapes and use the closed-form distance.
    #[arg(long)]
    open: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    inputs: ShapeInputs,
}

#[derive(Args, Debug)]
pub struct GeodesicArgs {
    from: String,
    to: String,
    /// Optimize the parameterization of the target first.
    #[arg(long = "match")]
    matched: bool,
    /// Time steps drawn in the SVG strip (default: every fifth of the path).
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<usize>>,
    #[command(flatten)]
    inputs: ShapeInputs,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    from: String,
    to: String,
    #[command(flatten)]
    inputs: ShapeInputs,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    kind: ShapeKind,
    #[arg(long, default_value_t = 300)]
    n: usize,
    /// Circle and arc radius scale.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ellipse semi-axes.
    #[arg(long, default_value_t = 2.0)]
    ax: f64,
    #[arg(long, default_value_t = 1.0)]
    ay: f64,
    /// Fold depth in [0, 1).
    #[arg(long, default_value_t = 0.8)]
    depth: f64,
    #[arg(long, default_value_t = 5)]
    arms: u32,
    #[arg(long, default_value_t = 0.3)]
    amp: f64,
    /// Opening angle of the arc.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    angle: f64,
    /// Name stored in the file (default: the kind).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Reduced checks at n = 64.
    #[arg(long)]
    quick: bool,
}

fn load(ctx: &Context, spec: &str, inputs: &ShapeInputs) -> Result<(String, DiscreteCurve), Failure> {
    let (name, c) = if let Some(kind) = spec.strip_prefix("synth:") {
        let kind: ShapeKind = kind.parse()?;
        (kind.name().to_string(), kind.sample(inputs.synth_n)?)
    } else {
        return Ok(io::load_shape(Path::new(spec), ctx.csv_topology, ctx.cfg.arclen)?);
    };
    let c = if ctx.cfg.arclen { shapes::arclength_reparam(&c)? } else { c };
    Ok((name, c))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn config_json(ctx: &Context, inputs: &[&str]) -> serde_json::Value {
    json!({ "run": ctx.cfg, "inputs": inputs })
}

enum Method {
    Flat,
    Rattle,
    Match,
}

impl Method {
    fn name(&self) -> &'static str {
        match self {
            Method::Flat => "flat",
            Method::Rattle => "rattle",
            Method::Match => "match",
        }
    }
}

fn method_for(curves: &[&DiscreteCurve], matched: bool, open_flag: bool) -> Result<Method, Failure> {
    let all_open = curves.iter().all(|c| c.topology() == Topology::Open);
    let all_closed = curves.iter().all(|c| c.topology() == Topology::Closed);
    if open_flag && !all_open {
        return Err(ElasticError::Topology("--open requires open shapes".into()).into());
    }
    if all_open {
        if matched {
            return Err(ElasticError::Topology("--match requires closed shapes".into()).into());
        }
        Ok(Method::Flat)
    } else if all_closed {
        Ok(if matched { Method::Match } else { Method::Rattle })
    } else {
        Err(ElasticError::Topology("cannot compare open and closed shapes".into()).into())
    }
}

fn pair_distance(ctx: &Context, method: &Method, c0: &DiscreteCurve, c1: &DiscreteCurve) -> Result<(f64, PairStatus), ElasticError> {
    let p = ctx.cfg.params()?;
    match method {
        Method::Flat => Ok((open_space::open_distance(c0, c1, &p)?, PairStatus::Converged)),
        Method::Rattle => match closed_space::param_distance(c0, c1, &p, &ctx.cfg.shooting()) {
            Ok(g) => Ok((g.distance, PairStatus::Converged)),
            Err(ElasticError::NoConvergence { residual, best, .. }) => {
                let w = best.path.states[0].weights();
                let d = transforms::l2_inner(&w, &best.momentum, &best.momentum).sqrt();
                Ok((d, PairStatus::NotConverged { residual }))
            }
            Err(e) => Err(e),
        },
        Method::Match => {
            let r = reparam::solve_bvp_shapes(c0, c1, &p, &ctx.cfg.matching())?;
            let status = if r.incompleteness_detected {
                PairStatus::Incomplete
            } else if !r.converged {
                PairStatus::StoppedEarly
            } else {
                PairStatus::Converged
            };
            Ok((r.final_distance, status))
        }
    }
}

pub fn dist(ctx: &Context, args: &DistArgs) -> Result<(), Failure> {
    let loaded = args
        .shapes
        .iter()
        .map(|s| load(ctx, s, &args.inputs))
        .collect::<Result<Vec<_>, _>>()?;
    let curves: Vec<&DiscreteCurve> = loaded.iter().map(|(_, c)| c).collect();
    let method = method_for(&curves, args.matched, args.open)?;
    let names: Vec<String> = loaded.iter().map(|(n, _)| n.clone()).collect();
    let n = names.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| if args.audit { i != j } else { i < j })
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<_> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let start = Instant::now();
                let r = pair_distance(ctx, &method, curves[i], curves[j]);
                (i, j, r, start.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut table = DistanceTable::new(names, method.name(), args.audit);
    for (i, j, r, secs) in results {
        table.seconds[i][j] = secs;
        match r {
            Ok((d, status)) => {
                table.distances[i][j] = Some(d);
                table.status[i][j] = status;
                if !args.audit {
                    table.distances[j][i] = Some(d);
                    table.seconds[j][i] = secs;
                }
            }
            Err(e) => {
                log::warn!("{} → {}: {e}", table.names[i], table.names[j]);
                table.status[i][j] = PairStatus::Failed { message: e.to_string() };
                if !args.audit {
                    table.status[j][i] = PairStatus::Failed { message: e.to_string() };
                }
            }
        }
    }

    print!("{}", table.to_csv());
    if let Some(a) = table.max_asymmetry().filter(|_| args.audit) {
        eprintln!("largest relative asymmetry {a:.3e}");
    }
    if let Some(dir) = &ctx.cfg.out {
        table.write(dir, "distances")?;
    }
    let computed = pairs.len();
    let failed = table.failures() / if args.audit { 1 } else { 2 };
    if computed > 0 && failed == computed {
        return Err(Failure::Numerical("every pair failed".into()));
    }
    Ok(())
}

fn default_snapshots(steps: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..=5).map(|k| (k * steps + 2) / 5).collect();
    s.dedup();
    s
}

fn lifted_curves(path: &GeodesicPath) -> Result<Vec<DiscreteCurve>, ElasticError> {
    path.states.iter().map(|q| transforms::r_inverse(q, V2::zeros())).collect()
}

pub fn geodesic(ctx: &Context, args: &GeodesicArgs) -> Result<(), Failure> {
    let (n0, c0) = load(ctx, &args.from, &args.inputs)?;
    let (n1, c1) = load(ctx, &args.to, &args.inputs)?;
    let method = method_for(&[&c0, &c1], args.matched, false)?;
    let p = ctx.cfg.params()?;
    let steps = ctx.cfg.steps;
    let mut deferred: Option<Failure> = None;

    let (distance, times, curves, diagnostics, extra) = match method {
        Method::Flat => {
            let g = open_space::open_geodesic(&c0, &c1, &p)?;
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
            let curves = times.iter().map(|t| g.eval_curve(*t)).collect::<Result<Vec<_>, _>>()?;
            (g.distance(), times, curves, Vec::new(), None)
        }
        Method::Rattle => {
            let (outcome, error) = match c0
                .check_same_grid(&c1)
                .and_then(|()| closed_space::param_distance(&c0, &c1, &p, &ctx.cfg.shooting()))
            {
                Ok(g) => (g.outcome, None),
                Err(ElasticError::NoConvergence { best, residual, iterations }) => (
                    *best,
                    Some(format!("no convergence after {iterations} iterations (residual {residual:e})")),
                ),
                Err(e) => return Err(e.into()),
            };
            let w = outcome.path.states[0].weights();
            let distance = transforms::l2_inner(&w, &outcome.momentum, &outcome.momentum).sqrt();
            let extra = json!({
                "iterations": outcome.iterations,
                "converged": outcome.converged,
                "residual_history": outcome.residual_history,
                "error": error,
            });
            if let Some(e) = error {
                deferred = Some(Failure::Numerical(e));
            }
            let curves = lifted_curves(&outcome.path)?;
            (distance, outcome.path.times.clone(), curves, outcome.path.diagnostics.clone(), Some(extra))
        }
        Method::Match => {
            let r = reparam::solve_bvp_shapes(&c0, &c1, &p, &ctx.cfg.matching())?;
            if r.incompleteness_detected {
                deferred = Some(Failure::Incomplete(
                    "refinement hit its cap: the matching degenerates (stretching concentrates in a region no grid resolves)".into(),
                ));
            }
            let curves = lifted_curves(&r.final_path)?;
            (
                r.final_distance,
                r.final_path.times.clone(),
                curves,
                r.final_path.diagnostics.clone(),
                Some(match_summary(&r, c0.len())),
            )
        }
    };

    let snaps = args.snapshots.clone().unwrap_or_else(|| default_snapshots(curves.len() - 1));
    if let Some(bad) = snaps.iter().find(|&&k| k >= curves.len()) {
        return Err(Failure::Usage(format!("snapshot {bad} exceeds the {} time steps", curves.len() - 1)));
    }
    let record = GeodesicRecord {
        method: method.name().into(),
        config: config_json(ctx, &[&n0, &n1]),
        distance,
        times: times.clone(),
        curves: GeodesicRecord::curves_from(&curves),
        diagnostics,
        extra,
    };
    let dir = ctx.out_dir();
    write(&dir.join("geodesic.json"), &record.to_json())?;
    let strip: Vec<(String, &DiscreteCurve)> = snaps
        .iter()
        .map(|&k| (format!("step {k}"), &curves[k]))
        .collect();
    write(&dir.join("geodesic.svg"), &io::snapshot_svg(&strip))?;
    println!("{} {n0} {n1} {distance}", method.name());
    deferred.map_or(Ok(()), Err)
}

fn match_summary(r: &MatchResult, n0: usize) -> serde_json::Value {
    let h0 = std::f64::consts::TAU / n0 as f64;
    json!({
        "initial_distance": r.initial_distance,
        "final_distance": r.final_distance,
        "distance_history": r.distance_history,
        "iterations": r.iterations,
        "converged": r.converged,
        "incompleteness_detected": r.incompleteness_detected,
        "refinement_log": r.refinement_log,
        "grid_size": r.psi.len(),
        "max_gap_over_h0": r.psi.max_gap() / h0,
        "psi": r.psi,
    })
}

pub fn matching(ctx: &Context, args: &MatchArgs) -> Result<(), Failure> {
    let (n0, c0) = load(ctx, &args.from, &args.inputs)?;
    let (n1, c1) = load(ctx, &args.to, &args.inputs)?;
    let r = reparam::solve_bvp_shapes(&c0, &c1, &ctx.cfg.params()?, &ctx.cfg.matching())?;
    let mut summary = match_summary(&r, c0.len());
    summary["config"] = config_json(ctx, &[&n0, &n1]);
    let mut text = serde_json::to_string_pretty(&summary).map_err(ElasticError::from)?;
    text.push('\n');
    write(&ctx.out_dir().join("match.json"), &text)?;
    println!(
        "{n0} {n1} {} -> {} in {} iterations",
        r.initial_distance, r.final_distance, r.iterations
    );
    if r.incompleteness_detected {
        return Err(Failure::Incomplete("refinement hit its cap".into()));
    }
    Ok(())
}

pub fn synth(ctx: &Context, args: &SynthArgs) -> Result<(), Failure> {
    let n = args.n;
    let c = match args.kind {
        ShapeKind::Circle => shapes::circle(n, args.radius)?,
        ShapeKind::Ellipse => shapes::ellipse(n, args.ax, args.ay)?,
        ShapeKind::EllipseFold => shapes::ellipse_fold(n, args.depth)?,
        ShapeKind::Star => shapes::star(n, args.arms, args.amp)?,
        ShapeKind::Segment => shapes::segment(n)?,
        ShapeKind::Arc => shapes::arc(n, args.angle)?.scaled(args.radius)?,
    };
    let c = if ctx.cfg.arclen { shapes::arclength_reparam(&c)? } else { c };
    let name = args.name.clone().unwrap_or_else(|| args.kind.name().to_string());
    let text = ShapeFile::from_curve(&name, &c).to_json();
    match &ctx.cfg.out {
        Some(dir) => write(&dir.join(format!("{name}.json")), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn selftest(ctx: &Context, args: &SelftestArgs) -> Result<(), Failure> {
    let report = Selftest::new(SelftestConfig {
        quick: args.quick,
        seed: ctx.cfg.seed,
        tol_f: ctx.cfg.tol_f,
    })
    .run();
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    let mut text = serde_json::to_string_pretty(&report).map_err(ElasticError::from)?;
    text.push('\n');
    print!("{text}");
    if let Some(dir) = &ctx.cfg.out {
        write(&dir.join("selftest.json"), &text)?;
    }
    if report.all_passed {
        Ok(())
    } else {
        let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
        Err(Failure::Numerical(format!("failed criteria: {}", failed.join(", "))))
    }
}
