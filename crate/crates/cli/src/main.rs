use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rmrp_core::checkpoint::Checkpoint;
use rmrp_core::embedding::{sweep_dimension, verify_residual_energy, EmbeddingSpec, SweepConfig};
use rmrp_core::field::{fit_field, FieldKind, TrainingSet};
use rmrp_core::geometry::Point3;
use rmrp_core::{ParametricField, SparseProjection};
use rmrp_harness::config::HarnessConfig;
use rmrp_harness::experiments::{complete_scene, train_completion_prior, FieldSettings};
use rmrp_harness::generators::{generate_scene, GeneratorParams, GeneratorRegistry};
use rmrp_harness::metrics::{evaluate_mapping, MappingMetrics};
use rmrp_harness::planning::{plan_frontend, plan_uav, plan_ugv, samples_csv, summarize, trace_csv, PlannerConfig};
use rmrp_harness::scene::Scene;
use rmrp_harness::sensing::{esdf_samples, terrain_samples, to_terrain_set, to_training_set, ScanSample};
use rmrp_harness::suites::{run_benchmark, SuiteRegistry};

#[derive(Parser)]
#[command(name = "rmrp", version, about = "Parametric mapping and planning with sparse random projections")]
struct Cli {
    /// Base seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Harness configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated scene as TOML.
    Scene(SceneArgs),
    /// Fit a field to a scene (simulated sensing) or a samples CSV.
    Train(TrainArgs),
    /// Evaluate a checkpoint at points.
    Query(QueryArgs),
    /// Plan a UAV trajectory through a scene.
    PlanUav(PlanUavArgs),
    /// Plan a ground-vehicle trajectory over terrain.
    PlanUgv(PlanUgvArgs),
    /// Fill a scene's blind-spot mask from an occupancy prior.
    Complete(CompleteArgs),
    /// Monte-Carlo check of the residual-energy bounds.
    VerifyTheorem(TheoremArgs),
    /// Run benchmark suites.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct SceneSource {
    /// Scene TOML file.
    #[arg(long, conflicts_with = "generator")]
    scene: Option<PathBuf>,
    /// Generator name, used when no scene file is given.
    #[arg(long)]
    generator: Option<String>,
    /// Generator parameter `key=value` (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl SceneSource {
    fn load(&self, seed: u64) -> Result<Scene> {
        match (&self.scene, &self.generator) {
            (Some(p), _) => Scene::load(p),
            (None, Some(g)) => {
                let params = self.params.iter().fold(GeneratorParams::default(), |p, (k, v)| p.with(k, *v));
                generate_scene(g, &params, seed)
            }
            (None, None) => bail!("give --scene <file> or --generator <name>"),
        }
    }
}

#[derive(Args)]
struct SceneArgs {
    #[command(flatten)]
    source: SceneSource,
    /// List generators and exit.
    #[arg(long)]
    list: bool,
    /// Output file name inside --out.
    #[arg(long, default_value = "scene.toml")]
    output: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Occupancy,
    Esdf,
    Terrain,
}

impl Kind {
    fn field_kind(self) -> FieldKind {
        match self {
            Kind::Occupancy => FieldKind::Occupancy,
            Kind::Esdf => FieldKind::Esdf,
            Kind::Terrain => FieldKind::Terrain,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    source: SceneSource,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Samples CSV (`x,y,z,label`; `x,y,label` for terrain) instead of simulated sensing.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Lift dimension `M`.
    #[arg(long)]
    feature_dim: Option<usize>,
    /// Projection rows `k` (defaults to `M/2`).
    #[arg(long)]
    projection_dim: Option<usize>,
    /// Random-feature weight scale.
    #[arg(long)]
    scale: Option<f64>,
    /// Ridge regularization.
    #[arg(long)]
    alpha: Option<f64>,
    /// Also write the training samples as CSV.
    #[arg(long)]
    export_samples: bool,
    /// Checkpoint file name inside --out (default `<kind>.ckpt`).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Points CSV with `x,y,z` (or `x,y`) columns.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Single point `x,y,z` (repeatable).
    #[arg(long = "point", value_parser = parse_vector)]
    point: Vec<Vec<f64>>,
    /// Append gradient columns.
    #[arg(long)]
    gradient: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    Frontend,
    Full,
}

#[derive(Args)]
struct PlanUavArgs {
    #[command(flatten)]
    source: SceneSource,
    /// Occupancy checkpoint; trained from the scene when absent.
    #[arg(long)]
    occupancy: Option<PathBuf>,
    /// ESDF checkpoint; trained from the scene when absent.
    #[arg(long)]
    esdf: Option<PathBuf>,
    #[arg(long, value_parser = parse_point)]
    start: Option<Point3>,
    #[arg(long, value_parser = parse_point)]
    goal: Option<Point3>,
    #[arg(long, value_enum, default_value = "full")]
    stage: Stage,
}

#[derive(Args)]
struct PlanUgvArgs {
    #[command(flatten)]
    source: SceneSource,
    /// Terrain checkpoint; trained from the scene when absent.
    #[arg(long)]
    terrain: Option<PathBuf>,
    #[arg(long, value_parser = parse_point)]
    start: Option<Point3>,
    #[arg(long, value_parser = parse_point)]
    goal: Option<Point3>,
    /// Terrain weight `λ_t` (overrides the config).
    #[arg(long)]
    terrain_weight: Option<f64>,
}

#[derive(Args)]
struct CompleteArgs {
    #[command(flatten)]
    source: SceneSource,
    /// Occupancy prior; trained on complete generated scenes when absent.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    pitch: Option<f64>,
}

#[derive(Args)]
struct TheoremArgs {
    /// Subspace dimension.
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Constant of the dimension rule.
    #[arg(long = "c", default_value_t = 1.0)]
    constant: f64,
    /// Lift dimension.
    #[arg(long = "m", default_value_t = 400)]
    cols: usize,
    /// Sparsity parameter.
    #[arg(long = "s", default_value_t = 3.0)]
    sparsity: f64,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Projection rows; defaults to the dimension rule.
    #[arg(long)]
    k: Option<usize>,
    /// Sweep `k` downward to the smallest passing value.
    #[arg(long)]
    sweep: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Suite names, or `all`.
    #[arg(default_value = "all")]
    suites: Vec<String>,
    /// Start from the reduced-size configuration.
    #[arg(long)]
    quick: bool,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| format!("{e}"))).collect()
}

fn parse_point(s: &str) -> Result<Point3, String> {
    let v = parse_vector(s)?;
    match v.as_slice() {
        [x, y] => Ok([*x, *y, 0.0]),
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err("expected x,y or x,y,z".into()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every checked condition passed.
fn run(cli: Cli) -> Result<bool> {
    let quick = matches!(&cli.command, Command::Benchmark(b) if b.quick);
    let mut cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None if quick => HarnessConfig::quick(),
        None => HarnessConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Scene(a) => scene_cmd(&a, &cfg, out),
        Command::Train(a) => train_cmd(&a, &cfg, out),
        Command::Query(a) => query_cmd(&a, out),
        Command::PlanUav(a) => plan_uav_cmd(&a, &cfg, out),
        Command::PlanUgv(a) => plan_ugv_cmd(&a, &cfg, out),
        Command::Complete(a) => complete_cmd(&a, &cfg, out),
        Command::VerifyTheorem(a) => theorem_cmd(&a, &cfg, out),
        Command::Benchmark(a) => benchmark_cmd(&a, &cfg, out),
    }
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn scene_cmd(a: &SceneArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    if a.list {
        let registry = GeneratorRegistry::default();
        for name in registry.names() {
            println!("{name}: {}", registry.get(name)?.describe());
        }
        return Ok(true);
    }
    let scene = a.source.load(cfg.seed)?;
    let path = out.join(&a.output);
    scene.save(&path)?;
    println!("wrote {}", path.display());
    Ok(true)
}

// ------------------------------------------------------------------ train

fn field_settings(a: &TrainArgs, cfg: &HarnessConfig) -> FieldSettings {
    let mut f = match a.kind {
        Kind::Terrain => cfg.backend_ugv.run.field,
        _ => cfg.backend_uav.run.field,
    };
    if let Some(m) = a.feature_dim {
        f.feature_dim = m;
    }
    if let Some(k) = a.projection_dim {
        f.projection_ratio = k as f64 / f.feature_dim as f64;
    }
    if let Some(s) = a.scale {
        f.occupancy_scale = s;
        f.esdf_scale = s;
        f.terrain_scale = s;
    }
    if let Some(alpha) = a.alpha {
        f.ridge_alpha = alpha;
    }
    f
}

/// Simulated samples for `kind`, using the sensing settings of the matching
/// planning suite.
fn simulated_samples(scene: &Scene, kind: Kind, cfg: &HarnessConfig) -> Vec<ScanSample> {
    match kind {
        Kind::Occupancy => cfg.backend_uav.run.sensing.collect(scene, cfg.seed),
        Kind::Esdf => {
            let data = cfg.backend_uav.run.sensing.collect(scene, cfg.seed);
            let free = data
                .iter()
                .filter(|x| x.label == 1.0 || !scene.is_occupied(&x.position))
                .map(|x| x.position);
            esdf_samples(scene, free)
        }
        Kind::Terrain => terrain_samples(scene, cfg.backend_ugv.run.terrain_samples, cfg.seed.wrapping_add(100)),
    }
}

fn read_samples(path: &Path, kind: Kind) -> Result<TrainingSet> {
    let dim = kind.field_kind().input_dim();
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let names: &[&str] = if dim == 2 { &["x", "y", "label"] } else { &["x", "y", "z", "label"] };
    let cols: Vec<usize> = names
        .iter()
        .map(|n| headers.iter().position(|h| h.trim() == *n).with_context(|| format!("missing column `{n}`")))
        .collect::<Result<_>>()?;
    let mut set = TrainingSet::new(dim);
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = cols
            .iter()
            .map(|&c| rec.get(c).unwrap_or("").trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        set.push(&v[..dim], v[dim])?;
    }
    ensure!(!set.is_empty(), "{} has no samples", path.display());
    Ok(set)
}

fn samples_to_csv(samples: &[ScanSample], kind: Kind) -> String {
    let mut s = String::from(if matches!(kind, Kind::Terrain) { "x,y,label\n" } else { "x,y,z,label\n" });
    for x in samples {
        let p = x.position;
        if matches!(kind, Kind::Terrain) {
            s.push_str(&format!("{:.9},{:.9},{:.9}\n", p[0], p[1], x.label));
        } else {
            s.push_str(&format!("{:.9},{:.9},{:.9},{:.9}\n", p[0], p[1], p[2], x.label));
        }
    }
    s
}

fn print_metrics(m: &MappingMetrics) {
    let mut parts = vec![
        format!("samples={}", m.samples),
        format!("train_s={:.3}", m.train_seconds),
        format!("query_us={:.2}", m.query_seconds * 1e6),
        format!("checkpoint_bytes={}", m.checkpoint_bytes),
    ];
    if let Some(a) = m.accuracy {
        parts.push(format!("accuracy={a:.4}"));
    }
    if let Some(r2) = m.r2 {
        parts.push(format!("r2={r2:.4}"));
    }
    if let Some(mse) = m.mse {
        parts.push(format!("mse={mse:.3e}"));
    }
    println!("{}", parts.join(" "));
}

fn train_cmd(a: &TrainArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    let set = match &a.data {
        Some(p) => read_samples(p, a.kind)?,
        None => {
            let scene = a.source.load(cfg.seed)?;
            let samples = simulated_samples(&scene, a.kind, cfg);
            if a.export_samples {
                write(out.join("samples.csv"), &samples_to_csv(&samples, a.kind))?;
            }
            match a.kind {
                Kind::Terrain => to_terrain_set(&samples),
                _ => to_training_set(&samples),
            }
        }
    };
    let f = field_settings(a, cfg);
    let fc = match a.kind {
        Kind::Occupancy => f.occupancy(),
        Kind::Esdf => f.esdf(),
        Kind::Terrain => f.terrain(),
    };
    let (train, held_out) = set.split_every(5);
    info!("training {} on {} samples", a.kind.field_kind().name(), train.len());
    let t = std::time::Instant::now();
    let field = fit_field(a.kind.field_kind(), &train, &fc)?;
    let seconds = t.elapsed().as_secs_f64();
    print_metrics(&evaluate_mapping(&field, &held_out, seconds)?);
    let name = a.output.clone().unwrap_or_else(|| format!("{}.ckpt", a.kind.field_kind().name()));
    let path = out.join(name);
    Checkpoint::new(field).save(&path)?;
    println!("wrote {}", path.display());
    Ok(true)
}

// ------------------------------------------------------------------ query

fn read_points(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let cols: Vec<usize> = ["x", "y", "z"][..dim]
        .iter()
        .map(|n| headers.iter().position(|h| h.trim() == *n).with_context(|| format!("missing column `{n}`")))
        .collect::<Result<_>>()?;
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            cols.iter()
                .map(|&c| Ok(rec.get(c).unwrap_or("").trim().parse::<f64>()?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

fn query_cmd(a: &QueryArgs, out: &Path) -> Result<bool> {
    let field = Checkpoint::load(&a.checkpoint)?.field;
    let dim = field.input_dim();
    let mut points = match &a.points {
        Some(p) => read_points(p, dim)?,
        None => Vec::new(),
    };
    points.extend(a.point.iter().cloned());
    ensure!(!points.is_empty(), "give --points <csv> or --point x,y,z");
    let axes = &["x", "y", "z"][..dim];
    let mut header: Vec<String> = axes.iter().map(|s| s.to_string()).collect();
    header.push("value".into());
    if a.gradient {
        header.extend(axes.iter().map(|s| format!("d{s}")));
    }
    let mut csv = header.join(",") + "\n";
    for p in &points {
        ensure!(p.len() == dim, "point {p:?} needs {dim} coordinates");
        let mut row: Vec<f64> = p.clone();
        row.push(field.value(p)?);
        if a.gradient {
            row.extend(field.gradient(p)?);
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.9}")).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    if points.len() <= 10 {
        print!("{csv}");
    }
    write(out.join("query.csv"), &csv)?;
    Ok(true)
}

// --------------------------------------------------------------- planning

fn load_field(path: &Path, kind: FieldKind) -> Result<ParametricField> {
    let field = Checkpoint::load(path)?.field;
    field.require_kind(kind)?;
    Ok(field)
}

fn endpoints(scene: &Scene, start: Option<Point3>, goal: Option<Point3>) -> Result<(Point3, Point3)> {
    Ok((
        start.or(scene.start).context("no start: give --start or set it in the scene")?,
        goal.or(scene.goal).context("no goal: give --goal or set it in the scene")?,
    ))
}

fn plan_uav_cmd(a: &PlanUavArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    let scene = a.source.load(cfg.seed)?;
    let (start, goal) = endpoints(&scene, a.start, a.goal)?;
    let settings = &cfg.backend_uav.run;
    let needs_training = a.occupancy.is_none() || (a.stage == Stage::Full && a.esdf.is_none());
    let trained = if needs_training {
        info!("training fields from the scene");
        Some(rmrp_harness::experiments::train_uav_fields(&scene, settings, cfg.seed)?)
    } else {
        None
    };
    let occupancy = match &a.occupancy {
        Some(p) => load_field(p, FieldKind::Occupancy)?,
        None => trained.as_ref().map(|t| t.occupancy.clone()).context("occupancy field")?,
    };
    let mut planner: PlannerConfig = settings.planner;
    planner.search.bounds.get_or_insert(scene.bounds);

    if a.stage == Stage::Frontend {
        let plan = plan_frontend(&occupancy, start, goal, &planner)?;
        write(out.join("initial_path.csv"), &plan.search.path.to_csv())?;
        write(out.join("waypoints.csv"), &plan.refined.path.to_csv())?;
        write(out.join("refine_trace.csv"), &trace_csv(&plan.refined.cost_trace))?;
        let trace = &plan.refined.cost_trace;
        println!(
            "nodes_visited={} initial_length={:.4} refined_length={:.4} cost_initial={:.6e} cost_final={:.6e} wall_s={:.3}",
            plan.search.nodes_visited,
            plan.search.path.length(),
            plan.refined.path.length(),
            trace.first().copied().unwrap_or(f64::NAN),
            trace.last().copied().unwrap_or(f64::NAN),
            plan.search_seconds + plan.refine_seconds
        );
        return Ok(true);
    }

    let esdf = match &a.esdf {
        Some(p) => load_field(p, FieldKind::Esdf)?,
        None => trained.as_ref().map(|t| t.esdf.clone()).context("ESDF field")?,
    };
    let plan = plan_uav(&occupancy, &esdf, start, goal, &planner)?;
    if let Some(f) = &plan.frontend {
        write(out.join("waypoints.csv"), &f.refined.path.to_csv())?;
    }
    write_trajectory(out, &plan)?;
    let floor = settings.clearance_fraction * planner.costs.clearance;
    let summary = summarize(&scene, &plan, goal, floor, settings.goal_tolerance);
    print_summary(&summary);
    Ok(summary.success)
}

fn write_trajectory(out: &Path, plan: &rmrp_harness::planning::TrajectoryPlan) -> Result<()> {
    write(out.join("control_points.csv"), &plan.outcome.trajectory.control_csv())?;
    write(out.join("trajectory.csv"), &samples_csv(&plan.samples))?;
    write(out.join("cost_trace.csv"), &trace_csv(&plan.outcome.cost_trace))
}

fn print_summary(s: &rmrp_harness::planning::PlanSummary) {
    println!(
        "length={:.4} min_clearance={:.4} n_pit={} iterations={} wall_s={:.3} energy={:.4} success={}",
        s.length, s.min_clearance, s.n_pit, s.iterations, s.wall_seconds, s.energy, s.success
    );
}

fn plan_ugv_cmd(a: &PlanUgvArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    let scene = a.source.load(cfg.seed)?;
    let (start, goal) = endpoints(&scene, a.start, a.goal)?;
    let settings = &cfg.backend_ugv.run;
    let terrain = match &a.terrain {
        Some(p) => load_field(p, FieldKind::Terrain)?,
        None => rmrp_harness::experiments::train_terrain_for(&scene, settings, cfg.seed)?,
    };
    let mut planner = settings.planner;
    planner.costs.terrain_weight = a.terrain_weight.unwrap_or(cfg.backend_ugv.terrain_weight);
    let plan = plan_ugv(&terrain, None, start, goal, &planner)?;
    write_trajectory(out, &plan)?;
    let summary = summarize(&scene, &plan, goal, 0.0, settings.goal_tolerance);
    print_summary(&summary);
    Ok(summary.success)
}

// ------------------------------------------------------------- completion

fn complete_cmd(a: &CompleteArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    let s = &cfg.completion.run;
    let scene = a.source.load(cfg.seed.wrapping_add(s.held_out))?;
    let prior = match &a.checkpoint {
        Some(p) => load_field(p, FieldKind::Occupancy)?,
        None => {
            info!("training the completion prior on {} scenes", s.training_scenes);
            train_completion_prior(s, cfg.seed)?
        }
    };
    let pitch = a.pitch.unwrap_or(s.pitch);
    let (run, store, added) = complete_scene(&prior, &scene, a.threshold.unwrap_or(s.threshold), pitch)?;
    let mut csv = String::from("i,j,k,x,y,z\n");
    for c in &added {
        let p = store.cell_center(*c);
        csv.push_str(&format!("{},{},{},{:.6},{:.6},{:.6}\n", c[0], c[1], c[2], p[0], p[1], p[2]));
    }
    write(out.join("completed_cells.csv"), &csv)?;
    println!(
        "cells={} added={} recall={:.4} false_positive_rate={:.4} idempotent={}",
        run.cells, run.added, run.recall, run.false_positive_rate, run.idempotent
    );
    Ok(run.idempotent)
}

// ---------------------------------------------------------------- theorem

fn theorem_cmd(a: &TheoremArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    let spec = EmbeddingSpec {
        subspace_dim: a.p,
        distortion: a.epsilon,
        failure_budget: a.delta,
        constant: a.constant,
    };
    let formula_k = spec.choose_dimension()?;
    let mut text = format!(
        "p={} epsilon={} delta={} C={} M={} s={} trials={} seed={}\nformula k={formula_k}\nC1={:.6} C2={:.6}\n",
        a.p,
        a.epsilon,
        a.delta,
        a.constant,
        a.cols,
        a.sparsity,
        a.trials,
        cfg.seed,
        spec.c1(),
        spec.c2()
    );
    let (k, report) = if a.sweep {
        let sweep = sweep_dimension(
            &spec,
            &SweepConfig {
                cols: a.cols,
                sparsity: a.sparsity,
                trials: a.trials,
                trial_seed: cfg.seed,
                projection_seed: cfg.seed.wrapping_add(1),
                ..Default::default()
            },
        )?;
        let mut csv = String::from("k,passes,rate_len,rate_ang,rate_hw,rate_residual,worst_ratio\n");
        for p in &sweep.points {
            csv.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.9e}\n",
                p.k, p.passes as u8, p.rate_len, p.rate_ang, p.rate_hw, p.rate_residual, p.worst_ratio
            ));
        }
        write(out.join("theorem_sweep.csv"), &csv)?;
        match (sweep.smallest_passing_k, sweep.best) {
            (Some(k), Some(best)) => {
                text.push_str(&format!(
                    "smallest passing k={k} implied C={:.4}\n",
                    sweep.implied_constant.unwrap_or(f64::NAN)
                ));
                (k, best)
            }
            _ => {
                text.push_str("no passing k at or below the formula value\n");
                print!("{text}");
                write(out.join("theorem_report.txt"), &text)?;
                return Ok(false);
            }
        }
    } else {
        let k = a.k.unwrap_or(formula_k.min(a.cols));
        let r = SparseProjection::build(k, a.cols, a.sparsity, cfg.seed.wrapping_add(1))?;
        (k, verify_residual_energy(&r, &spec, a.trials, cfg.seed)?)
    };
    let passes = report.passes(a.delta);
    text.push_str(&format!(
        "k={k}\nrate_len={:.4} rate_ang={:.4} rate_hw={:.4} rate_residual={:.4} (delta={})\n\
         rank_deficient={} identity_failures={} max_identity_error={:.3e} worst_ratio={:.4}\nresult={}\n",
        report.rate_len(),
        report.rate_ang(),
        report.rate_hw(),
        report.rate_residual(),
        a.delta,
        report.rank_deficient,
        report.identity_failures,
        report.max_identity_error,
        report.worst_ratio,
        if passes { "PASS" } else { "FAIL" }
    ));
    print!("{text}");
    write(out.join("theorem_report.txt"), &text)?;
    write(out.join("theorem_trials.csv"), &report.to_csv())?;
    Ok(passes)
}

// -------------------------------------------------------------- benchmark

fn benchmark_cmd(a: &BenchmarkArgs, cfg: &HarnessConfig, out: &Path) -> Result<bool> {
    let registry = SuiteRegistry::default();
    let names: Vec<String> = if a.suites.iter().any(|s| s == "all") {
        registry.names().iter().map(|s| s.to_string()).collect()
    } else {
        a.suites.clone()
    };
    for n in &names {
        ensure!(registry.get(n).is_some(), "unknown suite `{n}` (known: {})", registry.names().join(", "));
    }
    let mut all = true;
    for name in &names {
        let report = run_benchmark(name, cfg, &out.join(name))?;
        for f in &report.files {
            println!("wrote {}", f.display());
        }
        for assertion in &report.assertions {
            println!("{assertion}");
        }
        all &= report.passed();
    }
    println!("benchmark {}", if all { "PASS" } else { "FAIL" });
    Ok(all)
}
