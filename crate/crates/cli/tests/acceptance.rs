//! Acceptance criteria. Runs sequentially (wall-time budgets are part of the
//! criteria) and prints one PASS/FAIL line per criterion. Pass a substring
//! argument to run a subset, e.g. `cargo test --test acceptance -- ac4`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmrp_core::backend::costs::{Acceleration, Collision, Smoothness, TerrainSlope, Velocity};
use rmrp_core::backend::{terrain_penalty, BSplineTrajectory, CostTerm};
use rmrp_core::embedding::{sweep_dimension, EmbeddingSpec, SweepConfig, IDENTITY_TOLERANCE};
use rmrp_core::field::{train_esdf, train_occupancy, train_terrain, FieldConfig};
use rmrp_core::frontend::{refinement_cost, refinement_gradient, RefinementConfig, WaypointPath};
use rmrp_core::linear::RidgeConfig;
use rmrp_core::ParametricField;
use rmrp_harness::experiments::{
    run_completion, run_frontend, run_mapping, run_memory, train_terrain_for, train_uav_fields, uav_case, ugv_case,
    CompletionSettings, FrontendSettings, MappingSettings, MemorySettings, UavSettings, UgvSettings,
};
use rmrp_harness::generators::{generate_scene, GeneratorParams};
use rmrp_harness::sensing::{esdf_samples, terrain_samples, to_terrain_set, to_training_set, volumetric_samples};
use rmrp_harness::suites::is_timing_column;

// Pinned tolerances and thresholds.
const AC1_BUDGET: Duration = Duration::from_secs(120);
const AC2_BUDGET: Duration = Duration::from_secs(30);
const AC3_BUDGET: Duration = Duration::from_secs(30);
const AC4_BUDGET: Duration = Duration::from_secs(180);
const AC5_BUDGET: Duration = Duration::from_secs(60);
const AC6_BUDGET: Duration = Duration::from_secs(120);
const AC7_BUDGET: Duration = Duration::from_secs(180);
const AC8_BUDGET: Duration = Duration::from_secs(180);
const AC9_BUDGET: Duration = Duration::from_secs(120);
const AC10_BUDGET: Duration = Duration::from_secs(300);

const FIELD_GRAD_TOL: f64 = 1e-5;
const COST_GRAD_TOL: f64 = 1e-4;
const CLOSED_FORM_TOL: f64 = 1e-10;
const GRAD_POINTS: usize = 100;
/// Central-difference step.
const FD_STEP: f64 = 1e-6;
/// Norm floor of the relative-error denominator (guards exact zeros only).
const REL_FLOOR: f64 = 1e-12;
const MIN_ACCURACY: f64 = 0.95;
const MIN_R2: f64 = 0.95;
const MAX_ACCURACY_GAP: f64 = 0.02;
const MIN_VOXEL_RATIO: f64 = 100.0;
const SEEDS: u64 = 10;
const MIN_IMPROVED: usize = 9;
const MIN_UAV_SUCCESS: usize = 9;
const CLEARANCE_FRACTION: f64 = 0.9;
const MIN_ABLATION_HITS: usize = 8;
const MIN_RECALL: f64 = 0.8;
const MAX_FPR: f64 = 0.2;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

type CriterionFn = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, &str, Duration, CriterionFn); 10] = [
        ("ac1", "residual energy preservation", AC1_BUDGET, ac1),
        ("ac2", "gradient fidelity", AC2_BUDGET, ac2),
        ("ac3", "terrain penalty closed form", AC3_BUDGET, ac3),
        ("ac4", "mapping quality", AC4_BUDGET, ac4),
        ("ac5", "memory invariance", AC5_BUDGET, ac5),
        ("ac6", "front-end refinement", AC6_BUDGET, ac6),
        ("ac7", "back-end UAV", AC7_BUDGET, ac7),
        ("ac8", "back-end UGV", AC8_BUDGET, ac8),
        ("ac9", "blind-spot completion", AC9_BUDGET, ac9),
        ("ac10", "determinism", AC10_BUDGET, ac10),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|flt| id == flt || name.contains(flt.as_str())) {
            continue;
        }
        let t = Instant::now();
        let result = pool.install(f);
        let elapsed = t.elapsed();
        let in_time = elapsed <= budget;
        let (passed, detail) = match result {
            Ok(o) => (o.passed && in_time, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} {} {name}: {detail} [{:.1} s / {} s{}]",
            if passed { "PASS" } else { "FAIL" },
            id.to_uppercase(),
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- helpers

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| a + (b - a) * r.random::<f64>()).collect()
}

fn central_difference(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = FD_STEP * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n.max(REL_FLOOR)
}

fn field_config(m: usize, scale: f64, alpha: f64) -> FieldConfig {
    FieldConfig {
        feature_dim: m,
        projection_dim: Some(m / 2),
        feature_scale: scale,
        ridge: RidgeConfig { alpha },
        ..Default::default()
    }
}

struct TrainedFields {
    occupancy: ParametricField,
    esdf: ParametricField,
    terrain: ParametricField,
}

fn trained_fields() -> Result<TrainedFields> {
    let scene = generate_scene("box-field", &GeneratorParams::default(), 3)?;
    let samples = volumetric_samples(&scene, &scene.bounds, 3000, 5, None);
    let occupancy = train_occupancy(&to_training_set(&samples), &field_config(200, 4.0, 1e-5))?;
    let dist = esdf_samples(&scene, samples.iter().map(|s| s.position));
    let esdf = train_esdf(&to_training_set(&dist), &field_config(200, 2.5, 1e-5))?;
    let pits = generate_scene("pits-slope", &GeneratorParams::default(), 3)?;
    let terrain = train_terrain(&to_terrain_set(&terrain_samples(&pits, 2000, 9)), &field_config(200, 3.0, 1e-6))?;
    Ok(TrainedFields {
        occupancy,
        esdf,
        terrain,
    })
}

// ---------------------------------------------------------------- AC1

fn ac1() -> Result<Outcome> {
    let spec = EmbeddingSpec {
        subspace_dim: 5,
        distortion: 0.3,
        failure_budget: 0.1,
        constant: 1.0,
    };
    let cfg = SweepConfig {
        cols: 400,
        sparsity: 3.0,
        trials: 2000,
        ..Default::default()
    };
    let sweep = sweep_dimension(&spec, &cfg)?;
    let formula_k = spec.choose_dimension()?;
    let starts_at_formula = sweep.points.first().map(|p| p.k) == Some(formula_k.min(cfg.cols));
    let best = sweep.best.as_ref().context("no passing k")?;
    let k = sweep.smallest_passing_k.context("no passing k")?;
    let rates_ok = [best.rate_len(), best.rate_ang(), best.rate_hw(), best.rate_residual()]
        .iter()
        .all(|r| *r <= spec.failure_budget);
    let identity_everywhere = sweep.points.iter().all(|p| p.max_identity_error <= IDENTITY_TOLERANCE)
        && best.identity_failures == 0
        && IDENTITY_TOLERANCE <= 1e-10;
    // The next smaller k was evaluated and failed, so `k` is the smallest.
    let below_fails = sweep.points.iter().any(|p| p.k == k - 1 && !p.passes) || k == 1;
    outcome(
        starts_at_formula && rates_ok && identity_everywhere && below_fails && best.trials == 2000,
        format!(
            "formula k={formula_k}, smallest passing k={k} (C≈{:.3}); rates len {:.4} ang {:.4} hw {:.4} res {:.4}; max identity error {:.2e}",
            sweep.implied_constant.unwrap_or(f64::NAN),
            best.rate_len(),
            best.rate_ang(),
            best.rate_hw(),
            best.rate_residual(),
            sweep.points.iter().map(|p| p.max_identity_error).fold(0.0, f64::max)
        ),
    )
}

// ---------------------------------------------------------------- AC2

fn trajectory(dim: usize, r: &mut ChaCha8Rng, origin: &[f64], step: &[f64], jitter: f64) -> BSplineTrajectory {
    let n = 10;
    let control = (0..n)
        .flat_map(|i| (0..dim).map(move |a| (i, a)))
        .map(|(i, a)| origin[a] + step[a] * i as f64 + jitter * (2.0 * r.random::<f64>() - 1.0))
        .collect();
    BSplineTrajectory::new(dim, 3, 0.3, control).expect("trajectory")
}

fn term_error(term: &dyn CostTerm, tr: &BSplineTrajectory) -> Result<(f64, f64)> {
    let mut g = vec![0.0; tr.control().len()];
    let cost = term.evaluate(tr, &mut g)?;
    let fd = central_difference(tr.control(), |x| {
        let t = BSplineTrajectory::new(tr.dim(), tr.degree(), tr.dt(), x.to_vec()).expect("trajectory");
        let mut scratch = vec![0.0; x.len()];
        term.evaluate(&t, &mut scratch).expect("cost")
    });
    Ok((rel_err(&g, &fd), cost))
}

fn ac2() -> Result<Outcome> {
    let f = trained_fields()?;
    let mut r = rng(2);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut active: BTreeMap<&str, usize> = BTreeMap::new();
    let mut note = |name: &'static str, err: f64, cost: f64| {
        let w = worst.entry(name).or_insert(0.0);
        *w = w.max(err);
        *active.entry(name).or_insert(0) += usize::from(cost > 0.0);
    };

    // Pure field gradients.
    let lo3 = [0.0, 0.0, 0.0];
    let hi3 = [8.0, 4.0, 3.0];
    for _ in 0..GRAD_POINTS {
        let x = uniform(&mut r, &lo3, &hi3);
        for (name, field) in [("occupancy", &f.occupancy), ("esdf", &f.esdf)] {
            let g = field.gradient(&x)?;
            let fd = central_difference(&x, |p| field.value(p).expect("value"));
            note(name, rel_err(&g, &fd), 1.0);
        }
        let q = uniform(&mut r, &[0.0, 0.0], &[8.0, 4.0]);
        let g = f.terrain.gradient(&q)?;
        let fd = central_difference(&q, |p| f.terrain.value(p).expect("value"));
        note("terrain", rel_err(&g, &fd), 1.0);
        // Terrain penalty ‖∇E‖².
        let (_, g) = terrain_penalty(&f.terrain, &q)?;
        let fd = central_difference(&q, |p| terrain_penalty(&f.terrain, p).expect("penalty").0);
        note("terrain-penalty", rel_err(&g, &fd), 1.0);
    }

    // Refinement cost over whole waypoint paths.
    let cfg = RefinementConfig {
        gradient_weight: 0.7,
        deviation_weight: 1.3,
        ..Default::default()
    };
    for _ in 0..GRAD_POINTS {
        let a = uniform(&mut r, &lo3, &hi3);
        let b = uniform(&mut r, &lo3, &hi3);
        let n = 8;
        let init: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                std::array::from_fn(|k| a[k] + t * (b[k] - a[k]))
            })
            .collect();
        let mut moved = init.clone();
        for p in moved.iter_mut().take(n - 1).skip(1) {
            for v in p.iter_mut() {
                *v += 0.2 * (2.0 * r.random::<f64>() - 1.0);
            }
        }
        let init = WaypointPath::new(init)?;
        let path = WaypointPath::new(moved.clone())?;
        let grad = refinement_gradient(&path, &init, &f.occupancy, cfg.gradient_weight, cfg.deviation_weight)?;
        let flat: Vec<f64> = moved.iter().flatten().copied().collect();
        let fd = central_difference(&flat, |x| {
            let pts: Vec<[f64; 3]> = x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let mut pts = pts;
            // Endpoints are fixed by construction.
            pts[0] = moved[0];
            pts[n - 1] = moved[n - 1];
            refinement_cost(&WaypointPath::new(pts).expect("path"), &init, &f.occupancy, &cfg).expect("cost")
        });
        let g: Vec<f64> = grad.iter().flatten().copied().collect();
        note("refinement", rel_err(&g, &fd), 1.0);
    }

    // Trajectory cost terms.
    let smooth = Smoothness;
    let collision = Collision {
        esdf: &f.esdf,
        clearance: 0.8,
    };
    let velocity = Velocity { limit: 1.0 };
    let acceleration = Acceleration { limit: 2.0 };
    let slope = TerrainSlope { terrain: &f.terrain };
    for _ in 0..GRAD_POINTS {
        let o = uniform(&mut r, &[0.5, 0.5, 0.5], &[2.0, 1.5, 2.5]);
        let tr3 = trajectory(3, &mut r, &o, &[0.5, 0.2, 0.0], 0.3);
        for (name, term) in [
            ("smoothness", &smooth as &dyn CostTerm),
            ("collision", &collision),
            ("velocity", &velocity),
            ("acceleration", &acceleration),
        ] {
            let (err, cost) = term_error(term, &tr3)?;
            note(name, err, cost);
        }
        let o2 = uniform(&mut r, &[0.5, 0.5], &[3.0, 2.0]);
        let tr2 = trajectory(2, &mut r, &o2, &[0.5, 0.2], 0.3);
        let (err, cost) = term_error(&slope, &tr2)?;
        note("terrain-slope", err, cost);
    }

    let field_terms = ["occupancy", "esdf", "terrain"];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, err) in &worst {
        let tol = if field_terms.contains(name) { FIELD_GRAD_TOL } else { COST_GRAD_TOL };
        // Every term must be exercised (non-zero cost) at some point.
        let exercised = active[name] > 0;
        ok &= *err <= tol && exercised;
        parts.push(format!("{name} {err:.1e}"));
    }
    outcome(ok, format!("worst relative error over {GRAD_POINTS} points: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- AC3

/// Generic route: `∇‖∇E‖² = 2 Hᵀ ∇E` with the Hessian of the sine model
/// assembled term by term from the basis.
fn hessian_route(field: &ParametricField, q: &[f64]) -> [f64; 2] {
    let feats = field.features();
    let c = field.feature_weights();
    let mut g = [0.0; 2];
    let mut h = [[0.0; 2]; 2];
    for (i, &ci) in c.iter().enumerate() {
        let w = feats.weight_row(i);
        let y = w[0] * q[0] + w[1] * q[1] + feats.biases()[i];
        for a in 0..2 {
            g[a] += ci * y.cos() * w[a];
            for b in 0..2 {
                h[a][b] -= ci * y.sin() * w[a] * w[b];
            }
        }
    }
    [
        2.0 * (h[0][0] * g[0] + h[1][0] * g[1]),
        2.0 * (h[0][1] * g[0] + h[1][1] * g[1]),
    ]
}

fn ac3() -> Result<Outcome> {
    let f = trained_fields()?;
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..GRAD_POINTS {
        let q = uniform(&mut r, &[0.0, 0.0], &[8.0, 4.0]);
        let (_, closed) = terrain_penalty(&f.terrain, &q)?;
        let route = hessian_route(&f.terrain, &q);
        worst = worst.max((closed[0] - route[0]).abs().max((closed[1] - route[1]).abs()));
    }
    outcome(worst <= CLOSED_FORM_TOL, format!("max |closed − 2Jᵀg| = {worst:.2e} at {GRAD_POINTS} points"))
}

// ---------------------------------------------------------------- AC4

fn ac4() -> Result<Outcome> {
    let s = MappingSettings::default();
    ensure!(s.sample_budget == 50_000);
    let r = run_mapping(&s, 1)?;
    let acc = r.reduced.occupancy.accuracy.context("accuracy")?;
    let full_acc = r.full.occupancy.accuracy.context("accuracy")?;
    let r2 = r.reduced.esdf.r2.context("r2")?;
    let (q_red, q_full) = (r.reduced.occupancy.query_seconds, r.full.occupancy.query_seconds);
    let passed = acc >= MIN_ACCURACY
        && r2 >= MIN_R2
        && (full_acc - acc).abs() <= MAX_ACCURACY_GAP
        && q_red < q_full
        && r.samples == s.sample_budget;
    outcome(
        passed,
        format!(
            "{} samples, M={}: RMRP acc {acc:.4}, ESDF R² {r2:.4}; RM acc {full_acc:.4}; query {:.1} µs vs {:.1} µs",
            r.samples,
            s.field.feature_dim,
            q_red * 1e6,
            q_full * 1e6
        ),
    )
}

// ---------------------------------------------------------------- AC5

fn ac5() -> Result<Outcome> {
    let s = MemorySettings::default();
    let rows = run_memory(&s, 1)?;
    let same = rows.windows(2).all(|w| w[0].checkpoint_bytes == w[1].checkpoint_bytes);
    let volume_ratio = rows[2].volume / rows[0].volume;
    let sample_ratio = rows[1].samples as f64 / rows[0].samples as f64;
    let voxel_ratio = rows[0].voxel_bytes as f64 / rows[0].checkpoint_bytes as f64;
    let one_byte = voxel_ratio / s.bytes_per_voxel as f64;
    outcome(
        same && (volume_ratio - 2.0).abs() < 1e-9 && sample_ratio == 10.0 && voxel_ratio >= MIN_VOXEL_RATIO,
        format!(
            "checkpoint {} B for base / 10× samples / 2× volume: {:?}; 0.05 m voxels {} B = {voxel_ratio:.0}× ({one_byte:.0}× at 1 B/voxel)",
            rows[0].checkpoint_bytes,
            rows.iter().map(|r| r.checkpoint_bytes).collect::<Vec<_>>(),
            rows[0].voxel_bytes
        ),
    )
}

// ---------------------------------------------------------------- AC6

fn ac6() -> Result<Outcome> {
    let s = FrontendSettings::default();
    let mut cost_ok = 0;
    let mut improved = 0;
    let mut exact = 0;
    let mut worst = Vec::new();
    for seed in 0..SEEDS {
        let r = run_frontend(&s, seed)?;
        cost_ok += usize::from(r.cost_refined <= r.cost_initial);
        improved += usize::from(r.clearance_refined >= r.clearance_initial);
        exact += usize::from(r.endpoints_exact);
        if r.clearance_refined < r.clearance_initial {
            worst.push(seed);
        }
    }
    let n = SEEDS as usize;
    outcome(
        cost_ok == n && improved >= MIN_IMPROVED && exact == n,
        format!("J non-increasing {cost_ok}/{n}, clearance kept or improved {improved}/{n} (worse: {worst:?}), endpoints exact {exact}/{n}"),
    )
}

// ---------------------------------------------------------------- AC7

fn ac7() -> Result<Outcome> {
    let s = UavSettings::default();
    ensure!(s.planner.samples == 200 && (s.clearance_fraction - CLEARANCE_FRACTION).abs() < 1e-12);
    let floor = CLEARANCE_FRACTION * s.planner.costs.clearance;
    let mut clear = 0;
    let mut monotone = 0;
    let mut misses = Vec::new();
    for seed in 0..SEEDS {
        let scene = generate_scene(&s.scene, &s.params, seed)?;
        let fields = train_uav_fields(&scene, &s, seed)?;
        let run = uav_case(&scene, &fields, &s, true)?;
        ensure!(run.plan.samples.len() == 200);
        if run.summary.min_clearance >= floor {
            clear += 1;
        } else {
            misses.push(format!("seed {seed}: {:.3} m", run.summary.min_clearance));
        }
        monotone += usize::from(run.monotone);
    }
    let n = SEEDS as usize;
    outcome(
        clear >= MIN_UAV_SUCCESS && monotone == n,
        format!("clearance >= {floor:.2} m in {clear}/{n} (misses: {misses:?}); monotone traces {monotone}/{n}"),
    )
}

// ---------------------------------------------------------------- AC8

fn ac8() -> Result<Outcome> {
    let s = UgvSettings::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in &s.scenes {
        let (mut safe, mut hits) = (0, 0);
        for seed in 0..SEEDS {
            let scene = generate_scene(name, &s.params, seed)?;
            let terrain = train_terrain_for(&scene, &s, seed)?;
            safe += usize::from(ugv_case(&scene, &terrain, &s, 5.0)?.summary.n_pit == 0);
            hits += usize::from(ugv_case(&scene, &terrain, &s, 0.0)?.summary.n_pit >= 1);
        }
        ok &= safe == SEEDS as usize && hits >= MIN_ABLATION_HITS;
        parts.push(format!("{name}: λ_t>0 n_pit=0 {safe}/{SEEDS}, λ_t=0 n_pit>=1 {hits}/{SEEDS}"));
    }
    outcome(ok, parts.join("; "))
}

// ---------------------------------------------------------------- AC9

fn ac9() -> Result<Outcome> {
    let s = CompletionSettings::default();
    ensure!(s.training_scenes == 20 && s.threshold == 0.5);
    let r = run_completion(&s, 0)?;
    outcome(
        r.recall >= MIN_RECALL && r.false_positive_rate <= MAX_FPR && r.idempotent,
        format!(
            "recall {:.3}, FPR {:.3}, {} cells added, idempotent {}",
            r.recall, r.false_positive_rate, r.added, r.idempotent
        ),
    )
}

// ---------------------------------------------------------------- AC10

/// File contents with timing columns removed.
fn strip_timing(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    let (sep, header_prefix) = match path.extension().and_then(|e| e.to_str()) {
        Some("dat") => (' ', "# "),
        _ => (',', ""),
    };
    let mut lines = text.lines();
    let Some(header) = lines.next() else {
        return Ok(text);
    };
    let cols: Vec<&str> = header.trim_start_matches(header_prefix).split(sep).collect();
    let keep: Vec<bool> = cols.iter().map(|c| !is_timing_column(c)).collect();
    let mut out = String::new();
    for line in std::iter::once(header.trim_start_matches(header_prefix)).chain(lines) {
        let kept: Vec<&str> = line.split(sep).zip(&keep).filter(|(_, k)| **k).map(|(c, _)| c).collect();
        out.push_str(&kept.join(&sep.to_string()));
        out.push('\n');
    }
    Ok(out)
}

fn files_under(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            out.extend(files_under(&p)?);
        } else {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn ac10() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_rmrp"))
            .args(["--seed", "5", "--out"])
            .arg(&dir)
            .args(["benchmark", "--quick", "all"])
            .output()?;
        // Exit status reflects the quick-size assertions, not determinism.
        ensure!(status.status.code().is_some_and(|c| c <= 1), "benchmark crashed: {}", String::from_utf8_lossy(&status.stderr));
        outputs.push(dir);
    }
    let a = files_under(&outputs[0])?;
    let b = files_under(&outputs[1])?;
    let rel = |d: &Path, v: &[std::path::PathBuf]| -> Vec<std::path::PathBuf> {
        v.iter().map(|p| p.strip_prefix(d).expect("prefix").to_path_buf()).collect()
    };
    let (ra, rb) = (rel(&outputs[0], &a), rel(&outputs[1], &b));
    ensure!(ra == rb, "different file sets");
    let suites: std::collections::BTreeSet<_> = ra.iter().filter_map(|p| p.components().next()).collect();
    let mut differing = Vec::new();
    let mut timing_cols = 0;
    for (pa, pb) in a.iter().zip(&b) {
        let (sa, sb) = (strip_timing(pa)?, strip_timing(pb)?);
        if sa != sb {
            differing.push(pa.strip_prefix(&outputs[0])?.display().to_string());
        }
        let full = std::fs::read_to_string(pa)?;
        timing_cols += full.lines().next().map_or(0, |h| h.split([',', ' ']).filter(|c| is_timing_column(c)).count());
    }
    outcome(
        differing.is_empty() && suites.len() == 6,
        format!(
            "{} files from {} suites identical apart from {timing_cols} timing columns; differing: {differing:?}",
            a.len(),
            suites.len()
        ),
    )
}
