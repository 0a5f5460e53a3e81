use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use rmrp_core::frontend::search_initial_path;
use rmrp_core::geometry::Point3;

use super::{flag, num, sci, timing_column, Assertion, BenchmarkSuite, SuiteReport, Table};
use crate::config::HarnessConfig;
use crate::experiments::{run_frontend, train_occupancy_for, FrontendRun};
use crate::generators::generate_scene;
use crate::scene::Scene;

/// Path refinement on corridor scenes and a lattice-resolution table.
pub struct FrontendSuiteRunner;

impl BenchmarkSuite for FrontendSuiteRunner {
    fn name(&self) -> &'static str {
        "frontend"
    }

    fn describe(&self) -> &'static str {
        "A* + gradient refinement: cost, clearance and lattice-resolution table"
    }

    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
        let s = &cfg.frontend;
        let runs: Vec<FrontendRun> = (0..s.seeds as u64)
            .into_par_iter()
            .map(|i| run_frontend(&s.corridor, cfg.seed + i))
            .collect::<Result<_>>()?;

        let mut table = Table::new(
            "frontend_refinement",
            [
                "seed".to_string(),
                "nodes_visited".into(),
                "initial_length_m".into(),
                "refined_length_m".into(),
                "cost_initial".into(),
                "cost_refined".into(),
                "clearance_initial_m".into(),
                "clearance_refined_m".into(),
                "endpoints_exact".into(),
                timing_column("search_ms"),
                timing_column("refine_ms"),
            ],
        );
        let mut trace = Table::new("frontend_trace", ["seed", "iteration", "cost"]);
        let mut waypoints = Table::new("frontend_waypoints", ["seed", "index", "x", "y", "z"]);
        for r in &runs {
            table.push(vec![
                r.seed.to_string(),
                r.nodes_visited.to_string(),
                num(r.initial_length),
                num(r.refined_length),
                sci(r.cost_initial),
                sci(r.cost_refined),
                num(r.clearance_initial),
                num(r.clearance_refined),
                flag(r.endpoints_exact),
                num(r.search_seconds * 1e3),
                num(r.refine_seconds * 1e3),
            ]);
            for (i, c) in r.cost_trace.iter().enumerate() {
                trace.push(vec![r.seed.to_string(), i.to_string(), sci(*c)]);
            }
            for (i, p) in r.waypoints.iter().enumerate() {
                waypoints.push(vec![r.seed.to_string(), i.to_string(), num(p[0]), num(p[1]), num(p[2])]);
            }
        }

        let mut assertions = Vec::new();
        let cost_ok = runs.iter().filter(|r| r.cost_refined <= r.cost_initial).count();
        assertions.push(Assertion::new(
            "frontend cost never increases",
            cost_ok == runs.len(),
            format!("{cost_ok}/{}", runs.len()),
        ));
        let improved = runs.iter().filter(|r| r.clearance_refined >= r.clearance_initial).count();
        assertions.push(Assertion::new(
            "frontend clearance not reduced",
            improved >= s.min_improved,
            format!("{improved}/{} >= {}", runs.len(), s.min_improved),
        ));
        let exact = runs.iter().filter(|r| r.endpoints_exact).count();
        assertions.push(Assertion::new(
            "frontend endpoints exact",
            exact == runs.len(),
            format!("{exact}/{}", runs.len()),
        ));

        // Lattice-resolution table on one mapped scene.
        let scene = generate_scene(&s.grid_scene, &s.grid_params, cfg.seed)?;
        let occ = train_occupancy_for(&scene, &s.grid_field, &s.grid_sensing, cfg.seed)?;
        let (start, goal) = endpoints(&scene)?;
        let rows: Vec<Vec<String>> = s
            .pitches
            .par_iter()
            .map(|&pitch| {
                let mut search = s.corridor.planner.search;
                search.pitch = pitch;
                search.bounds = Some(scene.bounds);
                let t = Instant::now();
                let outcome = search_initial_path(&occ, start, goal, &search);
                let ms = t.elapsed().as_secs_f64() * 1e3;
                match outcome {
                    Ok(o) => vec![num(pitch), num(ms), num(o.path.length()), o.nodes_visited.to_string(), flag(true)],
                    Err(_) => vec![num(pitch), num(ms), num(f64::NAN), "0".into(), flag(false)],
                }
            })
            .collect();
        let mut resolution = Table::new(
            "frontend_table",
            [
                "pitch_m".to_string(),
                timing_column("total_time_ms"),
                "path_length_m".into(),
                "nodes_visited".into(),
                "found".into(),
            ],
        );
        for r in rows {
            resolution.push(r);
        }

        let mut files = table.write(out)?;
        files.extend(trace.write(out)?);
        files.extend(waypoints.write(out)?);
        files.extend(resolution.write(out)?);
        Ok(SuiteReport {
            suite: self.name().into(),
            files,
            assertions,
        })
    }
}

/// Scene endpoints, or opposite free corners at mid height.
fn endpoints(scene: &Scene) -> Result<(Point3, Point3)> {
    if let (Some(a), Some(b)) = (scene.start, scene.goal) {
        return Ok((a, b));
    }
    let b = &scene.bounds;
    let z = 0.5 * (b.min[2] + b.max[2]);
    let a = [b.min[0] + 0.3, b.min[1] + 0.3, z];
    let g = [b.max[0] - 0.3, b.max[1] - 0.3, z];
    (!scene.is_occupied(&a) && !scene.is_occupied(&g))
        .then_some((a, g))
        .context("scene corners are occupied; set start and goal")
}
