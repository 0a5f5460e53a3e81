use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;

use super::{flag, num, sci, timing_column, Assertion, BenchmarkSuite, SuiteReport, Table};
use crate::config::HarnessConfig;
use crate::experiments::{train_terrain_for, train_uav_fields, uav_case, ugv_case, UavRun, UgvRun};
use crate::generators::generate_scene;

/// UAV trajectories with and without path refinement.
pub struct UavSuiteRunner;

impl BenchmarkSuite for UavSuiteRunner {
    fn name(&self) -> &'static str {
        "backend-uav"
    }

    fn describe(&self) -> &'static str {
        "B-spline optimization against the ESDF field, refined vs raw A* seeds"
    }

    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
        let s = &cfg.backend_uav;
        let cells: Vec<[UavRun; 2]> = (0..s.seeds as u64)
            .into_par_iter()
            .map(|i| {
                let scene = generate_scene(&s.run.scene, &s.run.params, cfg.seed + i)?;
                let fields = train_uav_fields(&scene, &s.run, cfg.seed + i)?;
                Ok([uav_case(&scene, &fields, &s.run, true)?, uav_case(&scene, &fields, &s.run, false)?])
            })
            .collect::<Result<_>>()?;

        let mut table = Table::new(
            "backend_uav",
            [
                "seed".to_string(),
                "variant".into(),
                "success".into(),
                "min_clearance_m".into(),
                "length_m".into(),
                "energy".into(),
                "iterations".into(),
                "monotone".into(),
                timing_column("total_ms"),
            ],
        );
        let mut trace = Table::new("backend_uav_trace", ["seed", "variant", "iteration", "cost"]);
        for r in cells.iter().flatten() {
            let m = &r.summary;
            table.push(vec![
                r.seed.to_string(),
                r.variant.into(),
                flag(m.success),
                num(m.min_clearance),
                num(m.length),
                num(m.energy),
                m.iterations.to_string(),
                flag(r.monotone),
                num(m.wall_seconds * 1e3),
            ]);
            for (i, c) in r.plan.outcome.cost_trace.iter().enumerate() {
                trace.push(vec![r.seed.to_string(), r.variant.into(), i.to_string(), sci(*c)]);
            }
        }

        let ours: Vec<&UavRun> = cells.iter().map(|c| &c[0]).collect();
        let floor = s.run.clearance_fraction * s.run.planner.costs.clearance;
        let clear = ours.iter().filter(|r| r.summary.min_clearance >= floor).count();
        let monotone = ours.iter().filter(|r| r.monotone).count();
        let assertions = vec![
            Assertion::new(
                "backend-uav clearance",
                clear >= s.min_successes,
                format!("{clear}/{} seeds >= {floor:.3} m (need {})", ours.len(), s.min_successes),
            ),
            Assertion::new(
                "backend-uav monotone cost",
                monotone == ours.len(),
                format!("{monotone}/{}", ours.len()),
            ),
        ];

        let mut files = table.write(out)?;
        files.extend(trace.write(out)?);
        Ok(SuiteReport {
            suite: self.name().into(),
            files,
            assertions,
        })
    }
}

/// Ground-vehicle trajectories with and without the terrain term.
pub struct UgvSuiteRunner;

impl BenchmarkSuite for UgvSuiteRunner {
    fn name(&self) -> &'static str {
        "backend-ugv"
    }

    fn describe(&self) -> &'static str {
        "terrain-aware trajectories over pits: n_pit, time, length, energy"
    }

    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
        let s = &cfg.backend_ugv;
        let jobs: Vec<(&str, u64)> = s
            .run
            .scenes
            .iter()
            .flat_map(|name| (0..s.seeds as u64).map(move |i| (name.as_str(), cfg.seed + i)))
            .collect();
        let cells: Vec<[UgvRun; 2]> = jobs
            .par_iter()
            .map(|&(name, seed)| {
                let scene = generate_scene(name, &s.run.params, seed)?;
                let terrain = train_terrain_for(&scene, &s.run, seed)?;
                Ok([
                    ugv_case(&scene, &terrain, &s.run, s.terrain_weight)?,
                    ugv_case(&scene, &terrain, &s.run, 0.0)?,
                ])
            })
            .collect::<Result<_>>()?;

        let mut table = Table::new(
            "backend_ugv",
            [
                "scene".to_string(),
                "seed".into(),
                "variant".into(),
                "terrain_weight".into(),
                "n_pit".into(),
                "success".into(),
                "l_tot_m".into(),
                "energy".into(),
                "iterations".into(),
                timing_column("t_tot_ms"),
            ],
        );
        for r in cells.iter().flatten() {
            let m = &r.summary;
            let variant = if r.terrain_weight > 0.0 { "ours" } else { "no-terrain" };
            table.push(vec![
                r.scene.clone(),
                r.seed.to_string(),
                variant.into(),
                num(r.terrain_weight),
                m.n_pit.to_string(),
                flag(m.success),
                num(m.length),
                num(m.energy),
                m.iterations.to_string(),
                num(m.wall_seconds * 1e3),
            ]);
        }

        let mut assertions = Vec::new();
        for name in &s.run.scenes {
            let family: Vec<&[UgvRun; 2]> = cells.iter().filter(|c| &c[0].scene == name).collect();
            let safe = family.iter().filter(|c| c[0].summary.n_pit == 0).count();
            let hits = family.iter().filter(|c| c[1].summary.n_pit >= 1).count();
            assertions.push(Assertion::new(
                format!("backend-ugv {name} avoids pits"),
                safe == family.len(),
                format!("{safe}/{} with n_pit = 0", family.len()),
            ));
            assertions.push(Assertion::new(
                format!("backend-ugv {name} ablation enters pits"),
                hits >= s.min_ablation_hits,
                format!("{hits}/{} with n_pit >= 1 (need {})", family.len(), s.min_ablation_hits),
            ));
        }

        Ok(SuiteReport {
            suite: self.name().into(),
            files: table.write(out)?,
            assertions,
        })
    }
}
