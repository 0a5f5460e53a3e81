use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;

use super::{num, sci, timing_column, Assertion, BenchmarkSuite, SuiteReport, Table};
use crate::config::HarnessConfig;
use crate::experiments::{run_mapping, run_memory, MappingRun};

/// Reduced vs unreduced mapping quality, latency and checkpoint size, plus
/// checkpoint size against a dense voxel grid.
pub struct MappingSuiteRunner;

impl BenchmarkSuite for MappingSuiteRunner {
    fn name(&self) -> &'static str {
        "mapping"
    }

    fn describe(&self) -> &'static str {
        "occupancy/ESDF accuracy, query latency and memory for k = M/2 vs k = M"
    }

    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
        let s = &cfg.mapping;
        let runs: Vec<MappingRun> = (0..s.seeds as u64)
            .into_par_iter()
            .map(|i| run_mapping(&s.run, cfg.seed + i))
            .collect::<Result<_>>()?;

        let mut table = Table::new(
            "mapping",
            [
                "seed".to_string(),
                "variant".into(),
                "feature_dim".into(),
                "projection_dim".into(),
                "samples".into(),
                "occ_accuracy".into(),
                "occ_balanced_accuracy".into(),
                "esdf_r2".into(),
                "esdf_mse".into(),
                "checkpoint_bytes".into(),
                timing_column("occ_train_s"),
                timing_column("esdf_train_s"),
                timing_column("occ_query_us"),
                timing_column("esdf_query_us"),
            ],
        );
        let mut assertions = Vec::new();
        for r in &runs {
            for (name, v) in [("rmrp", &r.reduced), ("rm", &r.full)] {
                table.push(vec![
                    r.seed.to_string(),
                    name.into(),
                    s.run.field.feature_dim.to_string(),
                    v.projection_dim.to_string(),
                    r.samples.to_string(),
                    num(v.occupancy.accuracy.unwrap_or(f64::NAN)),
                    num(v.occupancy.balanced_accuracy.unwrap_or(f64::NAN)),
                    num(v.esdf.r2.unwrap_or(f64::NAN)),
                    sci(v.esdf.mse.unwrap_or(f64::NAN)),
                    v.occupancy.checkpoint_bytes.to_string(),
                    num(v.occupancy.train_seconds),
                    num(v.esdf.train_seconds),
                    num(v.occupancy.query_seconds * 1e6),
                    num(v.esdf.query_seconds * 1e6),
                ]);
            }
            let acc = r.reduced.occupancy.accuracy.unwrap_or(0.0);
            let full_acc = r.full.occupancy.accuracy.unwrap_or(0.0);
            let r2 = r.reduced.esdf.r2.unwrap_or(f64::NEG_INFINITY);
            assertions.push(Assertion::new(
                format!("mapping seed {} occupancy accuracy", r.seed),
                acc >= s.min_accuracy,
                format!("{acc:.4} >= {}", s.min_accuracy),
            ));
            assertions.push(Assertion::new(
                format!("mapping seed {} esdf r2", r.seed),
                r2 >= s.min_r2,
                format!("{r2:.4} >= {}", s.min_r2),
            ));
            assertions.push(Assertion::new(
                format!("mapping seed {} accuracy gap", r.seed),
                (full_acc - acc).abs() <= s.max_accuracy_gap,
                format!("|{full_acc:.4} - {acc:.4}| <= {}", s.max_accuracy_gap),
            ));
            let (q_red, q_full) = (r.reduced.occupancy.query_seconds, r.full.occupancy.query_seconds);
            assertions.push(Assertion::new(
                format!("mapping seed {} query latency", r.seed),
                q_red < q_full,
                format!("{:.2} us < {:.2} us", q_red * 1e6, q_full * 1e6),
            ));
        }

        let rows = run_memory(&s.memory, cfg.seed)?;
        let mut memory = Table::new(
            "memory",
            ["case", "volume_m3", "samples", "checkpoint_bytes", "voxel_bytes", "voxel_ratio"],
        );
        for (case, r) in ["base", "more-samples", "larger-volume"].iter().zip(&rows) {
            memory.push(vec![
                (*case).into(),
                num(r.volume),
                r.samples.to_string(),
                r.checkpoint_bytes.to_string(),
                r.voxel_bytes.to_string(),
                num(r.voxel_bytes as f64 / r.checkpoint_bytes as f64),
            ]);
        }
        let sizes: Vec<usize> = rows.iter().map(|r| r.checkpoint_bytes).collect();
        assertions.push(Assertion::new(
            "memory checkpoint size invariant",
            sizes.windows(2).all(|w| w[0] == w[1]),
            format!("{sizes:?}"),
        ));
        let ratio = rows[0].voxel_bytes as f64 / rows[0].checkpoint_bytes as f64;
        assertions.push(Assertion::new(
            "memory voxel ratio",
            ratio >= s.min_voxel_ratio,
            format!("{ratio:.1} >= {} ({}-byte voxels)", s.min_voxel_ratio, s.memory.bytes_per_voxel),
        ));

        let mut files = table.write(out)?;
        files.extend(memory.write(out)?);
        Ok(SuiteReport {
            suite: self.name().into(),
            files,
            assertions,
        })
    }
}
