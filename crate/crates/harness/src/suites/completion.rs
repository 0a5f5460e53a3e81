use std::path::Path;

use anyhow::Result;

use super::{flag, num, Assertion, BenchmarkSuite, SuiteReport, Table};
use crate::config::HarnessConfig;
use crate::experiments::run_completion;

/// Blind-spot completion on a held-out corner scene.
pub struct CompletionSuiteRunner;

impl BenchmarkSuite for CompletionSuiteRunner {
    fn name(&self) -> &'static str {
        "completion"
    }

    fn describe(&self) -> &'static str {
        "occupancy completion inside an occluded region from a prior over complete scenes"
    }

    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
        let s = &cfg.completion;
        let r = run_completion(&s.run, cfg.seed)?;
        let mut table = Table::new(
            "completion",
            ["cells", "occupied_truth", "added", "recall", "false_positive_rate", "idempotent"],
        );
        table.push(vec![
            r.cells.to_string(),
            r.occupied_truth.to_string(),
            r.added.to_string(),
            num(r.recall),
            num(r.false_positive_rate),
            flag(r.idempotent),
        ]);
        let assertions = vec![
            Assertion::new("completion recall", r.recall >= s.min_recall, format!("{:.4} >= {}", r.recall, s.min_recall)),
            Assertion::new(
                "completion false positives",
                r.false_positive_rate <= s.max_false_positive_rate,
                format!("{:.4} <= {}", r.false_positive_rate, s.max_false_positive_rate),
            ),
            Assertion::new("completion idempotent", r.idempotent, flag(r.idempotent)),
        ];
        Ok(SuiteReport {
            suite: self.name().into(),
            files: table.write(out)?,
            assertions,
        })
    }
}
