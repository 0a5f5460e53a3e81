use std::path::Path;

use anyhow::Result;
use rmrp_core::embedding::sweep_dimension;

use super::{flag, num, sci, Assertion, BenchmarkSuite, SuiteReport, Table};
use crate::config::HarnessConfig;

/// Monte-Carlo residual-energy check with a downward sweep over `k`.
pub struct TheoremSuiteRunner;

impl BenchmarkSuite for TheoremSuiteRunner {
    fn name(&self) -> &'static str {
        "theorem"
    }

    fn describe(&self) -> &'static str {
        "event-violation rates of the sparse projection while sweeping k down from the dimension rule"
    }

    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
        let s = &cfg.theorem;
        let mut sweep_cfg = s.sweep;
        sweep_cfg.trial_seed = sweep_cfg.trial_seed.wrapping_add(cfg.seed);
        let sweep = sweep_dimension(&s.spec, &sweep_cfg)?;

        let mut table = Table::new(
            "theorem_sweep",
            [
                "k",
                "passes",
                "rate_len",
                "rate_ang",
                "rate_hw",
                "rate_residual",
                "worst_ratio",
                "max_identity_error",
            ],
        );
        for p in &sweep.points {
            table.push(vec![
                p.k.to_string(),
                flag(p.passes),
                num(p.rate_len),
                num(p.rate_ang),
                num(p.rate_hw),
                num(p.rate_residual),
                sci(p.worst_ratio),
                sci(p.max_identity_error),
            ]);
        }
        let mut summary = Table::new(
            "theorem_summary",
            ["cols", "trials", "formula_k", "smallest_passing_k", "implied_constant"],
        );
        summary.push(vec![
            sweep_cfg.cols.to_string(),
            sweep_cfg.trials.to_string(),
            sweep.formula_k.to_string(),
            sweep.smallest_passing_k.map_or("none".into(), |k| k.to_string()),
            sweep.implied_constant.map_or("none".into(), num),
        ]);

        let mut files = table.write(out)?;
        files.extend(summary.write(out)?);
        let mut assertions = vec![Assertion::new(
            "theorem passing k found",
            sweep.smallest_passing_k.is_some(),
            format!("formula k = {}, smallest passing k = {:?}", sweep.formula_k, sweep.smallest_passing_k),
        )];
        if let Some(best) = &sweep.best {
            let path = out.join("theorem_trials.csv");
            std::fs::write(&path, best.to_csv())?;
            files.push(path);
            assertions.push(Assertion::new(
                "theorem residual identity",
                best.identity_failures == 0,
                format!("max error {:.3e}", best.max_identity_error),
            ));
        }
        Ok(SuiteReport {
            suite: self.name().into(),
            files,
            assertions,
        })
    }
}
