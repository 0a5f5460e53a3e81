//! Benchmark suites behind a name registry. Each suite writes CSV tables and
//! gnuplot-readable `.dat` twins into the output directory and returns its
//! pass/fail assertions.
//!
//! Timing columns carry a `_{n}thr` suffix naming the worker-thread count;
//! every other column is a deterministic function of the configuration.

mod backend;
mod completion;
mod frontend;
mod mapping;
mod theorem;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};

use crate::config::HarnessConfig;

pub use backend::{UavSuiteRunner, UgvSuiteRunner};
pub use completion::CompletionSuiteRunner;
pub use frontend::FrontendSuiteRunner;
pub use mapping::MappingSuiteRunner;
pub use theorem::TheoremSuiteRunner;

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub suite: String,
    pub files: Vec<PathBuf>,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

pub trait BenchmarkSuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn run(&self, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport>;
}

pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn BenchmarkSuite>>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = Self { suites: BTreeMap::new() };
        r.register(Box::new(MappingSuiteRunner));
        r.register(Box::new(FrontendSuiteRunner));
        r.register(Box::new(UavSuiteRunner));
        r.register(Box::new(UgvSuiteRunner));
        r.register(Box::new(CompletionSuiteRunner));
        r.register(Box::new(TheoremSuiteRunner));
        r
    }
}

impl SuiteRegistry {
    pub fn register(&mut self, suite: Box<dyn BenchmarkSuite>) {
        self.suites.insert(suite.name(), suite);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn BenchmarkSuite> {
        self.suites.get(name).map(|s| s.as_ref())
    }
}

/// Runs one suite by name, creating `out` if needed.
pub fn run_benchmark(name: &str, cfg: &HarnessConfig, out: &Path) -> Result<SuiteReport> {
    let registry = SuiteRegistry::default();
    let suite = registry
        .get(name)
        .ok_or_else(|| anyhow!("unknown suite `{name}` (known: {})", registry.names().join(", ")))?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    suite.run(cfg, out)
}

/// `{base}_{n}thr` for the current rayon pool.
pub fn timing_column(base: &str) -> String {
    format!("{base}_{}thr", rayon::current_num_threads())
}

pub fn is_timing_column(header: &str) -> bool {
    header
        .strip_suffix("thr")
        .and_then(|h| h.rsplit_once('_'))
        .is_some_and(|(_, n)| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

/// A result table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            name: name.into(),
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    /// Writes `{name}.csv` and `{name}.dat` (whitespace-separated, `#`
    /// header) and returns both paths.
    pub fn write(&self, out: &Path) -> Result<Vec<PathBuf>> {
        let csv_path = out.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let dat_path = out.join(format!("{}.dat", self.name));
        let mut dat = format!("# {}\n", self.headers.join(" "));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| if c.contains(' ') { c.replace(' ', "_") } else { c.clone() }).collect();
            dat.push_str(&cells.join(" "));
            dat.push('\n');
        }
        std::fs::write(&dat_path, dat).with_context(|| format!("writing {}", dat_path.display()))?;
        Ok(vec![csv_path, dat_path])
    }
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub(crate) fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

pub(crate) fn flag(b: bool) -> String {
    u8::from(b).to_string()
}
