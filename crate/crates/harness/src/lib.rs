//! Evaluation harness: analytic scenes, simulated sensing, ground-truth
//! oracles, metrics, planning pipelines and benchmark suites.

pub mod config;
pub mod experiments;
pub mod generators;
pub mod metrics;
pub mod oracle;
pub mod planning;
pub mod scene;
pub mod sensing;
pub mod suites;
