//! Mapping and trajectory metrics.

use std::time::Instant;

use rmrp_core::backend::TrajectorySample;
use rmrp_core::checkpoint::Checkpoint;
use rmrp_core::field::{FieldScratch, ParametricField, TrainingSet};
use rmrp_core::geometry::Point3;
use rmrp_core::{FieldKind, Result};
use serde::Serialize;

use crate::scene::{Scene, Terrain};

/// Depth below the undisturbed ground at which a point counts as inside a pit.
pub const PIT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MappingMetrics {
    pub train_seconds: f64,
    /// Mean wall time of one field evaluation.
    pub query_seconds: f64,
    pub checkpoint_bytes: usize,
    /// Classification only.
    pub accuracy: Option<f64>,
    /// Mean of per-class recalls (classification only).
    pub balanced_accuracy: Option<f64>,
    /// Regression only.
    pub r2: Option<f64>,
    pub mse: Option<f64>,
    pub samples: usize,
}

/// Scores `field` on a held-out set. `train_seconds` is passed through from
/// the caller, which owns the training run.
pub fn evaluate_mapping(field: &ParametricField, held_out: &TrainingSet, train_seconds: f64) -> Result<MappingMetrics> {
    let mut scratch = FieldScratch::for_field(field);
    let n = held_out.len();
    let mut preds = Vec::with_capacity(n);
    let start = Instant::now();
    for (x, _) in held_out.iter() {
        preds.push(field.value_with(x, &mut scratch)?);
    }
    let query_seconds = start.elapsed().as_secs_f64() / n.max(1) as f64;
    let checkpoint_bytes = Checkpoint::new(field.clone()).to_bytes().len();
    let targets = held_out.targets();
    let mut m = MappingMetrics {
        train_seconds,
        query_seconds,
        checkpoint_bytes,
        accuracy: None,
        balanced_accuracy: None,
        r2: None,
        mse: None,
        samples: n,
    };
    if field.kind() == FieldKind::Occupancy {
        let (acc, bal) = classification_scores(&preds, targets, 0.5);
        m.accuracy = Some(acc);
        m.balanced_accuracy = Some(bal);
    } else {
        let (r2, mse) = regression_scores(&preds, targets);
        m.r2 = Some(r2);
        m.mse = Some(mse);
    }
    Ok(m)
}

/// Accuracy and balanced accuracy of `pred > threshold` against `{0, 1}`
/// labels.
pub fn classification_scores(preds: &[f64], labels: &[f64], threshold: f64) -> (f64, f64) {
    let mut counts = [[0usize; 2]; 2];
    for (&p, &t) in preds.iter().zip(labels) {
        let truth = usize::from(t > 0.5);
        let guess = usize::from(p > threshold);
        counts[truth][guess] += 1;
    }
    let n = preds.len().max(1) as f64;
    let acc = (counts[0][0] + counts[1][1]) as f64 / n;
    let recall = |c: usize| {
        let total = counts[c][0] + counts[c][1];
        if total == 0 {
            1.0
        } else {
            counts[c][c] as f64 / total as f64
        }
    };
    (acc, 0.5 * (recall(0) + recall(1)))
}

pub fn regression_scores(preds: &[f64], targets: &[f64]) -> (f64, f64) {
    let n = targets.len().max(1) as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let ss_res: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t).powi(2)).sum();
    let ss_tot: f64 = targets.iter().map(|t| (t - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::from(u8::from(ss_res == 0.0)) };
    (r2, ss_res / n)
}

/// `∫‖a‖² dt` by the trapezoid rule over uniformly timed samples.
pub fn energy_proxy(samples: &[TrajectorySample]) -> f64 {
    samples
        .windows(2)
        .map(|w| {
            let a0: f64 = w[0].acceleration.iter().map(|v| v * v).sum();
            let a1: f64 = w[1].acceleration.iter().map(|v| v * v).sum();
            0.5 * (a0 + a1) * (w[1].t - w[0].t)
        })
        .sum()
}

/// Energy from positions alone: second differences `(p₊ − 2p + p₋)/h²` on a
/// uniform time grid of step `h`.
pub fn energy_from_positions(points: &[Point3], h: f64) -> f64 {
    points
        .windows(3)
        .map(|w| {
            let a2: f64 = (0..3).map(|k| ((w[2][k] - 2.0 * w[1][k] + w[0][k]) / (h * h)).powi(2)).sum();
            a2 * h
        })
        .sum()
}

/// Number of points whose `(x, y)` lies more than [`PIT_MARGIN`] below the
/// pit-free ground.
pub fn count_pit_points<'a>(terrain: &Terrain, points: impl IntoIterator<Item = &'a [f64]>) -> usize {
    points
        .into_iter()
        .filter(|p| terrain.pit_depth(p[0], p[1]) > PIT_MARGIN)
        .count()
}

/// Smallest exact obstacle distance over `points`.
pub fn min_clearance<'a>(scene: &Scene, points: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    points.into_iter().map(|p| scene.distance(p)).fold(f64::INFINITY, f64::min)
}

pub fn sample_positions(samples: &[TrajectorySample]) -> Vec<Point3> {
    samples.iter().map(|s| s.position).collect()
}
