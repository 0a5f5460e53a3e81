//! Experiment drivers shared by the benchmark suites and the acceptance
//! tests. Every driver is deterministic given its settings and seed; wall
//! times are measured but never feed back into results.

use std::time::Instant;

use anyhow::{ensure, Context, Result};
use rmrp_core::checkpoint::Checkpoint;
use rmrp_core::completion::{complete_blind_spots, CellIndex, CompletionConfig, OccupancyStore};
use rmrp_core::field::{train_esdf, train_occupancy, train_terrain, FieldConfig};
use rmrp_core::frontend::{refinement_cost, RefinementConfig, WaypointPath};
use rmrp_core::linear::RidgeConfig;
use rmrp_core::ParametricField;
use serde::{Deserialize, Serialize};

use crate::generators::{generate_scene, GeneratorParams};
use crate::metrics::{evaluate_mapping, MappingMetrics};
use crate::oracle::VoxelGrid;
use crate::planning::{plan_frontend, plan_ugv, plan_uav, summarize, PlanSummary, PlannerConfig, TrajectoryPlan};
use crate::scene::Scene;
use crate::sensing::{
    esdf_samples, grid_poses, scan_from_poses, terrain_samples, to_terrain_set, to_training_set, volumetric_samples,
    ScanConfig, ScanSample,
};

/// Random basis and ridge settings for one field family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldSettings {
    pub feature_dim: usize,
    /// `k / M`.
    pub projection_ratio: f64,
    pub sparsity: f64,
    pub occupancy_scale: f64,
    pub esdf_scale: f64,
    pub terrain_scale: f64,
    pub ridge_alpha: f64,
    pub feature_seed: u64,
    pub projection_seed: u64,
}

impl Default for FieldSettings {
    fn default() -> Self {
        Self {
            feature_dim: 600,
            projection_ratio: 0.5,
            sparsity: 3.0,
            occupancy_scale: 5.0,
            esdf_scale: 2.5,
            terrain_scale: 3.0,
            ridge_alpha: 1e-5,
            feature_seed: 1,
            projection_seed: 2,
        }
    }
}

impl FieldSettings {
    pub fn projection_dim(&self) -> usize {
        ((self.feature_dim as f64 * self.projection_ratio).round() as usize).clamp(1, self.feature_dim)
    }

    pub fn config(&self, scale: f64, projection_dim: usize) -> FieldConfig {
        FieldConfig {
            feature_dim: self.feature_dim,
            projection_dim: Some(projection_dim),
            sparsity: self.sparsity,
            feature_scale: scale,
            feature_seed: self.feature_seed,
            projection_seed: self.projection_seed,
            ridge: RidgeConfig { alpha: self.ridge_alpha },
        }
    }

    pub fn occupancy(&self) -> FieldConfig {
        self.config(self.occupancy_scale, self.projection_dim())
    }

    pub fn esdf(&self) -> FieldConfig {
        self.config(self.esdf_scale, self.projection_dim())
    }

    pub fn terrain(&self) -> FieldConfig {
        self.config(self.terrain_scale, self.projection_dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensingSettings {
    /// Sensor poses on a `n × n` grid.
    pub poses_per_axis: usize,
    pub scan: ScanConfig,
    /// Extra containment-labelled uniform samples.
    pub volumetric: usize,
}

impl Default for SensingSettings {
    fn default() -> Self {
        Self {
            poses_per_axis: 3,
            scan: ScanConfig::default(),
            volumetric: 0,
        }
    }
}

impl SensingSettings {
    /// Scan samples followed by volumetric samples.
    pub fn collect(&self, scene: &Scene, seed: u64) -> Vec<ScanSample> {
        let poses = grid_poses(scene, self.poses_per_axis);
        let mut out = scan_from_poses(scene, &poses, &self.scan, scene.mask.as_ref());
        if self.volumetric > 0 {
            out.extend(volumetric_samples(scene, &scene.bounds, self.volumetric, seed.wrapping_add(7), scene.mask.as_ref()));
        }
        out
    }
}

// ---------------------------------------------------------------- mapping

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingSettings {
    pub scene: String,
    pub params: GeneratorParams,
    pub field: FieldSettings,
    pub sensing: SensingSettings,
    /// Samples kept (uniform stride over the scan) before the split.
    pub sample_budget: usize,
    /// Every n-th sample is held out.
    pub holdout_every: usize,
}

impl Default for MappingSettings {
    fn default() -> Self {
        Self {
            scene: "box-grid".into(),
            params: GeneratorParams::default(),
            field: FieldSettings {
                feature_dim: 1000,
                esdf_scale: 3.0,
                ..Default::default()
            },
            sensing: SensingSettings {
                poses_per_axis: 3,
                scan: ScanConfig {
                    rays: 6000,
                    max_range: 10.0,
                    stride: 0.5,
                },
                volumetric: 0,
            },
            sample_budget: 50_000,
            holdout_every: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MappingVariant {
    /// `k`; equal to `M` for the unreduced baseline.
    pub projection_dim: usize,
    pub occupancy: MappingMetrics,
    pub esdf: MappingMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingRun {
    pub seed: u64,
    pub samples: usize,
    /// Reduced map (`k = ratio · M`).
    pub reduced: MappingVariant,
    /// Same pipeline with `k = M`.
    pub full: MappingVariant,
}

/// Scan-derived training and held-out sets: occupancy labels and exact
/// distances at the same positions.
pub fn mapping_data(
    scene: &Scene,
    s: &MappingSettings,
    seed: u64,
) -> (rmrp_core::TrainingSet, rmrp_core::TrainingSet, rmrp_core::TrainingSet, rmrp_core::TrainingSet) {
    let scan = s.sensing.collect(scene, seed);
    let step = (scan.len() / s.sample_budget.max(1)).max(1);
    let kept: Vec<ScanSample> = scan.iter().step_by(step).take(s.sample_budget).copied().collect();
    let (occ_train, occ_test) = to_training_set(&kept).split_every(s.holdout_every);
    let dist = esdf_samples(scene, kept.iter().map(|x| x.position));
    let (esdf_train, esdf_test) = to_training_set(&dist).split_every(s.holdout_every);
    (occ_train, occ_test, esdf_train, esdf_test)
}

pub fn run_mapping(s: &MappingSettings, seed: u64) -> Result<MappingRun> {
    let scene = generate_scene(&s.scene, &s.params, seed)?;
    let (occ_train, occ_test, esdf_train, esdf_test) = mapping_data(&scene, s, seed);
    let variant = |k: usize| -> Result<MappingVariant> {
        let t = Instant::now();
        let occ = train_occupancy(&occ_train, &s.field.config(s.field.occupancy_scale, k))?;
        let occ_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let esdf = train_esdf(&esdf_train, &s.field.config(s.field.esdf_scale, k))?;
        let esdf_s = t.elapsed().as_secs_f64();
        Ok(MappingVariant {
            projection_dim: k,
            occupancy: evaluate_mapping(&occ, &occ_test, occ_s)?,
            esdf: evaluate_mapping(&esdf, &esdf_test, esdf_s)?,
        })
    };
    Ok(MappingRun {
        seed,
        samples: occ_train.len() + occ_test.len(),
        reduced: variant(s.field.projection_dim())?,
        full: variant(s.field.feature_dim)?,
    })
}

// ----------------------------------------------------------------- memory

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemorySettings {
    pub scene: String,
    pub params: GeneratorParams,
    /// Generator parameter scaled to change the volume.
    pub extent_key: String,
    pub field: FieldSettings,
    pub samples: usize,
    pub sample_factor: usize,
    pub volume_factor: f64,
    pub voxel_pitch: f64,
    /// Storage per voxel of the dense baseline (f32 log-odds).
    pub bytes_per_voxel: usize,
}

impl Default for MemorySettings {
    fn default() -> Self {
        Self {
            scene: "box-grid".into(),
            params: GeneratorParams::default().with("extent", 20.0).with("height", 4.0).with("cells", 6.0),
            extent_key: "extent".into(),
            field: FieldSettings {
                feature_dim: 400,
                ..Default::default()
            },
            samples: 5_000,
            sample_factor: 10,
            volume_factor: 2.0,
            voxel_pitch: 0.05,
            bytes_per_voxel: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryRow {
    pub volume: f64,
    pub samples: usize,
    pub checkpoint_bytes: usize,
    pub voxel_bytes: usize,
}

/// Checkpoint size for the base scene, the base scene with more samples, and
/// an enlarged scene (both horizontal extents scaled by `√volume_factor`).
pub fn run_memory(s: &MemorySettings, seed: u64) -> Result<Vec<MemoryRow>> {
    let base_extent = s.params.get(&s.extent_key, 6.0);
    let big = s
        .params
        .clone()
        .with(&s.extent_key, base_extent * s.volume_factor.sqrt());
    let cases = [
        (s.params.clone(), s.samples),
        (s.params.clone(), s.samples * s.sample_factor),
        (big, s.samples),
    ];
    let mut rows = Vec::new();
    for (params, n) in cases {
        let scene = generate_scene(&s.scene, &params, seed)?;
        let data = to_training_set(&volumetric_samples(&scene, &scene.bounds, n, seed, None));
        let field = train_occupancy(&data, &s.field.occupancy())?;
        rows.push(MemoryRow {
            volume: scene.bounds.volume(),
            samples: n,
            checkpoint_bytes: Checkpoint::new(field).to_bytes().len(),
            voxel_bytes: VoxelGrid::cell_count(&scene.bounds, s.voxel_pitch) * s.bytes_per_voxel,
        });
    }
    Ok(rows)
}

// --------------------------------------------------------------- frontend

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendSettings {
    pub scene: String,
    pub params: GeneratorParams,
    pub field: FieldSettings,
    pub sensing: SensingSettings,
    pub planner: PlannerConfig,
    /// Polyline spacing for clearance evaluation (m).
    pub clearance_spacing: f64,
}

impl Default for FrontendSettings {
    fn default() -> Self {
        Self {
            scene: "corridor".into(),
            params: GeneratorParams::default(),
            field: FieldSettings {
                occupancy_scale: 6.0,
                ..Default::default()
            },
            sensing: SensingSettings {
                poses_per_axis: 4,
                scan: ScanConfig {
                    rays: 2000,
                    max_range: 10.0,
                    stride: 0.3,
                },
                volumetric: 20_000,
            },
            planner: PlannerConfig::default(),
            clearance_spacing: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontendRun {
    pub seed: u64,
    pub nodes_visited: usize,
    pub initial_length: f64,
    pub refined_length: f64,
    /// Refinement cost under the normalized weights.
    pub cost_initial: f64,
    pub cost_refined: f64,
    /// Signed distance minimized along the densified polyline.
    pub clearance_initial: f64,
    pub clearance_refined: f64,
    pub endpoints_exact: bool,
    pub cost_trace: Vec<f64>,
    pub search_seconds: f64,
    pub refine_seconds: f64,
    pub waypoints: Vec<[f64; 3]>,
}

/// Most negative signed obstacle distance along a densified polyline.
pub fn polyline_clearance(scene: &Scene, path: &WaypointPath, spacing: f64) -> f64 {
    path.densify(spacing)
        .iter()
        .map(|p| scene.signed_distance(p))
        .fold(f64::INFINITY, f64::min)
}

pub fn train_occupancy_for(scene: &Scene, field: &FieldSettings, sensing: &SensingSettings, seed: u64) -> Result<ParametricField> {
    let (train, _) = to_training_set(&sensing.collect(scene, seed)).split_every(5);
    Ok(train_occupancy(&train, &field.occupancy())?)
}

pub fn frontend_case(scene: &Scene, occ: &ParametricField, planner: &PlannerConfig, spacing: f64) -> Result<FrontendRun> {
    let start = scene.start.context("scene has no start")?;
    let goal = scene.goal.context("scene has no goal")?;
    let mut planner = *planner;
    planner.search.bounds.get_or_insert(scene.bounds);
    let plan = plan_frontend(occ, start, goal, &planner)?;
    let init = &plan.search.path;
    let refined = &plan.refined.path;
    let weighted = RefinementConfig {
        gradient_weight: plan.refined.weights.gradient_weight,
        deviation_weight: plan.refined.weights.deviation_weight,
        ..planner.refinement
    };
    Ok(FrontendRun {
        seed: scene.seed,
        nodes_visited: plan.search.nodes_visited,
        initial_length: init.length(),
        refined_length: refined.length(),
        cost_initial: refinement_cost(init, init, occ, &weighted)?,
        cost_refined: refinement_cost(refined, init, occ, &weighted)?,
        clearance_initial: polyline_clearance(scene, init, spacing),
        clearance_refined: polyline_clearance(scene, refined, spacing),
        endpoints_exact: refined.start() == init.start() && refined.goal() == init.goal(),
        cost_trace: plan.refined.cost_trace.clone(),
        search_seconds: plan.search_seconds,
        refine_seconds: plan.refine_seconds,
        waypoints: refined.points().to_vec(),
    })
}

pub fn run_frontend(s: &FrontendSettings, seed: u64) -> Result<FrontendRun> {
    let scene = generate_scene(&s.scene, &s.params, seed)?;
    let occ = train_occupancy_for(&scene, &s.field, &s.sensing, seed)?;
    frontend_case(&scene, &occ, &s.planner, s.clearance_spacing)
}

// ------------------------------------------------------------ backend UAV

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UavSettings {
    pub scene: String,
    pub params: GeneratorParams,
    pub field: FieldSettings,
    pub sensing: SensingSettings,
    pub planner: PlannerConfig,
    /// Required fraction of `S_f` at every curve sample.
    pub clearance_fraction: f64,
    pub goal_tolerance: f64,
}

impl Default for UavSettings {
    fn default() -> Self {
        let mut planner = PlannerConfig {
            control_spacing: 0.3,
            ..Default::default()
        };
        planner.optimizer.max_iterations = 300;
        Self {
            scene: "box-field".into(),
            params: GeneratorParams::default(),
            field: FieldSettings::default(),
            sensing: SensingSettings {
                poses_per_axis: 3,
                scan: ScanConfig {
                    rays: 1200,
                    max_range: 10.0,
                    stride: 0.5,
                },
                volumetric: 8000,
            },
            planner,
            clearance_fraction: 0.9,
            goal_tolerance: 0.05,
        }
    }
}

pub struct UavFields {
    pub occupancy: ParametricField,
    pub esdf: ParametricField,
}

/// Occupancy from scans plus volumetric samples; ESDF from the exact
/// distance at the free and surface sample positions.
pub fn train_uav_fields(scene: &Scene, s: &UavSettings, seed: u64) -> Result<UavFields> {
    let data = s.sensing.collect(scene, seed);
    let occupancy = train_occupancy(&to_training_set(&data), &s.field.occupancy())?;
    let positions = data
        .iter()
        .filter(|x| x.label == 1.0 || !scene.is_occupied(&x.position))
        .map(|x| x.position);
    let (train, _) = to_training_set(&esdf_samples(scene, positions)).split_every(5);
    let esdf = train_esdf(&train, &s.field.esdf())?;
    Ok(UavFields { occupancy, esdf })
}

#[derive(Debug, Clone)]
pub struct UavRun {
    pub seed: u64,
    pub variant: &'static str,
    pub plan: TrajectoryPlan,
    pub summary: PlanSummary,
    pub monotone: bool,
}

/// `refine = false` is the baseline that feeds raw lattice paths to the
/// optimizer.
pub fn uav_case(scene: &Scene, fields: &UavFields, s: &UavSettings, refine: bool) -> Result<UavRun> {
    let start = scene.start.context("scene has no start")?;
    let goal = scene.goal.context("scene has no goal")?;
    let mut planner = s.planner;
    planner.search.bounds.get_or_insert(scene.bounds);
    if !refine {
        planner.refinement.iterations = 0;
    }
    let plan = plan_uav(&fields.occupancy, &fields.esdf, start, goal, &planner)?;
    let floor = s.clearance_fraction * planner.costs.clearance;
    let summary = summarize(scene, &plan, goal, floor, s.goal_tolerance);
    let monotone = plan.outcome.cost_trace.windows(2).all(|w| w[1] <= w[0]);
    Ok(UavRun {
        seed: scene.seed,
        variant: if refine { "ours" } else { "no-refine" },
        plan,
        summary,
        monotone,
    })
}

// ------------------------------------------------------------ backend UGV

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UgvSettings {
    pub scenes: Vec<String>,
    pub params: GeneratorParams,
    pub field: FieldSettings,
    pub terrain_samples: usize,
    pub planner: PlannerConfig,
    pub goal_tolerance: f64,
}

impl Default for UgvSettings {
    fn default() -> Self {
        Self {
            scenes: vec!["pits-flat".into(), "pits-slope".into()],
            params: GeneratorParams::default(),
            field: FieldSettings {
                feature_dim: 400,
                ridge_alpha: 1e-6,
                ..Default::default()
            },
            terrain_samples: 4000,
            planner: PlannerConfig::default(),
            goal_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UgvRun {
    pub scene: String,
    pub seed: u64,
    pub terrain_weight: f64,
    pub plan: TrajectoryPlan,
    pub summary: PlanSummary,
}

pub fn train_terrain_for(scene: &Scene, s: &UgvSettings, seed: u64) -> Result<ParametricField> {
    let data = to_terrain_set(&terrain_samples(scene, s.terrain_samples, seed.wrapping_add(100)));
    Ok(train_terrain(&data, &s.field.terrain())?)
}

pub fn ugv_case(scene: &Scene, terrain: &ParametricField, s: &UgvSettings, terrain_weight: f64) -> Result<UgvRun> {
    let start = scene.start.context("scene has no start")?;
    let goal = scene.goal.context("scene has no goal")?;
    let mut planner = s.planner;
    planner.costs.terrain_weight = terrain_weight;
    let plan = plan_ugv(terrain, None, start, goal, &planner)?;
    let summary = summarize(scene, &plan, goal, 0.0, s.goal_tolerance);
    Ok(UgvRun {
        scene: scene.name.clone(),
        seed: scene.seed,
        terrain_weight,
        plan,
        summary,
    })
}

// ------------------------------------------------------------- completion

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompletionSettings {
    pub scene: String,
    pub params: GeneratorParams,
    pub field: FieldSettings,
    pub training_scenes: usize,
    pub samples_per_scene: usize,
    /// Seed of the held-out scene, offset from the base seed.
    pub held_out: u64,
    pub threshold: f64,
    pub pitch: f64,
}

impl Default for CompletionSettings {
    fn default() -> Self {
        Self {
            scene: "corner".into(),
            params: GeneratorParams::default(),
            field: FieldSettings {
                occupancy_scale: 4.0,
                ridge_alpha: 1e-4,
                ..Default::default()
            },
            training_scenes: 20,
            samples_per_scene: 4000,
            held_out: 100,
            threshold: 0.5,
            pitch: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletionRun {
    pub cells: usize,
    pub occupied_truth: usize,
    pub added: usize,
    pub recall: f64,
    pub false_positive_rate: f64,
    /// Second pass adds nothing and leaves the store unchanged.
    pub idempotent: bool,
}

/// Trains on fully observed scenes, then completes the masked region of a
/// held-out scene on top of the occupied cells it did observe.
/// Occupancy prior fitted on fully observed scenes.
pub fn train_completion_prior(s: &CompletionSettings, base_seed: u64) -> Result<ParametricField> {
    let mut data = Vec::new();
    for i in 0..s.training_scenes as u64 {
        let scene = generate_scene(&s.scene, &s.params, base_seed + i)?;
        data.extend(volumetric_samples(&scene, &scene.bounds, s.samples_per_scene, base_seed + i + 1000, None));
    }
    Ok(train_occupancy(&to_training_set(&data), &s.field.occupancy())?)
}

/// Completes the masked region of `scene` on top of the occupied cells
/// observed outside it, then scores the region against the oracle.
pub fn complete_scene(
    prior: &ParametricField,
    scene: &Scene,
    threshold: f64,
    pitch: f64,
) -> Result<(CompletionRun, OccupancyStore, Vec<CellIndex>)> {
    let mask = scene.mask.context("scene has no blind-spot mask")?;
    let mut store = OccupancyStore::new(pitch, scene.bounds.min)?;
    for c in scene.bounds.grid_centers(pitch) {
        if !mask.contains(&c) && scene.is_occupied(&c) {
            store.mark_point(&c);
        }
    }
    let cfg = CompletionConfig {
        threshold,
        region: mask,
        pitch,
    };
    let added = complete_blind_spots(prior, &cfg, &mut store)?;
    let snapshot = store.clone();
    let again = complete_blind_spots(prior, &cfg, &mut store)?;
    let idempotent = again.is_empty() && store == snapshot;
    let (mut tp, mut fp, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    let centers = mask.grid_centers(pitch);
    for c in &centers {
        let predicted = store.is_occupied(store.cell_of(c));
        if scene.is_occupied(c) {
            pos += 1;
            tp += usize::from(predicted);
        } else {
            neg += 1;
            fp += usize::from(predicted);
        }
    }
    ensure!(pos > 0 && neg > 0, "blind spot must contain both occupied and free cells");
    let run = CompletionRun {
        cells: centers.len(),
        occupied_truth: pos,
        added: added.len(),
        recall: tp as f64 / pos as f64,
        false_positive_rate: fp as f64 / neg as f64,
        idempotent,
    };
    Ok((run, store, added))
}

pub fn run_completion(s: &CompletionSettings, base_seed: u64) -> Result<CompletionRun> {
    let prior = train_completion_prior(s, base_seed)?;
    let held = generate_scene(&s.scene, &s.params, base_seed + s.held_out)?;
    Ok(complete_scene(&prior, &held, s.threshold, s.pitch)?.0)
}
