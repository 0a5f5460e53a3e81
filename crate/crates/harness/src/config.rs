//! Harness configuration file (TOML). Every field is optional; missing
//! values take the tuned defaults.

use std::path::Path;

use anyhow::{Context, Result};
use rmrp_core::embedding::{EmbeddingSpec, SweepConfig};
use serde::{Deserialize, Serialize};

use crate::experiments::{
    CompletionSettings, FieldSettings, FrontendSettings, MappingSettings, MemorySettings, SensingSettings, UavSettings,
    UgvSettings,
};
use crate::generators::GeneratorParams;
use crate::sensing::ScanConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    /// Base seed; suites offset it per cell.
    pub seed: u64,
    pub mapping: MappingSuite,
    pub frontend: FrontendSuite,
    pub backend_uav: UavSuite,
    pub backend_ugv: UgvSuite,
    pub completion: CompletionSuite,
    pub theorem: TheoremSuite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingSuite {
    pub seeds: usize,
    pub run: MappingSettings,
    pub memory: MemorySettings,
    pub min_accuracy: f64,
    pub min_r2: f64,
    pub max_accuracy_gap: f64,
    pub min_voxel_ratio: f64,
}

impl Default for MappingSuite {
    fn default() -> Self {
        Self {
            seeds: 1,
            run: MappingSettings::default(),
            memory: MemorySettings::default(),
            min_accuracy: 0.95,
            min_r2: 0.95,
            max_accuracy_gap: 0.02,
            min_voxel_ratio: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendSuite {
    pub seeds: usize,
    pub corridor: FrontendSettings,
    /// Lattice-resolution table.
    pub grid_scene: String,
    pub grid_params: GeneratorParams,
    pub grid_field: FieldSettings,
    pub grid_sensing: SensingSettings,
    pub pitches: Vec<f64>,
    /// Scenes (of `seeds`) whose refined clearance must not drop.
    pub min_improved: usize,
}

impl Default for FrontendSuite {
    fn default() -> Self {
        Self {
            seeds: 10,
            corridor: FrontendSettings::default(),
            grid_scene: "box-grid".into(),
            grid_params: GeneratorParams::default(),
            grid_field: FieldSettings::default(),
            grid_sensing: SensingSettings {
                poses_per_axis: 3,
                scan: ScanConfig {
                    rays: 2000,
                    max_range: 10.0,
                    stride: 0.5,
                },
                volumetric: 10_000,
            },
            pitches: vec![0.2, 0.15, 0.1],
            min_improved: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UavSuite {
    pub seeds: usize,
    pub run: UavSettings,
    pub min_successes: usize,
}

impl Default for UavSuite {
    fn default() -> Self {
        Self {
            seeds: 10,
            run: UavSettings::default(),
            min_successes: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UgvSuite {
    pub seeds: usize,
    pub run: UgvSettings,
    pub terrain_weight: f64,
    /// Per scene family: seeds where the ablation must enter a pit.
    pub min_ablation_hits: usize,
}

impl Default for UgvSuite {
    fn default() -> Self {
        Self {
            seeds: 10,
            run: UgvSettings::default(),
            terrain_weight: 5.0,
            min_ablation_hits: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompletionSuite {
    pub run: CompletionSettings,
    pub min_recall: f64,
    pub max_false_positive_rate: f64,
}

impl Default for CompletionSuite {
    fn default() -> Self {
        Self {
            run: CompletionSettings::default(),
            min_recall: 0.8,
            max_false_positive_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoremSuite {
    pub spec: EmbeddingSpec,
    pub sweep: SweepConfig,
}

impl HarnessConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Small sizes for smoke runs and determinism checks. Assertion
    /// thresholds keep their defaults, so quick runs may report failures.
    pub fn quick() -> Self {
        let mut c = Self::default();
        let small = FieldSettings {
            feature_dim: 120,
            ..Default::default()
        };
        c.mapping.run.field = FieldSettings {
            esdf_scale: 3.0,
            ..small
        };
        c.mapping.run.sensing.scan.rays = 600;
        c.mapping.run.sample_budget = 3000;
        c.mapping.memory.field = small;
        c.mapping.memory.samples = 500;
        c.mapping.memory.params = GeneratorParams::default();
        c.frontend.seeds = 2;
        c.frontend.corridor.field = FieldSettings {
            occupancy_scale: 6.0,
            ..small
        };
        c.frontend.corridor.sensing.scan.rays = 400;
        c.frontend.corridor.sensing.volumetric = 2000;
        c.frontend.corridor.planner.refinement.iterations = 20;
        c.frontend.grid_field = small;
        c.frontend.grid_sensing.scan.rays = 400;
        c.frontend.grid_sensing.volumetric = 2000;
        c.frontend.pitches = vec![0.3, 0.2];
        c.frontend.min_improved = 2;
        c.backend_uav.seeds = 2;
        c.backend_uav.run.field = small;
        c.backend_uav.run.sensing.scan.rays = 300;
        c.backend_uav.run.sensing.volumetric = 2000;
        c.backend_uav.run.planner.optimizer.max_iterations = 30;
        c.backend_uav.min_successes = 2;
        c.backend_ugv.seeds = 2;
        c.backend_ugv.run.field = FieldSettings {
            ridge_alpha: 1e-6,
            ..small
        };
        c.backend_ugv.run.terrain_samples = 800;
        c.backend_ugv.run.planner.optimizer.max_iterations = 30;
        c.backend_ugv.min_ablation_hits = 2;
        c.completion.run.field = FieldSettings {
            occupancy_scale: 4.0,
            ridge_alpha: 1e-4,
            ..small
        };
        c.completion.run.training_scenes = 3;
        c.completion.run.samples_per_scene = 800;
        c.theorem.sweep.cols = 120;
        c.theorem.sweep.trials = 100;
        c.theorem.sweep.stride = 16;
        c
    }
}
