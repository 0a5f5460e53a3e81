//! Seeded scene generators, registered by name.

use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmrp_core::geometry::Aabb;
use serde::{Deserialize, Serialize};

use crate::scene::{Pit, Primitive, Scene, Terrain, TerrainBase};

/// Numeric generator parameters; missing keys take generator defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorParams(pub BTreeMap<String, f64>);

impl GeneratorParams {
    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }
}

pub trait SceneGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn generate(&self, params: &GeneratorParams, seed: u64) -> Result<Scene>;
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random::<f64>()
}

pub struct SphereSingle;

impl SceneGenerator for SphereSingle {
    fn name(&self) -> &'static str {
        "sphere-single"
    }
    fn describe(&self) -> &'static str {
        "one sphere in a 10 m cube"
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let half = p.get("half_extent", 5.0);
        let mut s = Scene::new(self.name(), seed, Aabb::new([-half; 3], [half; 3]));
        s.obstacles.push(Primitive::Sphere {
            center: [p.get("cx", 0.0), p.get("cy", 0.0), p.get("cz", 0.0)],
            radius: p.get("radius", 1.0),
        });
        s.start = Some([-0.8 * half, 0.0, 0.0]);
        s.goal = Some([0.8 * half, 0.0, 0.0]);
        Ok(s)
    }
}

/// Regular grid of box pillars with seeded jitter.
pub struct BoxGrid;

impl SceneGenerator for BoxGrid {
    fn name(&self) -> &'static str {
        "box-grid"
    }
    fn describe(&self) -> &'static str {
        "grid of jittered box pillars"
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let extent = p.get("extent", 6.0);
        let height = p.get("height", 2.0);
        let cells = p.get("cells", 3.0).max(1.0) as usize;
        let size = p.get("box_size", 0.8);
        let jitter = p.get("jitter", 0.3);
        let mut r = rng(seed);
        let mut s = Scene::new(self.name(), seed, Aabb::new([0.0, 0.0, 0.0], [extent, extent, height]));
        let pitch = extent / cells as f64;
        for i in 0..cells {
            for j in 0..cells {
                let cx = (i as f64 + 0.5) * pitch + uniform(&mut r, -jitter, jitter);
                let cy = (j as f64 + 0.5) * pitch + uniform(&mut r, -jitter, jitter);
                let h = 0.5 * size * uniform(&mut r, 0.8, 1.2);
                let top = height * uniform(&mut r, 0.5, 0.95);
                s.obstacles.push(Primitive::Box {
                    min: [(cx - h).max(0.0), (cy - h).max(0.0), 0.0],
                    max: [(cx + h).min(extent), (cy + h).min(extent), top],
                });
            }
        }
        s.start = Some([0.05 * extent, 0.05 * extent, 0.5 * height]);
        s.goal = Some([0.95 * extent, 0.95 * extent, 0.5 * height]);
        Ok(s)
    }
}

/// Two thick walls meeting at a right angle. The mask hides the far end of
/// the second wall.
pub struct Corner;

impl SceneGenerator for Corner {
    fn name(&self) -> &'static str {
        "corner"
    }
    fn describe(&self) -> &'static str {
        "L-shaped pair of walls with a masked far segment"
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let extent = p.get("extent", 4.0);
        let height = p.get("height", 1.0);
        let thickness = p.get("thickness", 0.5);
        let jitter = p.get("jitter", 0.05);
        let mut r = rng(seed);
        let x0 = 1.0 + uniform(&mut r, -jitter, jitter);
        let y0 = 1.0 + uniform(&mut r, -jitter, jitter);
        let t = thickness + uniform(&mut r, -jitter, jitter);
        let len_a = 2.5 + uniform(&mut r, -jitter, jitter);
        let len_b = 2.5 + uniform(&mut r, -jitter, jitter);
        let mut s = Scene::new(self.name(), seed, Aabb::new([0.0, 0.0, 0.0], [extent, extent, height]));
        s.obstacles.push(Primitive::Box {
            min: [x0, y0, 0.0],
            max: [x0 + len_a, y0 + t, height],
        });
        s.obstacles.push(Primitive::Box {
            min: [x0, y0, 0.0],
            max: [x0 + t, y0 + len_b, height],
        });
        s.mask = Some(Aabb::new([0.6, 2.2, 0.0], [2.2, extent, height]));
        Ok(s)
    }
}

/// Random vertical cylinders.
pub struct ForestRandom;

impl SceneGenerator for ForestRandom {
    fn name(&self) -> &'static str {
        "forest-random"
    }
    fn describe(&self) -> &'static str {
        "uniformly scattered tree trunks"
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let extent = p.get("extent", 10.0);
        let height = p.get("height", 3.0);
        let count = p.get("trees", 12.0) as usize;
        let (rmin, rmax) = (p.get("min_radius", 0.15), p.get("max_radius", 0.4));
        let mut r = rng(seed);
        let mut s = Scene::new(self.name(), seed, Aabb::new([0.0; 3], [extent, extent, height]));
        for _ in 0..count {
            let radius = uniform(&mut r, rmin, rmax);
            let cx = uniform(&mut r, radius + 1.0, extent - radius - 1.0);
            let cy = uniform(&mut r, radius, extent - radius);
            s.obstacles.push(Primitive::Cylinder {
                base: [cx, cy, 0.0],
                radius,
                height,
            });
        }
        s.start = Some([0.3, 0.5 * extent, 0.5 * height]);
        s.goal = Some([extent - 0.3, 0.5 * extent, 0.5 * height]);
        Ok(s)
    }
}

/// Straight corridor with boxes protruding from alternating side walls.
pub struct CorridorGen;

impl SceneGenerator for CorridorGen {
    fn name(&self) -> &'static str {
        "corridor"
    }
    fn describe(&self) -> &'static str {
        "corridor with staggered wall protrusions"
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let length = p.get("length", 6.0);
        let width = p.get("width", 2.0);
        let height = p.get("height", 1.0);
        let bumps = p.get("bumps", 3.0) as usize;
        let mut r = rng(seed);
        // The side walls are the scene bounds in y.
        let mut s = Scene::new(self.name(), seed, Aabb::new([0.0, 0.0, 0.0], [length, width, height]));
        let spacing = length / (bumps + 1) as f64;
        for k in 0..bumps {
            let cx = (k + 1) as f64 * spacing + uniform(&mut r, -0.2, 0.2) * spacing;
            let half = uniform(&mut r, 0.35, 0.5);
            let depth = width * uniform(&mut r, p.get("min_depth", 0.55), p.get("max_depth", 0.7));
            let (y0, y1) = if k % 2 == 0 { (0.0, depth) } else { (width - depth, width) };
            s.obstacles.push(Primitive::Box {
                min: [cx - half, y0, 0.0],
                max: [cx + half, y1, height],
            });
        }
        s.start = Some([0.3, 0.5 * width, 0.5 * height]);
        s.goal = Some([length - 0.3, 0.5 * width, 0.5 * height]);
        Ok(s)
    }
}

/// One to a few boxes between start and goal.
pub struct BoxField;

impl SceneGenerator for BoxField {
    fn name(&self) -> &'static str {
        "box-field"
    }
    fn describe(&self) -> &'static str {
        "single or multiple boxes across the flight line"
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let length = p.get("length", 8.0);
        let width = p.get("width", 4.0);
        let height = p.get("height", 3.0);
        let mut r = rng(seed);
        let count = match p.0.get("boxes") {
            Some(v) => *v as usize,
            None => 1 + (r.random::<f64>() * 3.0) as usize,
        };
        let mut s = Scene::new(self.name(), seed, Aabb::new([0.0, 0.0, 0.0], [length, width, height]));
        let spacing = length / (count + 1) as f64;
        for k in 0..count {
            let cx = (k + 1) as f64 * spacing + uniform(&mut r, -0.3, 0.3);
            let cy = 0.5 * width + uniform(&mut r, -0.4, 0.4);
            let hx = uniform(&mut r, 0.3, 0.6);
            let hy = uniform(&mut r, 0.4, 0.7);
            s.obstacles.push(Primitive::Box {
                min: [cx - hx, cy - hy, 0.0],
                max: [cx + hx, cy + hy, height],
            });
        }
        s.start = Some([0.4, 0.5 * width, 0.5 * height]);
        s.goal = Some([length - 0.4, 0.5 * width, 0.5 * height]);
        Ok(s)
    }
}

/// Ground with two pits placed near the straight start-goal line.
pub struct Pits {
    pub sloped: bool,
}

impl SceneGenerator for Pits {
    fn name(&self) -> &'static str {
        if self.sloped {
            "pits-slope"
        } else {
            "pits-flat"
        }
    }
    fn describe(&self) -> &'static str {
        if self.sloped {
            "inclined ground with depressions"
        } else {
            "flat ground with depressions"
        }
    }
    fn generate(&self, p: &GeneratorParams, seed: u64) -> Result<Scene> {
        let length = p.get("length", 8.0);
        let width = p.get("width", 4.0);
        let count = p.get("pits", 2.0) as usize;
        let radius = p.get("radius", 0.8);
        let depth = p.get("depth", 0.3);
        let offset = p.get("offset", 0.65);
        let mut r = rng(seed);
        let mut s = Scene::new(self.name(), seed, Aabb::new([0.0, 0.0, -1.0], [length, width, 1.0]));
        let mid = 0.5 * width;
        let spacing = length / (count + 1) as f64;
        let mut pits = Vec::with_capacity(count);
        for k in 0..count {
            let side = if k % 2 == 0 { 1.0 } else { -1.0 };
            pits.push(Pit {
                center: [
                    (k + 1) as f64 * spacing + uniform(&mut r, -0.3, 0.3),
                    mid + side * (offset + uniform(&mut r, -0.1, 0.1)) * radius,
                ],
                radius: radius * uniform(&mut r, 0.9, 1.1),
                depth: depth * uniform(&mut r, 0.8, 1.2),
            });
        }
        let base = if self.sloped {
            TerrainBase::Slope {
                height: 0.0,
                gradient: [p.get("slope_x", 0.08), p.get("slope_y", 0.04)],
            }
        } else {
            TerrainBase::Flat { height: 0.0 }
        };
        s.terrain = Some(Terrain { base, pits });
        s.start = Some([0.3, mid, 0.0]);
        s.goal = Some([length - 0.3, mid, 0.0]);
        Ok(s)
    }
}

pub struct GeneratorRegistry {
    entries: BTreeMap<&'static str, Box<dyn SceneGenerator>>,
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register(Box::new(SphereSingle));
        r.register(Box::new(BoxGrid));
        r.register(Box::new(Corner));
        r.register(Box::new(ForestRandom));
        r.register(Box::new(CorridorGen));
        r.register(Box::new(BoxField));
        r.register(Box::new(Pits { sloped: false }));
        r.register(Box::new(Pits { sloped: true }));
        r
    }
}

impl GeneratorRegistry {
    pub fn register(&mut self, g: Box<dyn SceneGenerator>) {
        self.entries.insert(g.name(), g);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn SceneGenerator> {
        self.entries
            .get(name)
            .map(|g| g.as_ref())
            .ok_or_else(|| anyhow!("unknown scene generator '{name}' (known: {})", self.names().join(", ")))
    }
}

/// Looks up `name` in the default registry and generates a validated scene.
pub fn generate_scene(name: &str, params: &GeneratorParams, seed: u64) -> Result<Scene> {
    let scene = GeneratorRegistry::default().get(name)?.generate(params, seed)?;
    scene.validate()?;
    Ok(scene)
}
