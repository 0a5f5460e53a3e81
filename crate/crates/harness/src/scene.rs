//! Analytic scenes: axis-aligned boxes, spheres, vertical cylinders and an
//! optional height-field terrain. Scenes are stored as TOML.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rmrp_core::geometry::{Aabb, Point3};
use serde::{Deserialize, Serialize};

pub const SCENE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Primitive {
    Box { min: Point3, max: Point3 },
    Sphere { center: Point3, radius: f64 },
    /// Vertical cylinder standing on `base`.
    Cylinder { base: Point3, radius: f64, height: f64 },
}

impl Primitive {
    /// Signed distance: negative inside, zero on the surface.
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        match *self {
            Primitive::Box { min, max } => {
                let q: [f64; 3] = std::array::from_fn(|a| {
                    let c = 0.5 * (min[a] + max[a]);
                    let h = 0.5 * (max[a] - min[a]);
                    (p[a] - c).abs() - h
                });
                let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                outside + q[0].max(q[1]).max(q[2]).min(0.0)
            }
            Primitive::Sphere { center, radius } => dist3(p, &center) - radius,
            Primitive::Cylinder { base, radius, height } => {
                let dr = ((p[0] - base[0]).powi(2) + (p[1] - base[1]).powi(2)).sqrt() - radius;
                let dz = (base[2] - p[2]).max(p[2] - (base[2] + height));
                let outside = (dr.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt();
                outside + dr.max(dz).min(0.0)
            }
        }
    }

    /// Distance to the solid (zero inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        self.signed_distance(p).max(0.0)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.signed_distance(p) <= 0.0
    }

    pub fn bounding_box(&self) -> Aabb {
        match *self {
            Primitive::Box { min, max } => Aabb::new(min, max),
            Primitive::Sphere { center, radius } => Aabb::new(center.map(|c| c - radius), center.map(|c| c + radius)),
            Primitive::Cylinder { base, radius, height } => Aabb::new(
                [base[0] - radius, base[1] - radius, base[2]],
                [base[0] + radius, base[1] + radius, base[2] + height],
            ),
        }
    }

    /// Smallest `t ≥ 0` with `origin + t·dir` on the surface, for unit `dir`.
    pub fn ray_hit(&self, origin: &Point3, dir: &Point3) -> Option<f64> {
        match *self {
            Primitive::Box { min, max } => {
                let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
                for a in 0..3 {
                    if dir[a].abs() < 1e-300 {
                        if origin[a] < min[a] || origin[a] > max[a] {
                            return None;
                        }
                    } else {
                        let inv = 1.0 / dir[a];
                        let (mut ta, mut tb) = ((min[a] - origin[a]) * inv, (max[a] - origin[a]) * inv);
                        if ta > tb {
                            std::mem::swap(&mut ta, &mut tb);
                        }
                        t0 = t0.max(ta);
                        t1 = t1.min(tb);
                        if t0 > t1 {
                            return None;
                        }
                    }
                }
                Some(t0)
            }
            Primitive::Sphere { center, radius } => {
                let oc: [f64; 3] = std::array::from_fn(|a| origin[a] - center[a]);
                let b = dot3(&oc, dir);
                let c = dot3(&oc, &oc) - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let disc = b * b - c;
                if disc < 0.0 || b > 0.0 {
                    return None;
                }
                // Numerically stable smaller root.
                Some(c / (-b + disc.sqrt()))
            }
            Primitive::Cylinder { base, radius, height } => {
                if self.contains(origin) {
                    return Some(0.0);
                }
                let (z0, z1) = (base[2], base[2] + height);
                let mut best = f64::INFINITY;
                let (ox, oy) = (origin[0] - base[0], origin[1] - base[1]);
                let a = dir[0] * dir[0] + dir[1] * dir[1];
                if a > 1e-300 {
                    let b = ox * dir[0] + oy * dir[1];
                    let c = ox * ox + oy * oy - radius * radius;
                    let disc = b * b - a * c;
                    if disc >= 0.0 {
                        let t = (-b - disc.sqrt()) / a;
                        let z = origin[2] + t * dir[2];
                        if t >= 0.0 && z >= z0 && z <= z1 {
                            best = best.min(t);
                        }
                    }
                }
                if dir[2].abs() > 1e-300 {
                    for zc in [z0, z1] {
                        let t = (zc - origin[2]) / dir[2];
                        let (x, y) = (ox + t * dir[0], oy + t * dir[1]);
                        if t >= 0.0 && x * x + y * y <= radius * radius {
                            best = best.min(t);
                        }
                    }
                }
                best.is_finite().then_some(best)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pit {
    pub center: [f64; 2],
    pub radius: f64,
    pub depth: f64,
}

impl Pit {
    /// Depression below the base surface: `depth·(1 − (r/R)²)²` inside the
    /// radius, zero outside (continuously differentiable at the rim).
    pub fn depression(&self, x: f64, y: f64) -> f64 {
        let r2 = ((x - self.center[0]).powi(2) + (y - self.center[1]).powi(2)) / (self.radius * self.radius);
        if r2 >= 1.0 {
            0.0
        } else {
            self.depth * (1.0 - r2).powi(2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TerrainBase {
    Flat { height: f64 },
    Slope { height: f64, gradient: [f64; 2] },
    SineRidge { amplitude: f64, wavelength: f64, direction: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    pub base: TerrainBase,
    #[serde(default)]
    pub pits: Vec<Pit>,
}

impl Terrain {
    pub fn base_height(&self, x: f64, y: f64) -> f64 {
        match self.base {
            TerrainBase::Flat { height } => height,
            TerrainBase::Slope { height, gradient } => height + gradient[0] * x + gradient[1] * y,
            TerrainBase::SineRidge {
                amplitude,
                wavelength,
                direction,
            } => {
                let n = (direction[0].powi(2) + direction[1].powi(2)).sqrt().max(1e-300);
                let s = (direction[0] * x + direction[1] * y) / n;
                amplitude * (std::f64::consts::TAU * s / wavelength).sin()
            }
        }
    }

    /// Total depth of all pits at `(x, y)`.
    pub fn pit_depth(&self, x: f64, y: f64) -> f64 {
        self.pits.iter().map(|p| p.depression(x, y)).sum()
    }

    pub fn elevation(&self, x: f64, y: f64) -> f64 {
        self.base_height(x, y) - self.pit_depth(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub format_version: u32,
    pub name: String,
    pub seed: u64,
    pub bounds: Aabb,
    #[serde(default)]
    pub obstacles: Vec<Primitive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Point3>,
    /// Region hidden from the sensor (blind spot).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Aabb>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terrain: Option<Terrain>,
}

impl Scene {
    pub fn new(name: impl Into<String>, seed: u64, bounds: Aabb) -> Self {
        Self {
            format_version: SCENE_FORMAT_VERSION,
            name: name.into(),
            seed,
            bounds,
            obstacles: Vec::new(),
            start: None,
            goal: None,
            mask: None,
            terrain: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != SCENE_FORMAT_VERSION {
            bail!("unsupported scene format version {}", self.format_version);
        }
        if self.bounds.is_empty() {
            bail!("scene bounds are empty");
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            let bb = o.bounding_box();
            let tol = 1e-9;
            let inside = (0..3).all(|a| bb.min[a] >= self.bounds.min[a] - tol && bb.max[a] <= self.bounds.max[a] + tol);
            if !inside {
                bail!("obstacle {i} leaves the scene bounds");
            }
            let ok = match *o {
                Primitive::Box { min, max } => (0..3).all(|a| max[a] > min[a]),
                Primitive::Sphere { radius, .. } => radius > 0.0,
                Primitive::Cylinder { radius, height, .. } => radius > 0.0 && height > 0.0,
            };
            if !ok {
                bail!("obstacle {i} is degenerate");
            }
        }
        if let Some(t) = &self.terrain {
            if t.pits.iter().any(|p| !(p.radius > 0.0 && p.depth > 0.0)) {
                bail!("pit radius and depth must be positive");
            }
        }
        Ok(())
    }

    /// Exact distance to the union of obstacles (zero inside any of them).
    pub fn distance(&self, p: &[f64]) -> f64 {
        self.obstacles.iter().map(|o| o.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Signed distance to the union of obstacles: negative inside.
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest absolute signed distance to any primitive surface.
    pub fn surface_residual(&self, p: &[f64]) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(p).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_occupied(&self, p: &[f64]) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// First hit along a unit ray within `max_range`.
    pub fn ray_cast(&self, origin: &Point3, dir: &Point3, max_range: f64) -> Option<f64> {
        self.obstacles
            .iter()
            .filter_map(|o| o.ray_hit(origin, dir))
            .filter(|t| *t <= max_range)
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let scene: Scene = toml::from_str(text).context("parsing scene")?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }
}

fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dist3(a: &[f64], b: &[f64]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
