use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Provenance, VolumeSample};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    /// Extents `[D, H, W]`.
    pub dims: [usize; 3],
    pub branch_count: usize,
    pub steps_per_branch: usize,
    /// Random-walk step in voxels.
    pub step_length: f64,
    /// Tube radius range `[min, max]` in voxels; each branch draws one.
    pub radius: [f64; 2],
    /// Largest direction change per step, in radians.
    pub curvature: f64,
    /// Tube intensity range; each branch draws one.
    pub foreground: [f32; 2],
    pub noise_sigma: f32,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            dims: [32, 32, 16],
            branch_count: 5,
            steps_per_branch: 24,
            step_length: 1.5,
            radius: [1.0, 1.8],
            curvature: 0.35,
            foreground: [0.6, 1.0],
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d < 8) {
            return Err(Error::config(format!(
                "volume extents {:?} must be at least 8",
                self.dims
            )));
        }
        let [rmin, rmax] = self.radius;
        if !(rmin >= 1.0 && rmin <= rmax && rmax.is_finite()) {
            return Err(Error::config(format!(
                "radius range {:?} must satisfy 1 <= min <= max",
                self.radius
            )));
        }
        if self.dims.iter().any(|&d| 2.0 * rmax >= d as f64 - 1.0) {
            return Err(Error::config(format!(
                "radius {rmax} does not fit in extents {:?}",
                self.dims
            )));
        }
        if self.branch_count == 0 || self.steps_per_branch == 0 {
            return Err(Error::config(
                "generator needs at least one branch and one step",
            ));
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(Error::config("step length must be positive"));
        }
        if !(self.curvature >= 0.0 && self.curvature.is_finite()) {
            return Err(Error::config("curvature must be non-negative"));
        }
        let [lo, hi] = self.foreground;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::config(format!(
                "foreground range {:?} must lie in [0, 1]",
                self.foreground
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config("noise sigma must be non-negative"));
        }
        Ok(())
    }
}

type Point = [f64; 3];

fn add(a: Point, b: Point, s: f64) -> Point {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: Point) -> Option<Point> {
    let n = dot(a, a).sqrt();
    (n > 1e-12).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

fn random_unit<R: Rng>(rng: &mut R) -> Point {
    loop {
        let v = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        if let Some(u) = normalize(v) {
            return u;
        }
    }
}

/// Rotate `dir` by a random angle in `[0, max_turn]` about a random
/// perpendicular axis.
fn turn<R: Rng>(dir: Point, max_turn: f64, rng: &mut R) -> Point {
    if max_turn == 0.0 {
        return dir;
    }
    let angle = rng.random_range(0.0..=max_turn);
    loop {
        let v = random_unit(rng);
        if let Some(perp) = normalize(add(v, dir, -dot(v, dir))) {
            let (s, c) = angle.sin_cos();
            return normalize(add([c * dir[0], c * dir[1], c * dir[2]], perp, s)).unwrap_or(dir);
        }
    }
}

struct Tube {
    a: Point,
    b: Point,
    radius: f64,
    intensity: f32,
}

/// Mark every voxel whose centre lies within `radius` of segment `ab`.
fn rasterize(tube: &Tube, dims: [usize; 3], label: &mut [u8], level: &mut [f32]) {
    let r = tube.radius;
    let ab = add(tube.b, tube.a, -1.0);
    let len2 = dot(ab, ab);
    let lo = |axis: usize| (tube.a[axis].min(tube.b[axis]) - r).floor().max(0.0) as usize;
    let hi =
        |axis: usize| ((tube.a[axis].max(tube.b[axis]) + r).ceil() as usize).min(dims[axis] - 1);
    for z in lo(0)..=hi(0) {
        for y in lo(1)..=hi(1) {
            for x in lo(2)..=hi(2) {
                let p = [z as f64, y as f64, x as f64];
                let ap = add(p, tube.a, -1.0);
                let t = if len2 > 0.0 {
                    (dot(ap, ab) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let closest = add(tube.a, ab, t);
                let d = add(p, closest, -1.0);
                if dot(d, d) <= r * r {
                    let i = (z * dims[1] + y) * dims[2] + x;
                    label[i] = 1;
                    level[i] = level[i].max(tube.intensity);
                }
            }
        }
    }
}

/// Seeded random-walk tree rasterized as tubes, plus clipped Gaussian noise.
///
/// The first branch starts at a random interior point; later branches start
/// at a random node of the tree grown so far. A branch stops early when its
/// next step would bring the tube within one radius of the border.
pub fn generate_volume(config: &GeneratorConfig) -> Result<VolumeSample> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dims = config.dims;
    let n: usize = dims.iter().product();
    let mut label = vec![0u8; n];
    let mut level = vec![0f32; n];
    let mut nodes: Vec<Point> = Vec::new();
    let mut skeleton_length = 0.0;

    for _ in 0..config.branch_count {
        let radius = rng.random_range(config.radius[0]..=config.radius[1]);
        let intensity = rng.random_range(config.foreground[0]..=config.foreground[1]);
        let inside =
            |p: Point| (0..3).all(|a| p[a] >= radius && p[a] <= dims[a] as f64 - 1.0 - radius);
        let mut pos = if nodes.is_empty() {
            [0, 1, 2].map(|a| rng.random_range(radius..=dims[a] as f64 - 1.0 - radius))
        } else {
            nodes[rng.random_range(0..nodes.len())]
        };
        if !inside(pos) {
            // inherited node sits too close to the border for this radius
            pos = [0, 1, 2].map(|a| pos[a].clamp(radius, dims[a] as f64 - 1.0 - radius));
        }
        let mut dir = random_unit(&mut rng);
        nodes.push(pos);
        for step in 0..config.steps_per_branch {
            if step > 0 {
                dir = turn(dir, config.curvature, &mut rng);
            }
            let mut next = add(pos, dir, config.step_length);
            if step == 0 {
                // keep a branch from dying at its root
                for _ in 0..16 {
                    if inside(next) {
                        break;
                    }
                    dir = random_unit(&mut rng);
                    next = add(pos, dir, config.step_length);
                }
            }
            if !inside(next) {
                break;
            }
            rasterize(
                &Tube {
                    a: pos,
                    b: next,
                    radius,
                    intensity,
                },
                dims,
                &mut label,
                &mut level,
            );
            skeleton_length += config.step_length;
            pos = next;
            nodes.push(pos);
        }
    }

    if config.noise_sigma > 0.0 {
        let noise =
            Normal::new(0.0f32, config.noise_sigma).map_err(|e| Error::config(e.to_string()))?;
        for v in &mut level {
            *v += noise.sample(&mut rng);
        }
    }
    for v in &mut level {
        *v = v.clamp(0.0, 1.0);
    }

    let mut sample = VolumeSample::new(dims, level, label, config.seed)?;
    sample.provenance = Provenance {
        generator: Some(config.clone()),
        skeleton_length,
        patch: None,
    };
    Ok(sample)
}
