//! Browser bindings for the synthetic-data generator, a stepwise trainer and
//! the anchor sampler.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use vcvrl::harness::{evaluate, predict_volume, RunConfig, Trainer};
use vcvrl::synthdata::{generate_volume, Dataset, SplitCounts, VolumeSample};
use vcvrl::vcvrl::{momentum_coefficient, sample_anchors, AnchorStrategy, VcvrlConfig};

type JsResult<T> = Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

const LABEL_TINT: [f32; 3] = [255.0, 80.0, 60.0];
const TRUE_POSITIVE: [u8; 3] = [60, 200, 90];
const FALSE_POSITIVE: [u8; 3] = [230, 60, 60];
const FALSE_NEGATIVE: [u8; 3] = [70, 120, 255];
const ANCHOR_POOL: [u8; 3] = [0, 220, 230];
const ANCHOR_HARD: [u8; 3] = [240, 0, 200];

fn gray(v: f32) -> [u8; 3] {
    let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    [g, g, g]
}

/// RGBA image of slice `z` (an `H x W` plane), coloured per voxel.
fn render(
    dims: [usize; 3],
    z: usize,
    mut colour: impl FnMut(usize) -> [u8; 3],
) -> JsResult<Vec<u8>> {
    if z >= dims[0] {
        return Err(format!("slice {z} out of range 0..{}", dims[0]));
    }
    let plane = dims[1] * dims[2];
    let mut out = Vec::with_capacity(plane * 4);
    for i in z * plane..(z + 1) * plane {
        out.extend_from_slice(&colour(i));
        out.push(255);
    }
    Ok(out)
}

fn parse_strategy(name: &str) -> JsResult<AnchorStrategy> {
    name.parse().map_err(err)
}

/// A generated volume with its ground-truth label.
#[wasm_bindgen]
pub struct Volume {
    sample: VolumeSample,
}

#[wasm_bindgen]
impl Volume {
    pub fn generate(seed: u64, noise_sigma: f32, branches: usize) -> JsResult<Volume> {
        let mut config = RunConfig::new(0).generator;
        config.seed = seed;
        config.noise_sigma = noise_sigma;
        config.branch_count = branches;
        Ok(Volume {
            sample: generate_volume(&config).map_err(err)?,
        })
    }

    pub fn depth(&self) -> usize {
        self.sample.dims()[0]
    }

    pub fn height(&self) -> usize {
        self.sample.dims()[1]
    }

    pub fn width(&self) -> usize {
        self.sample.dims()[2]
    }

    pub fn foreground_fraction(&self) -> f64 {
        self.sample.foreground_fraction()
    }

    /// Intensities in gray, optionally with the label blended on top.
    pub fn slice_rgba(&self, z: usize, show_label: bool) -> JsResult<Vec<u8>> {
        let (v, l) = (self.sample.volume(), self.sample.label());
        render(self.sample.dims(), z, |i| {
            let g = gray(v[i]);
            if show_label && l[i] == 1 {
                [0, 1, 2].map(|c| (0.45 * g[c] as f32 + 0.55 * LABEL_TINT[c]) as u8)
            } else {
                g
            }
        })
    }
}

/// Descriptor momentum coefficient at `points` evenly spaced iterations of a
/// `total`-iteration schedule.
#[wasm_bindgen]
pub fn momentum_curve(total: u64, base: f64, points: usize) -> JsResult<Vec<f64>> {
    if points < 2 || total == 0 {
        return Err("need at least two points and one iteration".into());
    }
    (0..points)
        .map(|i| {
            let k = 1 + ((total - 1) as f64 * i as f64 / (points - 1) as f64).round() as u64;
            momentum_coefficient(k, total, base).map_err(err)
        })
        .collect()
}

/// Small training run advanced one optimizer step at a time. Validation and
/// anchor views use the first validation volume.
#[wasm_bindgen]
pub struct DemoTrainer {
    trainer: Trainer,
    prediction: Option<Vec<f32>>,
}

#[wasm_bindgen]
impl DemoTrainer {
    /// `strategy` is `none` for the plain backbone, or `random`, `ph`,
    /// `hybrid` for siamese training with that anchor strategy.
    #[wasm_bindgen(constructor)]
    pub fn new(
        seed: u64,
        strategy: &str,
        anchors: usize,
        iterations: usize,
    ) -> JsResult<DemoTrainer> {
        let mut config = RunConfig::new(seed);
        config.vcvrl = match strategy {
            "none" => None,
            s => Some(VcvrlConfig {
                anchors,
                strategy: parse_strategy(s)?,
                ..VcvrlConfig::default()
            }),
        };
        config.splits = SplitCounts {
            train: 6,
            val: 1,
            test: 1,
        };
        config.batch_size = 2;
        config.epochs = 1;
        config.iterations_per_epoch = iterations;
        config.validate().map_err(err)?;
        let data = Dataset::generate(&config.generator, config.splits).map_err(err)?;
        Ok(DemoTrainer {
            trainer: Trainer::new(config, data).map_err(err)?,
            prediction: None,
        })
    }

    /// One optimizer step; returns the iteration record as JSON.
    pub fn step(&mut self) -> JsResult<String> {
        self.prediction = None;
        let record = self.trainer.step().map_err(err)?;
        serde_json::to_string(record).map_err(err)
    }

    pub fn iteration(&self) -> u64 {
        self.trainer.state().iteration
    }

    pub fn total_iterations(&self) -> u64 {
        self.trainer.state().total_iterations
    }

    pub fn finished(&self) -> bool {
        self.trainer.is_finished()
    }

    pub fn parameter_count(&self) -> usize {
        self.trainer.net().parameter_count()
    }

    fn sample(&self) -> &VolumeSample {
        &self.trainer.data().val[0]
    }

    fn prediction(&mut self) -> JsResult<&[f32]> {
        if self.prediction.is_none() {
            self.prediction = Some(predict_volume(self.trainer.net(), self.sample()).map_err(err)?);
        }
        Ok(self.prediction.as_deref().expect("filled above"))
    }

    pub fn depth(&self) -> usize {
        self.sample().dims()[0]
    }

    pub fn height(&self) -> usize {
        self.sample().dims()[1]
    }

    pub fn width(&self) -> usize {
        self.sample().dims()[2]
    }

    /// F1 of the current network on the validation volume.
    pub fn validation_f1(&self) -> JsResult<f64> {
        let eval = evaluate(self.trainer.net(), &self.trainer.data().val, "val-").map_err(err)?;
        Ok(eval.aggregate.f1.mean)
    }

    /// Validation slice with true positives, false positives and false
    /// negatives coloured.
    pub fn prediction_rgba(&mut self, z: usize) -> JsResult<Vec<u8>> {
        self.prediction()?;
        let probs = self.prediction.as_deref().expect("filled above");
        let sample = self.sample();
        let (v, l) = (sample.volume(), sample.label());
        render(sample.dims(), z, |i| match (probs[i] >= 0.5, l[i] == 1) {
            (true, true) => TRUE_POSITIVE,
            (true, false) => FALSE_POSITIVE,
            (false, true) => FALSE_NEGATIVE,
            (false, false) => gray(0.6 * v[i]),
        })
    }

    /// Draw `n` anchors from the neuron pool of the validation volume, where
    /// hard members are neuron voxels the current network misses.
    pub fn sample_anchors(&mut self, strategy: &str, n: usize, seed: u64) -> JsResult<AnchorView> {
        let strategy = parse_strategy(strategy)?;
        let probs = self.prediction()?.to_vec();
        let sample = self.sample();
        let members: Vec<usize> = (0..sample.len())
            .filter(|&i| sample.label()[i] == 1)
            .collect();
        let hard: Vec<bool> = members.iter().map(|&i| probs[i] < 0.5).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = sample_anchors(&hard, n, strategy, &mut rng).map_err(err)?;
        let mut marks = vec![0u8; sample.len()];
        for (j, &m) in draw.indices.iter().enumerate() {
            marks[members[m]] = if j < draw.from_pool { 1 } else { 2 };
        }
        Ok(AnchorView {
            dims: sample.dims(),
            volume: sample.volume().to_vec(),
            marks,
            pool_size: members.len(),
            hard_count: hard.iter().filter(|&&h| h).count(),
            from_pool: draw.from_pool,
            from_hard: draw.from_hard,
            fallback: draw.fallback,
        })
    }
}

/// One anchor draw over a volume.
#[wasm_bindgen]
pub struct AnchorView {
    dims: [usize; 3],
    volume: Vec<f32>,
    /// 0 unmarked, 1 drawn from the whole pool, 2 drawn from the hard subset.
    marks: Vec<u8>,
    pool_size: usize,
    hard_count: usize,
    from_pool: usize,
    from_hard: usize,
    fallback: bool,
}

#[wasm_bindgen]
impl AnchorView {
    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn hard_count(&self) -> usize {
        self.hard_count
    }

    pub fn from_pool(&self) -> usize {
        self.from_pool
    }

    pub fn from_hard(&self) -> usize {
        self.from_hard
    }

    pub fn fallback(&self) -> bool {
        self.fallback
    }

    /// Anchors on slice `z` that fall in it.
    pub fn slice_count(&self, z: usize) -> usize {
        let plane = self.dims[1] * self.dims[2];
        self.marks
            .iter()
            .skip(z * plane)
            .take(plane)
            .filter(|&&m| m > 0)
            .count()
    }

    pub fn slice_rgba(&self, z: usize) -> JsResult<Vec<u8>> {
        render(self.dims, z, |i| match self.marks[i] {
            1 => ANCHOR_POOL,
            2 => ANCHOR_HARD,
            _ => gray(0.6 * self.volume[i]),
        })
    }
}
