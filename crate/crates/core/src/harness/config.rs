use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segnet::SegNetConfig;
use crate::synthdata::{AugmentationConfig, GeneratorConfig, SplitCounts};
use crate::vcvrl::VcvrlConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub learning_rate: f32,
    pub weight_decay: f32,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            weight_decay: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    /// Dataset directory; generated from `generator` when absent or empty.
    pub data: Option<PathBuf>,
    /// Output directory for checkpoints and logs.
    pub out: Option<PathBuf>,
}

fn default_vcvrl() -> Option<VcvrlConfig> {
    Some(VcvrlConfig::default())
}

fn default_batch_size() -> usize {
    4
}

fn default_epochs() -> usize {
    30
}

fn default_iterations_per_epoch() -> usize {
    16
}

/// Everything a run needs. Only `seed` is required in the JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub segnet: SegNetConfig,
    /// `null` trains the plain backbone.
    #[serde(default = "default_vcvrl")]
    pub vcvrl: Option<VcvrlConfig>,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub splits: SplitCounts,
    #[serde(default)]
    pub augmentation: AugmentationConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_iterations_per_epoch")]
    pub iterations_per_epoch: usize,
    #[serde(default)]
    pub paths: Paths,
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            segnet: SegNetConfig::default(),
            vcvrl: default_vcvrl(),
            generator: GeneratorConfig::default(),
            splits: SplitCounts::default(),
            augmentation: AugmentationConfig::default(),
            optimizer: OptimizerConfig::default(),
            batch_size: default_batch_size(),
            epochs: default_epochs(),
            iterations_per_epoch: default_iterations_per_epoch(),
            paths: Paths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Total optimizer steps `K`.
    pub fn total_iterations(&self) -> u64 {
        (self.epochs * self.iterations_per_epoch) as u64
    }

    pub fn validate(&self) -> Result<()> {
        self.segnet.validate()?;
        if let Some(v) = &self.vcvrl {
            v.validate()?;
        }
        self.generator.validate()?;
        self.augmentation.validate()?;
        if self.batch_size == 0 || self.epochs == 0 || self.iterations_per_epoch == 0 {
            return Err(Error::config(
                "batch size, epochs and iterations per epoch must be positive",
            ));
        }
        let div = self.segnet.divisor();
        if self.augmentation.crop.iter().any(|&c| c % div != 0) {
            return Err(Error::config(format!(
                "crop {:?} must be divisible by {div} for a {}-level network",
                self.augmentation.crop, self.segnet.levels
            )));
        }
        if (0..3).any(|a| self.augmentation.crop[a] > self.generator.dims[a]) {
            return Err(Error::config(format!(
                "crop {:?} exceeds generated extents {:?}",
                self.augmentation.crop, self.generator.dims
            )));
        }
        let o = &self.optimizer;
        if !(o.learning_rate > 0.0 && o.learning_rate.is_finite() && o.weight_decay >= 0.0) {
            return Err(Error::config(
                "learning rate must be positive and weight decay non-negative",
            ));
        }
        Ok(())
    }
}
