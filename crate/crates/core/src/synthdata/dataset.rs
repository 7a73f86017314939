use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vvol::{read_volume, write_volume, VolumeData};
use super::{generate_volume, GeneratorConfig, VolumeSample};
use crate::error::{Error, Result};

pub const MANIFEST: &str = "dataset.json";

/// Independent seed for stream `stream` under `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        Self {
            train: 35,
            val: 3,
            test: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    generator: Option<GeneratorConfig>,
    train: Vec<u64>,
    val: Vec<u64>,
    test: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    pub train: Vec<VolumeSample>,
    pub val: Vec<VolumeSample>,
    pub test: Vec<VolumeSample>,
}

impl Dataset {
    /// Generate every split; volume `i` of split `s` uses the seed derived
    /// from the generator seed and `(s, i)`.
    pub fn generate(generator: &GeneratorConfig, counts: SplitCounts) -> Result<Self> {
        let make = |split: u64, n: usize| -> Result<Vec<VolumeSample>> {
            (0..n)
                .map(|i| {
                    let seed = derive_seed(generator.seed, (split << 32) | i as u64);
                    generate_volume(&GeneratorConfig {
                        seed,
                        ..generator.clone()
                    })
                })
                .collect()
        };
        Ok(Self {
            train: make(0, counts.train)?,
            val: make(1, counts.val)?,
            test: make(2, counts.test)?,
        })
    }

    pub fn split(&self, split: Split) -> &[VolumeSample] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    /// Write `<split>/<index>.image.vvol`, `<split>/<index>.label.vvol` and a
    /// JSON manifest.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for split in Split::ALL {
            let sub = dir.join(split.name());
            fs::create_dir_all(&sub)?;
            for (i, s) in self.split(split).iter().enumerate() {
                write_sample(&sub, i, s)?;
            }
        }
        let seeds = |split: Split| self.split(split).iter().map(|s| s.seed).collect();
        let generator = self
            .train
            .iter()
            .chain(&self.val)
            .chain(&self.test)
            .find_map(|s| s.provenance.generator.clone())
            .map(|g| GeneratorConfig { seed: 0, ..g });
        let manifest = Manifest {
            generator,
            train: seeds(Split::Train),
            val: seeds(Split::Val),
            test: seeds(Split::Test),
        };
        fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
        let read = |split: Split, seeds: &[u64]| -> Result<Vec<VolumeSample>> {
            seeds
                .iter()
                .enumerate()
                .map(|(i, &seed)| read_sample(&dir.join(split.name()), i, seed))
                .collect()
        };
        Ok(Self {
            train: read(Split::Train, &manifest.train)?,
            val: read(Split::Val, &manifest.val)?,
            test: read(Split::Test, &manifest.test)?,
        })
    }
}

fn sample_paths(dir: &Path, index: usize) -> (std::path::PathBuf, std::path::PathBuf) {
    (
        dir.join(format!("{index:03}.image.vvol")),
        dir.join(format!("{index:03}.label.vvol")),
    )
}

pub fn write_sample(dir: &Path, index: usize, sample: &VolumeSample) -> Result<()> {
    let (image, label) = sample_paths(dir, index);
    write_volume(
        image,
        &VolumeData::Intensity {
            dims: sample.dims(),
            data: sample.volume().to_vec(),
        },
    )?;
    write_volume(
        label,
        &VolumeData::Label {
            dims: sample.dims(),
            data: sample.label().to_vec(),
        },
    )
}

pub fn read_sample(dir: &Path, index: usize, seed: u64) -> Result<VolumeSample> {
    let (image_path, label_path) = sample_paths(dir, index);
    let (
        VolumeData::Intensity { dims, data: volume },
        VolumeData::Label {
            dims: ldims,
            data: label,
        },
    ) = (read_volume(&image_path)?, read_volume(&label_path)?)
    else {
        return Err(Error::DataQuality(format!(
            "{} must hold intensities and {} labels",
            image_path.display(),
            label_path.display()
        )));
    };
    if dims != ldims {
        return Err(Error::shape(format!(
            "{} has extents {dims:?} but its label has {ldims:?}",
            image_path.display()
        )));
    }
    VolumeSample::new(dims, volume, label, seed)
}
