//! Synthetic neuron-like volumes, patch extraction with augmentation, and the
//! `VVOL` volume file format.

pub mod augment;
pub mod dataset;
pub mod generator;
pub mod grid;
pub mod vvol;

use serde::{Deserialize, Serialize};

pub use augment::{extract_patch, AugmentationConfig, PatchOrigin};
pub use dataset::{derive_seed, Dataset, Split, SplitCounts};
pub use generator::{generate_volume, GeneratorConfig};
pub use vvol::{read_volume, write_volume, VolumeData};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Where a sample came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Generator settings, absent for volumes loaded from disk.
    pub generator: Option<GeneratorConfig>,
    /// Total centre-line length of the rasterized tree in voxels.
    pub skeleton_length: f64,
    /// Set when the sample is a patch cut from a larger one.
    pub patch: Option<PatchOrigin>,
}

/// Intensity volume and binary label of identical extents `[D, H, W]`,
/// stored depth-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeSample {
    dims: [usize; 3],
    volume: Vec<f32>,
    label: Vec<u8>,
    pub seed: u64,
    pub provenance: Provenance,
}

impl VolumeSample {
    pub fn new(dims: [usize; 3], volume: Vec<f32>, label: Vec<u8>, seed: u64) -> Result<Self> {
        let n: usize = dims.iter().product();
        if volume.len() != n || label.len() != n {
            return Err(Error::shape(format!(
                "sample of extents {dims:?} needs {n} voxels, got {} intensities and {} labels",
                volume.len(),
                label.len()
            )));
        }
        if let Some(&bad) = label.iter().find(|&&l| l > 1) {
            return Err(Error::DataQuality(format!(
                "label value {bad} is not binary"
            )));
        }
        Ok(Self {
            dims,
            volume,
            label,
            seed,
            provenance: Provenance {
                generator: None,
                skeleton_length: 0.0,
                patch: None,
            },
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn volume(&self) -> &[f32] {
        &self.volume
    }

    pub fn label(&self) -> &[u8] {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn foreground_count(&self) -> usize {
        self.label.iter().filter(|&&l| l == 1).count()
    }

    pub fn foreground_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.foreground_count() as f64 / self.len() as f64
    }

    /// Intensities as a `[1, 1, D, H, W]` tensor.
    pub fn volume_tensor(&self) -> Tensor {
        let [d, h, w] = self.dims;
        Tensor::new([1, 1, d, h, w], self.volume.clone()).expect("extents checked at construction")
    }

    /// Labels as a `[1, 1, D, H, W]` tensor of 0.0 / 1.0.
    pub fn label_tensor(&self) -> Tensor {
        let [d, h, w] = self.dims;
        Tensor::new(
            [1, 1, d, h, w],
            self.label.iter().map(|&l| l as f32).collect(),
        )
        .expect("extents checked at construction")
    }
}

/// Stack samples of equal extents into `[M, 1, D, H, W]` volume and label
/// tensors.
pub fn stack(samples: &[VolumeSample]) -> Result<(Tensor, Tensor)> {
    let first = samples
        .first()
        .ok_or_else(|| Error::shape("cannot stack an empty batch"))?;
    let [d, h, w] = first.dims;
    let mut volume = Vec::with_capacity(samples.len() * first.len());
    let mut label = Vec::with_capacity(samples.len() * first.len());
    for s in samples {
        if s.dims != first.dims {
            return Err(Error::shape(format!(
                "batch mixes extents {:?} and {:?}",
                first.dims, s.dims
            )));
        }
        volume.extend_from_slice(&s.volume);
        label.extend(s.label.iter().map(|&l| l as f32));
    }
    let shape = [samples.len(), 1, d, h, w];
    Ok((Tensor::new(shape, volume)?, Tensor::new(shape, label)?))
}
