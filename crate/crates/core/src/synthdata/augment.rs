use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{crop, flip, rotate};
use super::VolumeSample;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentationConfig {
    /// Patch extents `[D, H, W]`.
    pub crop: [usize; 3],
    /// Per-axis random flips.
    pub flip: [bool; 3],
    pub rotate: bool,
    /// Axes spanning the rotation plane. Quarter turns are used when the crop
    /// is square in this plane, half turns otherwise.
    pub rotation_plane: [usize; 2],
    /// Patches must have a foreground fraction strictly above this.
    pub foreground_floor: f64,
    pub max_redraws: usize,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            crop: [16, 16, 8],
            flip: [true, true, true],
            rotate: true,
            rotation_plane: [0, 1],
            foreground_floor: 0.001,
            max_redraws: 100,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.crop.contains(&0) {
            return Err(Error::config("crop extents must be positive"));
        }
        let [a, b] = self.rotation_plane;
        if a == b || a > 2 || b > 2 {
            return Err(Error::config(format!(
                "invalid rotation plane {:?}",
                self.rotation_plane
            )));
        }
        if !(0.0..1.0).contains(&self.foreground_floor) {
            return Err(Error::config("foreground floor must lie in [0, 1)"));
        }
        Ok(())
    }

    fn quarter_turns_allowed(&self) -> bool {
        let [a, b] = self.rotation_plane;
        self.crop[a] == self.crop[b]
    }
}

/// How a patch was cut and transformed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchOrigin {
    pub offset: [usize; 3],
    pub flipped: [bool; 3],
    pub quarter_turns: u8,
    /// Rejected crops before this one.
    pub redraws: usize,
}

/// Random crop with random flips and rotation applied identically to volume
/// and label, re-cropping until the foreground fraction exceeds the floor.
pub fn extract_patch<R: Rng + ?Sized>(
    sample: &VolumeSample,
    aug: &AugmentationConfig,
    rng: &mut R,
) -> Result<VolumeSample> {
    aug.validate()?;
    let dims = sample.dims();
    if (0..3).any(|a| aug.crop[a] > dims[a]) {
        return Err(Error::config(format!(
            "crop {:?} does not fit in volume {dims:?}",
            aug.crop
        )));
    }
    let size = aug.crop;
    let patch_len: usize = size.iter().product();
    for redraws in 0..=aug.max_redraws {
        let offset = [0, 1, 2].map(|a| rng.random_range(0..=dims[a] - size[a]));
        let mut label = crop(sample.label(), dims, offset, size);
        let fg = label.iter().filter(|&&l| l == 1).count() as f64 / patch_len as f64;
        if fg <= aug.foreground_floor {
            continue;
        }
        let mut volume = crop(sample.volume(), dims, offset, size);
        let mut flipped = [false; 3];
        for (axis, done) in flipped.iter_mut().enumerate() {
            if aug.flip[axis] && rng.random_bool(0.5) {
                volume = flip(&volume, size, axis);
                label = flip(&label, size, axis);
                *done = true;
            }
        }
        let mut out_dims = size;
        let mut quarter_turns = 0;
        if aug.rotate {
            quarter_turns = if aug.quarter_turns_allowed() {
                rng.random_range(0..4u8)
            } else {
                2 * rng.random_range(0..2u8)
            };
            let (v, d) = rotate(&volume, size, aug.rotation_plane, quarter_turns);
            let (l, _) = rotate(&label, size, aug.rotation_plane, quarter_turns);
            volume = v;
            label = l;
            out_dims = d;
        }
        let mut patch = VolumeSample::new(out_dims, volume, label, sample.seed)?;
        patch.provenance = sample.provenance.clone();
        patch.provenance.patch = Some(PatchOrigin {
            offset,
            flipped,
            quarter_turns,
            redraws,
        });
        return Ok(patch);
    }
    Err(Error::DataQuality(format!(
        "no {:?} patch of volume seed {} exceeded foreground fraction {} after {} redraws",
        size, sample.seed, aug.foreground_floor, aug.max_redraws
    )))
}
