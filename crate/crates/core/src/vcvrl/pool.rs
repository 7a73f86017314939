use super::PoolClass;
use crate::autodiff::tensor::dims5;
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Prediction threshold for the misclassification flags.
pub const MISCLASSIFICATION_THRESHOLD: f32 = 0.5;

/// Interpolate `[M, d, D', H', W']` latent codes back to `[M, d, D, H, W]`.
pub fn interpolate_latent(tape: &mut Tape, bottleneck: Var, target: [usize; 3]) -> Result<Var> {
    tape.upsample_trilinear(bottleneck, target)
}

/// Batch-wide collection of voxel embeddings sharing one ground-truth class.
#[derive(Clone, Debug)]
pub struct VoxelPool {
    class: PoolClass,
    /// Flat voxel index `m * D*H*W + s` of each member; empty when the pool
    /// was built directly from embeddings.
    voxels: Vec<usize>,
    misclassified: Vec<bool>,
    /// `[n, d]` graph node.
    embeddings: Var,
}

impl VoxelPool {
    /// Pool over an existing `[n, d]` embedding node.
    pub fn from_embeddings(
        class: PoolClass,
        embeddings: Var,
        misclassified: Vec<bool>,
        tape: &Tape,
    ) -> Result<Self> {
        match tape.shape(embeddings) {
            &[n, _] if n == misclassified.len() => Ok(Self {
                class,
                voxels: Vec::new(),
                misclassified,
                embeddings,
            }),
            other => Err(Error::shape(format!(
                "pool embeddings {other:?} do not match {} flags",
                misclassified.len()
            ))),
        }
    }

    pub fn class(&self) -> PoolClass {
        self.class
    }

    pub fn len(&self) -> usize {
        self.misclassified.len()
    }

    pub fn is_empty(&self) -> bool {
        self.misclassified.is_empty()
    }

    pub fn voxels(&self) -> &[usize] {
        &self.voxels
    }

    pub fn misclassified(&self) -> &[bool] {
        &self.misclassified
    }

    pub fn misclassified_count(&self) -> usize {
        self.misclassified.iter().filter(|&&m| m).count()
    }

    pub fn embeddings(&self) -> Var {
        self.embeddings
    }
}

#[derive(Clone, Debug)]
pub struct Pools {
    pub neuron: VoxelPool,
    pub background: VoxelPool,
}

impl Pools {
    pub fn get(&self, class: PoolClass) -> &VoxelPool {
        match class {
            PoolClass::Neuron => &self.neuron,
            PoolClass::Background => &self.background,
        }
    }
}

/// Split per-voxel embeddings `[M, d, D, H, W]` into neuron and background
/// pools by `labels` (`[M, 1, D, H, W]`), flagging voxels whose thresholded
/// prediction disagrees with the label.
pub fn build_pools(tape: &mut Tape, latent: Var, labels: &Tensor, probs: &Tensor) -> Result<Pools> {
    let [m, _, d, h, w] = dims5(tape.shape(latent))?;
    let expected = [m, 1, d, h, w];
    if labels.shape() != expected || probs.shape() != expected {
        return Err(Error::shape(format!(
            "pool construction expects labels and probabilities of shape {expected:?}, got {:?} and {:?}",
            labels.shape(),
            probs.shape()
        )));
    }
    let mut neuron = (Vec::new(), Vec::new());
    let mut background = (Vec::new(), Vec::new());
    for (i, (&y, &p)) in labels.data().iter().zip(probs.data()).enumerate() {
        let positive = y >= 0.5;
        let predicted = p >= MISCLASSIFICATION_THRESHOLD;
        let target = if positive {
            &mut neuron
        } else {
            &mut background
        };
        target.0.push(i);
        target.1.push(predicted != positive);
    }
    let make = |tape: &mut Tape,
                class,
                (voxels, misclassified): (Vec<usize>, Vec<bool>)|
     -> Result<VoxelPool> {
        let embeddings = tape.gather_voxels(latent, &voxels)?;
        Ok(VoxelPool {
            class,
            voxels,
            misclassified,
            embeddings,
        })
    };
    Ok(Pools {
        neuron: make(tape, PoolClass::Neuron, neuron)?,
        background: make(tape, PoolClass::Background, background)?,
    })
}
