//! Voxel-wise cross-volume siamese representation learning.
//!
//! The bottleneck latent code of every volume in a batch is interpolated back
//! to full resolution and split by ground-truth label into two batch-wide
//! pools: neuron voxels and background voxels. From each pool a set of anchor
//! voxels is drawn (uniformly, from the misclassified subset, or half and
//! half), each paired with another member of the same pool or with the
//! pool's momentum-averaged descriptor. Pairs go through a projector `f` and a
//! predictor `h`, and the loss is the symmetrized negative cosine between the
//! predicted anchor and the stop-gradient projected pair.
//!
//! None of this is used at inference: the backbone alone produces the
//! segmentation.

pub mod descriptor;
pub mod head;
pub mod loss;
pub mod pool;
pub mod sampling;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use descriptor::{
    compute_descriptor, momentum_coefficient, DescriptorMode, DescriptorSet, PoolDescriptor,
};
pub use head::{head_invocations, BoundHead, HeadConfig, Mlp, SiamHead};
pub use loss::{seg_loss, simsiam_pair_loss, total_sim_loss, PoolPairs, SegLoss, SimLoss};
pub use pool::{build_pools, interpolate_latent, Pools, VoxelPool};
pub use sampling::{sample_anchors, sample_pairs, AnchorDraw};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolClass {
    Neuron,
    Background,
}

impl PoolClass {
    pub fn label(self) -> f32 {
        match self {
            PoolClass::Neuron => 1.0,
            PoolClass::Background => 0.0,
        }
    }
}

impl fmt::Display for PoolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolClass::Neuron => "neuron",
            PoolClass::Background => "background",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorStrategy {
    /// Uniform over the whole pool.
    #[serde(rename = "random")]
    Random,
    /// Uniform over the misclassified members only.
    #[serde(rename = "ph")]
    PurelyHard,
    /// `ceil(N/2)` from the whole pool and `floor(N/2)` from the misclassified members.
    #[serde(rename = "hybrid")]
    Hybrid,
}

impl std::str::FromStr for AnchorStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Self::Random),
            "ph" | "hard" | "purely_hard" => Ok(Self::PurelyHard),
            "hybrid" => Ok(Self::Hybrid),
            other => Err(Error::config(format!("unknown anchor strategy {other:?}"))),
        }
    }
}

impl fmt::Display for AnchorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::PurelyHard => "ph",
            Self::Hybrid => "hybrid",
        })
    }
}

/// Where the pair-voxel for each anchor comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairMode {
    /// Another member of the same pool, uniform with replacement.
    #[serde(rename = "pool")]
    PoolSample,
    /// The pool descriptor averaged over all members.
    #[serde(rename = "relaxed")]
    DescriptorRelaxed,
    /// The pool descriptor averaged over correctly classified members.
    #[serde(rename = "strict")]
    DescriptorStrict,
}

impl PairMode {
    pub fn descriptor_mode(self) -> Option<DescriptorMode> {
        match self {
            PairMode::PoolSample => None,
            PairMode::DescriptorRelaxed => Some(DescriptorMode::Relaxed),
            PairMode::DescriptorStrict => Some(DescriptorMode::Strict),
        }
    }
}

impl std::str::FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pool" | "pool_sample" | "none" => Ok(Self::PoolSample),
            "relaxed" => Ok(Self::DescriptorRelaxed),
            "strict" => Ok(Self::DescriptorStrict),
            other => Err(Error::config(format!("unknown pair mode {other:?}"))),
        }
    }
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PoolSample => "pool",
            Self::DescriptorRelaxed => "relaxed",
            Self::DescriptorStrict => "strict",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VcvrlConfig {
    /// Anchors drawn per pool per iteration.
    pub anchors: usize,
    pub strategy: AnchorStrategy,
    pub pair_mode: PairMode,
    /// Momentum-average descriptors across iterations.
    pub momentum: bool,
    pub alpha_base: f64,
    /// In descriptor mode, also score the descriptor as anchor against the voxel.
    pub symmetric_descriptor: bool,
    pub head: HeadConfig,
}

impl Default for VcvrlConfig {
    fn default() -> Self {
        Self {
            anchors: 512,
            strategy: AnchorStrategy::Hybrid,
            pair_mode: PairMode::DescriptorStrict,
            momentum: true,
            alpha_base: 1.0,
            symmetric_descriptor: true,
            head: HeadConfig::default(),
        }
    }
}

impl VcvrlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.anchors < 2 {
            return Err(Error::config(format!(
                "anchor count {} must be at least 2",
                self.anchors
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha_base) {
            return Err(Error::config(format!(
                "alpha_base {} outside [0, 1]",
                self.alpha_base
            )));
        }
        self.head.validate()
    }
}

/// Non-fatal conditions met while sampling or summarizing pools.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingEvent {
    /// The pool had no members and contributed zero loss.
    EmptyPool(PoolClass),
    /// No misclassified members; anchors were drawn uniformly instead.
    HardSubsetEmpty(PoolClass),
    /// No correctly classified members; the strict descriptor used all members.
    StrictDescriptorFallback(PoolClass),
}

impl fmt::Display for SamplingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyPool(c) => write!(f, "{c} pool is empty; contributes zero similarity loss"),
            Self::HardSubsetEmpty(c) => {
                write!(
                    f,
                    "{c} pool has no misclassified voxels; fell back to random anchors"
                )
            }
            Self::StrictDescriptorFallback(c) => {
                write!(f, "{c} pool has no correctly classified voxels; strict descriptor fell back to relaxed")
            }
        }
    }
}
