//! Voxel-wise cross-volume siamese representation learning for 3D
//! segmentation, on a small self-contained autodiff core.

pub mod autodiff;
mod binio;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod segnet;
pub mod synthdata;
pub mod vcvrl;

pub use error::{Error, FormatError, Result};
