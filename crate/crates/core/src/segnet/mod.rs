//! 3D encoder-decoder segmentation backbone.
//!
//! Each encoder level applies two `3×3×3` convolutions with ReLU and hands its
//! output to the matching decoder level as a skip connection; levels are
//! separated by `2×2×2` max pooling. The deepest encoder level is the
//! bottleneck whose output is the latent code used by the siamese objective.
//! Each decoder level upsamples trilinearly to the skip's size, concatenates
//! `[upsampled, skip]` along channels and applies two more conv+ReLU layers.
//! A `1×1×1` convolution and a sigmoid produce per-voxel probabilities.

pub mod checkpoint;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegNetConfig {
    pub levels: usize,
    pub channels: Vec<usize>,
    #[serde(default = "one")]
    pub input_channels: usize,
    #[serde(default = "three")]
    pub kernel_size: usize,
}

fn one() -> usize {
    1
}

fn three() -> usize {
    3
}

impl Default for SegNetConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl SegNetConfig {
    /// Two levels, 8 and 16 channels.
    pub fn desk() -> Self {
        Self {
            levels: 2,
            channels: vec![8, 16],
            input_channels: 1,
            kernel_size: 3,
        }
    }

    /// Four levels with 16/32/64/128 channels.
    pub fn full() -> Self {
        Self {
            levels: 4,
            channels: vec![16, 32, 64, 128],
            input_channels: 1,
            kernel_size: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::config("segnet channel list is empty"));
        }
        if self.levels != self.channels.len() {
            return Err(Error::config(format!(
                "segnet has {} levels but {} channel entries",
                self.levels,
                self.channels.len()
            )));
        }
        if self.channels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(format!(
                "segnet channels must be strictly increasing, got {:?}",
                self.channels
            )));
        }
        if self.channels[0] == 0 || self.input_channels == 0 {
            return Err(Error::config("segnet channel counts must be positive"));
        }
        if self.kernel_size.is_multiple_of(2) {
            return Err(Error::config(format!(
                "kernel size {} must be odd",
                self.kernel_size
            )));
        }
        Ok(())
    }

    /// Channels of the bottleneck, i.e. the latent dimension `d`.
    pub fn latent_dim(&self) -> usize {
        *self.channels.last().expect("validated config")
    }

    /// Spatial extents must be multiples of this.
    pub fn divisor(&self) -> usize {
        1 << (self.levels - 1)
    }

    fn layer_shapes(&self) -> Vec<(usize, usize, usize)> {
        let k = self.kernel_size;
        let mut shapes = Vec::new();
        let mut cin = self.input_channels;
        for &c in &self.channels {
            shapes.push((c, cin, k));
            shapes.push((c, c, k));
            cin = c;
        }
        for level in (0..self.levels - 1).rev() {
            let c = self.channels[level];
            shapes.push((c, self.channels[level + 1] + c, k));
            shapes.push((c, c, k));
        }
        shapes.push((1, self.channels[0], 1));
        shapes
    }

    /// Trainable parameter count implied by the layer shapes.
    pub fn parameter_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(cout, cin, k)| cout * cin * k * k * k + cout)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl ConvLayer {
    /// He-uniform weights, zero bias.
    fn init<R: Rng>(cout: usize, cin: usize, k: usize, rng: &mut R) -> Self {
        let fan_in = (cin * k * k * k) as f32;
        let bound = (6.0 / fan_in).sqrt();
        Self {
            weight: Tensor::uniform([cout, cin, k, k, k], -bound, bound, rng),
            bias: Tensor::zeros([cout]),
        }
    }
}

/// Graph handles produced by one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct SegOutput {
    pub logits: Var,
    pub probs: Var,
    pub bottleneck: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegNet {
    config: SegNetConfig,
    /// Encoder convs in order, then decoder convs deepest first, then the head.
    layers: Vec<ConvLayer>,
}

impl SegNet {
    pub fn new(config: SegNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(cout, cin, k)| ConvLayer::init(cout, cin, k, &mut rng))
            .collect();
        Ok(Self { config, layers })
    }

    /// Rebuild from a flat parameter list in [`SegNet::parameters`] order.
    pub fn from_parameters(config: SegNetConfig, params: Vec<Tensor>) -> Result<Self> {
        config.validate()?;
        let shapes = config.layer_shapes();
        if params.len() != 2 * shapes.len() {
            return Err(Error::config(format!(
                "expected {} parameter tensors, got {}",
                2 * shapes.len(),
                params.len()
            )));
        }
        let mut it = params.into_iter();
        let mut layers = Vec::with_capacity(shapes.len());
        for (cout, cin, k) in shapes {
            let weight = it.next().expect("length checked");
            let bias = it.next().expect("length checked");
            if weight.shape() != [cout, cin, k, k, k] || bias.shape() != [cout] {
                return Err(Error::config(format!(
                    "parameter shapes {:?}/{:?} do not match layer [{cout}, {cin}, {k}]",
                    weight.shape(),
                    bias.shape()
                )));
            }
            layers.push(ConvLayer { weight, bias });
        }
        Ok(Self { config, layers })
    }

    pub fn config(&self) -> &SegNetConfig {
        &self.config
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [&l.weight, &l.bias])
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    /// Register parameters on `tape` in [`SegNet::parameters`] order.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        self.parameters()
            .into_iter()
            .map(|p| tape.leaf(p.clone(), trainable))
            .collect()
    }

    pub fn check_input(&self, shape: &[usize]) -> Result<()> {
        let [_, c, d, h, w] = crate::autodiff::tensor::dims5(shape)?;
        if c != self.config.input_channels {
            return Err(Error::shape(format!(
                "segnet expects {} input channels, got {c}",
                self.config.input_channels
            )));
        }
        let div = self.config.divisor();
        if [d, h, w].iter().any(|&e| e == 0 || e % div != 0) {
            return Err(Error::shape(format!(
                "spatial extents {:?} must be positive multiples of {div}",
                [d, h, w]
            )));
        }
        Ok(())
    }

    /// Forward pass for a `[B, 1, D, H, W]` volume using parameter handles
    /// from [`SegNet::bind`].
    pub fn forward(&self, tape: &mut Tape, params: &[Var], volume: Var) -> Result<SegOutput> {
        self.check_input(tape.shape(volume))?;
        if params.len() != 2 * self.layers.len() {
            return Err(Error::shape("parameter handles do not match this network"));
        }
        let pad = self.config.kernel_size / 2;
        let mut layer = 0;
        let mut conv_relu = |tape: &mut Tape, x: Var| -> Result<Var> {
            let y = tape.conv3d(x, params[2 * layer], params[2 * layer + 1], 1, pad)?;
            layer += 1;
            Ok(tape.relu(y))
        };

        let mut skips = Vec::with_capacity(self.config.levels);
        let mut x = volume;
        for level in 0..self.config.levels {
            if level > 0 {
                x = tape.maxpool3d(x, 2)?;
            }
            x = conv_relu(tape, x)?;
            x = conv_relu(tape, x)?;
            skips.push(x);
        }
        let bottleneck = x;

        for level in (0..self.config.levels - 1).rev() {
            let skip = skips[level];
            let s = tape.shape(skip);
            let up = tape.upsample_trilinear(x, [s[2], s[3], s[4]])?;
            x = tape.concat_channels(&[up, skip])?;
            x = conv_relu(tape, x)?;
            x = conv_relu(tape, x)?;
        }

        let n = params.len();
        let logits = tape.conv3d(x, params[n - 2], params[n - 1], 1, 0)?;
        let probs = tape.sigmoid(logits);
        Ok(SegOutput {
            logits,
            probs,
            bottleneck,
        })
    }

    /// Probabilities for a `[B, 1, D, H, W]` volume.
    ///
    /// Runs the same forward path as training on a scratch tape with
    /// non-trainable leaves. Nothing besides the backbone is touched here.
    pub fn infer(&self, volume: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let params = self.bind(&mut tape, false);
        let x = tape.constant(volume.clone());
        let out = self.forward(&mut tape, &params, x)?;
        Ok(tape.value(out.probs).clone())
    }
}
