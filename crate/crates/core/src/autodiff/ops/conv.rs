//! 3D cross-correlation.
//!
//! The input is copied into a zero-padded volume and the stride-1 response is
//! accumulated in that padded row layout: for a fixed kernel tap the whole
//! output volume is one contiguous run of the padded input, shifted by the
//! tap offset. Positions that fall in the padding columns are scratch and get
//! discarded. Strided convolution subsamples the stride-1 grid.

use super::{axpy, dot};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeometry {
    pub batch: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub input: [usize; 3],
    pub output: [usize; 3],
}

impl ConvGeometry {
    pub fn new(
        input: &[usize],
        kernel: &[usize],
        bias: &[usize],
        stride: usize,
        padding: usize,
    ) -> Result<Self> {
        let [batch, in_channels, d, h, w] = crate::autodiff::tensor::dims5(input)?;
        let &[out_channels, kc, kd, kh, kw] = kernel else {
            return Err(Error::shape(format!(
                "conv3d kernel must be [Cout, Cin, k, k, k], got {kernel:?}"
            )));
        };
        if kc != in_channels {
            return Err(Error::shape(format!(
                "conv3d channel mismatch: input has {in_channels} channels, kernel expects {kc}"
            )));
        }
        if kd != kh || kh != kw {
            return Err(Error::shape(format!(
                "conv3d kernel must be cubic, got {kernel:?}"
            )));
        }
        if kd % 2 == 0 {
            return Err(Error::shape(format!(
                "conv3d kernel extent {kd} must be odd"
            )));
        }
        if bias != [out_channels] {
            return Err(Error::shape(format!(
                "conv3d bias must be [{out_channels}], got {bias:?}"
            )));
        }
        if stride == 0 {
            return Err(Error::shape("conv3d stride must be at least 1"));
        }
        let mut output = [0; 3];
        for (axis, &extent) in [d, h, w].iter().enumerate() {
            let padded = extent + 2 * padding;
            if padded < kd {
                return Err(Error::shape(format!(
                    "conv3d padded extent {padded} on axis {axis} is smaller than kernel {kd}"
                )));
            }
            output[axis] = (padded - kd) / stride + 1;
        }
        Ok(Self {
            batch,
            in_channels,
            out_channels,
            kernel: kd,
            stride,
            padding,
            input: [d, h, w],
            output,
        })
    }

    pub fn output_shape(&self) -> Vec<usize> {
        let [d, h, w] = self.output;
        vec![self.batch, self.out_channels, d, h, w]
    }

    fn padded(&self) -> [usize; 3] {
        self.input.map(|x| x + 2 * self.padding)
    }

    fn plane(&self) -> usize {
        self.padded().iter().product()
    }

    /// Length of the contiguous accumulation run for one kernel tap.
    fn run(&self) -> usize {
        let [_, hp, wp] = self.padded();
        let full = self.padded().map(|x| x - self.kernel + 1);
        (full[0] - 1) * hp * wp + (full[1] - 1) * wp + full[2]
    }

    fn tap_offsets(&self) -> Vec<usize> {
        let [_, hp, wp] = self.padded();
        let k = self.kernel;
        let mut offsets = Vec::with_capacity(k * k * k);
        for kz in 0..k {
            for ky in 0..k {
                for kx in 0..k {
                    offsets.push(kz * hp * wp + ky * wp + kx);
                }
            }
        }
        offsets
    }

    /// Offset into the padded-layout run of output voxel `(z, y, x)`.
    fn run_index(&self, z: usize, y: usize, x: usize) -> usize {
        let [_, hp, wp] = self.padded();
        let s = self.stride;
        (z * s) * hp * wp + (y * s) * wp + x * s
    }

    fn pad_input(&self, input: &[f32]) -> Vec<f32> {
        let [d, h, w] = self.input;
        let [_, hp, wp] = self.padded();
        let p = self.padding;
        let plane = self.plane();
        let mut out = vec![0.0; self.batch * self.in_channels * plane];
        for (src, dst) in input
            .chunks_exact(d * h * w)
            .zip(out.chunks_exact_mut(plane))
        {
            for z in 0..d {
                for y in 0..h {
                    let s = (z * h + y) * w;
                    let t = ((z + p) * hp + y + p) * wp + p;
                    dst[t..t + w].copy_from_slice(&src[s..s + w]);
                }
            }
        }
        out
    }
}

pub fn conv3d_forward(geo: &ConvGeometry, input: &[f32], kernel: &[f32], bias: &[f32]) -> Vec<f32> {
    let padded = geo.pad_input(input);
    let plane = geo.plane();
    let run = geo.run();
    let offsets = geo.tap_offsets();
    let taps = offsets.len();
    let [od, oh, ow] = geo.output;
    let out_vol = od * oh * ow;
    let mut out = vec![0.0; geo.batch * geo.out_channels * out_vol];
    let mut acc = vec![0.0; run];

    for b in 0..geo.batch {
        for co in 0..geo.out_channels {
            acc.fill(0.0);
            for ci in 0..geo.in_channels {
                let src = &padded[(b * geo.in_channels + ci) * plane..][..plane];
                let weights = &kernel[(co * geo.in_channels + ci) * taps..][..taps];
                for (&w, &off) in weights.iter().zip(&offsets) {
                    axpy(&mut acc, &src[off..off + run], w);
                }
            }
            let dst = &mut out[(b * geo.out_channels + co) * out_vol..][..out_vol];
            let bias = bias[co];
            let mut i = 0;
            for z in 0..od {
                for y in 0..oh {
                    for x in 0..ow {
                        dst[i] = acc[geo.run_index(z, y, x)] + bias;
                        i += 1;
                    }
                }
            }
        }
    }
    out
}

pub struct ConvGrads {
    pub input: Vec<f32>,
    pub kernel: Vec<f32>,
    pub bias: Vec<f32>,
}

pub fn conv3d_backward(
    geo: &ConvGeometry,
    input: &[f32],
    kernel: &[f32],
    grad_out: &[f32],
) -> ConvGrads {
    let padded = geo.pad_input(input);
    let plane = geo.plane();
    let run = geo.run();
    let offsets = geo.tap_offsets();
    let taps = offsets.len();
    let [od, oh, ow] = geo.output;
    let out_vol = od * oh * ow;

    let mut grad_kernel = vec![0.0; kernel.len()];
    let mut grad_bias = vec![0.0; geo.out_channels];
    let mut grad_padded = vec![0.0; padded.len()];
    // Upstream gradient scattered into the padded run layout, zero elsewhere.
    let mut scattered = vec![0.0; geo.out_channels * run];

    for b in 0..geo.batch {
        scattered.fill(0.0);
        for co in 0..geo.out_channels {
            let g = &grad_out[(b * geo.out_channels + co) * out_vol..][..out_vol];
            let dst = &mut scattered[co * run..][..run];
            let mut i = 0;
            let mut total = 0.0;
            for z in 0..od {
                for y in 0..oh {
                    for x in 0..ow {
                        dst[geo.run_index(z, y, x)] = g[i];
                        total += g[i];
                        i += 1;
                    }
                }
            }
            grad_bias[co] += total;
        }

        for ci in 0..geo.in_channels {
            let base = (b * geo.in_channels + ci) * plane;
            let src = &padded[base..base + plane];
            let gsrc = &mut grad_padded[base..base + plane];
            for co in 0..geo.out_channels {
                let g = &scattered[co * run..][..run];
                let widx = (co * geo.in_channels + ci) * taps;
                for (t, &off) in offsets.iter().enumerate() {
                    grad_kernel[widx + t] += dot(g, &src[off..off + run]);
                    axpy(&mut gsrc[off..off + run], g, kernel[widx + t]);
                }
            }
        }
    }

    let [d, h, w] = geo.input;
    let [_, hp, wp] = geo.padded();
    let p = geo.padding;
    let mut grad_input = vec![0.0; input.len()];
    for (src, dst) in grad_padded
        .chunks_exact(plane)
        .zip(grad_input.chunks_exact_mut(d * h * w))
    {
        for z in 0..d {
            for y in 0..h {
                let s = ((z + p) * hp + y + p) * wp + p;
                let t = (z * h + y) * w;
                dst[t..t + w].copy_from_slice(&src[s..s + w]);
            }
        }
    }

    ConvGrads {
        input: grad_input,
        kernel: grad_kernel,
        bias: grad_bias,
    }
}
