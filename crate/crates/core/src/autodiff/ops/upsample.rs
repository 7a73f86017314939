//! Trilinear interpolation, align-corners-false: output sample `o` reads the
//! source at `(o + 0.5) * in / out - 0.5`, clamped to the valid range.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AxisTaps {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
    pub frac: Vec<f32>,
}

impl AxisTaps {
    pub fn new(in_len: usize, out_len: usize) -> Self {
        let scale = in_len as f64 / out_len as f64;
        let mut lo = Vec::with_capacity(out_len);
        let mut hi = Vec::with_capacity(out_len);
        let mut frac = Vec::with_capacity(out_len);
        for o in 0..out_len {
            let src = ((o as f64 + 0.5) * scale - 0.5).max(0.0);
            let l = (src.floor() as usize).min(in_len - 1);
            lo.push(l);
            hi.push((l + 1).min(in_len - 1));
            frac.push((src - l as f64).clamp(0.0, 1.0) as f32);
        }
        Self { lo, hi, frac }
    }
}

pub fn upsample_shape(shape: &[usize], target: [usize; 3]) -> Result<Vec<usize>> {
    let [b, c, d, h, w] = crate::autodiff::tensor::dims5(shape)?;
    if target.contains(&0) {
        return Err(Error::shape(format!(
            "upsample target {target:?} has a zero extent"
        )));
    }
    if target[0] < d || target[1] < h || target[2] < w {
        return Err(Error::shape(format!(
            "upsample target {target:?} is smaller than source {:?}",
            [d, h, w]
        )));
    }
    if d == 0 || h == 0 || w == 0 {
        return Err(Error::shape("upsample source has a zero extent"));
    }
    Ok(vec![b, c, target[0], target[1], target[2]])
}

fn taps(shape: [usize; 5], target: [usize; 3]) -> [AxisTaps; 3] {
    [
        AxisTaps::new(shape[2], target[0]),
        AxisTaps::new(shape[3], target[1]),
        AxisTaps::new(shape[4], target[2]),
    ]
}

pub fn upsample_forward(shape: [usize; 5], target: [usize; 3], input: &[f32]) -> Vec<f32> {
    let [b, c, d, h, w] = shape;
    let [tz, ty, tx] = taps(shape, target);
    let [od, oh, ow] = target;
    let mut out = Vec::with_capacity(b * c * od * oh * ow);
    for src in input.chunks_exact(d * h * w) {
        let at = |z: usize, y: usize, x: usize| src[(z * h + y) * w + x];
        for z in 0..od {
            let (z0, z1, fz) = (tz.lo[z], tz.hi[z], tz.frac[z]);
            for y in 0..oh {
                let (y0, y1, fy) = (ty.lo[y], ty.hi[y], ty.frac[y]);
                for x in 0..ow {
                    let (x0, x1, fx) = (tx.lo[x], tx.hi[x], tx.frac[x]);
                    let c00 = at(z0, y0, x0) * (1.0 - fx) + at(z0, y0, x1) * fx;
                    let c01 = at(z0, y1, x0) * (1.0 - fx) + at(z0, y1, x1) * fx;
                    let c10 = at(z1, y0, x0) * (1.0 - fx) + at(z1, y0, x1) * fx;
                    let c11 = at(z1, y1, x0) * (1.0 - fx) + at(z1, y1, x1) * fx;
                    let c0 = c00 * (1.0 - fy) + c01 * fy;
                    let c1 = c10 * (1.0 - fy) + c11 * fy;
                    out.push(c0 * (1.0 - fz) + c1 * fz);
                }
            }
        }
    }
    out
}

pub fn upsample_backward(shape: [usize; 5], target: [usize; 3], grad_out: &[f32]) -> Vec<f32> {
    let [b, c, d, h, w] = shape;
    let [tz, ty, tx] = taps(shape, target);
    let [od, oh, ow] = target;
    let mut grad = vec![0.0; b * c * d * h * w];
    for (dst, g) in grad
        .chunks_exact_mut(d * h * w)
        .zip(grad_out.chunks_exact(od * oh * ow))
    {
        let mut i = 0;
        for z in 0..od {
            let (z0, z1, fz) = (tz.lo[z], tz.hi[z], tz.frac[z]);
            for y in 0..oh {
                let (y0, y1, fy) = (ty.lo[y], ty.hi[y], ty.frac[y]);
                for x in 0..ow {
                    let (x0, x1, fx) = (tx.lo[x], tx.hi[x], tx.frac[x]);
                    let gv = g[i];
                    i += 1;
                    for (zz, wz) in [(z0, 1.0 - fz), (z1, fz)] {
                        for (yy, wy) in [(y0, 1.0 - fy), (y1, fy)] {
                            let row = (zz * h + yy) * w;
                            dst[row + x0] += gv * wz * wy * (1.0 - fx);
                            dst[row + x1] += gv * wz * wy * fx;
                        }
                    }
                }
            }
        }
    }
    grad
}
