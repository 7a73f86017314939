//! Forward and backward kernels over flat row-major buffers.
//!
//! The tape in [`super::tape`] owns shapes and bookkeeping; everything here is
//! plain slice arithmetic so it can be tested against nested-loop references.

pub mod conv;
pub mod linear;
pub mod loss;
pub mod pool;
pub mod upsample;

/// `out += alpha * x`
#[inline]
pub(crate) fn axpy(out: &mut [f32], x: &[f32], alpha: f32) {
    debug_assert_eq!(out.len(), x.len());
    for (o, &v) in out.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

/// Dot product with eight independent accumulators (vectorizes, fixed order).
#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    let lo = (acc[0] + acc[4]) + (acc[1] + acc[5]);
    let hi = (acc[2] + acc[6]) + (acc[3] + acc[7]);
    lo + hi + tail
}
