use crate::error::{Error, Result};

/// Output shape of non-overlapping max pooling.
pub fn maxpool3d_shape(shape: &[usize], window: usize) -> Result<Vec<usize>> {
    let [b, c, d, h, w] = crate::autodiff::tensor::dims5(shape)?;
    if window == 0 {
        return Err(Error::shape("maxpool3d window must be at least 1"));
    }
    for extent in [d, h, w] {
        if extent % window != 0 {
            return Err(Error::shape(format!(
                "maxpool3d window {window} does not divide spatial extents {:?}",
                [d, h, w]
            )));
        }
    }
    Ok(vec![b, c, d / window, h / window, w / window])
}

/// Returns pooled values and, per output, the flat input index of the
/// maximum. Ties resolve to the first element in `z, y, x` scan order.
pub fn maxpool3d_forward(
    shape: [usize; 5],
    window: usize,
    input: &[f32],
) -> (Vec<f32>, Vec<usize>) {
    let [b, c, d, h, w] = shape;
    let (od, oh, ow) = (d / window, h / window, w / window);
    let n = b * c * od * oh * ow;
    let mut out = Vec::with_capacity(n);
    let mut argmax = Vec::with_capacity(n);
    for bc in 0..b * c {
        let base = bc * d * h * w;
        for oz in 0..od {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = f32::NEG_INFINITY;
                    let mut best_idx = usize::MAX;
                    for z in oz * window..(oz + 1) * window {
                        for y in oy * window..(oy + 1) * window {
                            for x in ox * window..(ox + 1) * window {
                                let idx = base + (z * h + y) * w + x;
                                if best_idx == usize::MAX || input[idx] > best {
                                    best = input[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                    }
                    out.push(best);
                    argmax.push(best_idx);
                }
            }
        }
    }
    (out, argmax)
}

pub fn maxpool3d_backward(input_len: usize, argmax: &[usize], grad_out: &[f32]) -> Vec<f32> {
    let mut grad = vec![0.0; input_len];
    for (&idx, &g) in argmax.iter().zip(grad_out) {
        grad[idx] += g;
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_maximum() {
        let input: Vec<f32> = (1..=8).map(|v| v as f32).collect();
        let (out, argmax) = maxpool3d_forward([1, 1, 2, 2, 2], 2, &input);
        assert_eq!(out, vec![8.0]);
        assert_eq!(argmax, vec![7]);
    }

    #[test]
    fn ties_route_to_first_element() {
        let input = vec![3.0; 2 * 4 * 4 * 2];
        let (out, argmax) = maxpool3d_forward([1, 1, 2, 4, 4], 2, &input[..32]);
        assert!(out.iter().all(|&v| v == 3.0));
        let grad = maxpool3d_backward(32, &argmax, &[1.0; 4]);
        // first element of each 2x2x2 block: (0,0,0), (0,0,2), (0,2,0), (0,2,2)
        let hot: Vec<usize> = grad
            .iter()
            .enumerate()
            .filter(|(_, &g)| g != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hot, vec![0, 2, 8, 10]);
    }

    #[test]
    fn non_divisible_extent_rejected() {
        assert!(maxpool3d_shape(&[1, 1, 3, 4, 4], 2).is_err());
        assert_eq!(
            maxpool3d_shape(&[2, 3, 4, 6, 2], 2).unwrap(),
            vec![2, 3, 2, 3, 1]
        );
    }
}
