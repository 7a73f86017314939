use super::axpy;

/// `out[i, :] = bias + input[i, :] · weightᵀ` for `weight: [dout, din]`.
pub fn linear_forward(
    input: &[f32],
    weight: &[f32],
    bias: &[f32],
    din: usize,
    dout: usize,
) -> Vec<f32> {
    let rows = input.len() / din;
    let mut transposed = vec![0.0; din * dout];
    for o in 0..dout {
        for k in 0..din {
            transposed[k * dout + o] = weight[o * din + k];
        }
    }
    let mut out = vec![0.0; rows * dout];
    for (x, y) in input.chunks_exact(din).zip(out.chunks_exact_mut(dout)) {
        y.copy_from_slice(bias);
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                axpy(y, &transposed[k * dout..(k + 1) * dout], xk);
            }
        }
    }
    out
}

pub struct LinearGrads {
    pub input: Vec<f32>,
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

pub fn linear_backward(
    input: &[f32],
    weight: &[f32],
    grad_out: &[f32],
    din: usize,
    dout: usize,
) -> LinearGrads {
    let mut grad_input = vec![0.0; input.len()];
    let mut grad_weight = vec![0.0; weight.len()];
    let mut grad_bias = vec![0.0; dout];
    for ((x, g), gx) in input
        .chunks_exact(din)
        .zip(grad_out.chunks_exact(dout))
        .zip(grad_input.chunks_exact_mut(din))
    {
        for (o, &go) in g.iter().enumerate() {
            if go == 0.0 {
                continue;
            }
            grad_bias[o] += go;
            axpy(gx, &weight[o * din..(o + 1) * din], go);
            axpy(&mut grad_weight[o * din..(o + 1) * din], x, go);
        }
    }
    LinearGrads {
        input: grad_input,
        weight: grad_weight,
        bias: grad_bias,
    }
}
