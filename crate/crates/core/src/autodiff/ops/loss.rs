use super::dot;

/// Norm floor for cosine similarity.
pub const COSINE_EPS: f32 = 1e-8;
/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f32 = 1e-7;

fn norm(v: &[f32]) -> f32 {
    dot(v, v).sqrt()
}

/// Row-wise cosine similarity of `a: [n, d]` against `b: [n, d]` or a single
/// broadcast row `b: [1, d]`.
pub fn cosine_rows_forward(a: &[f32], b: &[f32], d: usize) -> Vec<f32> {
    let broadcast = b.len() == d;
    a.chunks_exact(d)
        .enumerate()
        .map(|(i, u)| {
            let v = if broadcast { b } else { &b[i * d..(i + 1) * d] };
            let c = dot(u, v) / (norm(u).max(COSINE_EPS) * norm(v).max(COSINE_EPS));
            c.clamp(-1.0, 1.0)
        })
        .collect()
}

pub fn cosine_rows_backward(
    a: &[f32],
    b: &[f32],
    d: usize,
    grad_out: &[f32],
) -> (Vec<f32>, Vec<f32>) {
    let broadcast = b.len() == d;
    let mut ga = vec![0.0; a.len()];
    let mut gb = vec![0.0; b.len()];
    for (i, (u, &g)) in a.chunks_exact(d).zip(grad_out).enumerate() {
        let vrange = if broadcast { 0..d } else { i * d..(i + 1) * d };
        let v = &b[vrange.clone()];
        let nu = norm(u);
        let nv = norm(v);
        let su = nu.max(COSINE_EPS);
        let sv = nv.max(COSINE_EPS);
        let c = dot(u, v) / (su * sv);
        // d/du [u·v / (|u||v|)] = v/(|u||v|) - c u/|u|², with the norm treated
        // as the constant floor when it is clamped
        let cu = if nu > COSINE_EPS { c / (su * su) } else { 0.0 };
        let cv = if nv > COSINE_EPS { c / (sv * sv) } else { 0.0 };
        let inv = 1.0 / (su * sv);
        let gu = &mut ga[i * d..(i + 1) * d];
        for k in 0..d {
            gu[k] += g * (v[k] * inv - cu * u[k]);
        }
        let gv = &mut gb[vrange];
        for k in 0..d {
            gv[k] += g * (u[k] * inv - cv * v[k]);
        }
    }
    (ga, gb)
}

/// Mean binary cross-entropy over all elements.
pub fn bce_forward(probs: &[f32], target: &[f32]) -> f32 {
    let mut total = 0.0f64;
    for (&p, &y) in probs.iter().zip(target) {
        let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP) as f64;
        let y = y as f64;
        total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    (total / probs.len() as f64) as f32
}

pub fn bce_backward(probs: &[f32], target: &[f32], grad_out: f32) -> Vec<f32> {
    let scale = grad_out / probs.len() as f32;
    probs
        .iter()
        .zip(target)
        .map(|(&p, &y)| {
            if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
                0.0
            } else {
                scale * ((1.0 - y) / (1.0 - p) - y / p)
            }
        })
        .collect()
}
