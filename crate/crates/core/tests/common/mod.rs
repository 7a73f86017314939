//! Finite-difference gradient checks and brute-force oracles shared by the
//! test targets.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vcvrl::autodiff::{Adam, Tape, Tensor, Var};

pub type Build = dyn Fn(&mut Tape, &[Var]) -> Var;

#[derive(Debug, Clone)]
pub struct Report {
    pub name: &'static str,
    pub instances: usize,
    pub worst: f64,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(shape: &[usize], lo: f32, hi: f32, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_fn(shape.to_vec(), |_| rng.random_range(lo..hi))
}

/// Values bounded away from zero so that ReLU stays differentiable under
/// perturbation.
fn away_from_zero(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_fn(shape.to_vec(), |_| {
        let m = rng.random_range(0.05..1.5f32);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    })
}

/// Distinct values with gaps of at least 0.05, shuffled.
fn well_separated(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    let mut v: Vec<f32> = (0..n).map(|i| i as f32 * 0.05 - 1.0).collect();
    for i in (1..n).rev() {
        v.swap(i, rng.random_range(0..=i));
    }
    Tensor::new(shape.to_vec(), v).unwrap()
}

fn objective(inputs: &[Tensor], trainable: &[bool], build: &Build, weights: &[f32]) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs
        .iter()
        .zip(trainable)
        .map(|(t, &g)| tape.leaf(t.clone(), g))
        .collect();
    let out = build(&mut tape, &vars);
    tape.value(out)
        .data()
        .iter()
        .zip(weights)
        .map(|(&o, &w)| o as f64 * w as f64)
        .sum()
}

/// Norm-wise relative error between the tape gradient of `Σ w ⊙ build(x)`
/// and its central finite difference, over all trainable inputs.
pub fn gradient_error(
    inputs: &[Tensor],
    trainable: &[bool],
    build: &Build,
    h: f32,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs
        .iter()
        .zip(trainable)
        .map(|(t, &g)| tape.leaf(t.clone(), g))
        .collect();
    let out = build(&mut tape, &vars);
    let shape = tape.shape(out).to_vec();
    let weights = uniform(&shape, -1.0, 1.0, rng);
    let w = tape.constant(weights.clone());
    let prod = tape.mul(out, w).unwrap();
    let loss = tape.sum(prod);
    let grads = tape.backward(loss).unwrap();

    let (mut diff2, mut a2, mut n2) = (0.0f64, 0.0f64, 0.0f64);
    for (i, input) in inputs.iter().enumerate() {
        if !trainable[i] {
            continue;
        }
        let analytic = grads.wrt(vars[i]);
        for j in 0..input.len() {
            let mut plus = inputs.to_vec();
            let mut minus = inputs.to_vec();
            let x = input.data()[j];
            plus[i].data_mut()[j] = x + h;
            minus[i].data_mut()[j] = x - h;
            let step = (x + h) as f64 - (x - h) as f64;
            let numeric = (objective(&plus, trainable, build, weights.data())
                - objective(&minus, trainable, build, weights.data()))
                / step;
            let a = analytic.data()[j] as f64;
            diff2 += (a - numeric).powi(2);
            a2 += a * a;
            n2 += numeric * numeric;
        }
    }
    diff2.sqrt() / a2.sqrt().max(n2.sqrt()).max(1e-6)
}

struct Case {
    inputs: Vec<Tensor>,
    trainable: Vec<bool>,
    build: Box<Build>,
    h: f32,
}

impl Case {
    fn all(inputs: Vec<Tensor>, build: Box<Build>) -> Self {
        let trainable = vec![true; inputs.len()];
        Self {
            inputs,
            trainable,
            build,
            h: 1e-2,
        }
    }
}

fn conv_case(r: &mut ChaCha8Rng) -> Case {
    let b = r.random_range(1..=2);
    let cin = r.random_range(1..=3);
    let cout = r.random_range(1..=3);
    let k = if r.random_bool(0.7) { 3 } else { 1 };
    let stride = r.random_range(1..=2);
    let padding = if k == 3 { r.random_range(0..=1) } else { 0 };
    let lo = if padding == 0 { k } else { 2 };
    let dims: Vec<usize> = (0..3).map(|_| r.random_range(lo..=5)).collect();
    let x = uniform(&[b, cin, dims[0], dims[1], dims[2]], -1.0, 1.0, r);
    let w = uniform(&[cout, cin, k, k, k], -0.5, 0.5, r);
    let bias = uniform(&[cout], -0.5, 0.5, r);
    Case::all(
        vec![x, w, bias],
        Box::new(move |t, v| t.conv3d(v[0], v[1], v[2], stride, padding).unwrap()),
    )
}

fn pool_case(r: &mut ChaCha8Rng) -> Case {
    let dims: Vec<usize> = (0..3).map(|_| 2 * r.random_range(1..=2)).collect();
    let c = r.random_range(1..=2);
    let x = well_separated(&[1, c, dims[0], dims[1], dims[2]], r);
    Case::all(vec![x], Box::new(|t, v| t.maxpool3d(v[0], 2).unwrap()))
}

fn upsample_case(r: &mut ChaCha8Rng) -> Case {
    let src: Vec<usize> = (0..3).map(|_| r.random_range(1..=3)).collect();
    let target: [usize; 3] = [0, 1, 2].map(|a| r.random_range(src[a]..=2 * src[a] + 1));
    let x = uniform(&[1, 2, src[0], src[1], src[2]], -1.0, 1.0, r);
    Case::all(
        vec![x],
        Box::new(move |t, v| t.upsample_trilinear(v[0], target).unwrap()),
    )
}

fn linear_case(r: &mut ChaCha8Rng) -> Case {
    let din = r.random_range(1..=5);
    let dout = r.random_range(1..=5);
    let shape = if r.random_bool(0.3) {
        vec![din]
    } else {
        vec![r.random_range(1..=4), din]
    };
    let x = uniform(&shape, -1.0, 1.0, r);
    let w = uniform(&[dout, din], -1.0, 1.0, r);
    let b = uniform(&[dout], -1.0, 1.0, r);
    Case::all(
        vec![x, w, b],
        Box::new(|t, v| t.linear(v[0], v[1], v[2]).unwrap()),
    )
}

fn small_shape(r: &mut ChaCha8Rng) -> Vec<usize> {
    (0..r.random_range(1..=3))
        .map(|_| r.random_range(1..=4))
        .collect()
}

fn cosine_case(r: &mut ChaCha8Rng) -> Case {
    let d = r.random_range(2..=6);
    let n = r.random_range(1..=4);
    let (sa, sb) = match r.random_range(0..3) {
        0 => (vec![n, d], vec![n, d]),
        1 => (vec![n, d], vec![1, d]),
        _ => (vec![d], vec![d]),
    };
    let a = uniform(&sa, -1.0, 1.0, r);
    let b = uniform(&sb, -1.0, 1.0, r);
    Case::all(
        vec![a, b],
        Box::new(|t, v| t.cosine_similarity(v[0], v[1]).unwrap()),
    )
}

fn bce_case(r: &mut ChaCha8Rng) -> Case {
    let shape = small_shape(r);
    let p = uniform(&shape, 0.1, 0.9, r);
    let y = Tensor::from_fn(shape, |_| if r.random_bool(0.4) { 1.0 } else { 0.0 });
    Case {
        inputs: vec![p, y],
        trainable: vec![true, false],
        build: Box::new(|t, v| t.bce_loss(v[0], v[1]).unwrap()),
        h: 1e-3,
    }
}

type CaseGen = fn(&mut ChaCha8Rng) -> Case;

fn gradient_cases() -> Vec<(&'static str, CaseGen)> {
    vec![
        ("conv3d", conv_case as CaseGen),
        ("maxpool3d", pool_case),
        ("upsample_trilinear", upsample_case),
        ("linear", linear_case),
        ("relu", |r| {
            let s = small_shape(r);
            Case::all(vec![away_from_zero(&s, r)], Box::new(|t, v| t.relu(v[0])))
        }),
        ("sigmoid", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -3.0, 3.0, r)],
                Box::new(|t, v| t.sigmoid(v[0])),
            )
        }),
        ("add", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r), uniform(&s, -1.0, 1.0, r)],
                Box::new(|t, v| t.add(v[0], v[1]).unwrap()),
            )
        }),
        ("sub", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r), uniform(&s, -1.0, 1.0, r)],
                Box::new(|t, v| t.sub(v[0], v[1]).unwrap()),
            )
        }),
        ("mul", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r), uniform(&s, -1.0, 1.0, r)],
                Box::new(|t, v| t.mul(v[0], v[1]).unwrap()),
            )
        }),
        ("mul_shared", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r)],
                Box::new(|t, v| t.mul(v[0], v[0]).unwrap()),
            )
        }),
        ("scale", |r| {
            let s = small_shape(r);
            let f = r.random_range(-2.0..2.0f32);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r)],
                Box::new(move |t, v| t.scale(v[0], f)),
            )
        }),
        ("add_scalar", |r| {
            let s = small_shape(r);
            let c = r.random_range(-2.0..2.0f32);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r)],
                Box::new(move |t, v| t.add_scalar(v[0], c)),
            )
        }),
        ("sum", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r)],
                Box::new(|t, v| t.sum(v[0])),
            )
        }),
        ("mean", |r| {
            let s = small_shape(r);
            Case::all(
                vec![uniform(&s, -1.0, 1.0, r)],
                Box::new(|t, v| t.mean(v[0])),
            )
        }),
        ("concat_channels", |r| {
            let sp: Vec<usize> = (0..3).map(|_| r.random_range(1..=3)).collect();
            let b = r.random_range(1..=2);
            let inputs: Vec<Tensor> = (0..r.random_range(2..=3))
                .map(|_| {
                    uniform(
                        &[b, r.random_range(1..=3), sp[0], sp[1], sp[2]],
                        -1.0,
                        1.0,
                        r,
                    )
                })
                .collect();
            Case::all(inputs, Box::new(|t, v| t.concat_channels(v).unwrap()))
        }),
        ("gather_rows", |r| {
            let (n, d) = (r.random_range(1..=5), r.random_range(1..=4));
            let rows: Vec<usize> = (0..r.random_range(1..=8))
                .map(|_| r.random_range(0..n))
                .collect();
            Case::all(
                vec![uniform(&[n, d], -1.0, 1.0, r)],
                Box::new(move |t, v| t.gather_rows(v[0], &rows).unwrap()),
            )
        }),
        ("gather_voxels", |r| {
            let m = r.random_range(1..=2);
            let c = r.random_range(1..=3);
            let sp: Vec<usize> = (0..3).map(|_| r.random_range(1..=3)).collect();
            let total = m * sp.iter().product::<usize>();
            let idx: Vec<usize> = (0..r.random_range(1..=8))
                .map(|_| r.random_range(0..total))
                .collect();
            Case::all(
                vec![uniform(&[m, c, sp[0], sp[1], sp[2]], -1.0, 1.0, r)],
                Box::new(move |t, v| t.gather_voxels(v[0], &idx).unwrap()),
            )
        }),
        ("cosine_similarity", cosine_case),
        ("bce_loss", bce_case),
    ]
}

/// Finite-difference check of every differentiable op on `instances` random
/// inputs each.
pub fn gradient_suite(instances: usize, seed: u64) -> Vec<Report> {
    let mut r = rng(seed);
    gradient_cases()
        .into_iter()
        .map(|(name, make)| {
            let worst = (0..instances)
                .map(|_| {
                    let case = make(&mut r);
                    gradient_error(
                        &case.inputs,
                        &case.trainable,
                        case.build.as_ref(),
                        case.h,
                        &mut r,
                    )
                })
                .fold(0.0, f64::max);
            Report {
                name,
                instances,
                worst,
            }
        })
        .collect()
}

// ---- brute-force oracles, all in f64 ----

pub fn conv3d_oracle(
    x: &Tensor,
    w: &Tensor,
    b: &Tensor,
    stride: usize,
    padding: usize,
) -> (Vec<usize>, Vec<f64>) {
    let xs = x.shape();
    let ws = w.shape();
    let (bn, cin, d, h, wd) = (xs[0], xs[1], xs[2], xs[3], xs[4]);
    let (cout, k) = (ws[0], ws[2]);
    let out_len = |n: usize| (n + 2 * padding - k) / stride + 1;
    let (od, oh, ow) = (out_len(d), out_len(h), out_len(wd));
    let xv = |n: usize, c: usize, z: isize, y: isize, xx: isize| -> f64 {
        if z < 0 || y < 0 || xx < 0 || z >= d as isize || y >= h as isize || xx >= wd as isize {
            return 0.0;
        }
        x.data()[(((n * cin + c) * d + z as usize) * h + y as usize) * wd + xx as usize] as f64
    };
    let mut out = Vec::new();
    for n in 0..bn {
        for co in 0..cout {
            for z in 0..od {
                for y in 0..oh {
                    for xx in 0..ow {
                        let mut acc = b.data()[co] as f64;
                        for ci in 0..cin {
                            for a in 0..k {
                                for bb in 0..k {
                                    for c in 0..k {
                                        let wv = w.data()
                                            [(((co * cin + ci) * k + a) * k + bb) * k + c]
                                            as f64;
                                        acc += wv
                                            * xv(
                                                n,
                                                ci,
                                                (z * stride + a) as isize - padding as isize,
                                                (y * stride + bb) as isize - padding as isize,
                                                (xx * stride + c) as isize - padding as isize,
                                            );
                                    }
                                }
                            }
                        }
                        out.push(acc);
                    }
                }
            }
        }
    }
    (vec![bn, cout, od, oh, ow], out)
}

pub fn maxpool3d_oracle(x: &Tensor, window: usize) -> Vec<f64> {
    let s = x.shape();
    let (od, oh, ow) = (s[2] / window, s[3] / window, s[4] / window);
    let mut out = Vec::new();
    for n in 0..s[0] {
        for c in 0..s[1] {
            for z in 0..od {
                for y in 0..oh {
                    for xx in 0..ow {
                        let mut best = f64::NEG_INFINITY;
                        for a in 0..window {
                            for b in 0..window {
                                for cc in 0..window {
                                    let i = (((n * s[1] + c) * s[2] + z * window + a) * s[3]
                                        + y * window
                                        + b)
                                        * s[4]
                                        + xx * window
                                        + cc;
                                    best = best.max(x.data()[i] as f64);
                                }
                            }
                        }
                        out.push(best);
                    }
                }
            }
        }
    }
    out
}

fn source_coord(o: usize, input: usize, output: usize) -> (usize, usize, f64) {
    let src = ((o as f64 + 0.5) * input as f64 / output as f64 - 0.5).max(0.0);
    let lo = (src.floor() as usize).min(input - 1);
    let hi = (lo + 1).min(input - 1);
    (lo, hi, src - lo as f64)
}

pub fn upsample_oracle(x: &Tensor, target: [usize; 3]) -> Vec<f64> {
    let s = x.shape();
    let at = |n: usize, c: usize, z: usize, y: usize, xx: usize| {
        x.data()[(((n * s[1] + c) * s[2] + z) * s[3] + y) * s[4] + xx] as f64
    };
    let mut out = Vec::new();
    for n in 0..s[0] {
        for c in 0..s[1] {
            for z in 0..target[0] {
                let (z0, z1, fz) = source_coord(z, s[2], target[0]);
                for y in 0..target[1] {
                    let (y0, y1, fy) = source_coord(y, s[3], target[1]);
                    for xx in 0..target[2] {
                        let (x0, x1, fx) = source_coord(xx, s[4], target[2]);
                        let mut acc = 0.0;
                        for (zi, wz) in [(z0, 1.0 - fz), (z1, fz)] {
                            for (yi, wy) in [(y0, 1.0 - fy), (y1, fy)] {
                                for (xi, wx) in [(x0, 1.0 - fx), (x1, fx)] {
                                    acc += wz * wy * wx * at(n, c, zi, yi, xi);
                                }
                            }
                        }
                        out.push(acc);
                    }
                }
            }
        }
    }
    out
}

pub fn bce_oracle(p: &[f32], y: &[f32]) -> f64 {
    let total: f64 = p
        .iter()
        .zip(y)
        .map(|(&p, &y)| {
            let p = p.clamp(1e-7, 1.0 - 1e-7) as f64;
            -(y as f64 * p.ln() + (1.0 - y as f64) * (1.0 - p).ln())
        })
        .sum();
    total / p.len() as f64
}

/// Scalar Adam with decoupled weight decay, one parameter at a time.
pub fn adam_oracle(theta: &[f32], grads: &[Vec<f32>], lr: f64, wd: f64) -> Vec<f64> {
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8f64);
    theta
        .iter()
        .enumerate()
        .map(|(i, &t0)| {
            let (mut t, mut m, mut v) = (t0 as f64, 0.0, 0.0);
            for (step, g) in grads.iter().enumerate() {
                let g = g[i] as f64;
                m = b1 * m + (1.0 - b1) * g;
                v = b2 * v + (1.0 - b2) * g * g;
                let mh = m / (1.0 - b1.powi(step as i32 + 1));
                let vh = v / (1.0 - b2.powi(step as i32 + 1));
                t = t - lr * mh / (vh.sqrt() + eps) - lr * wd * t;
            }
            t
        })
        .collect()
}

fn max_abs(a: &[f32], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "oracle length mismatch");
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 - y).abs())
        .fold(0.0, f64::max)
}

/// Compare conv3d, maxpool3d, upsample_trilinear, bce_loss and Adam with
/// their oracles on random inputs of extent at most 6.
pub fn oracle_suite(instances: usize, seed: u64) -> Vec<Report> {
    let mut r = rng(seed);
    let mut conv = 0.0f64;
    let mut pool = 0.0f64;
    let mut up = 0.0f64;
    let mut bce = 0.0f64;
    let mut adam = 0.0f64;
    for _ in 0..instances {
        // conv3d
        let k = if r.random_bool(0.7) { 3 } else { 1 };
        let stride = r.random_range(1..=2);
        let padding = if k == 3 { r.random_range(0..=1) } else { 0 };
        let lo = if padding == 0 { k } else { 2 };
        let dims: Vec<usize> = (0..3).map(|_| r.random_range(lo..=6)).collect();
        let (cin, cout) = (r.random_range(1..=3), r.random_range(1..=4));
        let x = uniform(
            &[r.random_range(1..=2), cin, dims[0], dims[1], dims[2]],
            -1.0,
            1.0,
            &mut r,
        );
        let w = uniform(&[cout, cin, k, k, k], -1.0, 1.0, &mut r);
        let b = uniform(&[cout], -1.0, 1.0, &mut r);
        let mut tape = Tape::new();
        let (vx, vw, vb) = (
            tape.constant(x.clone()),
            tape.constant(w.clone()),
            tape.constant(b.clone()),
        );
        let y = tape.conv3d(vx, vw, vb, stride, padding).unwrap();
        let (shape, expect) = conv3d_oracle(&x, &w, &b, stride, padding);
        assert_eq!(tape.shape(y), shape.as_slice());
        conv = conv.max(max_abs(tape.value(y).data(), &expect));

        // maxpool3d
        let pd: Vec<usize> = (0..3).map(|_| 2 * r.random_range(1..=3)).collect();
        let x = uniform(
            &[1, r.random_range(1..=3), pd[0], pd[1], pd[2]],
            -1.0,
            1.0,
            &mut r,
        );
        let vx = tape.constant(x.clone());
        let y = tape.maxpool3d(vx, 2).unwrap();
        pool = pool.max(max_abs(tape.value(y).data(), &maxpool3d_oracle(&x, 2)));

        // upsample
        let sd: Vec<usize> = (0..3).map(|_| r.random_range(1..=3)).collect();
        let target = [0, 1, 2].map(|a| r.random_range(sd[a]..=6));
        let x = uniform(
            &[
                r.random_range(1..=2),
                r.random_range(1..=3),
                sd[0],
                sd[1],
                sd[2],
            ],
            -1.0,
            1.0,
            &mut r,
        );
        let vx = tape.constant(x.clone());
        let y = tape.upsample_trilinear(vx, target).unwrap();
        up = up.max(max_abs(tape.value(y).data(), &upsample_oracle(&x, target)));

        // bce, including probabilities at the clamp
        let n = r.random_range(1..=6);
        let mut p = uniform(&[n], 0.0, 1.0, &mut r);
        if r.random_bool(0.3) {
            p.data_mut()[0] = if r.random_bool(0.5) { 0.0 } else { 1.0 };
        }
        let t = Tensor::from_fn([n], |_| if r.random_bool(0.5) { 1.0 } else { 0.0 });
        let (vp, vt) = (tape.constant(p.clone()), tape.constant(t.clone()));
        let l = tape.bce_loss(vp, vt).unwrap();
        let expect = bce_oracle(p.data(), t.data());
        bce = bce.max((tape.value(l).item() as f64 - expect).abs() / expect.abs().max(1.0));

        // adam, several steps
        let n = r.random_range(1..=6);
        let theta = uniform(&[n], -1.0, 1.0, &mut r);
        let steps: Vec<Vec<f32>> = (0..r.random_range(1..=5))
            .map(|_| (0..n).map(|_| r.random_range(-1.0..1.0f32)).collect())
            .collect();
        let mut opt = Adam::new(1e-3, 1e-4);
        let mut param = theta.clone();
        for g in &steps {
            let gt = Tensor::new([n], g.clone()).unwrap();
            opt.step(&mut [&mut param], &[&gt]).unwrap();
        }
        adam = adam.max(max_abs(
            param.data(),
            &adam_oracle(theta.data(), &steps, 1e-3, 1e-4),
        ));
    }
    vec![
        Report {
            name: "conv3d",
            instances,
            worst: conv,
        },
        Report {
            name: "maxpool3d",
            instances,
            worst: pool,
        },
        Report {
            name: "upsample_trilinear",
            instances,
            worst: up,
        },
        Report {
            name: "bce_loss",
            instances,
            worst: bce,
        },
        Report {
            name: "adam_step",
            instances,
            worst: adam,
        },
    ]
}

// ---- siamese objective, schedule and sampling ----

use vcvrl::vcvrl::{
    momentum_coefficient, sample_anchors, simsiam_pair_loss, total_sim_loss, AnchorStrategy,
    HeadConfig, PairMode, PoolClass, Pools, SiamHead, VcvrlConfig, VoxelPool,
};

pub fn small_head_config() -> HeadConfig {
    HeadConfig {
        projector_hidden: 16,
        projection_dim: 12,
        predictor_hidden: 8,
    }
}

/// Symmetrized pair loss `½ L(a→p) + ½ L(p→a)` for one anchor/pair row.
pub fn pair_loss(tape: &mut Tape, head: &SiamHead, a: Tensor, p: Tensor) -> f32 {
    let bound = head.bind(tape, false);
    let (a, p) = (tape.constant(a), tape.constant(p));
    let f = simsiam_pair_loss(tape, &bound, a, p).unwrap();
    let r = simsiam_pair_loss(tape, &bound, p, a).unwrap();
    0.5 * (tape.value(f).item() + tape.value(r).item())
}

fn random_pool(
    tape: &mut Tape,
    class: PoolClass,
    n: usize,
    d: usize,
    scale: f32,
    r: &mut ChaCha8Rng,
) -> VoxelPool {
    let emb = tape.constant(uniform(&[n, d], -scale, scale, r));
    let wrong = (0..n).map(|_| r.random_bool(0.3)).collect();
    VoxelPool::from_embeddings(class, emb, wrong, tape).unwrap()
}

/// Ranges `(min, max)` of the pair loss and of the two-pool loss over
/// `evaluations` random draws each, with inputs spanning many magnitudes.
pub fn similarity_ranges(evaluations: usize, seed: u64) -> ((f32, f32), (f32, f32)) {
    let mut r = rng(seed);
    let d = 6;
    let heads: Vec<SiamHead> = (0..4)
        .map(|s| SiamHead::new(d, &small_head_config(), seed + s).unwrap())
        .chain([SiamHead::identity()])
        .collect();
    let mut pair = (f32::INFINITY, f32::NEG_INFINITY);
    let mut total = (f32::INFINITY, f32::NEG_INFINITY);
    let config = VcvrlConfig {
        anchors: 4,
        pair_mode: PairMode::PoolSample,
        ..VcvrlConfig::default()
    };
    for i in 0..evaluations {
        let head = &heads[i % heads.len()];
        let scale = 10f32.powi(r.random_range(-3..=3));
        let mut tape = Tape::new();
        let a = uniform(&[d], -scale, scale, &mut r);
        let p = uniform(&[d], -scale, scale, &mut r);
        let l = pair_loss(&mut tape, head, a, p);
        pair = (pair.0.min(l), pair.1.max(l));

        let mut tape = Tape::new();
        let pools = Pools {
            neuron: random_pool(
                &mut tape,
                PoolClass::Neuron,
                r.random_range(1..=6),
                d,
                scale,
                &mut r,
            ),
            background: random_pool(
                &mut tape,
                PoolClass::Background,
                r.random_range(1..=6),
                d,
                scale,
                &mut r,
            ),
        };
        let bound = head.bind(&mut tape, false);
        let sim = total_sim_loss(&mut tape, &pools, &config, &bound, None, &mut r).unwrap();
        let l = tape.value(sim.loss).item();
        total = (total.0.min(l), total.1.max(l));
    }
    (pair, total)
}

/// Largest gradient magnitude reaching the pair input of the loss, and the
/// gradient norm reaching the anchor input.
pub fn stop_gradient_probe(seed: u64) -> (f32, f32) {
    let mut r = rng(seed);
    let head = SiamHead::new(6, &small_head_config(), seed).unwrap();
    let mut tape = Tape::new();
    let bound = head.bind(&mut tape, true);
    let a = tape.param(uniform(&[5, 6], -1.0, 1.0, &mut r));
    let p = tape.param(uniform(&[5, 6], -1.0, 1.0, &mut r));
    let loss = simsiam_pair_loss(&mut tape, &bound, a, p).unwrap();
    let g = tape.backward(loss).unwrap();
    let pair_max = g.wrt(p).data().iter().fold(0.0f32, |m, v| m.max(v.abs()));
    let anchor_norm = g.wrt(a).data().iter().map(|v| v * v).sum::<f32>().sqrt();
    (pair_max, anchor_norm)
}

/// Largest deviation of the schedule from its endpoint and midpoint values,
/// and whether it was non-increasing on a dense grid, over several `K`.
pub fn schedule_check(seed: u64, horizons: usize) -> (f64, bool) {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for i in 0..horizons {
        let k_total: u64 = if i == 0 {
            10
        } else if i == 1 {
            100_000
        } else {
            r.random_range(10..=100_000)
        };
        let alpha = |k| momentum_coefficient(k, k_total, 1.0).unwrap();
        worst = worst.max((alpha(0) - 1.0).abs()).max(alpha(k_total).abs());
        if k_total.is_multiple_of(2) {
            worst = worst.max((alpha(k_total / 2) - 0.5).abs());
        }
        let stride = (k_total / 5000).max(1);
        let mut prev = f64::INFINITY;
        let mut k = 0;
        while k <= k_total {
            let a = alpha(k);
            monotone &= a <= prev;
            prev = a;
            k += stride;
        }
    }
    (worst, monotone)
}

/// Over `trials` hybrid draws of 512 anchors from a 1000-member pool with
/// 300 misclassified members, count the draws whose composition is not
/// 256 + 256 or whose hard half leaves the misclassified subset.
pub fn hybrid_violations(trials: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut flags = vec![false; 1000];
    for i in rand::seq::index::sample(&mut r, 1000, 300) {
        flags[i] = true;
    }
    (0..trials)
        .filter(|_| {
            let d = sample_anchors(&flags, 512, AnchorStrategy::Hybrid, &mut r).unwrap();
            let hard_ok = d.indices[d.from_pool..].iter().all(|&i| flags[i]);
            !(d.from_pool == 256 && d.from_hard == 256 && d.indices.len() == 512 && hard_ok)
        })
        .count()
}

/// Pearson chi-square statistic of random-anchor counts per pool member, with
/// the critical value at significance 0.01.
pub fn random_anchor_chi_square(seed: u64) -> (f64, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let mut r = rng(seed);
    let (len, n, trials) = (64usize, 16usize, 4000usize);
    let flags: Vec<bool> = (0..len).map(|i| i % 3 == 0).collect();
    let mut counts = vec![0u64; len];
    for _ in 0..trials {
        for i in sample_anchors(&flags, n, AnchorStrategy::Random, &mut r)
            .unwrap()
            .indices
        {
            counts[i] += 1;
        }
    }
    let expected = (trials * n) as f64 / len as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((len - 1) as f64).unwrap().inverse_cdf(0.99);
    (stat, critical)
}
