//! Wengert-list reverse-mode differentiation.
//!
//! Every operation appends a node holding its forward value and enough
//! context to run its vector-Jacobian product. [`Tape::backward`] walks the
//! list once in reverse. Nodes that do not depend on any trainable leaf are
//! skipped, and [`Tape::detach`] cuts the dependency explicitly.

use super::ops::{conv, linear, loss, pool, upsample};
use super::tensor::{dims5, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    /// Stop-gradient. The source is kept for inspection only; backward never
    /// follows it.
    Detach {
        #[allow(dead_code)]
        source: Var,
    },
    Conv3d {
        input: Var,
        kernel: Var,
        bias: Var,
        geometry: conv::ConvGeometry,
    },
    MaxPool3d {
        input: Var,
        argmax: Vec<usize>,
    },
    Upsample {
        input: Var,
        target: [usize; 3],
    },
    Linear {
        input: Var,
        weight: Var,
        bias: Var,
    },
    Relu(Var),
    Sigmoid(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f32),
    AddScalar(Var),
    Sum(Var),
    Mean(Var),
    ConcatChannels(Vec<Var>),
    GatherRows {
        input: Var,
        rows: Vec<usize>,
    },
    GatherVoxels {
        input: Var,
        voxels: Vec<usize>,
    },
    CosineRows {
        a: Var,
        b: Var,
    },
    Bce {
        probs: Var,
        target: Var,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by one backward pass, indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss w.r.t. `var`, or `None` when no gradient reached it.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    /// Gradient w.r.t. `var`, materializing zeros when none reached it.
    pub fn wrt(&self, var: Var) -> Tensor {
        self.get(var)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(self.shapes[var.0].clone()))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> &[usize] {
        self.nodes[var.0].value.shape()
    }

    pub fn requires_grad(&self, var: Var) -> bool {
        self.nodes[var.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    /// Value-identical copy through which no gradient flows.
    pub fn detach(&mut self, x: Var) -> Var {
        let value = self.value(x).clone();
        self.push(value, Op::Detach { source: x }, false)
    }

    pub fn conv3d(
        &mut self,
        input: Var,
        kernel: Var,
        bias: Var,
        stride: usize,
        padding: usize,
    ) -> Result<Var> {
        let geometry = conv::ConvGeometry::new(
            self.shape(input),
            self.shape(kernel),
            self.shape(bias),
            stride,
            padding,
        )?;
        let data = conv::conv3d_forward(
            &geometry,
            self.value(input).data(),
            self.value(kernel).data(),
            self.value(bias).data(),
        );
        let value = Tensor::new(geometry.output_shape(), data)?;
        let rg = self.any_grad(&[input, kernel, bias]);
        Ok(self.push(
            value,
            Op::Conv3d {
                input,
                kernel,
                bias,
                geometry,
            },
            rg,
        ))
    }

    pub fn maxpool3d(&mut self, input: Var, window: usize) -> Result<Var> {
        let out_shape = pool::maxpool3d_shape(self.shape(input), window)?;
        let shape = dims5(self.shape(input))?;
        let (data, argmax) = pool::maxpool3d_forward(shape, window, self.value(input).data());
        let value = Tensor::new(out_shape, data)?;
        let rg = self.any_grad(&[input]);
        Ok(self.push(value, Op::MaxPool3d { input, argmax }, rg))
    }

    pub fn upsample_trilinear(&mut self, input: Var, target: [usize; 3]) -> Result<Var> {
        let out_shape = upsample::upsample_shape(self.shape(input), target)?;
        let shape = dims5(self.shape(input))?;
        let data = upsample::upsample_forward(shape, target, self.value(input).data());
        let value = Tensor::new(out_shape, data)?;
        let rg = self.any_grad(&[input]);
        Ok(self.push(value, Op::Upsample { input, target }, rg))
    }

    /// Affine map over the trailing axis: `[*, din] -> [*, dout]`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (din, dout) = match self.shape(weight) {
            &[dout, din] => (din, dout),
            other => {
                return Err(Error::shape(format!(
                    "linear weight must be 2-D, got {other:?}"
                )))
            }
        };
        if self.shape(bias) != [dout] {
            return Err(Error::shape(format!(
                "linear bias must be [{dout}], got {:?}",
                self.shape(bias)
            )));
        }
        let in_shape = self.shape(input).to_vec();
        if in_shape.last() != Some(&din) {
            return Err(Error::shape(format!(
                "linear expects trailing extent {din}, input has shape {in_shape:?}"
            )));
        }
        let data = linear::linear_forward(
            self.value(input).data(),
            self.value(weight).data(),
            self.value(bias).data(),
            din,
            dout,
        );
        let mut out_shape = in_shape;
        *out_shape.last_mut().unwrap() = dout;
        let value = Tensor::new(out_shape, data)?;
        let rg = self.any_grad(&[input, weight, bias]);
        Ok(self.push(
            value,
            Op::Linear {
                input,
                weight,
                bias,
            },
            rg,
        ))
    }

    fn map(&mut self, x: Var, op: Op, f: impl Fn(f32) -> f32) -> Var {
        let src = self.value(x);
        let value = Tensor::new(
            src.shape().to_vec(),
            src.data().iter().map(|&v| f(v)).collect(),
        )
        .expect("elementwise map preserves shape");
        let rg = self.any_grad(&[x]);
        self.push(value, op, rg)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.map(x, Op::Relu(x), |v| v.max(0.0))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.map(x, Op::Sigmoid(x), sigmoid)
    }

    pub fn scale(&mut self, x: Var, factor: f32) -> Var {
        self.map(x, Op::Scale(x, factor), |v| v * factor)
    }

    pub fn add_scalar(&mut self, x: Var, offset: f32) -> Var {
        self.map(x, Op::AddScalar(x), |v| v + offset)
    }

    fn zip(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f32, f32) -> f32) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(format!(
                "elementwise operands differ in shape: {:?} vs {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        let va = self.value(a);
        let vb = self.value(b);
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::new(va.shape().to_vec(), data)?;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let total: f64 = self.value(x).data().iter().map(|&v| v as f64).sum();
        let rg = self.any_grad(&[x]);
        self.push(Tensor::scalar(total as f32), Op::Sum(x), rg)
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let total: f64 = v.data().iter().map(|&v| v as f64).sum();
        let n = v.len().max(1) as f64;
        let rg = self.any_grad(&[x]);
        self.push(Tensor::scalar((total / n) as f32), Op::Mean(x), rg)
    }

    /// Concatenate `[B, Ci, D, H, W]` tensors along the channel axis.
    pub fn concat_channels(&mut self, inputs: &[Var]) -> Result<Var> {
        let first = inputs
            .first()
            .ok_or_else(|| Error::shape("concat_channels needs at least one input"))?;
        let [b, _, d, h, w] = dims5(self.shape(*first))?;
        let mut channels = 0;
        for &v in inputs {
            let [vb, vc, vd, vh, vw] = dims5(self.shape(v))?;
            if [vb, vd, vh, vw] != [b, d, h, w] {
                return Err(Error::shape(format!(
                    "concat_channels: shape {:?} does not match batch/spatial extents of {:?}",
                    self.shape(v),
                    self.shape(*first)
                )));
            }
            channels += vc;
        }
        let spatial = d * h * w;
        let mut data = Vec::with_capacity(b * channels * spatial);
        for bi in 0..b {
            for &v in inputs {
                let c = self.shape(v)[1];
                data.extend_from_slice(
                    &self.value(v).data()[bi * c * spatial..(bi + 1) * c * spatial],
                );
            }
        }
        let value = Tensor::new(vec![b, channels, d, h, w], data)?;
        let rg = self.any_grad(inputs);
        Ok(self.push(value, Op::ConcatChannels(inputs.to_vec()), rg))
    }

    /// Select rows of a `[n, d]` tensor; indices may repeat.
    pub fn gather_rows(&mut self, input: Var, rows: &[usize]) -> Result<Var> {
        let (n, d) = match self.shape(input) {
            &[n, d] => (n, d),
            other => {
                return Err(Error::shape(format!(
                    "gather_rows expects [n, d], got {other:?}"
                )))
            }
        };
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::shape(format!(
                "gather_rows index {bad} out of range for {n} rows"
            )));
        }
        let src = self.value(input).data();
        let mut data = Vec::with_capacity(rows.len() * d);
        for &r in rows {
            data.extend_from_slice(&src[r * d..(r + 1) * d]);
        }
        let value = Tensor::new(vec![rows.len(), d], data)?;
        let rg = self.any_grad(&[input]);
        Ok(self.push(
            value,
            Op::GatherRows {
                input,
                rows: rows.to_vec(),
            },
            rg,
        ))
    }

    /// Per-voxel feature vectors of a `[M, C, D, H, W]` tensor as `[n, C]`.
    /// A voxel index is `m * D*H*W + (z*H + y)*W + x`.
    pub fn gather_voxels(&mut self, input: Var, voxels: &[usize]) -> Result<Var> {
        let [m, c, d, h, w] = dims5(self.shape(input))?;
        let spatial = d * h * w;
        if let Some(&bad) = voxels.iter().find(|&&v| v >= m * spatial) {
            return Err(Error::shape(format!(
                "gather_voxels index {bad} out of range for {} voxels",
                m * spatial
            )));
        }
        let src = self.value(input).data();
        let mut data = Vec::with_capacity(voxels.len() * c);
        for &v in voxels {
            let (vol, s) = (v / spatial, v % spatial);
            let base = vol * c * spatial + s;
            data.extend((0..c).map(|ch| src[base + ch * spatial]));
        }
        let value = Tensor::new(vec![voxels.len(), c], data)?;
        let rg = self.any_grad(&[input]);
        Ok(self.push(
            value,
            Op::GatherVoxels {
                input,
                voxels: voxels.to_vec(),
            },
            rg,
        ))
    }

    /// Row-wise cosine similarity `u·v / (max(|u|, ε) max(|v|, ε))`.
    ///
    /// `a` is `[n, d]` (or a single `[d]` vector); `b` has the same shape or
    /// is a single row broadcast against every row of `a`. Output is `[n]`.
    pub fn cosine_similarity(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, d) = match self.shape(a) {
            &[d] => (1, d),
            &[n, d] => (n, d),
            other => {
                return Err(Error::shape(format!(
                    "cosine_similarity expects rows, got {other:?}"
                )))
            }
        };
        let bn = match self.shape(b) {
            &[bd] if bd == d => 1,
            &[bn, bd] if bd == d => bn,
            other => {
                return Err(Error::shape(format!(
                    "cosine_similarity operand {other:?} incompatible with {:?}",
                    self.shape(a)
                )))
            }
        };
        if bn != n && bn != 1 {
            return Err(Error::shape(format!(
                "cosine_similarity row counts {n} vs {bn}"
            )));
        }
        let data = loss::cosine_rows_forward(self.value(a).data(), self.value(b).data(), d);
        let value = Tensor::new(vec![n], data)?;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, Op::CosineRows { a, b }, rg))
    }

    /// Mean binary cross-entropy of probabilities against binary targets.
    pub fn bce_loss(&mut self, probs: Var, target: Var) -> Result<Var> {
        if self.shape(probs) != self.shape(target) {
            return Err(Error::shape(format!(
                "bce_loss shape mismatch: {:?} vs {:?}",
                self.shape(probs),
                self.shape(target)
            )));
        }
        let l = loss::bce_forward(self.value(probs).data(), self.value(target).data());
        let rg = self.any_grad(&[probs, target]);
        Ok(self.push(Tensor::scalar(l), Op::Bce { probs, target }, rg))
    }

    /// Reverse pass from a scalar `loss`, seeding its gradient with one.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(Error::shape(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f32>>> = vec![None; loss.0 + 1];
        if self.nodes[loss.0].requires_grad {
            grads[loss.0] = Some(vec![1.0]);
        }

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }

        let shapes = self
            .nodes
            .iter()
            .map(|n| n.value.shape().to_vec())
            .collect();
        let grads = grads
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                g.map(|g| {
                    Tensor::new(self.nodes[i].value.shape().to_vec(), g).expect("gradient shape")
                })
            })
            .collect();
        Ok(Gradients { grads, shapes })
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f32>>], var: Var, contribution: Vec<f32>) {
        if !self.nodes[var.0].requires_grad {
            return;
        }
        match &mut grads[var.0] {
            Some(existing) => {
                for (e, c) in existing.iter_mut().zip(contribution) {
                    *e += c;
                }
            }
            slot @ None => *slot = Some(contribution),
        }
    }

    fn propagate(&self, node: &Node, g: &[f32], grads: &mut [Option<Vec<f32>>]) {
        let val = |v: Var| self.nodes[v.0].value.data();
        match &node.op {
            Op::Leaf | Op::Detach { .. } => {}
            Op::Conv3d {
                input,
                kernel,
                bias,
                geometry,
            } => {
                let cg = conv::conv3d_backward(geometry, val(*input), val(*kernel), g);
                self.accumulate(grads, *input, cg.input);
                self.accumulate(grads, *kernel, cg.kernel);
                self.accumulate(grads, *bias, cg.bias);
            }
            Op::MaxPool3d { input, argmax } => {
                let gi = pool::maxpool3d_backward(val(*input).len(), argmax, g);
                self.accumulate(grads, *input, gi);
            }
            Op::Upsample { input, target } => {
                let shape = dims5(self.shape(*input)).expect("validated at record time");
                let gi = upsample::upsample_backward(shape, *target, g);
                self.accumulate(grads, *input, gi);
            }
            Op::Linear {
                input,
                weight,
                bias,
            } => {
                let [dout, din] = [self.shape(*weight)[0], self.shape(*weight)[1]];
                let lg = linear::linear_backward(val(*input), val(*weight), g, din, dout);
                self.accumulate(grads, *input, lg.input);
                self.accumulate(grads, *weight, lg.weight);
                self.accumulate(grads, *bias, lg.bias);
            }
            Op::Relu(x) => {
                let gi = val(*x)
                    .iter()
                    .zip(g)
                    .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
                    .collect();
                self.accumulate(grads, *x, gi);
            }
            Op::Sigmoid(x) => {
                let gi = node
                    .value
                    .data()
                    .iter()
                    .zip(g)
                    .map(|(&s, &g)| g * s * (1.0 - s))
                    .collect();
                self.accumulate(grads, *x, gi);
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.to_vec());
                self.accumulate(grads, *b, g.to_vec());
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, g.to_vec());
                self.accumulate(grads, *b, g.iter().map(|v| -v).collect());
            }
            Op::Mul(a, b) => {
                let ga = g.iter().zip(val(*b)).map(|(g, y)| g * y).collect();
                let gb = g.iter().zip(val(*a)).map(|(g, x)| g * x).collect();
                self.accumulate(grads, *a, ga);
                self.accumulate(grads, *b, gb);
            }
            Op::Scale(x, factor) => {
                self.accumulate(grads, *x, g.iter().map(|v| v * factor).collect());
            }
            Op::AddScalar(x) => self.accumulate(grads, *x, g.to_vec()),
            Op::Sum(x) => {
                self.accumulate(grads, *x, vec![g[0]; val(*x).len()]);
            }
            Op::Mean(x) => {
                let n = val(*x).len().max(1);
                self.accumulate(grads, *x, vec![g[0] / n as f32; n]);
            }
            Op::ConcatChannels(inputs) => {
                let [b, _, d, h, w] = dims5(node.value.shape()).expect("5-D concat");
                let spatial = d * h * w;
                let total_c = node.value.shape()[1];
                let mut offset = 0;
                for &v in inputs {
                    let c = self.shape(v)[1];
                    let mut gi = Vec::with_capacity(b * c * spatial);
                    for bi in 0..b {
                        let start = (bi * total_c + offset) * spatial;
                        gi.extend_from_slice(&g[start..start + c * spatial]);
                    }
                    offset += c;
                    self.accumulate(grads, v, gi);
                }
            }
            Op::GatherRows { input, rows } => {
                let d = self.shape(*input)[1];
                let mut gi = vec![0.0; val(*input).len()];
                for (k, &r) in rows.iter().enumerate() {
                    for j in 0..d {
                        gi[r * d + j] += g[k * d + j];
                    }
                }
                self.accumulate(grads, *input, gi);
            }
            Op::GatherVoxels { input, voxels } => {
                let [_, c, d, h, w] = dims5(self.shape(*input)).expect("5-D gather");
                let spatial = d * h * w;
                let mut gi = vec![0.0; val(*input).len()];
                for (k, &v) in voxels.iter().enumerate() {
                    let base = (v / spatial) * c * spatial + v % spatial;
                    for ch in 0..c {
                        gi[base + ch * spatial] += g[k * c + ch];
                    }
                }
                self.accumulate(grads, *input, gi);
            }
            Op::CosineRows { a, b } => {
                let d = *self.shape(*a).last().expect("non-scalar");
                let (ga, gb) = loss::cosine_rows_backward(val(*a), val(*b), d, g);
                self.accumulate(grads, *a, ga);
                self.accumulate(grads, *b, gb);
            }
            Op::Bce { probs, target } => {
                let gp = loss::bce_backward(val(*probs), val(*target), g[0]);
                self.accumulate(grads, *probs, gp);
                // targets are labels; no gradient is defined for them
            }
        }
    }
}

pub fn sigmoid(v: f32) -> f32 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}
