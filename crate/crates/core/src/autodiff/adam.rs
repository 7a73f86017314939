use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Adam with bias correction and decoupled weight decay.
///
/// One step applies, per element,
/// `θ ← θ − lr · m̂ / (√v̂ + ε) − lr · wd · θ`.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f32,
    pub weight_decay: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
    step: u64,
    first_moment: Vec<Vec<f32>>,
    second_moment: Vec<Vec<f32>>,
}

impl Adam {
    pub fn new(learning_rate: f32, weight_decay: f32) -> Self {
        Self {
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[Vec<f32>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f32>] {
        &self.second_moment
    }

    /// Update `params` in place from `grads` (same order, same shapes).
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::shape(format!(
                "adam: {} parameters but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        if self.first_moment.is_empty() {
            self.first_moment = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.second_moment = self.first_moment.clone();
        }
        if self.first_moment.len() != params.len() {
            return Err(Error::shape("adam: parameter list changed between steps"));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || self.first_moment[i].len() != p.len() {
                return Err(Error::shape(format!(
                    "adam: parameter {i} has shape {:?}, gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        let (lr, wd, b1, b2, eps) = (
            self.learning_rate,
            self.weight_decay,
            self.beta1,
            self.beta2,
            self.epsilon,
        );
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            for (((theta, &grad), m), v) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *m = b1 * *m + (1.0 - b1) * grad;
                *v = b2 * *v + (1.0 - b2) * grad * grad;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *theta -= lr * m_hat / (v_hat.sqrt() + eps) + lr * wd * *theta;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_a_no_op() {
        let mut p = Tensor::new([3], vec![0.5, -1.0, 2.0]).unwrap();
        let before = p.clone();
        let g = Tensor::zeros([3]);
        let mut adam = Adam::new(1e-3, 0.0);
        adam.step(&mut [&mut p], &[&g]).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn step_counter_increments_by_one() {
        let mut p = Tensor::zeros([2]);
        let g = Tensor::full([2], 0.1);
        let mut adam = Adam::new(1e-3, 1e-4);
        for expected in 1..=3 {
            adam.step(&mut [&mut p], &[&g]).unwrap();
            assert_eq!(adam.step_count(), expected);
        }
        assert_eq!(adam.first_moment()[0].len(), 2);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Tensor::zeros([2]);
        let g = Tensor::zeros([3]);
        let mut adam = Adam::new(1e-3, 0.0);
        assert!(adam.step(&mut [&mut p], &[&g]).is_err());
    }
}
