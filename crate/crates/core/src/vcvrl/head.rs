use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

thread_local! {
    static INVOCATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Projector/predictor calls made on the current thread so far.
pub fn head_invocations() -> u64 {
    INVOCATIONS.with(Cell::get)
}

fn count_invocation() {
    INVOCATIONS.with(|c| c.set(c.get() + 1));
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeadConfig {
    pub projector_hidden: usize,
    pub projection_dim: usize,
    pub predictor_hidden: usize,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self {
            projector_hidden: 512,
            projection_dim: 512,
            predictor_hidden: 128,
        }
    }
}

impl HeadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.projector_hidden == 0 || self.projection_dim == 0 || self.predictor_hidden == 0 {
            return Err(Error::config("siamese head widths must be positive"));
        }
        Ok(())
    }
}

/// Stack of linear layers with ReLU between consecutive layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<(Tensor, Tensor)>,
}

impl Mlp {
    pub fn new<R: Rng>(widths: &[usize], rng: &mut R) -> Self {
        let layers = widths
            .windows(2)
            .map(|w| {
                let (din, dout) = (w[0], w[1]);
                let bound = (6.0 / din as f32).sqrt();
                (
                    Tensor::uniform([dout, din], -bound, bound, rng),
                    Tensor::zeros([dout]),
                )
            })
            .collect();
        Self { layers }
    }

    pub fn identity() -> Self {
        Self { layers: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.layers.last().map(|(w, _)| w.shape()[0])
    }

    fn parameters(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flat_map(|(w, b)| [w, b])
    }

    fn parameters_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.layers.iter_mut().flat_map(|(w, b)| [w, b])
    }
}

/// Projector `f` (3-layer MLP `d → hidden → hidden → d_p`) and predictor `h`
/// (2-layer MLP `d_p → hidden → d_p`). Training-only.
#[derive(Clone, Debug, PartialEq)]
pub struct SiamHead {
    projector: Mlp,
    predictor: Mlp,
}

impl SiamHead {
    pub fn new(latent_dim: usize, config: &HeadConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if latent_dim == 0 {
            return Err(Error::config("latent dimension must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let projector = Mlp::new(
            &[
                latent_dim,
                config.projector_hidden,
                config.projector_hidden,
                config.projection_dim,
            ],
            &mut rng,
        );
        let predictor = Mlp::new(
            &[
                config.projection_dim,
                config.predictor_hidden,
                config.projection_dim,
            ],
            &mut rng,
        );
        Ok(Self {
            projector,
            predictor,
        })
    }

    /// Both maps replaced by the identity.
    pub fn identity() -> Self {
        Self {
            projector: Mlp::identity(),
            predictor: Mlp::identity(),
        }
    }

    pub fn projector(&self) -> &Mlp {
        &self.projector
    }

    pub fn predictor(&self) -> &Mlp {
        &self.predictor
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        self.projector
            .parameters()
            .chain(self.predictor.parameters())
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.projector
            .parameters_mut()
            .chain(self.predictor.parameters_mut())
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> BoundHead {
        let mut reg = |mlp: &Mlp| -> Vec<(Var, Var)> {
            mlp.layers
                .iter()
                .map(|(w, b)| {
                    (
                        tape.leaf(w.clone(), trainable),
                        tape.leaf(b.clone(), trainable),
                    )
                })
                .collect()
        };
        BoundHead {
            projector: reg(&self.projector),
            predictor: reg(&self.predictor),
        }
    }
}

/// Head parameters registered on a tape.
#[derive(Clone, Debug)]
pub struct BoundHead {
    projector: Vec<(Var, Var)>,
    predictor: Vec<(Var, Var)>,
}

impl BoundHead {
    /// Handles in [`SiamHead::parameters`] order.
    pub fn params(&self) -> Vec<Var> {
        self.projector
            .iter()
            .chain(&self.predictor)
            .flat_map(|&(w, b)| [w, b])
            .collect()
    }

    fn run(tape: &mut Tape, layers: &[(Var, Var)], x: Var) -> Result<Var> {
        let mut h = x;
        for (i, &(w, b)) in layers.iter().enumerate() {
            h = tape.linear(h, w, b)?;
            if i + 1 < layers.len() {
                h = tape.relu(h);
            }
        }
        Ok(h)
    }

    /// `f(x)` for `[n, d]` rows.
    pub fn project(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        count_invocation();
        Self::run(tape, &self.projector, x)
    }

    /// `h(z)` for `[n, d_p]` rows.
    pub fn predict(&self, tape: &mut Tape, z: Var) -> Result<Var> {
        count_invocation();
        Self::run(tape, &self.predictor, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_follow_config() {
        let head = SiamHead::new(16, &HeadConfig::default(), 0).unwrap();
        assert_eq!(head.projector().depth(), 3);
        assert_eq!(head.predictor().depth(), 2);
        assert_eq!(head.projector().output_dim(), Some(512));
        assert_eq!(head.predictor().output_dim(), Some(512));
        let expected = (16 * 512 + 512)
            + (512 * 512 + 512)
            + (512 * 512 + 512)
            + (512 * 128 + 128)
            + (128 * 512 + 512);
        assert_eq!(head.parameter_count(), expected);
    }

    #[test]
    fn invocation_counter_tracks_calls() {
        let head = SiamHead::new(
            4,
            &HeadConfig {
                projector_hidden: 8,
                projection_dim: 6,
                predictor_hidden: 3,
            },
            1,
        )
        .unwrap();
        let mut tape = Tape::new();
        let bound = head.bind(&mut tape, true);
        let x = tape.constant(Tensor::full([2, 4], 0.5));
        let before = head_invocations();
        let z = bound.project(&mut tape, x).unwrap();
        let p = bound.predict(&mut tape, z).unwrap();
        assert_eq!(tape.shape(p), &[2, 6]);
        assert_eq!(head_invocations() - before, 2);
    }
}
