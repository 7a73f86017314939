use serde::{Deserialize, Serialize};

use super::pool::{Pools, VoxelPool};
use super::{PoolClass, SamplingEvent};
use crate::autodiff::Tape;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorMode {
    /// Mean over every pool member.
    Relaxed,
    /// Mean over correctly classified members.
    Strict,
}

/// Momentum coefficient `α = α_base · (cos(πk/K) + 1) / 2`.
pub fn momentum_coefficient(k: u64, total: u64, alpha_base: f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::config(
            "momentum schedule needs at least one iteration",
        ));
    }
    if k > total {
        return Err(Error::config(format!(
            "iteration {k} beyond schedule length {total}"
        )));
    }
    let phase = std::f64::consts::PI * k as f64 / total as f64;
    Ok(alpha_base * (phase.cos() + 1.0) / 2.0)
}

/// Mean embedding of a pool, detached from the graph.
///
/// Strict mode averages only correctly classified members and falls back to
/// the relaxed mean (reporting it) when there are none.
pub fn compute_descriptor(
    tape: &Tape,
    pool: &VoxelPool,
    mode: DescriptorMode,
) -> Result<(Vec<f32>, Option<SamplingEvent>)> {
    if pool.is_empty() {
        return Err(Error::DegenerateLabels(format!(
            "cannot summarize the empty {} pool",
            pool.class()
        )));
    }
    let values = tape.value(pool.embeddings());
    let d = values.shape()[1];
    let rows = values.data().chunks_exact(d);
    let select = |strict: bool| -> (Vec<f64>, usize) {
        let mut acc = vec![0.0f64; d];
        let mut count = 0;
        for (row, &wrong) in rows.clone().zip(pool.misclassified()) {
            if strict && wrong {
                continue;
            }
            for (a, &v) in acc.iter_mut().zip(row) {
                *a += v as f64;
            }
            count += 1;
        }
        (acc, count)
    };

    let (mut acc, mut count) = select(mode == DescriptorMode::Strict);
    let mut event = None;
    if count == 0 {
        (acc, count) = select(false);
        event = Some(SamplingEvent::StrictDescriptorFallback(pool.class()));
    }
    Ok((
        acc.into_iter().map(|s| (s / count as f64) as f32).collect(),
        event,
    ))
}

/// Momentum-averaged virtual point summarizing one pool.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolDescriptor {
    class: PoolClass,
    mode: DescriptorMode,
    vector: Option<Vec<f32>>,
    iteration: u64,
}

impl PoolDescriptor {
    pub fn new(class: PoolClass, mode: DescriptorMode) -> Self {
        Self {
            class,
            mode,
            vector: None,
            iteration: 0,
        }
    }

    pub(crate) fn restore(
        class: PoolClass,
        mode: DescriptorMode,
        iteration: u64,
        vector: Option<Vec<f32>>,
    ) -> Self {
        Self {
            class,
            mode,
            vector,
            iteration,
        }
    }

    pub fn class(&self) -> PoolClass {
        self.class
    }

    pub fn mode(&self) -> DescriptorMode {
        self.mode
    }

    pub fn vector(&self) -> Option<&[f32]> {
        self.vector.as_deref()
    }

    /// Iteration of the last update; 0 before the first.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Blend in the descriptor of the current batch at iteration `k` of `total`:
    /// `new = (1 − α) · current + α · previous`.
    ///
    /// The first update adopts `current` as is. With `momentum` off the
    /// descriptor is simply replaced. Returns the coefficient used.
    pub fn update(
        &mut self,
        current: &[f32],
        k: u64,
        total: u64,
        alpha_base: f64,
        momentum: bool,
    ) -> Result<f64> {
        if k <= self.iteration {
            return Err(Error::config(format!(
                "descriptor update at iteration {k} does not follow iteration {}",
                self.iteration
            )));
        }
        if current.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("descriptor update with non-finite values"));
        }
        let alpha = momentum_coefficient(k, total, alpha_base)?;
        let used = match &mut self.vector {
            Some(prev) if momentum => {
                if prev.len() != current.len() {
                    return Err(Error::shape(format!(
                        "descriptor has dimension {}, update has {}",
                        prev.len(),
                        current.len()
                    )));
                }
                let a = alpha as f32;
                for (p, &c) in prev.iter_mut().zip(current) {
                    *p = (1.0 - a) * c + a * *p;
                }
                alpha
            }
            Some(prev) => {
                if prev.len() != current.len() {
                    return Err(Error::shape("descriptor dimension changed"));
                }
                prev.copy_from_slice(current);
                0.0
            }
            slot @ None => {
                *slot = Some(current.to_vec());
                0.0
            }
        };
        self.iteration = k;
        Ok(used)
    }
}

/// One descriptor per pool.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorSet {
    pub neuron: PoolDescriptor,
    pub background: PoolDescriptor,
}

impl DescriptorSet {
    pub fn new(mode: DescriptorMode) -> Self {
        Self {
            neuron: PoolDescriptor::new(PoolClass::Neuron, mode),
            background: PoolDescriptor::new(PoolClass::Background, mode),
        }
    }

    pub fn get(&self, class: PoolClass) -> &PoolDescriptor {
        match class {
            PoolClass::Neuron => &self.neuron,
            PoolClass::Background => &self.background,
        }
    }

    pub fn get_mut(&mut self, class: PoolClass) -> &mut PoolDescriptor {
        match class {
            PoolClass::Neuron => &mut self.neuron,
            PoolClass::Background => &mut self.background,
        }
    }

    /// Summarize both pools of the current batch and fold them in. Empty
    /// pools leave their descriptor untouched.
    pub fn refresh(
        &mut self,
        tape: &Tape,
        pools: &Pools,
        k: u64,
        total: u64,
        alpha_base: f64,
        momentum: bool,
    ) -> Result<Vec<SamplingEvent>> {
        let mut events = Vec::new();
        for pool in [&pools.neuron, &pools.background] {
            if pool.is_empty() {
                continue;
            }
            let desc = self.get_mut(pool.class());
            let (current, event) = compute_descriptor(tape, pool, desc.mode())?;
            events.extend(event);
            desc.update(&current, k, total, alpha_base, momentum)?;
        }
        Ok(events)
    }
}
