use rand::Rng;

use super::descriptor::DescriptorSet;
use super::head::BoundHead;
use super::pool::{Pools, VoxelPool};
use super::sampling::{sample_anchors, sample_pairs, AnchorDraw};
use super::{PoolClass, SamplingEvent, VcvrlConfig};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// `½ (1 − cos(h(z_anchor), sg(z_pair)))` per row, from projected inputs.
fn directional(
    tape: &mut Tape,
    head: &BoundHead,
    projected_anchor: Var,
    projected_pair: Var,
) -> Result<Var> {
    let predicted = head.predict(tape, projected_anchor)?;
    let target = tape.detach(projected_pair);
    let cos = tape.cosine_similarity(predicted, target)?;
    let neg = tape.scale(cos, -0.5);
    Ok(tape.add_scalar(neg, 0.5))
}

/// Mean over rows of `½ (1 − cos(h(f(anchor)), sg(f(pair))))`.
///
/// `anchor` is `[n, d]` or `[d]`; `pair` matches it or is a single row.
/// Only the anchor branch receives gradient.
pub fn simsiam_pair_loss(tape: &mut Tape, head: &BoundHead, anchor: Var, pair: Var) -> Result<Var> {
    let za = head.project(tape, anchor)?;
    let zp = head.project(tape, pair)?;
    let per_row = directional(tape, head, za, zp)?;
    Ok(tape.mean(per_row))
}

/// Anchors and pairs used for one pool in one evaluation of the loss.
#[derive(Clone, Debug)]
pub struct PoolPairs {
    pub class: PoolClass,
    pub anchors: AnchorDraw,
    /// Pool indices of the pair-voxels; `None` when pairs were the descriptor.
    pub pairs: Option<Vec<usize>>,
    pub loss: f32,
}

#[derive(Clone, Debug)]
pub struct SimLoss {
    pub loss: Var,
    pub per_pool: Vec<PoolPairs>,
    pub events: Vec<SamplingEvent>,
}

fn symmetric_mean(tape: &mut Tape, forward: Var, reverse: Var) -> Result<Var> {
    let f = tape.mean(forward);
    let r = tape.mean(reverse);
    let s = tape.add(f, r)?;
    Ok(tape.scale(s, 0.5))
}

fn pool_term<R: Rng + ?Sized>(
    tape: &mut Tape,
    pool: &VoxelPool,
    config: &VcvrlConfig,
    head: &BoundHead,
    descriptors: Option<&DescriptorSet>,
    rng: &mut R,
    events: &mut Vec<SamplingEvent>,
) -> Result<(Var, PoolPairs)> {
    let draw = sample_anchors(pool.misclassified(), config.anchors, config.strategy, rng)?;
    if draw.fallback {
        events.push(SamplingEvent::HardSubsetEmpty(pool.class()));
    }
    let anchors = tape.gather_rows(pool.embeddings(), &draw.indices)?;
    let za = head.project(tape, anchors)?;

    let (term, pairs) = match config.pair_mode.descriptor_mode() {
        None => {
            let pairs = sample_pairs(pool.len(), config.anchors, rng);
            let partners = tape.gather_rows(pool.embeddings(), &pairs)?;
            let zp = head.project(tape, partners)?;
            let forward = directional(tape, head, za, zp)?;
            let reverse = directional(tape, head, zp, za)?;
            (symmetric_mean(tape, forward, reverse)?, Some(pairs))
        }
        Some(_) => {
            let vector = descriptors
                .and_then(|set| set.get(pool.class()).vector())
                .ok_or_else(|| {
                    Error::config(format!(
                        "descriptor pairing requested but the {} descriptor is unset",
                        pool.class()
                    ))
                })?;
            let d = vector.len();
            let desc = tape.constant(Tensor::new([1, d], vector.to_vec())?);
            let zd = head.project(tape, desc)?;
            let forward = directional(tape, head, za, zd)?;
            let term = if config.symmetric_descriptor {
                let predicted = head.predict(tape, zd)?;
                let predicted = tape.gather_rows(predicted, &vec![0; draw.indices.len()])?;
                let target = tape.detach(za);
                let cos = tape.cosine_similarity(predicted, target)?;
                let neg = tape.scale(cos, -0.5);
                let reverse = tape.add_scalar(neg, 0.5);
                symmetric_mean(tape, forward, reverse)?
            } else {
                tape.mean(forward)
            };
            (term, None)
        }
    };
    let loss = tape.value(term).item();
    Ok((
        term,
        PoolPairs {
            class: pool.class(),
            anchors: draw,
            pairs,
            loss,
        },
    ))
}

/// Similarity loss summed over the neuron and background pools, each term
/// being the mean over `N` anchors of `½ L(j,k) + ½ L(k,j)`.
///
/// An empty pool contributes zero and is reported; two empty pools are an
/// error. Descriptor pairing needs `descriptors` already refreshed for the
/// current batch.
pub fn total_sim_loss<R: Rng + ?Sized>(
    tape: &mut Tape,
    pools: &Pools,
    config: &VcvrlConfig,
    head: &BoundHead,
    descriptors: Option<&DescriptorSet>,
    rng: &mut R,
) -> Result<SimLoss> {
    if pools.neuron.is_empty() && pools.background.is_empty() {
        return Err(Error::DegenerateLabels("both voxel pools are empty".into()));
    }
    let mut events = Vec::new();
    let mut per_pool = Vec::new();
    let mut total: Option<Var> = None;
    for pool in [&pools.neuron, &pools.background] {
        if pool.is_empty() {
            events.push(SamplingEvent::EmptyPool(pool.class()));
            continue;
        }
        let (term, pairs) = pool_term(tape, pool, config, head, descriptors, rng, &mut events)?;
        per_pool.push(pairs);
        total = Some(match total {
            Some(acc) => tape.add(acc, term)?,
            None => term,
        });
    }
    Ok(SimLoss {
        loss: total.expect("at least one pool is non-empty"),
        per_pool,
        events,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SegLoss {
    pub total: Var,
    pub cross_entropy: Var,
}

/// `L_seg = L_CE + L_SIM` with unit weights; without a similarity term it is
/// the cross-entropy alone.
pub fn seg_loss(tape: &mut Tape, probs: Var, labels: Var, sim: Option<Var>) -> Result<SegLoss> {
    let ce = tape.bce_loss(probs, labels)?;
    let total = match sim {
        Some(s) => tape.add(ce, s)?,
        None => ce,
    };
    Ok(SegLoss {
        total,
        cross_entropy: ce,
    })
}
