use rand::seq::index;
use rand::Rng;

use super::AnchorStrategy;
use crate::error::{Error, Result};

/// Anchor indices into a pool, with where they came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorDraw {
    /// Indices drawn from the whole pool come first, then those drawn from
    /// the misclassified subset.
    pub indices: Vec<usize>,
    pub from_pool: usize,
    pub from_hard: usize,
    /// The hard subset was empty and uniform sampling was used instead.
    pub fallback: bool,
}

/// `count` draws from `0..len`: without replacement when the source is large
/// enough, with replacement otherwise.
fn draw<R: Rng + ?Sized>(len: usize, count: usize, rng: &mut R) -> Vec<usize> {
    if len >= count {
        index::sample(rng, len, count).into_vec()
    } else {
        (0..count).map(|_| rng.random_range(0..len)).collect()
    }
}

/// Draw `n` anchors for a pool whose members carry the given
/// misclassification flags.
pub fn sample_anchors<R: Rng + ?Sized>(
    misclassified: &[bool],
    n: usize,
    strategy: AnchorStrategy,
    rng: &mut R,
) -> Result<AnchorDraw> {
    if misclassified.is_empty() {
        return Err(Error::DegenerateLabels(
            "cannot sample anchors from an empty pool".into(),
        ));
    }
    let uniform = |rng: &mut R, fallback| AnchorDraw {
        indices: draw(misclassified.len(), n, rng),
        from_pool: n,
        from_hard: 0,
        fallback,
    };
    if strategy == AnchorStrategy::Random {
        return Ok(uniform(rng, false));
    }

    let hard: Vec<usize> = misclassified
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    if hard.is_empty() {
        return Ok(uniform(rng, true));
    }

    let (from_pool, from_hard) = match strategy {
        AnchorStrategy::PurelyHard => (0, n),
        _ => (n.div_ceil(2), n / 2),
    };
    let mut indices = draw(misclassified.len(), from_pool, rng);
    indices.extend(
        draw(hard.len(), from_hard, rng)
            .into_iter()
            .map(|i| hard[i]),
    );
    Ok(AnchorDraw {
        indices,
        from_pool,
        from_hard,
        fallback: false,
    })
}

/// One pair-voxel per anchor, uniform with replacement over the pool
/// (an anchor may be paired with itself).
pub fn sample_pairs<R: Rng + ?Sized>(pool_len: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..pool_len)).collect()
}
