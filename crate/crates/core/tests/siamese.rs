mod common;

use rand::Rng;
use vcvrl::autodiff::{Tape, Tensor};
use vcvrl::vcvrl::{
    build_pools, compute_descriptor, interpolate_latent, sample_anchors, seg_loss, total_sim_loss,
    AnchorStrategy, DescriptorMode, DescriptorSet, PairMode, PoolClass, PoolDescriptor, Pools,
    SamplingEvent, SiamHead, VcvrlConfig, VoxelPool,
};

fn pool(tape: &mut Tape, class: PoolClass, rows: &[Vec<f32>], wrong: &[bool]) -> VoxelPool {
    let d = rows[0].len();
    let emb = tape.constant(Tensor::new([rows.len(), d], rows.concat()).unwrap());
    VoxelPool::from_embeddings(class, emb, wrong.to_vec(), tape).unwrap()
}

fn cos(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn total_loss_matches_hand_sum_over_sampled_pairs() {
    let neuron = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
    let background = vec![vec![0.0, 2.0], vec![-1.0, 0.5]];
    let config = VcvrlConfig {
        anchors: 4,
        strategy: AnchorStrategy::Random,
        pair_mode: PairMode::PoolSample,
        ..VcvrlConfig::default()
    };
    let mut tape = Tape::new();
    let pools = Pools {
        neuron: pool(&mut tape, PoolClass::Neuron, &neuron, &[false, true]),
        background: pool(
            &mut tape,
            PoolClass::Background,
            &background,
            &[false, false],
        ),
    };
    let head = SiamHead::identity().bind(&mut tape, false);
    let sim = total_sim_loss(&mut tape, &pools, &config, &head, None, &mut common::rng(9)).unwrap();

    let mut expect = 0.0;
    for (pp, rows) in sim.per_pool.iter().zip([&neuron, &background]) {
        let pairs = pp.pairs.as_ref().unwrap();
        let mut term = 0.0;
        for (&j, &k) in pp.anchors.indices.iter().zip(pairs) {
            let forward = 0.5 * (1.0 - cos(&rows[j], &rows[k]));
            let reverse = 0.5 * (1.0 - cos(&rows[k], &rows[j]));
            term += 0.5 * forward + 0.5 * reverse;
        }
        expect += term / pairs.len() as f64;
    }
    // with two-element pools some anchors must pair with the other member
    assert!(expect > 0.0);
    assert!((tape.value(sim.loss).item() as f64 - expect).abs() < 1e-6);
}

#[test]
fn descriptor_pairing_hand_case() {
    // strict descriptor of {[2,0] correct, [0,2] wrong} is [2,0]
    let rows = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
    let mut tape = Tape::new();
    let pools = Pools {
        neuron: pool(&mut tape, PoolClass::Neuron, &rows, &[false, true]),
        background: pool(&mut tape, PoolClass::Background, &rows, &[false, true]),
    };
    let mut set = DescriptorSet::new(DescriptorMode::Strict);
    set.refresh(&tape, &pools, 1, 10, 1.0, true).unwrap();
    assert_eq!(set.neuron.vector().unwrap(), &[2.0, 0.0]);
    let config = VcvrlConfig {
        anchors: 2,
        strategy: AnchorStrategy::PurelyHard,
        pair_mode: PairMode::DescriptorStrict,
        ..VcvrlConfig::default()
    };
    let head = SiamHead::identity().bind(&mut tape, false);
    let sim = total_sim_loss(
        &mut tape,
        &pools,
        &config,
        &head,
        Some(&set),
        &mut common::rng(1),
    )
    .unwrap();
    // every anchor is the hard member [0,2], orthogonal to the descriptor:
    // each pool contributes ½·½ + ½·½
    assert!((tape.value(sim.loss).item() - 1.0).abs() < 1e-6);
}

#[test]
fn identical_embeddings_give_zero_loss() {
    let rows = vec![vec![0.3, -1.0, 2.0]; 5];
    for mode in [
        PairMode::PoolSample,
        PairMode::DescriptorRelaxed,
        PairMode::DescriptorStrict,
    ] {
        let mut tape = Tape::new();
        let pools = Pools {
            neuron: pool(
                &mut tape,
                PoolClass::Neuron,
                &rows,
                &[false, true, false, false, true],
            ),
            background: pool(&mut tape, PoolClass::Background, &rows, &[false; 5]),
        };
        let mut set = DescriptorSet::new(mode.descriptor_mode().unwrap_or(DescriptorMode::Relaxed));
        set.refresh(&tape, &pools, 1, 4, 1.0, true).unwrap();
        let config = VcvrlConfig {
            anchors: 8,
            pair_mode: mode,
            ..VcvrlConfig::default()
        };
        let head = SiamHead::identity().bind(&mut tape, false);
        let sim = total_sim_loss(
            &mut tape,
            &pools,
            &config,
            &head,
            Some(&set),
            &mut common::rng(2),
        )
        .unwrap();
        assert!(tape.value(sim.loss).item().abs() < 1e-6, "{mode:?}");

        let probs = tape.constant(Tensor::new([4], vec![1.0, 0.0, 1.0, 0.0]).unwrap());
        let labels = tape.constant(Tensor::new([4], vec![1.0, 0.0, 1.0, 0.0]).unwrap());
        let seg = seg_loss(&mut tape, probs, labels, Some(sim.loss)).unwrap();
        assert!(tape.value(seg.total).item() <= 1e-6);
    }
}

#[test]
fn singleton_pools_self_pair() {
    let mut tape = Tape::new();
    let pools = Pools {
        neuron: pool(&mut tape, PoolClass::Neuron, &[vec![1.0, 0.0]], &[false]),
        background: pool(&mut tape, PoolClass::Background, &[vec![0.0, 1.0]], &[true]),
    };
    let config = VcvrlConfig {
        anchors: 6,
        pair_mode: PairMode::PoolSample,
        ..VcvrlConfig::default()
    };
    let head = SiamHead::identity().bind(&mut tape, false);
    let sim = total_sim_loss(&mut tape, &pools, &config, &head, None, &mut common::rng(0)).unwrap();
    assert_eq!(tape.value(sim.loss).item(), 0.0);
}

#[test]
fn stop_gradient_on_pair_branch() {
    let (pair, anchor) = common::stop_gradient_probe(4);
    assert_eq!(pair, 0.0);
    assert!(anchor > 0.0);
}

#[test]
fn random_anchors_uniform_over_small_pool() {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let flags = [false, true, false, false];
    let mut r = common::rng(17);
    let mut counts = [0u64; 4];
    for _ in 0..1250 {
        for i in sample_anchors(&flags, 8, AnchorStrategy::Random, &mut r)
            .unwrap()
            .indices
        {
            counts[i] += 1;
        }
    }
    assert_eq!(counts.iter().sum::<u64>(), 10_000);
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - 2500.0).powi(2) / 2500.0)
        .sum();
    let critical = ChiSquared::new(3.0).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "chi-square {stat} >= {critical}");

    let (stat, critical) = common::random_anchor_chi_square(23);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn hard_strategy_without_hard_members_matches_random() {
    let flags = vec![false; 40];
    let hard = sample_anchors(&flags, 16, AnchorStrategy::PurelyHard, &mut common::rng(3)).unwrap();
    let random = sample_anchors(&flags, 16, AnchorStrategy::Random, &mut common::rng(3)).unwrap();
    assert!(hard.fallback);
    assert_eq!(hard.indices, random.indices);
}

#[test]
fn hybrid_composition_over_many_trials() {
    assert_eq!(common::hybrid_violations(1000, 5), 0);
}

#[test]
fn descriptor_matches_brute_force_mean() {
    let mut r = common::rng(8);
    for _ in 0..50 {
        let (n, d) = (r.random_range(1..30), r.random_range(1..9));
        let rows: Vec<Vec<f32>> = (0..n)
            .map(|_| (0..d).map(|_| r.random_range(-3.0..3.0)).collect())
            .collect();
        let wrong: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        let mut tape = Tape::new();
        let p = pool(&mut tape, PoolClass::Background, &rows, &wrong);
        for mode in [DescriptorMode::Relaxed, DescriptorMode::Strict] {
            let keep: Vec<&Vec<f32>> = rows
                .iter()
                .zip(&wrong)
                .filter(|(_, &w)| mode == DescriptorMode::Relaxed || !w)
                .map(|(row, _)| row)
                .collect();
            let keep = if keep.is_empty() {
                rows.iter().collect()
            } else {
                keep
            };
            let (got, event) = compute_descriptor(&tape, &p, mode).unwrap();
            let fell_back = mode == DescriptorMode::Strict && wrong.iter().all(|&w| w);
            assert_eq!(event.is_some(), fell_back);
            for (c, &g) in got.iter().enumerate() {
                let mean = keep.iter().map(|row| row[c] as f64).sum::<f64>() / keep.len() as f64;
                assert!((g as f64 - mean).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn descriptor_examples() {
    let mut tape = Tape::new();
    let p = pool(
        &mut tape,
        PoolClass::Neuron,
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[false, false],
    );
    for mode in [DescriptorMode::Relaxed, DescriptorMode::Strict] {
        assert_eq!(
            compute_descriptor(&tape, &p, mode).unwrap().0,
            vec![0.5, 0.5]
        );
    }
    let p = pool(
        &mut tape,
        PoolClass::Neuron,
        &[vec![2.0, 0.0], vec![0.0, 2.0]],
        &[false, true],
    );
    assert_eq!(
        compute_descriptor(&tape, &p, DescriptorMode::Relaxed)
            .unwrap()
            .0,
        vec![1.0, 1.0]
    );
    assert_eq!(
        compute_descriptor(&tape, &p, DescriptorMode::Strict)
            .unwrap()
            .0,
        vec![2.0, 0.0]
    );
    let p = pool(&mut tape, PoolClass::Neuron, &[vec![2.0, 0.0]], &[true]);
    let (v, event) = compute_descriptor(&tape, &p, DescriptorMode::Strict).unwrap();
    assert_eq!(v, vec![2.0, 0.0]);
    assert_eq!(
        event,
        Some(SamplingEvent::StrictDescriptorFallback(PoolClass::Neuron))
    );
}

#[test]
fn momentum_update_examples() {
    let mut desc = PoolDescriptor::new(PoolClass::Neuron, DescriptorMode::Strict);
    desc.update(&[1.0, 0.0], 1, 2, 1.0, true).unwrap();
    assert_eq!(desc.vector().unwrap(), &[1.0, 0.0]);
    // k = K/2 gives α = 0.5; then k = K gives α = 0
    let mut desc = PoolDescriptor::new(PoolClass::Neuron, DescriptorMode::Strict);
    desc.update(&[1.0, 0.0], 1, 4, 1.0, true).unwrap();
    let alpha = desc.update(&[0.0, 1.0], 2, 4, 1.0, true).unwrap();
    assert!((alpha - 0.5).abs() < 1e-12);
    assert_eq!(desc.vector().unwrap(), &[0.5, 0.5]);
    desc.update(&[3.0, -1.0], 4, 4, 1.0, true).unwrap();
    assert_eq!(desc.vector().unwrap(), &[3.0, -1.0]);
    assert!(desc.update(&[1.0], 5, 8, 1.0, true).is_err());
    assert!(desc.update(&[1.0, 1.0], 4, 8, 1.0, true).is_err());
}

#[test]
fn schedule_examples() {
    let (worst, monotone) = common::schedule_check(6, 20);
    assert!(worst < 1e-9);
    assert!(monotone);
}

#[test]
fn similarity_bounds_over_many_draws() {
    let ((lo1, hi1), (lo2, hi2)) = common::similarity_ranges(2000, 1);
    assert!(lo1 >= 0.0 && hi1 <= 1.0);
    assert!(lo2 >= 0.0 && hi2 <= 2.0);
}

#[test]
fn pools_flag_misclassified_voxels() {
    let mut r = common::rng(12);
    let (m, d, sp) = (3, 4, [2, 3, 2]);
    let vox = sp.iter().product::<usize>();
    let latent = common::uniform(&[m, d, sp[0], sp[1], sp[2]], -1.0, 1.0, &mut r);
    let labels = Tensor::from_fn([m, 1, sp[0], sp[1], sp[2]], |_| {
        if r.random_bool(0.4) {
            1.0
        } else {
            0.0
        }
    });
    let probs = common::uniform(&[m, 1, sp[0], sp[1], sp[2]], 0.0, 1.0, &mut r);
    let mut tape = Tape::new();
    let lv = tape.constant(latent.clone());
    let pools = build_pools(&mut tape, lv, &labels, &probs).unwrap();
    let fg = labels.data().iter().filter(|&&y| y == 1.0).count();
    assert_eq!(pools.neuron.len(), fg);
    assert_eq!(pools.neuron.len() + pools.background.len(), m * vox);
    for pool in [&pools.neuron, &pools.background] {
        let emb = tape.value(pool.embeddings());
        for (row, (&v, &wrong)) in pool.voxels().iter().zip(pool.misclassified()).enumerate() {
            let y = labels.data()[v];
            assert_eq!(y, pool.class().label());
            assert_eq!(wrong, (probs.data()[v] >= 0.5) != (y == 1.0));
            let (b, s) = (v / vox, v % vox);
            for c in 0..d {
                assert_eq!(
                    emb.data()[row * d + c],
                    latent.data()[(b * d + c) * vox + s]
                );
            }
        }
    }
    // perfect predictions leave nothing flagged
    let perfect = labels.clone();
    let pools = build_pools(&mut tape, lv, &labels, &perfect).unwrap();
    assert_eq!(
        pools.neuron.misclassified_count() + pools.background.misclassified_count(),
        0
    );
}

#[test]
fn latent_interpolation_examples() {
    let mut tape = Tape::new();
    let c = tape.constant(Tensor::full([2, 3, 2, 2, 1], 0.75));
    let up = interpolate_latent(&mut tape, c, [4, 4, 2]).unwrap();
    assert!(tape
        .value(up)
        .data()
        .iter()
        .all(|&v| (v - 0.75).abs() < 1e-7));
    let mut r = common::rng(0);
    let x = common::uniform(&[1, 2, 3, 2, 2], -1.0, 1.0, &mut r);
    let v = tape.constant(x.clone());
    let same = interpolate_latent(&mut tape, v, [3, 2, 2]).unwrap();
    assert_eq!(tape.value(same), &x);
    assert!(interpolate_latent(&mut tape, v, [2, 2, 2]).is_err());
}

#[test]
fn seg_loss_is_unit_weighted_sum() {
    let mut tape = Tape::new();
    let probs = tape.constant(Tensor::new([3], vec![0.2, 0.7, 0.9]).unwrap());
    let labels = tape.constant(Tensor::new([3], vec![0.0, 1.0, 1.0]).unwrap());
    let plain = seg_loss(&mut tape, probs, labels, None).unwrap();
    assert_eq!(
        tape.value(plain.total).item(),
        tape.value(plain.cross_entropy).item()
    );
    let sim = tape.constant(Tensor::scalar(0.25));
    let both = seg_loss(&mut tape, probs, labels, Some(sim)).unwrap();
    let expect = common::bce_oracle(&[0.2, 0.7, 0.9], &[0.0, 1.0, 1.0]) + 0.25;
    assert!((tape.value(both.total).item() as f64 - expect).abs() < 1e-6);
}
