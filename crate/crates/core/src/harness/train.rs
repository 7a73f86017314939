use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::eval::evaluate;
use crate::autodiff::{Adam, Tape, Tensor};
use crate::error::{Error, Result};
use crate::metrics::write_jsonl;
use crate::segnet::checkpoint::Checkpoint;
use crate::segnet::SegNet;
use crate::synthdata::{derive_seed, extract_patch, stack, Dataset, VolumeSample};
use crate::vcvrl::{
    build_pools, interpolate_latent, momentum_coefficient, seg_loss, total_sim_loss, DescriptorSet,
    SamplingEvent, SiamHead,
};

const NET_STREAM: u64 = 1;
const HEAD_STREAM: u64 = 2;
const BATCH_STREAM_BASE: u64 = 1 << 32;

/// One optimizer step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub epoch: usize,
    pub batch_seed: u64,
    pub loss_ce: f32,
    pub loss_sim: Option<f32>,
    pub loss_total: f32,
    /// Momentum coefficient applied to the descriptors at this step.
    pub alpha: Option<f64>,
    pub events: Vec<String>,
}

/// One line of `metrics.jsonl`: a record per epoch per split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "split", rename_all = "snake_case")]
pub enum EpochRecord {
    Train {
        epoch: usize,
        iterations: u64,
        loss_ce: f64,
        loss_sim: Option<f64>,
    },
    Val {
        epoch: usize,
        f1: f64,
        precision: f64,
        recall: f64,
        best_f1: f64,
        improved: bool,
    },
}

/// Mutable state of a run between steps.
#[derive(Clone, Debug)]
pub struct TrainState {
    /// Completed iterations `k`.
    pub iteration: u64,
    /// Scheduled iterations `K`.
    pub total_iterations: u64,
    pub best_val_f1: Option<f64>,
    pub descriptors: Option<DescriptorSet>,
    pub optimizer: Adam,
    pub trajectory: Vec<IterationRecord>,
    pub epochs: Vec<EpochRecord>,
}

pub struct Trainer {
    config: RunConfig,
    data: Dataset,
    net: SegNet,
    head: Option<SiamHead>,
    state: TrainState,
    best: Option<Checkpoint>,
}

impl Trainer {
    pub fn new(config: RunConfig, data: Dataset) -> Result<Self> {
        config.validate()?;
        if data.train.is_empty() || data.val.is_empty() {
            return Err(Error::config(
                "training needs at least one training and one validation volume",
            ));
        }
        let net = SegNet::new(config.segnet.clone(), derive_seed(config.seed, NET_STREAM))?;
        let head = config
            .vcvrl
            .as_ref()
            .map(|v| {
                SiamHead::new(
                    config.segnet.latent_dim(),
                    &v.head,
                    derive_seed(config.seed, HEAD_STREAM),
                )
            })
            .transpose()?;
        let descriptors = config
            .vcvrl
            .as_ref()
            .and_then(|v| v.pair_mode.descriptor_mode())
            .map(DescriptorSet::new);
        let state = TrainState {
            iteration: 0,
            total_iterations: config.total_iterations(),
            best_val_f1: None,
            descriptors,
            optimizer: Adam::new(
                config.optimizer.learning_rate,
                config.optimizer.weight_decay,
            ),
            trajectory: Vec::new(),
            epochs: Vec::new(),
        };
        Ok(Self {
            config,
            data,
            net,
            head,
            state,
            best: None,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn net(&self) -> &SegNet {
        &self.net
    }

    pub fn head(&self) -> Option<&SiamHead> {
        self.head.as_ref()
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.state.total_iterations
    }

    /// Augmented patches for iteration `k`, a pure function of the run seed.
    pub fn batch(&self, k: u64) -> Result<(u64, Vec<VolumeSample>)> {
        let batch_seed = derive_seed(self.config.seed, BATCH_STREAM_BASE + k);
        let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
        let train = &self.data.train;
        let mut patches = Vec::with_capacity(self.config.batch_size);
        while patches.len() < self.config.batch_size {
            // a volume too sparse for the foreground floor is skipped for another
            let mut attempt = 0;
            let patch = loop {
                let index = rng.random_range(0..train.len());
                match extract_patch(&train[index], &self.config.augmentation, &mut rng) {
                    Err(Error::DataQuality(msg)) if attempt < train.len() => {
                        log::warn!("iteration {k}: training volume {index}: {msg}");
                        attempt += 1;
                    }
                    other => break other?,
                }
            };
            patches.push(patch);
        }
        Ok((batch_seed, patches))
    }

    /// Run one optimizer step.
    pub fn step(&mut self) -> Result<&IterationRecord> {
        if self.is_finished() {
            return Err(Error::config("training schedule already complete"));
        }
        let k = self.state.iteration + 1;
        let total = self.state.total_iterations;
        let epoch = ((k - 1) / self.config.iterations_per_epoch as u64) as usize;
        let (batch_seed, patches) = self.batch(k)?;
        let (volume, labels) = stack(&patches)?;
        let dims = patches[0].dims();
        let mut sampler = ChaCha8Rng::seed_from_u64(batch_seed);
        sampler.set_stream(1);

        let mut tape = Tape::new();
        let net_params = self.net.bind(&mut tape, true);
        let bound_head = self.head.as_ref().map(|h| h.bind(&mut tape, true));
        let x = tape.constant(volume);
        let y = tape.constant(labels.clone());
        let out = self.net.forward(&mut tape, &net_params, x)?;

        let mut events = Vec::new();
        let mut alpha = None;
        let sim = match (&self.config.vcvrl, &bound_head) {
            (Some(vc), Some(head)) => {
                let latent = interpolate_latent(&mut tape, out.bottleneck, dims)?;
                let probs = tape.value(out.probs).clone();
                let pools = build_pools(&mut tape, latent, &labels, &probs)?;
                if let Some(set) = self.state.descriptors.as_mut() {
                    events.extend(set.refresh(
                        &tape,
                        &pools,
                        k,
                        total,
                        vc.alpha_base,
                        vc.momentum,
                    )?);
                    if vc.momentum {
                        alpha = Some(momentum_coefficient(k, total, vc.alpha_base)?);
                    }
                }
                let sim = total_sim_loss(
                    &mut tape,
                    &pools,
                    vc,
                    head,
                    self.state.descriptors.as_ref(),
                    &mut sampler,
                )?;
                events.extend(sim.events);
                Some(sim.loss)
            }
            _ => None,
        };
        let loss = seg_loss(&mut tape, out.probs, y, sim)?;
        let loss_ce = tape.value(loss.cross_entropy).item();
        let loss_sim = sim.map(|s| tape.value(s).item());
        if !loss_ce.is_finite() || !loss_sim.unwrap_or(0.0).is_finite() {
            return Err(Error::NonFiniteLoss {
                iteration: k,
                batch_seed,
                loss_ce,
                loss_sim: loss_sim.unwrap_or(0.0),
            });
        }

        let grads = tape.backward(loss.total)?;
        let head_vars = bound_head.map(|h| h.params()).unwrap_or_default();
        let grad_tensors: Vec<Tensor> = net_params
            .iter()
            .chain(&head_vars)
            .map(|&v| grads.wrt(v))
            .collect();
        let grad_refs: Vec<&Tensor> = grad_tensors.iter().collect();
        let mut params = self.net.parameters_mut();
        if let Some(h) = self.head.as_mut() {
            params.extend(h.parameters_mut());
        }
        self.state.optimizer.step(&mut params, &grad_refs)?;

        for e in &events {
            match e {
                SamplingEvent::EmptyPool(_) => log::warn!("iteration {k}: {e}"),
                _ => log::debug!("iteration {k}: {e}"),
            }
        }
        self.state.iteration = k;
        self.state.trajectory.push(IterationRecord {
            iteration: k,
            epoch,
            batch_seed,
            loss_ce,
            loss_sim,
            loss_total: tape.value(loss.total).item(),
            alpha,
            events: events.iter().map(ToString::to_string).collect(),
        });
        Ok(self.state.trajectory.last().expect("just pushed"))
    }

    fn checkpoint(&self, f1: f64) -> Checkpoint {
        Checkpoint {
            net: self.net.clone(),
            descriptors: self.state.descriptors.clone(),
            iteration: self.state.iteration,
            total_iterations: self.state.total_iterations,
            validation_f1: Some(f1 as f32),
        }
    }

    /// Run the remaining steps of the current epoch, then validate and keep
    /// the network if validation F1 improved.
    pub fn run_epoch(&mut self) -> Result<(&EpochRecord, &EpochRecord)> {
        let ipe = self.config.iterations_per_epoch as u64;
        let epoch = (self.state.iteration / ipe) as usize;
        let start = self.state.trajectory.len();
        while self.state.iteration < (epoch as u64 + 1) * ipe {
            self.step()?;
        }
        let steps = &self.state.trajectory[start..];
        let n = steps.len() as f64;
        let loss_ce = steps.iter().map(|r| r.loss_ce as f64).sum::<f64>() / n;
        let loss_sim = self.head.as_ref().map(|_| {
            steps
                .iter()
                .map(|r| r.loss_sim.unwrap_or(0.0) as f64)
                .sum::<f64>()
                / n
        });

        let val = evaluate(&self.net, &self.data.val, "val-")?;
        let f1 = val.aggregate.f1.mean;
        let improved = self.state.best_val_f1.is_none_or(|best| f1 > best);
        if improved {
            self.state.best_val_f1 = Some(f1);
            self.best = Some(self.checkpoint(f1));
        }
        self.state.epochs.push(EpochRecord::Train {
            epoch,
            iterations: self.state.iteration,
            loss_ce,
            loss_sim,
        });
        self.state.epochs.push(EpochRecord::Val {
            epoch,
            f1,
            precision: val.aggregate.precision.mean,
            recall: val.aggregate.recall.mean,
            best_f1: self.state.best_val_f1.expect("set above"),
            improved,
        });
        let n = self.state.epochs.len();
        Ok((&self.state.epochs[n - 2], &self.state.epochs[n - 1]))
    }

    pub fn finish(self) -> TrainOutcome {
        let last = self.checkpoint(self.state.best_val_f1.unwrap_or(0.0));
        TrainOutcome {
            best: self.best.unwrap_or_else(|| last.clone()),
            last,
            head: self.head,
            state: self.state,
        }
    }
}

pub struct TrainOutcome {
    /// Network with the highest validation F1.
    pub best: Checkpoint,
    /// Network after the final step.
    pub last: Checkpoint,
    /// Training-only siamese head, kept for inspection.
    pub head: Option<SiamHead>,
    pub state: TrainState,
}

impl TrainOutcome {
    /// Write `best.vckp`, `last.vckp`, `metrics.jsonl`, `trajectory.jsonl`
    /// and `config.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, config: &RunConfig) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.best.save(dir.join("best.vckp"))?;
        self.last.save(dir.join("last.vckp"))?;
        write_jsonl(
            BufWriter::new(File::create(dir.join("metrics.jsonl"))?),
            &self.state.epochs,
        )?;
        write_jsonl(
            BufWriter::new(File::create(dir.join("trajectory.jsonl"))?),
            &self.state.trajectory,
        )?;
        let mut f = File::create(dir.join("config.json"))?;
        f.write_all(config.to_json().as_bytes())?;
        Ok(())
    }
}

/// Load the dataset named by the config, or generate it.
pub fn load_or_generate(config: &RunConfig) -> Result<Dataset> {
    match &config.paths.data {
        Some(dir) if dir.join(crate::synthdata::dataset::MANIFEST).exists() => Dataset::load(dir),
        _ => Dataset::generate(&config.generator, config.splits),
    }
}

/// Train for the configured schedule, writing outputs when `paths.out` is set.
pub fn run_train(config: &RunConfig) -> Result<TrainOutcome> {
    let data = load_or_generate(config)?;
    train_on(config, data)
}

pub fn train_on(config: &RunConfig, data: Dataset) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(config.clone(), data)?;
    let out = config.paths.out.clone();
    while !trainer.is_finished() {
        match trainer.run_epoch() {
            Ok((train, val)) => log::info!("{}", epoch_line(train, val)),
            Err(e @ Error::NonFiniteLoss { .. }) => {
                if let Some(dir) = &out {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("abort.txt"), format!("{e}\n"))?;
                }
                log::error!("{e}");
                return Err(e);
            }
            Err(e) => return Err(e),
        }
    }
    let outcome = trainer.finish();
    if let Some(dir) = &out {
        outcome.save(dir, config)?;
    }
    Ok(outcome)
}

fn epoch_line(train: &EpochRecord, val: &EpochRecord) -> String {
    match (train, val) {
        (
            EpochRecord::Train {
                epoch,
                loss_ce,
                loss_sim,
                ..
            },
            EpochRecord::Val { f1, best_f1, .. },
        ) => match loss_sim {
            Some(s) => format!(
                "epoch {epoch}: ce {loss_ce:.4} sim {s:.4} val f1 {f1:.4} (best {best_f1:.4})"
            ),
            None => format!("epoch {epoch}: ce {loss_ce:.4} val f1 {f1:.4} (best {best_f1:.4})"),
        },
        _ => String::new(),
    }
}
