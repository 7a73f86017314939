use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vcvrl::harness::{self, RunConfig, SweepAxis};
use vcvrl::segnet::checkpoint::Checkpoint;
use vcvrl::synthdata::Dataset;
use vcvrl::vcvrl::{AnchorStrategy, PairMode};
use vcvrl::{Error, Result};

#[derive(Parser)]
#[command(
    name = "vcvrl",
    version,
    about = "Train and evaluate 3D segmentation with voxel-wise cross-volume siamese learning"
)]
struct Cli {
    /// Log verbosity (error, warn, info, debug).
    #[arg(long, global = true, default_value = "info")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic train/val/test dataset.
    Generate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; writes checkpoints and logs into the output directory.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a checkpoint on the test split of a dataset.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Metrics file (newline-delimited JSON).
        #[arg(long)]
        out: PathBuf,
        /// Reject the checkpoint unless its architecture matches this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train one model per value of an ablation axis.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// anchors, strategy, pair_mode or momentum.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values; `none` trains the plain backbone.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Comma-separated seeds; defaults to the run seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Directory for per-run outputs and `sweep.csv`.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
}

/// JSON config plus flag overrides.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    iterations_per_epoch: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f32>,
    #[arg(long)]
    weight_decay: Option<f32>,
    /// Train without the siamese objective.
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    anchors: Option<usize>,
    #[arg(long)]
    strategy: Option<AnchorStrategy>,
    #[arg(long)]
    pair_mode: Option<PairMode>,
    #[arg(long)]
    momentum: Option<bool>,
    #[arg(long)]
    noise_sigma: Option<f32>,
    /// Seed of the synthetic dataset (the run seed drives initialization and batches).
    #[arg(long)]
    data_seed: Option<u64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match (&self.config, self.seed) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(seed)) => RunConfig::new(seed),
            (None, None) => {
                return Err(Error::Config(
                    "either --config or --seed is required".into(),
                ))
            }
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.data {
            c.paths.data = Some(v.clone());
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.iterations_per_epoch {
            c.iterations_per_epoch = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            c.optimizer.learning_rate = v;
        }
        if let Some(v) = self.weight_decay {
            c.optimizer.weight_decay = v;
        }
        if let Some(v) = self.noise_sigma {
            c.generator.noise_sigma = v;
        }
        if let Some(v) = self.data_seed {
            c.generator.seed = v;
        }
        if self.baseline {
            c.vcvrl = None;
        }
        if let Some(vc) = c.vcvrl.as_mut() {
            if let Some(v) = self.anchors {
                vc.anchors = v;
            }
            if let Some(v) = self.strategy {
                vc.strategy = v;
            }
            if let Some(v) = self.pair_mode {
                vc.pair_mode = v;
            }
            if let Some(v) = self.momentum {
                vc.momentum = v;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { run, out } => {
            let config = run.resolve()?;
            let data = Dataset::generate(&config.generator, config.splits)?;
            data.save(&out)?;
            println!(
                "wrote {} train, {} val, {} test volumes to {}",
                data.train.len(),
                data.val.len(),
                data.test.len(),
                out.display()
            );
        }
        Command::Train { run, out } => {
            let mut config = run.resolve()?;
            config.paths.out = Some(out.clone());
            let outcome = harness::run_train(&config)?;
            println!(
                "best validation F1 {:.4} after {} iterations; outputs in {}",
                outcome.state.best_val_f1.unwrap_or(0.0),
                outcome.state.iteration,
                out.display()
            );
        }
        Command::Eval {
            checkpoint,
            data,
            out,
            config,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let expected = config.as_deref().map(RunConfig::load).transpose()?;
            let test = Dataset::load(&data)?.test;
            let eval = harness::run_eval(&ckpt, expected.as_ref().map(|c| &c.segnet), &test)?;
            ensure_parent(&out)?;
            eval.write_jsonl(&out)?;
            let a = eval.aggregate;
            println!(
                "F1 {:.2} ± {:.2}  precision {:.2} ± {:.2}  recall {:.2} ± {:.2}  ({} volumes)",
                100.0 * a.f1.mean,
                100.0 * a.f1.std,
                100.0 * a.precision.mean,
                100.0 * a.precision.std,
                100.0 * a.recall.mean,
                100.0 * a.recall.std,
                a.volumes
            );
        }
        Command::Sweep {
            run,
            axis,
            values,
            seeds,
            out,
        } => {
            let mut config = run.resolve()?;
            config.paths.out = Some(out.clone());
            let seeds = if seeds.is_empty() {
                vec![config.seed]
            } else {
                seeds
            };
            let rows = harness::run_sweep(&config, axis, &values, &seeds)?;
            let csv = out.join("sweep.csv");
            harness::write_sweep_csv(&csv, &rows)?;
            for r in &rows {
                println!(
                    "{}={:<8} F1 {:.4} ± {:.4}",
                    r.axis, r.value, r.mean_f1, r.std_f1
                );
            }
            println!("table written to {}", csv.display());
        }
    }
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
