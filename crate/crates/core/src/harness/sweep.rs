use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::eval::evaluate;
use super::train::{load_or_generate, train_on};
use crate::error::{Error, Result};
use crate::metrics::MeanStd;
use crate::vcvrl::{AnchorStrategy, PairMode, VcvrlConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Anchors,
    Strategy,
    PairMode,
    Momentum,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "anchors" | "n" => Ok(Self::Anchors),
            "strategy" => Ok(Self::Strategy),
            "pair_mode" => Ok(Self::PairMode),
            "momentum" => Ok(Self::Momentum),
            other => Err(Error::config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Anchors => "anchors",
            Self::Strategy => "strategy",
            Self::PairMode => "pair_mode",
            Self::Momentum => "momentum",
        })
    }
}

/// Apply one sweep value to a copy of `base`. The value `none` disables the
/// siamese objective for any axis.
pub fn apply_value(base: &RunConfig, axis: SweepAxis, value: &str) -> Result<RunConfig> {
    let mut config = base.clone();
    if value.eq_ignore_ascii_case("none") || value.eq_ignore_ascii_case("baseline") {
        config.vcvrl = None;
        return Ok(config);
    }
    let vc = config.vcvrl.get_or_insert_with(VcvrlConfig::default);
    match axis {
        SweepAxis::Anchors => {
            vc.anchors = value
                .parse()
                .map_err(|_| Error::config(format!("anchor count {value:?} is not an integer")))?
        }
        SweepAxis::Strategy => vc.strategy = AnchorStrategy::from_str(value)?,
        SweepAxis::PairMode => vc.pair_mode = PairMode::from_str(value)?,
        SweepAxis::Momentum => {
            vc.momentum = match value.to_ascii_lowercase().as_str() {
                "on" | "true" | "1" => true,
                "off" | "false" | "0" => false,
                other => {
                    return Err(Error::config(format!(
                        "momentum value {other:?} is not on/off"
                    )))
                }
            }
        }
    }
    config.validate()?;
    Ok(config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    /// Natural log of the anchor count, for anchor sweeps.
    pub log_n: Option<f64>,
    pub seeds: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub std_over_3: f64,
    pub best_val_f1: f64,
}

/// Train one model per value and seed, score each best checkpoint on the test
/// split, and summarize per value. Rows follow `values` order and do not
/// depend on it.
pub fn run_sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[String],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    if seeds.is_empty() {
        return Err(Error::config("sweep needs at least one seed"));
    }
    let configs = values
        .iter()
        .map(|v| apply_value(base, axis, v))
        .collect::<Result<Vec<_>>>()?;
    let data = load_or_generate(base)?;
    let mut rows = Vec::with_capacity(values.len());
    for (value, config) in values.iter().zip(configs) {
        let mut f1s = Vec::new();
        let mut vals = Vec::new();
        for &seed in seeds {
            let mut run = config.clone();
            run.seed = seed;
            run.paths.out = base.paths.out.as_ref().map(|dir| {
                dir.join(format!("{axis}-{value}"))
                    .join(format!("seed-{seed}"))
            });
            let outcome = train_on(&run, data.clone())?;
            let test = evaluate(&outcome.best.net, &data.test, "test-")?;
            log::info!(
                "{axis}={value} seed {seed}: test f1 {:.4}",
                test.aggregate.f1.mean
            );
            f1s.push(test.aggregate.f1.mean);
            vals.push(outcome.state.best_val_f1.unwrap_or(0.0));
        }
        let stats = MeanStd::of(&f1s);
        let log_n = match (axis, value.parse::<f64>()) {
            (SweepAxis::Anchors, Ok(n)) => Some(n.ln()),
            _ => None,
        };
        rows.push(SweepRow {
            axis: axis.to_string(),
            value: value.clone(),
            log_n,
            seeds: seeds.len(),
            mean_f1: stats.mean,
            std_f1: stats.std,
            std_over_3: stats.std / 3.0,
            best_val_f1: MeanStd::of(&vals).mean,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
