use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::metrics::{aggregate, confusion, write_jsonl, Aggregate, EvalRecord, Scores, THRESHOLD};
use crate::segnet::checkpoint::Checkpoint;
use crate::segnet::{SegNet, SegNetConfig};
use crate::synthdata::grid::crop;
use crate::synthdata::VolumeSample;

/// Foreground probabilities for a whole volume. Extents that the network
/// cannot take are zero-padded up to the next multiple and cropped back.
pub fn predict_volume(net: &SegNet, sample: &VolumeSample) -> Result<Vec<f32>> {
    let dims = sample.dims();
    let div = net.config().divisor();
    let padded = dims.map(|d| d.div_ceil(div) * div);
    if padded == dims {
        return Ok(net.infer(&sample.volume_tensor())?.into_data());
    }
    let mut data = vec![0.0f32; padded.iter().product()];
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            let src = (z * dims[1] + y) * dims[2];
            let dst = (z * padded[1] + y) * padded[2];
            data[dst..dst + dims[2]].copy_from_slice(&sample.volume()[src..src + dims[2]]);
        }
    }
    let input = Tensor::new([1, 1, padded[0], padded[1], padded[2]], data)?;
    let probs = net.infer(&input)?;
    Ok(crop(probs.data(), padded, [0, 0, 0], dims))
}

pub fn score_volume(net: &SegNet, sample: &VolumeSample) -> Result<Scores> {
    let probs = predict_volume(net, sample)?;
    let labels: Vec<f32> = sample.label().iter().map(|&l| l as f32).collect();
    Ok(confusion(&probs, &labels, THRESHOLD)?.scores())
}

/// Per-volume scores and their aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub volumes: Vec<(String, Scores)>,
    pub aggregate: Aggregate,
}

impl Evaluation {
    pub fn records(&self) -> Vec<EvalRecord> {
        self.volumes
            .iter()
            .map(|(id, s)| EvalRecord::volume(id.clone(), *s))
            .chain([EvalRecord::aggregate(&self.aggregate)])
            .collect()
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        write_jsonl(BufWriter::new(File::create(path)?), &self.records())
    }
}

pub fn evaluate(net: &SegNet, samples: &[VolumeSample], prefix: &str) -> Result<Evaluation> {
    let volumes = samples
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((format!("{prefix}{i:03}"), score_volume(net, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<Scores> = volumes.iter().map(|(_, s)| *s).collect();
    Ok(Evaluation {
        aggregate: aggregate(&scores),
        volumes,
    })
}

/// Evaluate a checkpoint on test volumes. When `expected` is given the
/// checkpoint's stored architecture must match it.
pub fn run_eval(
    checkpoint: &Checkpoint,
    expected: Option<&SegNetConfig>,
    samples: &[VolumeSample],
) -> Result<Evaluation> {
    if let Some(config) = expected {
        if config != checkpoint.net.config() {
            return Err(Error::config(format!(
                "checkpoint holds {:?} but the run config expects {:?}",
                checkpoint.net.config(),
                config
            )));
        }
    }
    evaluate(&checkpoint.net, samples, "test-")
}
