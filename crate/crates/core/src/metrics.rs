//! Voxel-level F1, precision and recall.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const THRESHOLD: f32 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn scores(&self) -> Scores {
        Scores {
            f1: self.f1(),
            precision: self.precision(),
            recall: self.recall(),
        }
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, other: Self) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

/// Count outcomes of `prob >= threshold` against binary `labels`.
pub fn confusion(probs: &[f32], labels: &[f32], threshold: f32) -> Result<ConfusionCounts> {
    if probs.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &y) in probs.iter().zip(labels) {
        let truth = match y {
            0.0 => false,
            1.0 => true,
            other => return Err(Error::DataQuality(format!("label {other} is not binary"))),
        };
        match (p >= threshold, truth) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Per-volume mean ± std of each score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub f1: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub volumes: usize,
}

pub fn aggregate(scores: &[Scores]) -> Aggregate {
    let col = |f: fn(&Scores) -> f64| MeanStd::of(&scores.iter().map(f).collect::<Vec<_>>());
    Aggregate {
        f1: col(|s| s.f1),
        precision: col(|s| s.precision),
        recall: col(|s| s.recall),
        volumes: scores.len(),
    }
}

/// One line of an evaluation metrics file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalRecord {
    Volume {
        volume_id: String,
        f1: f64,
        precision: f64,
        recall: f64,
    },
    Aggregate {
        volume_id: String,
        f1: f64,
        precision: f64,
        recall: f64,
        f1_std: f64,
        precision_std: f64,
        recall_std: f64,
        volumes: usize,
    },
}

impl EvalRecord {
    pub fn volume(volume_id: impl Into<String>, s: Scores) -> Self {
        EvalRecord::Volume {
            volume_id: volume_id.into(),
            f1: s.f1,
            precision: s.precision,
            recall: s.recall,
        }
    }

    pub fn aggregate(a: &Aggregate) -> Self {
        EvalRecord::Aggregate {
            volume_id: "aggregate".into(),
            f1: a.f1.mean,
            precision: a.precision.mean,
            recall: a.recall.mean,
            f1_std: a.f1.std,
            precision_std: a.precision.std,
            recall_std: a.recall.std,
            volumes: a.volumes,
        }
    }
}

/// Write serializable records as newline-delimited JSON.
pub fn write_jsonl<T: Serialize, W: Write>(mut out: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
