//! Value-order correlation and error statistics over progress series.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{reconstruct_in_order, EngineConfig, EngineError};
use crate::predictor::HopPredictor;
use crate::trajectory::SampledSequence;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("series is empty")]
    Empty,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j hold one tie group with ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Fraction of entries that share their value with at least one other entry.
pub fn tie_fraction(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tied = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            tied += j - i;
        }
        i = j;
    }
    tied as f64 / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    /// Spearman correlation scaled to `[-100, 100]`.
    pub value: f64,
    /// Set when either input is constant; `value` is then 0.
    pub degenerate: bool,
}

/// Spearman rank correlation between `series` and `times` (Pearson on
/// average ranks), times 100.
pub fn voc_with_times(series: &[f64], times: &[f64]) -> Result<Correlation, MetricError> {
    if series.len() != times.len() {
        return Err(MetricError::LengthMismatch(series.len(), times.len()));
    }
    let n = series.len();
    if n < 2 {
        return Err(MetricError::TooShort(n));
    }
    let rx = average_ranks(series);
    let ry = average_ranks(times);
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in rx.iter().zip(&ry) {
        let (dx, dy) = (x - mean, y - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    let value = (100.0 * sxy / (sxx * syy).sqrt()).clamp(-100.0, 100.0);
    Ok(Correlation {
        value,
        degenerate: false,
    })
}

/// VOC of a series against its own time index.
pub fn voc(series: &[f64]) -> Result<Correlation, MetricError> {
    let times: Vec<f64> = (0..series.len()).map(|t| t as f64).collect();
    voc_with_times(series, &times)
}

/// VOC of the reconstruction over the time-reversed sequence, negated so a
/// predictor whose values invert with the footage scores near +100.
///
/// Anchors keep their identities: the task is unchanged, only the footage
/// runs backwards.
pub fn reverse_voc<P: HopPredictor + ?Sized>(
    predictor: &P,
    seq: &SampledSequence,
    cfg: &EngineConfig,
) -> Result<Correlation, MetricError> {
    let order: Vec<usize> = (0..seq.states().len()).rev().collect();
    let series = reconstruct_in_order(predictor, seq, &order, cfg)?;
    let c = voc(&series.values())?;
    Ok(Correlation {
        value: if c.degenerate { 0.0 } else { -c.value },
        degenerate: c.degenerate,
    })
}

pub fn mae(series: &[f64], ground_truth: &[f64]) -> Result<f64, MetricError> {
    if series.len() != ground_truth.len() {
        return Err(MetricError::LengthMismatch(series.len(), ground_truth.len()));
    }
    if series.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(series
        .iter()
        .zip(ground_truth)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / series.len() as f64)
}

/// Distance of the final estimate from full completion.
pub fn terminal_drift(series: &[f64]) -> Result<f64, MetricError> {
    series
        .last()
        .map(|v| (v - 1.0).abs())
        .ok_or(MetricError::Empty)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocReport {
    pub trajectory_id: String,
    pub voc_forward: f64,
    pub voc_reverse: Option<f64>,
    pub n_states: usize,
    pub tie_fraction: f64,
}

impl VocReport {
    pub fn from_series(
        trajectory_id: &str,
        forward: &[f64],
        reverse: Option<f64>,
    ) -> Result<Self, MetricError> {
        Ok(Self {
            trajectory_id: trajectory_id.to_string(),
            voc_forward: voc(forward)?.value,
            voc_reverse: reverse,
            n_states: forward.len(),
            tie_fraction: tie_fraction(forward),
        })
    }
}
