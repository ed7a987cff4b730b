//! Hop labels and balanced hop-sample datasets.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::seed::mix_seed;
use crate::trajectory::{SampledSequence, StateObservation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelError {
    #[error("progress value {0} is outside [0, 1]")]
    ProgressOutOfRange(f64),
    #[error("sequence has M = {0}; hop sampling needs M >= 2")]
    SequenceTooShort(usize),
    #[error("zero-hop threshold {0} must lie in [0, 1)")]
    ZeroThreshold(f64),
    #[error("zero-hop fraction {0} must lie in [0, 1)")]
    ZeroFraction(f64),
    #[error("bin counts must be positive")]
    ZeroBins,
}

/// Hop `H(s_p, s_q)` from the ground-truth progress of the BEFORE and AFTER
/// states. Progress is normalized by the remaining distance to the goal,
/// regress by the distance already covered. `0/0` is defined as no hop.
pub fn hop_label(phi_p: f64, phi_q: f64) -> Result<f64, LabelError> {
    for phi in [phi_p, phi_q] {
        if !(0.0..=1.0).contains(&phi) {
            return Err(LabelError::ProgressOutOfRange(phi));
        }
    }
    let diff = phi_q - phi_p;
    let hop = if phi_q >= phi_p {
        let remaining = 1.0 - phi_p;
        if remaining == 0.0 {
            0.0
        } else {
            diff / remaining
        }
    } else {
        diff / phi_p
    };
    Ok(hop.clamp(-1.0, 1.0))
}

/// Hop or distance bin index, or the zero-hop sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bin {
    Index(usize),
    Zero,
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bin::Index(i) => write!(f, "{i}"),
            Bin::Zero => f.write_str("zero"),
        }
    }
}

impl Serialize for Bin {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bin::Index(i) => s.serialize_u64(*i as u64),
            Bin::Zero => s.serialize_str("zero"),
        }
    }
}

impl<'de> Deserialize<'de> for Bin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(i) => Ok(Bin::Index(i)),
            Raw::Tag(t) if t == "zero" => Ok(Bin::Zero),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unknown bin `{t}`"))),
        }
    }
}

/// One training tuple. Serialized field names follow the sample JSONL schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopSample {
    #[serde(rename = "task")]
    pub task_description: String,
    #[serde(rename = "init")]
    pub state_init: StateObservation,
    #[serde(rename = "goal")]
    pub state_goal: StateObservation,
    #[serde(rename = "before")]
    pub state_before: StateObservation,
    #[serde(rename = "after")]
    pub state_after: StateObservation,
    pub hop: f64,
    pub hop_bin: Bin,
    #[serde(rename = "dist_bin")]
    pub distance_bin: Bin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerConfig {
    pub n_hop_bins: usize,
    pub n_distance_bins: usize,
    pub zero_hop_fraction: f64,
    pub zero_hop_threshold: f64,
    pub rng_seed: u64,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        Self {
            n_hop_bins: 8,
            n_distance_bins: 4,
            zero_hop_fraction: 0.2,
            zero_hop_threshold: 0.01,
            rng_seed: 0,
        }
    }
}

impl LabelerConfig {
    pub fn validate(&self) -> Result<(), LabelError> {
        if self.n_hop_bins == 0 || self.n_distance_bins == 0 {
            return Err(LabelError::ZeroBins);
        }
        if !(0.0..1.0).contains(&self.zero_hop_fraction) {
            return Err(LabelError::ZeroFraction(self.zero_hop_fraction));
        }
        if !(0.0..1.0).contains(&self.zero_hop_threshold) {
            return Err(LabelError::ZeroThreshold(self.zero_hop_threshold));
        }
        Ok(())
    }

    /// Zero-hop samples to add so they make up `zero_hop_fraction` of the total.
    pub fn zero_hop_count(&self, non_trivial: usize) -> usize {
        let a = self.zero_hop_fraction;
        (a / (1.0 - a) * non_trivial as f64).round() as usize
    }
}

/// Uniform bin of `hop` over `[-1, 1]`.
pub fn hop_bin(hop: f64, n_bins: usize) -> usize {
    let b = ((hop + 1.0) / 2.0 * n_bins as f64).floor() as usize;
    b.min(n_bins - 1)
}

/// Labeled samples of one trajectory, plus the `(hop_bin, distance_bin)`
/// cells that had no candidate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HopSampleSet {
    pub samples: Vec<HopSample>,
    pub infeasible_bins: Vec<(usize, usize)>,
}

/// Draw one non-trivial pair per `(hop, distance)` cell plus a proportional
/// set of zero-hop pairs.
///
/// Distance bins partition the range of `|q - p|` achievable inside each hop
/// bin. Pairs whose progress change is at most the zero threshold are never
/// non-trivial; they feed the zero-hop pool, which always contains `p == q`.
pub fn build_hop_samples(
    seq: &SampledSequence,
    cfg: &LabelerConfig,
) -> Result<HopSampleSet, LabelError> {
    cfg.validate()?;
    let last = seq.last_index();
    if last < 2 {
        return Err(LabelError::SequenceTooShort(last));
    }
    let gt = seq.ground_truth();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.rng_seed, seq.trajectory_id()));

    let mut by_hop: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cfg.n_hop_bins];
    let mut zero_pool = Vec::new();
    for p in 0..=last {
        for q in 0..=last {
            if (gt[q] - gt[p]).abs() <= cfg.zero_hop_threshold {
                zero_pool.push((p, q));
            } else {
                let h = hop_label(gt[p], gt[q])?;
                by_hop[hop_bin(h, cfg.n_hop_bins)].push((p, q));
            }
        }
    }

    let make = |p: usize, q: usize, hop: f64, hb: Bin, db: Bin| HopSample {
        task_description: seq.task_description().to_string(),
        state_init: seq.initial().clone(),
        state_goal: seq.goal().clone(),
        state_before: seq.states()[p].clone(),
        state_after: seq.states()[q].clone(),
        hop,
        hop_bin: hb,
        distance_bin: db,
    };

    let mut samples = Vec::new();
    let mut infeasible_bins = Vec::new();
    for (hb, pairs) in by_hop.iter().enumerate() {
        let mut cells: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cfg.n_distance_bins];
        if let (Some(dmin), Some(dmax)) = (
            pairs.iter().map(|&(p, q)| p.abs_diff(q)).min(),
            pairs.iter().map(|&(p, q)| p.abs_diff(q)).max(),
        ) {
            let width = dmax - dmin + 1;
            for &(p, q) in pairs {
                let db = (p.abs_diff(q) - dmin) * cfg.n_distance_bins / width;
                cells[db].push((p, q));
            }
        }
        for (db, cell) in cells.iter().enumerate() {
            match cell.choose(&mut rng) {
                Some(&(p, q)) => {
                    let h = hop_label(gt[p], gt[q])?;
                    samples.push(make(p, q, h, Bin::Index(hb), Bin::Index(db)));
                }
                None => infeasible_bins.push((hb, db)),
            }
        }
    }

    let n_zero = cfg.zero_hop_count(samples.len());
    let zero_pairs: Vec<(usize, usize)> = if n_zero <= zero_pool.len() {
        zero_pool.choose_multiple(&mut rng, n_zero).copied().collect()
    } else {
        (0..n_zero)
            .map(|_| *zero_pool.choose(&mut rng).expect("zero pool holds p == q pairs"))
            .collect()
    };
    for (p, q) in zero_pairs {
        samples.push(make(p, q, 0.0, Bin::Zero, Bin::Zero));
    }

    Ok(HopSampleSet {
        samples,
        infeasible_bins,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BalanceReport {
    /// Non-trivial sample count per `(hop_bin, distance_bin)`.
    pub counts: BTreeMap<(usize, usize), usize>,
    pub zero_count: usize,
    pub total: usize,
    pub zero_fraction: f64,
    /// Cells without a single sample.
    pub infeasible_bins: Vec<(usize, usize)>,
    /// Cells holding more than one sample above the least-filled feasible cell.
    pub imbalanced_bins: Vec<(usize, usize)>,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.imbalanced_bins.is_empty()
    }
}

pub fn validate_balance(samples: &[HopSample], cfg: &LabelerConfig) -> BalanceReport {
    if samples.is_empty() {
        return BalanceReport::default();
    }
    let mut counts = BTreeMap::new();
    let mut zero_count = 0;
    for s in samples {
        match (s.hop_bin, s.distance_bin) {
            (Bin::Index(h), Bin::Index(d)) => *counts.entry((h, d)).or_insert(0) += 1,
            _ => zero_count += 1,
        }
    }
    let infeasible_bins = (0..cfg.n_hop_bins)
        .flat_map(|h| (0..cfg.n_distance_bins).map(move |d| (h, d)))
        .filter(|cell| !counts.contains_key(cell))
        .collect();
    let min = counts.values().copied().min().unwrap_or(0);
    let imbalanced_bins = counts
        .iter()
        .filter(|(_, &c)| c > min + 1)
        .map(|(&cell, _)| cell)
        .collect();
    BalanceReport {
        counts,
        zero_count,
        total: samples.len(),
        zero_fraction: zero_count as f64 / samples.len() as f64,
        infeasible_bins,
        imbalanced_bins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{sample_sequence, Trajectory};
    use proptest::prelude::*;

    fn seq_with_last(last: usize) -> SampledSequence {
        let t = Trajectory::new("t", "stack the cups", vec!["cam0".into()], last + 1, vec![0, last])
            .unwrap();
        let s = sample_sequence(&t, 1).unwrap();
        assert_eq!(s.last_index(), last);
        s
    }

    #[test]
    fn hop_label_fixtures() {
        assert!((hop_label(0.4, 0.7).unwrap() - 0.5).abs() < 1e-12);
        assert!((hop_label(0.6, 0.3).unwrap() + 0.5).abs() < 1e-12);
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(hop_label(x, x).unwrap(), 0.0);
        }
        assert_eq!(hop_label(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(hop_label(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(hop_label(0.0, 0.0).unwrap(), 0.0);
        assert!(hop_label(-0.1, 0.5).is_err());
        assert!(hop_label(0.5, 1.1).is_err());
        assert!(hop_label(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn balanced_forty() {
        let seq = seq_with_last(100);
        let cfg = LabelerConfig {
            n_hop_bins: 8,
            n_distance_bins: 4,
            zero_hop_fraction: 0.2,
            zero_hop_threshold: 0.01,
            rng_seed: 3,
        };
        let set = build_hop_samples(&seq, &cfg).unwrap();
        assert!(set.infeasible_bins.is_empty());
        assert_eq!(set.samples.len(), 40);
        let report = validate_balance(&set.samples, &cfg);
        assert!(report.counts.values().all(|&c| c == 1));
        assert_eq!(report.counts.len(), 32);
        assert!((report.zero_fraction - 0.2).abs() < 1e-12);
        assert!(report.is_balanced());
        for s in &set.samples {
            let p = s.state_before.frame_index;
            let q = s.state_after.frame_index;
            let expected = hop_label(p as f64 / 100.0, q as f64 / 100.0).unwrap();
            match s.hop_bin {
                Bin::Zero => {
                    assert_eq!(s.hop, 0.0);
                    assert!((q as f64 / 100.0 - p as f64 / 100.0).abs() <= 0.01);
                }
                Bin::Index(_) => assert_eq!(s.hop, expected),
            }
        }
    }

    #[test]
    fn minimal_sequence_single_sample() {
        let cfg = LabelerConfig {
            n_hop_bins: 1,
            n_distance_bins: 1,
            zero_hop_fraction: 0.0,
            zero_hop_threshold: 0.01,
            rng_seed: 0,
        };
        let set = build_hop_samples(&seq_with_last(2), &cfg).unwrap();
        assert_eq!(set.samples.len(), 1);
        assert!(set.infeasible_bins.is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let seq = seq_with_last(60);
        let cfg = LabelerConfig {
            rng_seed: 11,
            ..LabelerConfig::default()
        };
        let a = build_hop_samples(&seq, &cfg).unwrap();
        let b = build_hop_samples(&seq, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a.samples).unwrap(),
            serde_json::to_string(&b.samples).unwrap()
        );
    }

    #[test]
    fn infeasible_bins_reported() {
        // M = 2 has only a handful of distinct hops; many cells stay empty.
        let cfg = LabelerConfig {
            n_hop_bins: 8,
            n_distance_bins: 4,
            zero_hop_fraction: 0.0,
            ..LabelerConfig::default()
        };
        let set = build_hop_samples(&seq_with_last(2), &cfg).unwrap();
        assert_eq!(set.samples.len() + set.infeasible_bins.len(), 32);
        assert!(!set.infeasible_bins.is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = LabelerConfig {
            zero_hop_threshold: 1.0,
            ..LabelerConfig::default()
        };
        assert_eq!(
            build_hop_samples(&seq_with_last(10), &cfg),
            Err(LabelError::ZeroThreshold(1.0))
        );
        assert_eq!(
            build_hop_samples(&seq_with_last(1), &LabelerConfig::default()),
            Err(LabelError::SequenceTooShort(1))
        );
    }

    #[test]
    fn balance_report_edge_cases() {
        let cfg = LabelerConfig::default();
        let empty = validate_balance(&[], &cfg);
        assert_eq!(empty.total, 0);
        assert_eq!(empty.zero_fraction, 0.0);
        assert!(empty.counts.is_empty());

        let set = build_hop_samples(&seq_with_last(100), &cfg).unwrap();
        let mut doubled = set.samples.clone();
        let extra = doubled
            .iter()
            .find(|s| s.hop_bin == Bin::Index(2) && s.distance_bin == Bin::Index(1))
            .unwrap()
            .clone();
        doubled.push(extra.clone());
        doubled.push(extra);
        let report = validate_balance(&doubled, &cfg);
        assert_eq!(report.imbalanced_bins, vec![(2, 1)]);
    }

    #[test]
    fn bin_serde() {
        assert_eq!(serde_json::to_string(&Bin::Zero).unwrap(), "\"zero\"");
        assert_eq!(serde_json::to_string(&Bin::Index(3)).unwrap(), "3");
        assert_eq!(serde_json::from_str::<Bin>("5").unwrap(), Bin::Index(5));
        assert_eq!(serde_json::from_str::<Bin>("\"zero\"").unwrap(), Bin::Zero);
        assert!(serde_json::from_str::<Bin>("\"other\"").is_err());
    }

    proptest! {
        #[test]
        fn hop_label_range_and_sign(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let h = hop_label(p, q).unwrap();
            prop_assert!((-1.0..=1.0).contains(&h));
            if q > p { prop_assert!(h > 0.0); }
            if q < p { prop_assert!(h < 0.0); }
            if q == p { prop_assert_eq!(h, 0.0); }
        }

        #[test]
        fn anchored_identities(x in 0.0f64..=1.0) {
            prop_assert_eq!(hop_label(0.0, x).unwrap(), x);
            prop_assert!((hop_label(1.0, x).unwrap() - (x - 1.0)).abs() <= 1e-15);
        }
    }
}
