//! Global progress reconstruction from predicted hops.
//!
//! Three estimates are kept per state: the incremental recursion over
//! consecutive hops, the forward estimate anchored at the initial state and
//! the backward estimate anchored at the goal. They are fused by averaging,
//! or combined by the consistency-gated conservative update, which trusts a
//! step only as far as the two anchored estimates agree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predictor::{Anchor, HopPredictor, HopQuery, PredictError};
use crate::trajectory::SampledSequence;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("progress {0} outside [0, 1]")]
    ProgressDomain(f64),
    #[error("hop {0} outside [-1, 1]")]
    HopDomain(f64),
    #[error("sequence must contain at least two states")]
    SequenceTooShort,
    #[error("state order must be a permutation of 0..={last}")]
    BadOrder { last: usize },
    #[error(
        "predictor failed at t = {t} ({anchor} query, frame {before_frame} -> {after_frame}): {source}"
    )]
    Predictor {
        t: usize,
        anchor: Anchor,
        before_frame: usize,
        after_frame: usize,
        #[source]
        source: PredictError,
    },
    #[error("predictor returned {hop} outside [-1, 1] at t = {t} ({anchor} query)")]
    PredictorRange { t: usize, anchor: Anchor, hop: f64 },
}

fn check_progress(p: f64) -> Result<(), EngineError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(EngineError::ProgressDomain(p))
    }
}

fn check_hop(h: f64) -> Result<(), EngineError> {
    if (-1.0..=1.0).contains(&h) {
        Ok(())
    } else {
        Err(EngineError::HopDomain(h))
    }
}

/// Progress change implied by `hop` from progress `prev`.
pub fn hop_to_delta(prev: f64, hop: f64) -> Result<f64, EngineError> {
    check_progress(prev)?;
    check_hop(hop)?;
    Ok(if hop >= 0.0 {
        (1.0 - prev) * hop
    } else {
        prev * hop
    })
}

/// One step of the incremental recursion. Stays in `[0, 1]` for any hop in
/// `[-1, 1]`; no clamping is applied.
pub fn incremental_step(prev: f64, hop: f64) -> Result<f64, EngineError> {
    Ok(prev + hop_to_delta(prev, hop)?)
}

fn clamp_unit(x: f64, clamp: bool) -> f64 {
    if clamp {
        x.clamp(0.0, 1.0)
    } else {
        x
    }
}

/// Progress from a hop measured against the initial state.
pub fn forward_anchored(hop_from_init: f64, clamp: bool) -> f64 {
    clamp_unit(hop_from_init, clamp)
}

/// Progress from a hop measured against the goal state.
pub fn backward_anchored(hop_from_goal: f64, clamp: bool) -> f64 {
    clamp_unit(1.0 + hop_from_goal, clamp)
}

pub fn fuse_mean(phi_inc: f64, phi_fwd: f64, phi_bwd: f64) -> f64 {
    (phi_inc + phi_fwd + phi_bwd) / 3.0
}

/// Forward/backward disagreement relative to their mean.
pub fn normalized_discrepancy(phi_fwd: f64, phi_bwd: f64, stability_epsilon: f64) -> f64 {
    (phi_bwd - phi_fwd).abs() / ((phi_fwd + phi_bwd) / 2.0 + stability_epsilon)
}

/// Gaussian confidence `exp(-sensitivity * delta_norm^2)`.
pub fn confidence_weight(delta_norm: f64, sensitivity: f64) -> f64 {
    (-sensitivity * delta_norm * delta_norm).exp()
}

pub fn conservative_update(
    prev_phi: f64,
    mean_phi: f64,
    delta_inc: f64,
    weight: f64,
    clamp: bool,
) -> f64 {
    clamp_unit(
        prev_phi + weight / 2.0 * (mean_phi - prev_phi + delta_inc),
        clamp,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Incremental,
    Forward,
    Backward,
    FusedMean,
    Conservative,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Incremental,
        Mode::Forward,
        Mode::Backward,
        Mode::FusedMean,
        Mode::Conservative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Incremental => "incremental",
            Mode::Forward => "forward",
            Mode::Backward => "backward",
            Mode::FusedMean => "fused_mean",
            Mode::Conservative => "conservative",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub mode: Mode,
    /// Gaussian kernel sensitivity of the confidence weight.
    pub consistency_sensitivity: f64,
    /// Stabilizer in the discrepancy denominator.
    pub stability_epsilon: f64,
    /// Clamp anchored, fused and conservative outputs to `[0, 1]`.
    pub clamp_outputs: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::FusedMean,
            consistency_sensitivity: 1.0,
            stability_epsilon: 1e-6,
            clamp_outputs: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressPoint {
    pub state_index: usize,
    pub hop_inc: f64,
    pub hop_fwd: f64,
    pub hop_bwd: f64,
    pub phi_inc: f64,
    pub phi_fwd: f64,
    pub phi_bwd: f64,
    pub phi_fused: f64,
    pub phi_conservative: f64,
    pub delta_inc: f64,
    pub discrepancy: f64,
    pub weight: f64,
}

impl ProgressPoint {
    pub fn phi(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Incremental => self.phi_inc,
            Mode::Forward => self.phi_fwd,
            Mode::Backward => self.phi_bwd,
            Mode::FusedMean => self.phi_fused,
            Mode::Conservative => self.phi_conservative,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressSeries {
    pub trajectory_id: String,
    pub mode: Mode,
    pub points: Vec<ProgressPoint>,
}

impl ProgressSeries {
    /// Progress of the configured mode.
    pub fn values(&self) -> Vec<f64> {
        self.values_of(self.mode)
    }

    pub fn values_of(&self, mode: Mode) -> Vec<f64> {
        self.points.iter().map(|p| p.phi(mode)).collect()
    }
}

/// Reconstruct progress for every state of `seq` in temporal order.
pub fn reconstruct<P: HopPredictor + ?Sized>(
    predictor: &P,
    seq: &SampledSequence,
    cfg: &EngineConfig,
) -> Result<ProgressSeries, EngineError> {
    let order: Vec<usize> = (0..seq.states().len()).collect();
    reconstruct_in_order(predictor, seq, &order, cfg)
}

/// Reconstruct progress while visiting the states of `seq` in `order`.
///
/// The anchors stay the sequence's own initial and goal states whatever the
/// visiting order, so a reversed order replays the same task backwards.
/// The incremental estimate starts at 0. The anchored estimates are queried
/// at every step including the first, and the conservative state starts at
/// their mean. At the first step the discrepancy is 0 and the weight 1.
pub fn reconstruct_in_order<P: HopPredictor + ?Sized>(
    predictor: &P,
    seq: &SampledSequence,
    order: &[usize],
    cfg: &EngineConfig,
) -> Result<ProgressSeries, EngineError> {
    let states = seq.states();
    if states.len() < 2 {
        return Err(EngineError::SequenceTooShort);
    }
    let last = seq.last_index();
    let mut seen = vec![false; states.len()];
    if order.len() != states.len() {
        return Err(EngineError::BadOrder { last });
    }
    for &i in order {
        if i > last || std::mem::replace(&mut seen[i], true) {
            return Err(EngineError::BadOrder { last });
        }
    }

    let ask = |t: usize, anchor: Anchor, before: usize, after: usize| -> Result<f64, EngineError> {
        let query = HopQuery {
            task_description: seq.task_description(),
            state_init: seq.initial(),
            state_goal: seq.goal(),
            state_before: &states[before],
            state_after: &states[after],
            anchor,
            before_index: before,
            after_index: after,
            last_index: last,
        };
        let hop = predictor
            .predict_hop(&query)
            .map_err(|source| EngineError::Predictor {
                t,
                anchor,
                before_frame: states[before].frame_index,
                after_frame: states[after].frame_index,
                source,
            })?;
        if !(-1.0..=1.0).contains(&hop) {
            return Err(EngineError::PredictorRange { t, anchor, hop });
        }
        Ok(hop)
    };

    let clamp = cfg.clamp_outputs;
    let mut points = Vec::with_capacity(order.len());
    for (t, &cur) in order.iter().enumerate() {
        let hop_fwd = ask(t, Anchor::Forward, 0, cur)?;
        let hop_bwd = ask(t, Anchor::Backward, last, cur)?;
        let phi_fwd = forward_anchored(hop_fwd, clamp);
        let phi_bwd = backward_anchored(hop_bwd, clamp);
        let mean = (phi_fwd + phi_bwd) / 2.0;

        let point = match points.last() {
            None => ProgressPoint {
                state_index: cur,
                hop_inc: 0.0,
                hop_fwd,
                hop_bwd,
                phi_inc: 0.0,
                phi_fwd,
                phi_bwd,
                phi_fused: clamp_unit(fuse_mean(0.0, phi_fwd, phi_bwd), clamp),
                phi_conservative: clamp_unit(mean, clamp),
                delta_inc: 0.0,
                discrepancy: 0.0,
                weight: 1.0,
            },
            Some(prev) => {
                let prev: &ProgressPoint = prev;
                let hop_inc = ask(t, Anchor::Incremental, order[t - 1], cur)?;
                let delta_inc = hop_to_delta(prev.phi_inc, hop_inc)?;
                let phi_inc = prev.phi_inc + delta_inc;
                let discrepancy = normalized_discrepancy(phi_fwd, phi_bwd, cfg.stability_epsilon);
                let weight = confidence_weight(discrepancy, cfg.consistency_sensitivity);
                ProgressPoint {
                    state_index: cur,
                    hop_inc,
                    hop_fwd,
                    hop_bwd,
                    phi_inc,
                    phi_fwd,
                    phi_bwd,
                    phi_fused: clamp_unit(fuse_mean(phi_inc, phi_fwd, phi_bwd), clamp),
                    phi_conservative: conservative_update(
                        prev.phi_conservative,
                        mean,
                        delta_inc,
                        weight,
                        clamp,
                    ),
                    delta_inc,
                    discrepancy,
                    weight,
                }
            }
        };
        points.push(point);
    }

    Ok(ProgressSeries {
        trajectory_id: seq.trajectory_id().to_string(),
        mode: cfg.mode,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{ConstantPredictor, OraclePredictor};
    use crate::trajectory::{sample_sequence, Trajectory};
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn seq(frames: usize, keys: Vec<usize>, chunk: usize) -> SampledSequence {
        let t = Trajectory::new("e", "open drawer", vec!["cam0".into()], frames, keys).unwrap();
        sample_sequence(&t, chunk).unwrap()
    }

    #[test]
    fn delta_and_step_fixtures() {
        assert_eq!(hop_to_delta(0.5, 0.5).unwrap(), 0.25);
        assert_eq!(hop_to_delta(0.5, -0.5).unwrap(), -0.25);
        assert_eq!(hop_to_delta(0.0, -1.0).unwrap(), 0.0);
        assert_eq!(incremental_step(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(incremental_step(0.75, -1.0).unwrap(), 0.0);
        assert_eq!(incremental_step(0.5, 0.5).unwrap(), 0.75);
        assert!(matches!(hop_to_delta(1.2, 0.0), Err(EngineError::ProgressDomain(_))));
        assert!(matches!(hop_to_delta(0.2, -1.5), Err(EngineError::HopDomain(_))));
        assert!(hop_to_delta(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn anchored_fixtures() {
        assert_eq!(forward_anchored(0.3, true), 0.3);
        assert_eq!(forward_anchored(-0.2, true), 0.0);
        assert_eq!(forward_anchored(-0.2, false), -0.2);
        assert!((backward_anchored(-0.4, true) - 0.6).abs() < TOL);
        assert_eq!(backward_anchored(0.0, true), 1.0);
        assert_eq!(backward_anchored(0.3, true), 1.0);
        assert_eq!(backward_anchored(0.3, false), 1.3);
    }

    #[test]
    fn fusion_and_consistency_fixtures() {
        assert!((fuse_mean(0.2, 0.3, 0.4) - 0.3).abs() < TOL);
        assert!((fuse_mean(0.7, 0.7, 0.7) - 0.7).abs() < TOL);
        assert_eq!(fuse_mean(0.0, 1.0, 0.5), 0.5);

        assert_eq!(normalized_discrepancy(0.5, 0.5, 1e-6), 0.0);
        assert!((normalized_discrepancy(0.4, 0.6, 1e-6) - 0.2 / (0.5 + 1e-6)).abs() < TOL);
        assert_eq!(normalized_discrepancy(0.0, 0.0, 1e-6), 0.0);

        assert_eq!(confidence_weight(0.0, 3.0), 1.0);
        assert!((confidence_weight(1.0, 1.0) - 0.367_879_441_171_442_3).abs() < TOL);
        assert!((confidence_weight(2.0, 1.0) - 0.018_315_638_888_734_18).abs() < TOL);

        assert!((conservative_update(0.5, 0.6, 0.05, 1.0, true) - 0.575).abs() < TOL);
        assert_eq!(conservative_update(0.5, 0.9, 0.3, 0.0, true), 0.5);
        assert!((conservative_update(0.5, 0.9, 0.3, 1e-300, true) - 0.5).abs() < TOL);
        assert_eq!(conservative_update(0.3, 0.3, 0.0, 1.0, true), 0.3);
    }

    #[test]
    fn oracle_reconstruction_is_exact() {
        let s = seq(300, vec![0, 50, 170, 299], 3);
        for mode in Mode::ALL {
            let cfg = EngineConfig {
                mode,
                ..EngineConfig::default()
            };
            let series = reconstruct(&OraclePredictor, &s, &cfg).unwrap();
            let gt = s.ground_truth();
            for (v, g) in series.values().iter().zip(&gt) {
                assert!((v - g).abs() <= TOL, "{mode}: {v} vs {g}");
            }
        }
    }

    #[test]
    fn zero_predictor() {
        let s = seq(40, vec![0, 20, 39], 4);
        let series = reconstruct(&ConstantPredictor(0.0), &s, &EngineConfig::default()).unwrap();
        for p in &series.points {
            assert_eq!(p.phi_inc, 0.0);
            assert_eq!(p.phi_fwd, 0.0);
            // hop 0 from the goal reads as "at the goal"
            assert_eq!(p.phi_bwd, 1.0);
            assert!((p.phi_fused - 1.0 / 3.0).abs() < TOL);
        }
    }

    #[test]
    fn full_hops_reach_goal() {
        let s = seq(40, vec![0, 39], 4);
        let series = reconstruct(&ConstantPredictor(1.0), &s, &EngineConfig::default()).unwrap();
        assert_eq!(series.points[0].phi_inc, 0.0);
        assert!(series.points[1..].iter().all(|p| p.phi_inc == 1.0));
    }

    #[test]
    fn first_point_conventions() {
        let s = seq(40, vec![0, 39], 4);
        let series = reconstruct(&OraclePredictor, &s, &EngineConfig::default()).unwrap();
        let p0 = series.points[0];
        assert_eq!((p0.discrepancy, p0.weight), (0.0, 1.0));
        for mode in Mode::ALL {
            assert_eq!(p0.phi(mode), 0.0);
        }
    }

    #[test]
    fn bad_order_rejected() {
        let s = seq(40, vec![0, 39], 4);
        let cfg = EngineConfig::default();
        let n = s.states().len();
        let mut order: Vec<usize> = (0..n).collect();
        order[1] = 0;
        assert!(matches!(
            reconstruct_in_order(&OraclePredictor, &s, &order, &cfg),
            Err(EngineError::BadOrder { .. })
        ));
        assert!(reconstruct_in_order(&OraclePredictor, &s, &order[..2], &cfg).is_err());
    }

    #[test]
    fn mode_parsing() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("mean".parse::<Mode>().is_err());
    }

    proptest! {
        #[test]
        fn incremental_bounded_with_closed_forms(
            hops in proptest::collection::vec(-1.0f64..=1.0, 1..256)
        ) {
            let mut g = 0.0;
            for h in hops {
                let next = incremental_step(g, h).unwrap();
                prop_assert!((0.0..=1.0).contains(&next));
                let closed = if h >= 0.0 { h + g * (1.0 - h) } else { g * (1.0 + h) };
                prop_assert!((next - closed).abs() <= 1e-15);
                g = next;
            }
        }

        #[test]
        fn incremental_monotone_in_hop(prev in 0.0f64..=1.0, a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(incremental_step(prev, lo).unwrap() <= incremental_step(prev, hi).unwrap());
        }

        #[test]
        fn weight_strictly_decreasing(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, alpha in 0.1f64..10.0) {
            prop_assume!((d1 - d2).abs() > 1e-6);
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(confidence_weight(hi, alpha) < confidence_weight(lo, alpha));
            prop_assert!(confidence_weight(hi, alpha) > 0.0);
            prop_assert!(confidence_weight(hi, alpha + 0.5) < confidence_weight(hi, alpha));
        }

        #[test]
        fn zero_weight_freezes_state(prev in 0.0f64..=1.0, mean in 0.0f64..=1.0, delta in -1.0f64..=1.0) {
            prop_assert_eq!(conservative_update(prev, mean, delta, 0.0, true), prev);
        }
    }
}
