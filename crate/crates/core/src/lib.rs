//! Dense temporal value estimation from hop-normalized progress.
//!
//! - [`trajectory`]: keyframe segmentation and dense state sampling
//! - [`labeler`]: hop labels and balanced hop-sample datasets
//! - [`predictor`] / [`bridge`]: the hop-predictor interface, simulated
//!   predictors and the external worker bridge
//! - [`engine`]: incremental, anchored, fused and conservative progress
//! - [`geometry`]: `(u, v, d)` traces, pinhole projection and trace metrics
//! - [`metrics`]: value-order correlation and error statistics
//! - [`simulate`]: synthetic trajectories

pub mod bridge;
pub mod engine;
pub mod geometry;
pub mod labeler;
pub mod metrics;
pub mod predictor;
pub mod seed;
pub mod simulate;
pub mod trajectory;

pub use engine::{reconstruct, EngineConfig, Mode, ProgressPoint, ProgressSeries};
pub use labeler::{build_hop_samples, hop_label, HopSample, LabelerConfig};
pub use predictor::{Anchor, HopPredictor, HopQuery, PredictorSpec};
pub use trajectory::{sample_sequence, SampledSequence, StateObservation, Trajectory};
