//! Hop predictors: the interface standing in for the vision-language model,
//! simulated reference predictors, and predictor spec parsing.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::ExternalPredictor;
use crate::labeler::{hop_bin, hop_label};
use crate::seed::{mix_seed, splitmix64};
use crate::trajectory::StateObservation;

/// Which reference the AFTER state is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    /// Previous state to current state.
    Incremental,
    /// Initial state to current state.
    Forward,
    /// Goal state to current state.
    Backward,
}

impl Anchor {
    pub fn as_str(self) -> &'static str {
        match self {
            Anchor::Incremental => "incremental",
            Anchor::Forward => "forward",
            Anchor::Backward => "backward",
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single hop query.
///
/// The `*_index` fields locate BEFORE and AFTER in the sampled sequence
/// (`last_index` is `M`). They exist for simulated predictors and are never
/// sent to external workers.
#[derive(Debug, Clone, Copy)]
pub struct HopQuery<'a> {
    pub task_description: &'a str,
    pub state_init: &'a StateObservation,
    pub state_goal: &'a StateObservation,
    pub state_before: &'a StateObservation,
    pub state_after: &'a StateObservation,
    pub anchor: Anchor,
    pub before_index: usize,
    pub after_index: usize,
    pub last_index: usize,
}

impl HopQuery<'_> {
    /// Ground-truth hop between BEFORE and AFTER.
    pub fn oracle_hop(&self) -> f64 {
        let m = self.last_index as f64;
        hop_label(self.before_index as f64 / m, self.after_index as f64 / m)
            .expect("sequence indices map into [0, 1]")
    }

    /// Wire form of the query.
    pub fn to_request(&self) -> WorkerRequest<'_> {
        WorkerRequest {
            task: self.task_description,
            init: self.state_init,
            goal: self.state_goal,
            before: self.state_before,
            after: self.state_after,
            anchor: self.anchor,
        }
    }
}

/// One request line of the worker protocol.
#[derive(Debug, Serialize)]
pub struct WorkerRequest<'a> {
    pub task: &'a str,
    pub init: &'a StateObservation,
    pub goal: &'a StateObservation,
    pub before: &'a StateObservation,
    pub after: &'a StateObservation,
    pub anchor: Anchor,
}

/// Owned request, as decoded on the worker side.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct OwnedWorkerRequest {
    pub task: String,
    pub init: StateObservation,
    pub goal: StateObservation,
    pub before: StateObservation,
    pub after: StateObservation,
    pub anchor: Anchor,
}

/// One response line of the worker protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerResponse {
    pub hop: f64,
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("failed to spawn worker `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("worker timed out after {timeout:?} on query {query}")]
    Timeout { timeout: Duration, query: String },
    #[error("malformed worker response {line:?} to query {query}: {reason}")]
    Malformed {
        line: String,
        reason: String,
        query: String,
    },
    #[error("worker returned hop {hop} outside [-1, 1] for query {query}")]
    OutOfRange { hop: f64, query: String },
    #[error("worker exited before answering query {query}")]
    WorkerClosed { query: String },
    #[error("worker i/o failure on query {query}: {source}")]
    Io {
        query: String,
        #[source]
        source: std::io::Error,
    },
}

/// Abstraction over anything that maps a query to a hop in `[-1, 1]`.
pub trait HopPredictor {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError>;

    /// Whether concurrent queries from several threads are served
    /// independently. External workers are a single serialized channel.
    fn concurrent_safe(&self) -> bool {
        true
    }
}

impl<P: HopPredictor + ?Sized> HopPredictor for Box<P> {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError> {
        (**self).predict_hop(query)
    }

    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
}

/// Returns the ground-truth hop.
#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePredictor;

impl HopPredictor for OraclePredictor {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError> {
        Ok(query.oracle_hop())
    }
}

/// Returns the same hop for every query.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPredictor(pub f64);

impl HopPredictor for ConstantPredictor {
    fn predict_hop(&self, _query: &HopQuery<'_>) -> Result<f64, PredictError> {
        Ok(self.0)
    }
}

/// Oracle plus Gaussian noise, clipped to `[-1, 1]`.
///
/// The draw is keyed on the seed and the query identity (trajectory, BEFORE
/// and AFTER frames, anchor), so repeated queries agree bit for bit.
#[derive(Debug, Clone)]
pub struct NoisyPredictor {
    noise: Normal<f64>,
    seed: u64,
}

impl NoisyPredictor {
    pub fn new(sigma: f64, seed: u64) -> Result<Self, SpecError> {
        let noise = Normal::new(0.0, sigma).map_err(|_| SpecError::Sigma(sigma))?;
        if !sigma.is_finite() {
            return Err(SpecError::Sigma(sigma));
        }
        Ok(Self { noise, seed })
    }

    fn stream(&self, q: &HopQuery<'_>) -> ChaCha8Rng {
        let mut s = mix_seed(self.seed, &q.state_before.trajectory_id);
        s = splitmix64(s ^ q.state_before.frame_index as u64);
        s = splitmix64(s ^ (q.state_after.frame_index as u64).rotate_left(32));
        s = mix_seed(s, q.anchor.as_str());
        ChaCha8Rng::seed_from_u64(s)
    }
}

impl HopPredictor for NoisyPredictor {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError> {
        let draw = self.noise.sample(&mut self.stream(query));
        Ok((query.oracle_hop() + draw).clamp(-1.0, 1.0))
    }
}

/// Oracle snapped to the nearest of `n_bins` uniform bin centers on `[-1, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct QuantizedPredictor {
    n_bins: usize,
}

impl QuantizedPredictor {
    pub fn new(n_bins: usize) -> Result<Self, SpecError> {
        if n_bins == 0 {
            return Err(SpecError::Bins);
        }
        Ok(Self { n_bins })
    }

    pub fn quantize(&self, hop: f64) -> f64 {
        let width = 2.0 / self.n_bins as f64;
        -1.0 + (hop_bin(hop, self.n_bins) as f64 + 0.5) * width
    }
}

impl HopPredictor for QuantizedPredictor {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError> {
        Ok(self.quantize(query.oracle_hop()))
    }
}

/// Out-of-distribution window as fractions of the trajectory: AFTER states
/// with `start <= i / M < end` are inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OodWindow {
    pub start: f64,
    pub end: f64,
}

impl OodWindow {
    pub fn new(start: f64, end: f64) -> Result<Self, SpecError> {
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
            return Err(SpecError::Window { start, end });
        }
        Ok(Self { start, end })
    }

    /// State index range `[lo, hi)` covered in a sequence with last index `last`.
    pub fn index_range(&self, last: usize) -> std::ops::Range<usize> {
        let lo = (self.start * last as f64).ceil() as usize;
        let hi = (self.end * last as f64).ceil() as usize;
        let hi = if self.end >= 1.0 { last + 1 } else { hi };
        lo..hi.max(lo)
    }

    pub fn contains(&self, index: usize, last: usize) -> bool {
        self.index_range(last).contains(&index)
    }
}

/// Oracle outside the window. Inside, forward-anchored hops are raised and
/// backward-anchored hops lowered by half the divergence, so the two anchored
/// progress estimates disagree by about `divergence`. Optionally incremental
/// hops inside the window are raised by half the divergence as well.
#[derive(Debug, Clone, Copy)]
pub struct OodPredictor {
    window: OodWindow,
    divergence: f64,
    corrupt_incremental: bool,
}

impl OodPredictor {
    pub fn new(
        window: OodWindow,
        divergence: f64,
        corrupt_incremental: bool,
    ) -> Result<Self, SpecError> {
        if !(0.0..=2.0).contains(&divergence) {
            return Err(SpecError::Divergence(divergence));
        }
        Ok(Self {
            window,
            divergence,
            corrupt_incremental,
        })
    }

    pub fn window(&self) -> OodWindow {
        self.window
    }
}

impl HopPredictor for OodPredictor {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError> {
        let hop = query.oracle_hop();
        if !self.window.contains(query.after_index, query.last_index) {
            return Ok(hop);
        }
        let shift = self.divergence / 2.0;
        let out = match query.anchor {
            Anchor::Forward => hop + shift,
            Anchor::Backward => hop - shift,
            Anchor::Incremental if self.corrupt_incremental => hop + shift,
            Anchor::Incremental => hop,
        };
        Ok(out.clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("unknown predictor kind `{0}`")]
    UnknownKind(String),
    #[error("malformed predictor spec `{spec}`: {reason}")]
    Malformed { spec: String, reason: String },
    #[error("noise sigma {0} must be finite and nonnegative")]
    Sigma(f64),
    #[error("quantized predictor needs at least one bin")]
    Bins,
    #[error("invalid OOD window [{start}, {end})")]
    Window { start: f64, end: f64 },
    #[error("OOD divergence {0} must lie in [0, 2]")]
    Divergence(f64),
    #[error("constant hop {0} must lie in [-1, 1]")]
    ConstantHop(f64),
}

/// Predictor configuration, parsed from strings such as `oracle`,
/// `noisy:0.05,7`, `quantized:20`, `ood:0.4-0.6,0.6[,inc]`, `constant:0`
/// or `external:<command line>`.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    Oracle,
    Constant {
        hop: f64,
    },
    Noisy {
        sigma: f64,
        seed: Option<u64>,
    },
    Quantized {
        n_bins: usize,
    },
    Ood {
        window: OodWindow,
        divergence: f64,
        corrupt_incremental: bool,
    },
    External {
        command: String,
        timeout: Duration,
    },
}

pub const DEFAULT_WORKER_TIMEOUT: Duration = Duration::from_secs(60);

impl PredictorSpec {
    /// Instantiate the predictor. `default_seed` is used by stochastic
    /// predictors whose spec does not carry its own seed.
    pub fn build(&self, default_seed: u64) -> Result<Box<dyn HopPredictor + Send + Sync>, BuildError> {
        Ok(match self {
            PredictorSpec::Oracle => Box::new(OraclePredictor),
            PredictorSpec::Constant { hop } => Box::new(ConstantPredictor(*hop)),
            PredictorSpec::Noisy { sigma, seed } => {
                Box::new(NoisyPredictor::new(*sigma, seed.unwrap_or(default_seed))?)
            }
            PredictorSpec::Quantized { n_bins } => Box::new(QuantizedPredictor::new(*n_bins)?),
            PredictorSpec::Ood {
                window,
                divergence,
                corrupt_incremental,
            } => Box::new(OodPredictor::new(*window, *divergence, *corrupt_incremental)?),
            PredictorSpec::External { command, timeout } => {
                Box::new(ExternalPredictor::spawn(command, *timeout)?)
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PredictorSpec::Oracle => "oracle",
            PredictorSpec::Constant { .. } => "constant",
            PredictorSpec::Noisy { .. } => "noisy",
            PredictorSpec::Quantized { .. } => "quantized",
            PredictorSpec::Ood { .. } => "ood",
            PredictorSpec::External { .. } => "external",
        }
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

fn parse_num<T: FromStr>(spec: &str, field: &str, raw: &str) -> Result<T, SpecError> {
    raw.trim().parse().map_err(|_| SpecError::Malformed {
        spec: spec.to_string(),
        reason: format!("cannot parse {field} from `{raw}`"),
    })
}

impl FromStr for PredictorSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let malformed = |reason: &str| SpecError::Malformed {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = args.map(|a| a.split(',').collect()).unwrap_or_default();
        match kind {
            "oracle" => Ok(PredictorSpec::Oracle),
            "constant" => {
                let hop: f64 = match parts.as_slice() {
                    [h] => parse_num(s, "hop", h)?,
                    _ => return Err(malformed("expected constant:<hop>")),
                };
                if !(-1.0..=1.0).contains(&hop) {
                    return Err(SpecError::ConstantHop(hop));
                }
                Ok(PredictorSpec::Constant { hop })
            }
            "noisy" => {
                let (sigma, seed) = match parts.as_slice() {
                    [sigma] => (parse_num(s, "sigma", sigma)?, None),
                    [sigma, seed] => (parse_num(s, "sigma", sigma)?, Some(parse_num(s, "seed", seed)?)),
                    _ => return Err(malformed("expected noisy:<sigma>[,<seed>]")),
                };
                if !(sigma >= 0.0 && f64::is_finite(sigma)) {
                    return Err(SpecError::Sigma(sigma));
                }
                Ok(PredictorSpec::Noisy { sigma, seed })
            }
            "quantized" => match parts.as_slice() {
                [n] => {
                    let n_bins: usize = parse_num(s, "bin count", n)?;
                    if n_bins == 0 {
                        return Err(SpecError::Bins);
                    }
                    Ok(PredictorSpec::Quantized { n_bins })
                }
                _ => Err(malformed("expected quantized:<bins>")),
            },
            "ood" => {
                let (window, div, corrupt) = match parts.as_slice() {
                    [w, d] => (*w, *d, false),
                    [w, d, "inc"] => (*w, *d, true),
                    _ => return Err(malformed("expected ood:<start>-<end>,<divergence>[,inc]")),
                };
                let (a, b) = window
                    .split_once('-')
                    .ok_or_else(|| malformed("window must be <start>-<end>"))?;
                let window = OodWindow::new(parse_num(s, "window start", a)?, parse_num(s, "window end", b)?)?;
                let divergence: f64 = parse_num(s, "divergence", div)?;
                if !(0.0..=2.0).contains(&divergence) {
                    return Err(SpecError::Divergence(divergence));
                }
                Ok(PredictorSpec::Ood {
                    window,
                    divergence,
                    corrupt_incremental: corrupt,
                })
            }
            "external" => {
                let command = args.map(str::trim).unwrap_or_default();
                if command.is_empty() {
                    return Err(malformed("expected external:<command>"));
                }
                Ok(PredictorSpec::External {
                    command: command.to_string(),
                    timeout: DEFAULT_WORKER_TIMEOUT,
                })
            }
            other => Err(SpecError::UnknownKind(other.to_string())),
        }
    }
}
