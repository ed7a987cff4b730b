use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hoplab_core::engine::{reconstruct, EngineConfig, Mode, ProgressSeries};
use hoplab_core::geometry::{
    evaluate_trace, trace_rmse, CameraIntrinsics, RmseNormalization, DEFAULT_RESAMPLE_POINTS,
};
use hoplab_core::labeler::{build_hop_samples, validate_balance, HopSample, LabelerConfig};
use hoplab_core::metrics::{mae, reverse_voc, terminal_drift, VocReport};
use hoplab_core::predictor::{HopPredictor, PredictorSpec};
use hoplab_core::simulate::{simulate, SimulationConfig};
use hoplab_core::trajectory::{sample_sequence, SampledSequence, Trajectory};
use serde_json::json;

use crate::error::CliError;
use crate::io::{self, ProgressRow, TraceEvalRow, VocRow};
use crate::output::{write_artifact, Manifest};
use crate::{effective_seed, map_lanes};

#[derive(Debug, Parser)]
#[command(name = "hoplab", version, about = "Hop-based dense progress estimation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic trajectories.
    Simulate(SimulateArgs),
    /// Emit balanced hop samples for every trajectory.
    Label(LabelArgs),
    /// Reconstruct progress with a hop predictor.
    Reconstruct(ReconstructArgs),
    /// Score reconstructed progress against ground truth.
    Evaluate(EvaluateArgs),
    /// Check predicted traces against a scene.
    TraceEval(TraceEvalArgs),
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    match s.split_once("..") {
        Some((a, b)) => Ok(parse(a)?..=parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            Ok(v..=v)
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Frames per view, `A..B` or a single value.
    #[arg(long, default_value = "50..500", value_parser = parse_range)]
    pub frames: std::ops::RangeInclusive<usize>,
    /// Keyframe segments per trajectory, `A..B` or a single value.
    #[arg(long, default_value = "2..8", value_parser = parse_range)]
    pub segments: std::ops::RangeInclusive<usize>,
    #[arg(long, default_value_t = 3)]
    pub views: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Chunk size used for dense state sampling.
    #[arg(long, default_value_t = 10)]
    pub chunk: usize,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub n_hop: usize,
    #[arg(long, default_value_t = 4)]
    pub n_dis: usize,
    #[arg(long, default_value_t = 0.2)]
    pub zero_frac: f64,
    #[arg(long, default_value_t = 0.01)]
    pub zero_eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Predictor: oracle, constant:H, noisy:SIGMA[,SEED], quantized:N,
    /// ood:START-END,DIV[,inc] or external:COMMAND.
    #[arg(long, default_value = "oracle")]
    pub predictor: String,
    #[arg(long, default_value = "fused_mean")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    pub sensitivity: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub stability_eps: f64,
    /// Leave anchored, fused and conservative outputs unclamped.
    #[arg(long)]
    pub no_clamp: bool,
    /// Seed for stochastic predictors that do not carry their own.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-query timeout of external workers, seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
}

impl EngineArgs {
    fn engine_config(&self) -> Result<EngineConfig, CliError> {
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(CliError::Config("sensitivity must be positive".into()));
        }
        if !(self.stability_eps > 0.0 && self.stability_eps.is_finite()) {
            return Err(CliError::Config("stability epsilon must be positive".into()));
        }
        Ok(EngineConfig {
            mode: self.mode,
            consistency_sensitivity: self.sensitivity,
            stability_epsilon: self.stability_eps,
            clamp_outputs: !self.no_clamp,
        })
    }

    fn predictor_spec(&self) -> Result<PredictorSpec, CliError> {
        let mut spec: PredictorSpec = self
            .predictor
            .parse()
            .map_err(|e: hoplab_core::predictor::SpecError| CliError::Config(e.to_string()))?;
        if let PredictorSpec::External { timeout, .. } = &mut spec {
            if !(self.timeout > 0.0 && self.timeout.is_finite()) {
                return Err(CliError::Config("timeout must be positive".into()));
            }
            *timeout = std::time::Duration::from_secs_f64(self.timeout);
        }
        Ok(spec)
    }

    fn manifest_config(&self, cfg: &EngineConfig, seed: u64) -> serde_json::Value {
        json!({
            "predictor": self.predictor,
            "engine": cfg,
            "seed": seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub progress: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Also score the time-reversed footage with this predictor.
    #[arg(long)]
    pub predictor: Option<String>,
    #[arg(long, default_value = "fused_mean")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    pub sensitivity: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub stability_eps: f64,
    #[arg(long)]
    pub no_clamp: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct TraceEvalArgs {
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long)]
    pub scene: PathBuf,
    /// `fx,fy,cx,cy` in pixels.
    #[arg(long)]
    pub intrinsics: String,
    /// Reference traces (same ids) for the normalized RMSE column.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Label(a) => cmd_label(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::TraceEval(a) => cmd_trace_eval(a),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let seed = effective_seed(a.seed)?;
    let cfg = SimulationConfig {
        n_trajectories: a.n,
        frame_count: a.frames.clone(),
        segments: a.segments.clone(),
        n_views: a.views,
        seed,
    };
    let trajs = simulate(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let records: Vec<_> = trajs.iter().map(Trajectory::to_record).collect();
    let manifest = Manifest::new(
        "simulate",
        "trajectory/v1",
        &a.out,
        &[],
        records.len(),
        json!({
            "n": a.n,
            "frames": [a.frames.start(), a.frames.end()],
            "segments": [a.segments.start(), a.segments.end()],
            "views": a.views,
            "seed": seed,
        }),
    );
    write_artifact(&a.out, &io::to_jsonl(&records), &manifest)
}

fn sample_all(
    path: &Path,
    trajs: &[Trajectory],
    chunk: usize,
) -> Result<Vec<SampledSequence>, CliError> {
    trajs
        .iter()
        .enumerate()
        .map(|(i, t)| sample_sequence(t, chunk).map_err(|e| CliError::schema(path, i + 1, e)))
        .collect()
}

fn cmd_label(a: LabelArgs) -> Result<(), CliError> {
    let seed = effective_seed(a.seed)?;
    let cfg = LabelerConfig {
        n_hop_bins: a.n_hop,
        n_distance_bins: a.n_dis,
        zero_hop_fraction: a.zero_frac,
        zero_hop_threshold: a.zero_eps,
        rng_seed: seed,
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let trajs = io::read_trajectories(&a.input)?;
    let seqs = sample_all(&a.input, &trajs, a.sampling.chunk)?;
    let sets = map_lanes(
        &seqs,
        a.jobs,
        || Ok(()),
        |_, seq| {
            build_hop_samples(seq, &cfg)
                .map_err(|e| CliError::Operation(format!("{}: {e}", seq.trajectory_id())))
        },
    )?;

    let mut samples: Vec<HopSample> = Vec::new();
    let mut infeasible = serde_json::Map::new();
    for (seq, set) in seqs.iter().zip(sets) {
        let report = validate_balance(&set.samples, &cfg);
        if !report.is_balanced() {
            return Err(CliError::Operation(format!(
                "{}: unbalanced bins {:?}",
                seq.trajectory_id(),
                report.imbalanced_bins
            )));
        }
        if !set.infeasible_bins.is_empty() {
            infeasible.insert(seq.trajectory_id().to_string(), json!(set.infeasible_bins));
        }
        samples.extend(set.samples);
    }
    let manifest = Manifest::new(
        "label",
        "hop-sample/v1",
        &a.out,
        &[&a.input],
        samples.len(),
        json!({ "labeler": cfg, "chunk": a.sampling.chunk, "infeasible_bins": infeasible }),
    );
    write_artifact(&a.out, &io::to_jsonl(&samples), &manifest)
}

type SharedPredictor = Box<dyn HopPredictor + Send + Sync>;

fn build_predictor(spec: &PredictorSpec, seed: u64) -> Result<SharedPredictor, CliError> {
    spec.build(seed).map_err(|e| match e {
        hoplab_core::predictor::BuildError::Spec(s) => CliError::Config(s.to_string()),
        hoplab_core::predictor::BuildError::Predict(p) => CliError::Predictor(p.to_string()),
    })
}

fn progress_rows(series: &ProgressSeries) -> impl Iterator<Item = ProgressRow> + '_ {
    series.points.iter().enumerate().map(|(t, p)| ProgressRow {
        trajectory_id: series.trajectory_id.clone(),
        t,
        hop_inc: p.hop_inc,
        hop_fwd: p.hop_fwd,
        hop_bwd: p.hop_bwd,
        phi_inc: p.phi_inc,
        phi_fwd: p.phi_fwd,
        phi_bwd: p.phi_bwd,
        phi_fused: p.phi_fused,
        phi_conservative: p.phi_conservative,
        delta_norm: p.discrepancy,
        weight: p.weight,
        phi: p.phi(series.mode),
    })
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<(), CliError> {
    let seed = effective_seed(a.engine.seed)?;
    let cfg = a.engine.engine_config()?;
    let spec = a.engine.predictor_spec()?;
    let trajs = io::read_trajectories(&a.input)?;
    let seqs = sample_all(&a.input, &trajs, a.sampling.chunk)?;
    let all = map_lanes(
        &seqs,
        a.jobs,
        || build_predictor(&spec, seed),
        |p, seq| reconstruct(p, seq, &cfg).map_err(CliError::from),
    )?;
    let rows: Vec<ProgressRow> = all.iter().flat_map(progress_rows).collect();
    let mut config = a.engine.manifest_config(&cfg, seed);
    config["chunk"] = json!(a.sampling.chunk);
    let manifest = Manifest::new(
        "reconstruct",
        "progress-csv/v1",
        &a.out,
        &[&a.input],
        rows.len(),
        config,
    );
    write_artifact(&a.out, &io::to_csv(&rows), &manifest)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let rows: Vec<ProgressRow> = io::read_csv(&a.progress)?;
    let trajs = io::read_trajectories(&a.gt)?;
    let seqs = sample_all(&a.gt, &trajs, a.sampling.chunk)?;

    // group rows by trajectory, keeping file order
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        match groups.last_mut() {
            Some((id, vals)) if *id == r.trajectory_id => {
                if r.t != vals.len() {
                    return Err(CliError::schema(&a.progress, i + 2, "t is not consecutive"));
                }
                vals.push(r.phi);
            }
            _ => {
                if groups.iter().any(|(id, _)| *id == r.trajectory_id) || r.t != 0 {
                    return Err(CliError::schema(
                        &a.progress,
                        i + 2,
                        format!("rows of `{}` are not contiguous from t = 0", r.trajectory_id),
                    ));
                }
                groups.push((r.trajectory_id.clone(), vec![r.phi]));
            }
        }
    }

    let engine = EngineArgs {
        predictor: a.predictor.clone().unwrap_or_else(|| "oracle".into()),
        mode: a.mode,
        sensitivity: a.sensitivity,
        stability_eps: a.stability_eps,
        no_clamp: a.no_clamp,
        seed: a.seed,
        timeout: a.timeout,
    };
    let seed = effective_seed(a.seed)?;
    let cfg = engine.engine_config()?;
    let spec = match &a.predictor {
        Some(_) => Some(engine.predictor_spec()?),
        None => None,
    };

    let mut jobs = Vec::with_capacity(groups.len());
    for (id, values) in &groups {
        let seq = seqs
            .iter()
            .find(|s| s.trajectory_id() == id)
            .ok_or_else(|| CliError::Operation(format!("trajectory `{id}` missing from {}", a.gt.display())))?;
        if seq.states().len() != values.len() {
            return Err(CliError::Operation(format!(
                "trajectory `{id}`: {} progress rows but {} sampled states (chunk {})",
                values.len(),
                seq.states().len(),
                a.sampling.chunk
            )));
        }
        jobs.push((seq, values));
    }

    let out_rows = map_lanes(
        &jobs,
        a.jobs,
        || spec.as_ref().map(|s| build_predictor(s, seed)).transpose(),
        |pred, (seq, values)| {
            let reverse = match pred {
                Some(p) => Some(reverse_voc(p, seq, &cfg)?.value),
                None => None,
            };
            let report = VocReport::from_series(seq.trajectory_id(), values, reverse)?;
            Ok::<_, CliError>(VocRow {
                trajectory_id: report.trajectory_id,
                n_states: report.n_states,
                voc_forward: report.voc_forward,
                voc_reverse: report.voc_reverse,
                tie_fraction: report.tie_fraction,
                mae: mae(values, &seq.ground_truth())?,
                terminal_drift: terminal_drift(values)?,
            })
        },
    )?;

    let mut table = out_rows.clone();
    if !out_rows.is_empty() {
        let n = out_rows.len() as f64;
        let mean = |f: fn(&VocRow) -> f64| out_rows.iter().map(f).sum::<f64>() / n;
        table.push(VocRow {
            trajectory_id: "mean".into(),
            n_states: out_rows.iter().map(|r| r.n_states).sum::<usize>() / out_rows.len(),
            voc_forward: mean(|r| r.voc_forward),
            voc_reverse: spec
                .as_ref()
                .map(|_| mean(|r| r.voc_reverse.unwrap_or(f64::NAN))),
            tie_fraction: mean(|r| r.tie_fraction),
            mae: mean(|r| r.mae),
            terminal_drift: mean(|r| r.terminal_drift),
        });
    }
    let mut config = engine.manifest_config(&cfg, seed);
    config["reverse"] = json!(a.predictor.is_some());
    config["chunk"] = json!(a.sampling.chunk);
    let manifest = Manifest::new(
        "evaluate",
        "voc-csv/v1",
        &a.out,
        &[&a.progress, &a.gt],
        out_rows.len(),
        config,
    );
    write_artifact(&a.out, &io::to_csv(&table), &manifest)
}

fn parse_intrinsics(s: &str) -> Result<CameraIntrinsics, CliError> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("intrinsics `{s}`: {e}")))?;
    match vals.as_slice() {
        [fx, fy, cx, cy] => CameraIntrinsics::new(*fx, *fy, *cx, *cy)
            .map_err(|e| CliError::Config(e.to_string())),
        _ => Err(CliError::Config(format!(
            "intrinsics `{s}`: expected fx,fy,cx,cy"
        ))),
    }
}

fn cmd_trace_eval(a: TraceEvalArgs) -> Result<(), CliError> {
    let k = parse_intrinsics(&a.intrinsics)?;
    let traces = io::read_traces(&a.traces)?;
    let scene = io::read_scene(&a.scene)?;
    let reference = a.reference.as_deref().map(io::read_traces).transpose()?;

    let mut rows = Vec::with_capacity(traces.len());
    for (i, (id, trace)) in traces.iter().enumerate() {
        let r = evaluate_trace(trace, &scene, &k).map_err(|e| CliError::schema(&a.traces, i + 1, e))?;
        let rmse = match &reference {
            Some(refs) => {
                let (_, gt) = refs.iter().find(|(rid, _)| rid == id).ok_or_else(|| {
                    CliError::Operation(format!("trace `{id}` has no reference trace"))
                })?;
                Some(
                    trace_rmse(
                        trace,
                        gt,
                        &k,
                        RmseNormalization::GroundTruthExtent,
                        DEFAULT_RESAMPLE_POINTS,
                    )
                    .map_err(|e| CliError::Operation(format!("trace `{id}`: {e}")))?,
                )
            }
            None => None,
        };
        rows.push(TraceEvalRow {
            id: id.clone(),
            start_ok: r.start_ok,
            end_ok: r.end_ok,
            collision_free: r.collision_free,
            success: r.success,
            rmse,
        });
    }
    let mut inputs: Vec<&Path> = vec![&a.traces, &a.scene];
    if let Some(r) = &a.reference {
        inputs.push(r);
    }
    let manifest = Manifest::new(
        "trace-eval",
        "trace-eval-csv/v1",
        &a.out,
        &inputs,
        rows.len(),
        json!({ "intrinsics": k, "resample_points": DEFAULT_RESAMPLE_POINTS }),
    );
    write_artifact(&a.out, &io::to_csv(&rows), &manifest)
}
