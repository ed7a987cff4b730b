//! Readers and record types for the on-disk formats.

use std::fs;
use std::path::Path;

use hoplab_core::geometry::{Keypoint, SceneSpec, Trace};
use hoplab_core::trajectory::{Trajectory, TrajectoryRecord};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse every nonblank line of a JSONL file.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::schema(path, i + 1, e)))
        .collect()
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>, CliError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrajectoryRecord =
            serde_json::from_str(line).map_err(|e| CliError::schema(path, i + 1, e))?;
        out.push(Trajectory::try_from(rec).map_err(|e| CliError::schema(path, i + 1, e))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub id: String,
    pub points: Vec<[f64; 3]>,
}

impl TraceRecord {
    pub fn to_trace(&self) -> Result<Trace, hoplab_core::geometry::GeometryError> {
        self.points
            .iter()
            .map(|&[u, v, d]| Keypoint::new(u, v, d))
            .collect::<Result<Vec<_>, _>>()
            .map(Trace::new)
    }
}

pub fn read_traces(path: &Path) -> Result<Vec<(String, Trace)>, CliError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord =
            serde_json::from_str(line).map_err(|e| CliError::schema(path, i + 1, e))?;
        let trace = rec.to_trace().map_err(|e| CliError::schema(path, i + 1, e))?;
        out.push((rec.id, trace));
    }
    Ok(out)
}

pub fn read_scene(path: &Path) -> Result<SceneSpec, CliError> {
    let text = read_to_string(path)?;
    let scene: SceneSpec = serde_json::from_str(&text).map_err(|e| {
        let line = e.line();
        CliError::schema(path, line, e)
    })?;
    scene.validate().map_err(|e| CliError::schema(path, 1, e))?;
    Ok(scene)
}

/// One row of the progress CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRow {
    pub trajectory_id: String,
    pub t: usize,
    pub hop_inc: f64,
    pub hop_fwd: f64,
    pub hop_bwd: f64,
    pub phi_inc: f64,
    pub phi_fwd: f64,
    pub phi_bwd: f64,
    pub phi_fused: f64,
    pub phi_conservative: f64,
    pub delta_norm: f64,
    pub weight: f64,
    /// Progress of the mode selected at reconstruction time.
    pub phi: f64,
}

/// One row of the VOC CSV. The final row carries `trajectory_id = "mean"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocRow {
    pub trajectory_id: String,
    pub n_states: usize,
    pub voc_forward: f64,
    pub voc_reverse: Option<f64>,
    pub tie_fraction: f64,
    pub mae: f64,
    pub terminal_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvalRow {
    pub id: String,
    pub start_ok: bool,
    pub end_ok: bool,
    pub collision_free: bool,
    pub success: bool,
    pub rmse: Option<f64>,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    w.into_inner().expect("in-memory writer")
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = read_to_string(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| CliError::schema(path, i + 2, e)))
        .collect()
}
