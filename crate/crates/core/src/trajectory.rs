//! Trajectories, keyframe segmentation and dense state sampling.
//!
//! A [`Trajectory`] is a synchronized multi-view recording split into `N`
//! segments by human-annotated keyframes. [`sample_sequence`] inserts a fixed
//! number of interior states into every segment and the resulting
//! [`SampledSequence`] assigns state `i` the ground-truth progress `i / M`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory `{id}`: frame_count must be positive")]
    EmptyTrajectory { id: String },
    #[error("trajectory `{id}`: at least two keyframes are required, got {count}")]
    TooFewKeyframes { id: String, count: usize },
    #[error("trajectory `{id}`: keyframes must start at 0 and end at frame_count-1 ({last})")]
    KeyframeEndpoints { id: String, last: usize },
    #[error("trajectory `{id}`: keyframes must be strictly increasing")]
    KeyframesNotIncreasing { id: String },
    #[error("trajectory `{id}`: {segments} segments cannot be placed in {frames} frames")]
    TooManySegments {
        id: String,
        segments: usize,
        frames: usize,
    },
    #[error("trajectory `{id}`: at least one view is required")]
    NoViews { id: String },
    #[error("trajectory `{id}`: view `{view}` has {got} frame handles, expected {expected}")]
    FrameCountMismatch {
        id: String,
        view: String,
        got: usize,
        expected: usize,
    },
    #[error("trajectory `{id}`: frame handles given for undeclared view `{view}`")]
    UnknownView { id: String, view: String },
    #[error("chunk size must be positive")]
    ZeroChunk,
    #[error("state index {index} out of range for a sequence with M = {last}")]
    IndexOutOfRange { index: usize, last: usize },
}

/// On-disk trajectory record, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub id: String,
    pub task: String,
    pub views: Vec<String>,
    pub frame_count: usize,
    pub keyframes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<BTreeMap<String, Vec<String>>>,
}

/// A validated multi-view trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: String,
    task_description: String,
    views: Vec<String>,
    frame_count: usize,
    keyframe_indices: Vec<usize>,
    frames: Option<BTreeMap<String, Vec<String>>>,
}

impl Trajectory {
    pub fn new(
        id: impl Into<String>,
        task_description: impl Into<String>,
        views: Vec<String>,
        frame_count: usize,
        keyframe_indices: Vec<usize>,
    ) -> Result<Self, TrajectoryError> {
        Self::with_frames(id, task_description, views, frame_count, keyframe_indices, None)
    }

    pub fn with_frames(
        id: impl Into<String>,
        task_description: impl Into<String>,
        views: Vec<String>,
        frame_count: usize,
        keyframe_indices: Vec<usize>,
        frames: Option<BTreeMap<String, Vec<String>>>,
    ) -> Result<Self, TrajectoryError> {
        let id = id.into();
        if views.is_empty() {
            return Err(TrajectoryError::NoViews { id });
        }
        if frame_count == 0 {
            return Err(TrajectoryError::EmptyTrajectory { id });
        }
        if keyframe_indices.len() < 2 {
            return Err(TrajectoryError::TooFewKeyframes {
                id,
                count: keyframe_indices.len(),
            });
        }
        let segments = keyframe_indices.len() - 1;
        if segments > frame_count - 1 {
            return Err(TrajectoryError::TooManySegments {
                id,
                segments,
                frames: frame_count,
            });
        }
        if keyframe_indices[0] != 0 || *keyframe_indices.last().unwrap() != frame_count - 1 {
            return Err(TrajectoryError::KeyframeEndpoints {
                id,
                last: frame_count - 1,
            });
        }
        if keyframe_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TrajectoryError::KeyframesNotIncreasing { id });
        }
        if let Some(frames) = &frames {
            for (view, handles) in frames {
                if !views.contains(view) {
                    return Err(TrajectoryError::UnknownView {
                        id,
                        view: view.clone(),
                    });
                }
                if handles.len() != frame_count {
                    return Err(TrajectoryError::FrameCountMismatch {
                        id,
                        view: view.clone(),
                        got: handles.len(),
                        expected: frame_count,
                    });
                }
            }
        }
        Ok(Self {
            id,
            task_description: task_description.into(),
            views,
            frame_count,
            keyframe_indices,
            frames,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn task_description(&self) -> &str {
        &self.task_description
    }

    pub fn views(&self) -> &[String] {
        &self.views
    }

    /// Frames per view (`L`).
    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn keyframe_indices(&self) -> &[usize] {
        &self.keyframe_indices
    }

    /// Number of keyframe segments (`N`).
    pub fn segment_count(&self) -> usize {
        self.keyframe_indices.len() - 1
    }

    /// Observation of every view at `frame_index`.
    ///
    /// Views without explicit frame handles get a synthetic `id/view/frame` handle.
    pub fn observation(&self, frame_index: usize) -> StateObservation {
        let view_refs = self
            .views
            .iter()
            .map(|view| {
                self.frames
                    .as_ref()
                    .and_then(|f| f.get(view))
                    .map(|handles| handles[frame_index].clone())
                    .unwrap_or_else(|| format!("{}/{}/{}", self.id, view, frame_index))
            })
            .collect();
        StateObservation {
            trajectory_id: self.id.clone(),
            frame_index,
            view_refs,
        }
    }

    pub fn to_record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            id: self.id.clone(),
            task: self.task_description.clone(),
            views: self.views.clone(),
            frame_count: self.frame_count,
            keyframes: self.keyframe_indices.clone(),
            frames: self.frames.clone(),
        }
    }
}

impl TryFrom<TrajectoryRecord> for Trajectory {
    type Error = TrajectoryError;

    fn try_from(r: TrajectoryRecord) -> Result<Self, Self::Error> {
        Trajectory::with_frames(r.id, r.task, r.views, r.frame_count, r.keyframes, r.frames)
    }
}

/// Synchronized multi-view observation of one frame. View references are
/// opaque handles, one per declared view, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateObservation {
    pub trajectory_id: String,
    pub frame_index: usize,
    pub view_refs: Vec<String>,
}

/// Dense state sequence `s_0..s_M` of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSequence {
    trajectory_id: String,
    task_description: String,
    states: Vec<StateObservation>,
    chunk_size: usize,
}

impl SampledSequence {
    pub fn trajectory_id(&self) -> &str {
        &self.trajectory_id
    }

    pub fn task_description(&self) -> &str {
        &self.task_description
    }

    pub fn states(&self) -> &[StateObservation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Option<&StateObservation> {
        self.states.get(i)
    }

    /// Index of the goal state (`M`).
    pub fn last_index(&self) -> usize {
        self.states.len() - 1
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    pub fn initial(&self) -> &StateObservation {
        &self.states[0]
    }

    pub fn goal(&self) -> &StateObservation {
        &self.states[self.states.len() - 1]
    }

    pub fn frame_indices(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.frame_index).collect()
    }

    /// Ground-truth progress `i / M` of state `i`.
    pub fn ground_truth_progress(&self, i: usize) -> Result<f64, TrajectoryError> {
        progress_at(i, self.last_index())
    }

    /// Ground-truth progress of every state, in order.
    pub fn ground_truth(&self) -> Vec<f64> {
        let last = self.last_index();
        (0..=last).map(|i| i as f64 / last as f64).collect()
    }
}

/// `i / last`, exact at both endpoints.
pub fn progress_at(i: usize, last: usize) -> Result<f64, TrajectoryError> {
    if i > last || last == 0 {
        return Err(TrajectoryError::IndexOutOfRange { index: i, last });
    }
    Ok(i as f64 / last as f64)
}

/// Interior samples per segment: `floor(floor(L / C) / N)`.
pub fn intermediate_count(frame_count: usize, chunk_size: usize, segments: usize) -> usize {
    assert!(frame_count >= 1 && chunk_size >= 1 && segments >= 1);
    frame_count / chunk_size / segments
}

/// Build the dense state sequence of `traj` with chunk size `chunk_size`.
///
/// Each segment `[K_j, K_j+1]` receives `m` interior states at frames
/// `K_j + round(k * (K_j+1 - K_j) / (m + 1))`, `k = 1..m` (half rounds up),
/// with `m` capped by the number of interior frames the segment has.
pub fn sample_sequence(
    traj: &Trajectory,
    chunk_size: usize,
) -> Result<SampledSequence, TrajectoryError> {
    if chunk_size == 0 {
        return Err(TrajectoryError::ZeroChunk);
    }
    let m = intermediate_count(traj.frame_count(), chunk_size, traj.segment_count());
    let mut frames = Vec::with_capacity(traj.keyframe_indices().len() * (m + 1));
    for seg in traj.keyframe_indices().windows(2) {
        let (start, end) = (seg[0], seg[1]);
        frames.push(start);
        let span = end - start;
        let count = m.min(span - 1);
        for k in 1..=count {
            // round(k * span / (count + 1)) with halves rounded up, in integers.
            let denom = count + 1;
            let offset = (2 * k * span + denom) / (2 * denom);
            frames.push(start + offset);
        }
    }
    frames.push(traj.frame_count() - 1);
    frames.dedup();

    Ok(SampledSequence {
        trajectory_id: traj.id().to_string(),
        task_description: traj.task_description().to_string(),
        states: frames.into_iter().map(|f| traj.observation(f)).collect(),
        chunk_size,
    })
}
