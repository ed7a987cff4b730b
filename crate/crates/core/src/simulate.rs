//! Synthetic trajectory generation for desk-scale pipeline runs.

use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::trajectory::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("invalid frame-count range {0:?}: frame counts must be at least 2")]
    Length(RangeInclusive<usize>),
    #[error("invalid segment range {0:?}: segment counts must be at least 1")]
    Segments(RangeInclusive<usize>),
    #[error("segment range {segments:?} cannot fit in frame counts {lengths:?}")]
    Incompatible {
        lengths: RangeInclusive<usize>,
        segments: RangeInclusive<usize>,
    },
    #[error("at least one view is required")]
    NoViews,
}

const TASKS: &[&str] = &[
    "put the red cup on the plate",
    "open the top drawer",
    "fold the towel in half",
    "stack the blue block on the green block",
    "wipe the table with the sponge",
    "hang the mug on the rack",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_trajectories: usize,
    /// Frames per view (`L`).
    pub frame_count: RangeInclusive<usize>,
    /// Keyframe segments (`N`).
    pub segments: RangeInclusive<usize>,
    pub n_views: usize,
    pub seed: u64,
}

/// Deterministic synthetic trajectories with abstract view handles.
pub fn simulate(cfg: &SimulationConfig) -> Result<Vec<Trajectory>, SimulateError> {
    let lengths = cfg.frame_count.clone();
    let segments = cfg.segments.clone();
    if lengths.is_empty() || *lengths.start() < 2 {
        return Err(SimulateError::Length(lengths));
    }
    if segments.is_empty() || *segments.start() < 1 {
        return Err(SimulateError::Segments(segments));
    }
    // every draw must admit at least the smallest segment count
    if *segments.start() > *lengths.start() - 1 {
        return Err(SimulateError::Incompatible { lengths, segments });
    }
    if cfg.n_views == 0 {
        return Err(SimulateError::NoViews);
    }
    let views: Vec<String> = (0..cfg.n_views).map(|v| format!("cam{v}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    (0..cfg.n_trajectories)
        .map(|i| {
            let frames = rng.random_range(lengths.clone());
            let max_segments = (*segments.end()).min(frames - 1);
            let n = rng.random_range(*segments.start()..=max_segments);
            // n - 1 interior keyframes drawn from 1..frames-1
            let mut keys: Vec<usize> = sample(&mut rng, frames - 2, n - 1)
                .into_iter()
                .map(|k| k + 1)
                .collect();
            keys.sort_unstable();
            keys.insert(0, 0);
            keys.push(frames - 1);
            let task = TASKS[rng.random_range(0..TASKS.len())];
            Ok(Trajectory::new(format!("sim-{i:05}"), task, views.clone(), frames, keys)
                .expect("generated keyframes are valid"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_trajectory() {
        let t = simulate(&SimulationConfig {
            n_trajectories: 1,
            frame_count: 2..=2,
            segments: 1..=1,
            n_views: 1,
            seed: 0,
        })
        .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].keyframe_indices(), &[0, 1]);
    }

    #[test]
    fn deterministic_and_valid() {
        let cfg = SimulationConfig {
            n_trajectories: 100,
            frame_count: 50..=500,
            segments: 2..=8,
            n_views: 3,
            seed: 7,
        };
        let a = simulate(&cfg).unwrap();
        assert_eq!(a, simulate(&cfg).unwrap());
        assert_eq!(a.len(), 100);
        for t in &a {
            assert!((50..=500).contains(&t.frame_count()));
            assert!((2..=8).contains(&t.segment_count()));
            assert!(Trajectory::try_from(t.to_record()).is_ok());
        }
        let other = simulate(&SimulationConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn invalid_ranges() {
        let base = SimulationConfig {
            n_trajectories: 1,
            frame_count: 10..=20,
            segments: 1..=3,
            n_views: 1,
            seed: 0,
        };
        assert!(simulate(&SimulationConfig { frame_count: 1..=5, ..base.clone() }).is_err());
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 20..=10;
        assert!(simulate(&SimulationConfig { frame_count: empty, ..base.clone() }).is_err());
        assert!(simulate(&SimulationConfig { segments: 0..=2, ..base.clone() }).is_err());
        assert!(simulate(&SimulationConfig { segments: 10..=12, ..base.clone() }).is_err());
        assert!(simulate(&SimulationConfig { n_views: 0, ..base }).is_err());
    }
}
