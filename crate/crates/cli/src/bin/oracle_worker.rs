//! Reference worker for the external predictor bridge.
//!
//! Loads ground-truth trajectories, samples them with the given chunk size
//! and answers every request line with the ground-truth hop between the
//! BEFORE and AFTER states.
//!
//! Usage: `hoplab-oracle-worker <trajectories.jsonl> [chunk]`

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::process::ExitCode;

use hoplab_cli::io::read_trajectories;
use hoplab_core::labeler::hop_label;
use hoplab_core::predictor::{OwnedWorkerRequest, WorkerResponse};
use hoplab_core::trajectory::sample_sequence;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (gt, chunk) = match args.as_slice() {
        [gt] => (gt.as_str(), 10),
        [gt, chunk] => match chunk.parse() {
            Ok(c) => (gt.as_str(), c),
            Err(_) => {
                eprintln!("oracle-worker: bad chunk size `{chunk}`");
                return ExitCode::from(2);
            }
        },
        _ => {
            eprintln!("usage: hoplab-oracle-worker <trajectories.jsonl> [chunk]");
            return ExitCode::from(2);
        }
    };

    // (trajectory id, frame) -> (state index, last index)
    let mut positions: HashMap<(String, usize), (usize, usize)> = HashMap::new();
    let trajs = match read_trajectories(Path::new(gt)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("oracle-worker: {e}");
            return ExitCode::from(3);
        }
    };
    for t in &trajs {
        let seq = match sample_sequence(t, chunk) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("oracle-worker: {e}");
                return ExitCode::from(4);
            }
        };
        let last = seq.last_index();
        for (i, s) in seq.states().iter().enumerate() {
            positions.insert((s.trajectory_id.clone(), s.frame_index), (i, last));
        }
    }

    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let req: OwnedWorkerRequest = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("oracle-worker: bad request: {e}");
                return ExitCode::from(4);
            }
        };
        let progress = |s: &hoplab_core::StateObservation| {
            positions
                .get(&(s.trajectory_id.clone(), s.frame_index))
                .map(|&(i, last)| i as f64 / last as f64)
        };
        let (Some(p), Some(q)) = (progress(&req.before), progress(&req.after)) else {
            eprintln!("oracle-worker: unknown state in request {line}");
            return ExitCode::from(4);
        };
        let hop = hop_label(p, q).expect("ground-truth progress lies in [0, 1]");
        let mut out = serde_json::to_vec(&WorkerResponse { hop }).expect("response serializes");
        out.push(b'\n');
        if stdout.write_all(&out).and_then(|_| stdout.flush()).is_err() {
            break;
        }
    }
    ExitCode::SUCCESS
}
