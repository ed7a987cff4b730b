//! `hoplab` command-line pipeline: simulate, label, reconstruct, evaluate and
//! trace-eval, with JSONL/CSV artifacts and a manifest next to every output.

pub mod commands;
pub mod error;
pub mod io;
pub mod output;

use std::thread;

pub use commands::{run, Cli};
pub use error::CliError;

/// Environment variable overriding every `--seed`.
pub const SEED_ENV: &str = "HOPLAB_SEED";

pub fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

/// Map `work` over `items` on `jobs` lanes, returning results in input order.
///
/// Each lane calls `init` once to build its own state (for example a
/// predictor with its own worker process) and processes items
/// `lane, lane + jobs, ...`.
pub fn map_lanes<T, S, R, E>(
    items: &[T],
    jobs: usize,
    init: impl Fn() -> Result<S, E> + Sync,
    work: impl Fn(&S, &T) -> Result<R, E> + Sync,
) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        let state = init()?;
        return items.iter().map(|it| work(&state, it)).collect();
    }
    type Lane<R, E> = Result<Vec<(usize, Result<R, E>)>, E>;
    let lanes: Vec<Lane<R, E>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|lane| {
                let (init, work) = (&init, &work);
                scope.spawn(move || {
                    let state = init()?;
                    Ok((lane..items.len())
                        .step_by(jobs)
                        .map(|i| (i, work(&state, &items[i])))
                        .collect())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("lane panicked"))
            .collect()
    });
    let mut slots: Vec<Option<Result<R, E>>> = (0..items.len()).map(|_| None).collect();
    for lane in lanes {
        for (i, r) in lane? {
            slots[i] = Some(r);
        }
    }
    slots
        .into_iter()
        .map(|s| s.expect("every index is assigned to a lane"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanes_preserve_order() {
        let items: Vec<u32> = (0..37).collect();
        for jobs in [1, 2, 5, 64] {
            let out: Vec<u32> =
                map_lanes(&items, jobs, || Ok::<_, ()>(10), |s, x| Ok(x * s)).unwrap();
            assert_eq!(out, items.iter().map(|x| x * 10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn lanes_report_first_error_in_input_order() {
        let items: Vec<u32> = (0..20).collect();
        let r = map_lanes(
            &items,
            4,
            || Ok::<_, u32>(()),
            |_, &x| if x == 7 || x == 13 { Err(x) } else { Ok(x) },
        );
        assert_eq!(r, Err(7));
    }
}
