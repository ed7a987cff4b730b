//! External-process hop predictor speaking line-delimited JSON.
//!
//! Each query is written as one JSON request line to the worker's stdin and
//! answered by exactly one `{"hop": <number>}` line on its stdout. Queries on
//! one worker are serialized; run one worker per concurrent lane.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::predictor::{HopPredictor, HopQuery, PredictError, WorkerResponse};

struct Worker {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    dead: bool,
}

pub struct ExternalPredictor {
    command: String,
    timeout: Duration,
    worker: Mutex<Worker>,
}

impl std::fmt::Debug for ExternalPredictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalPredictor")
            .field("command", &self.command)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl ExternalPredictor {
    /// Launch `command` (split with shell quoting rules, not run through a shell).
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, PredictError> {
        let spawn_err = |source| PredictError::Spawn {
            command: command.to_string(),
            source,
        };
        let argv = shell_words::split(command).map_err(|e| {
            spawn_err(std::io::Error::new(std::io::ErrorKind::InvalidInput, e))
        })?;
        let (program, args) = argv.split_first().ok_or_else(|| {
            spawn_err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "empty command",
            ))
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(spawn_err)?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");

        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });

        Ok(Self {
            command: command.to_string(),
            timeout,
            worker: Mutex::new(Worker {
                child,
                stdin,
                lines: rx,
                dead: false,
            }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

/// Parse and validate one response line.
pub fn parse_response(line: &str, query: &str) -> Result<f64, PredictError> {
    let body = line.strip_suffix('\n').unwrap_or(line);
    let malformed = |reason: String| PredictError::Malformed {
        line: line.to_string(),
        reason,
        query: query.to_string(),
    };
    if body.contains('\n') {
        return Err(malformed("more than one line".into()));
    }
    let resp: WorkerResponse =
        serde_json::from_str(body).map_err(|e| malformed(e.to_string()))?;
    if !resp.hop.is_finite() || !(-1.0..=1.0).contains(&resp.hop) {
        return Err(PredictError::OutOfRange {
            hop: resp.hop,
            query: query.to_string(),
        });
    }
    Ok(resp.hop)
}

impl HopPredictor for ExternalPredictor {
    fn predict_hop(&self, query: &HopQuery<'_>) -> Result<f64, PredictError> {
        let request = serde_json::to_string(&query.to_request())
            .expect("request serialization is infallible");
        let mut worker = self.worker.lock().unwrap_or_else(|p| p.into_inner());
        if worker.dead {
            return Err(PredictError::WorkerClosed { query: request });
        }

        let write = worker
            .stdin
            .as_mut()
            .map(|stdin| {
                stdin
                    .write_all(request.as_bytes())
                    .and_then(|_| stdin.write_all(b"\n"))
                    .and_then(|_| stdin.flush())
            })
            .unwrap_or_else(|| Err(std::io::ErrorKind::BrokenPipe.into()));
        if let Err(e) = write {
            worker.dead = true;
            return Err(if e.kind() == std::io::ErrorKind::BrokenPipe {
                PredictError::WorkerClosed { query: request }
            } else {
                PredictError::Io {
                    query: request,
                    source: e,
                }
            });
        }

        match worker.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => parse_response(&line, &request),
            Ok(Err(source)) => {
                worker.dead = true;
                Err(PredictError::Io {
                    query: request,
                    source,
                })
            }
            Err(RecvTimeoutError::Timeout) => {
                worker.dead = true;
                let _ = worker.child.kill();
                Err(PredictError::Timeout {
                    timeout: self.timeout,
                    query: request,
                })
            }
            Err(RecvTimeoutError::Disconnected) => {
                worker.dead = true;
                Err(PredictError::WorkerClosed { query: request })
            }
        }
    }

    fn concurrent_safe(&self) -> bool {
        false
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        let worker = self.worker.get_mut().unwrap_or_else(|p| p.into_inner());
        // Closing stdin is the shutdown signal.
        worker.stdin.take();
        let deadline = Instant::now() + Duration::from_millis(500);
        loop {
            match worker.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => break,
            }
        }
        let _ = worker.child.kill();
        let _ = worker.child.wait();
    }
}
