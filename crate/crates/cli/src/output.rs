//! Atomic artifact writing and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub schema: &'static str,
    pub output: String,
    pub inputs: Vec<String>,
    pub records: usize,
    pub config: Value,
}

impl Manifest {
    /// Paths are recorded by file name only so identical runs in different
    /// directories produce identical manifests.
    pub fn new(
        command: &'static str,
        schema: &'static str,
        output: &Path,
        inputs: &[&Path],
        records: usize,
        config: Value,
    ) -> Self {
        Self {
            tool: "hoplab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            schema,
            output: file_name(output),
            inputs: inputs.iter().map(|p| file_name(p)).collect(),
            records,
            config,
        }
    }
}

/// Write an artifact and its manifest, both atomically.
pub fn write_artifact(path: &Path, bytes: &[u8], manifest: &Manifest) -> Result<(), CliError> {
    write_atomic(path, bytes)?;
    let mut json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    json.push(b'\n');
    write_atomic(&manifest_path(path), &json)
}
