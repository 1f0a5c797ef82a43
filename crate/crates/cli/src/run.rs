//! Output directory handling and the per-run manifest.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Component, Path, PathBuf};
use std::time::Instant;
use yoked::Error;

/// Failure of a command: a domain error from the toolkit or an I/O problem.
#[derive(Debug)]
pub enum CmdError {
    Domain(Error),
    Io(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Domain(e)
    }
}

impl CmdError {
    pub fn to_json(&self) -> Value {
        match self {
            CmdError::Domain(e) => json!({ "error": e.kind(), "message": e.to_string() }),
            CmdError::Io(m) => json!({ "error": "IoError", "message": m }),
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, CmdError>;

pub fn io_err(path: &Path, e: impl std::fmt::Display) -> CmdError {
    CmdError::Io(format!("{}: {e}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct FileRef {
    path: String,
    sha256: String,
}

/// Collects inputs and outputs of one command and writes `manifest.json`.
pub struct Run {
    out_dir: PathBuf,
    command: String,
    params: Value,
    seed: u64,
    timing: bool,
    start: Instant,
    inputs: Vec<FileRef>,
    outputs: Vec<FileRef>,
}

impl Run {
    pub fn new(out_dir: &Path, command: &str, params: Value, seed: u64, timing: bool) -> CmdResult<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
        Ok(Run {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            params,
            seed,
            timing,
            start: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> CmdResult<String> {
        let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
        self.inputs.push(FileRef { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).map_err(|e| io_err(path, e))
    }

    /// Writes `name` inside the output directory. Names must be plain
    /// relative paths so nothing lands outside it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CmdResult<PathBuf> {
        let rel = Path::new(name);
        if name.is_empty() || rel.components().any(|c| !matches!(c, Component::Normal(_))) || name == "manifest.json" {
            return Err(CmdError::Domain(Error::Parameter(format!("output name {name:?} must be a relative path inside the output directory"))));
        }
        let path = self.out_dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.outputs.push(FileRef { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CmdResult<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).expect("result serializes");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(self) -> CmdResult<()> {
        let wall = if self.timing { json!(self.start.elapsed().as_secs_f64()) } else { Value::Null };
        let m = json!({
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_seconds": wall,
        });
        let path = self.out_dir.join("manifest.json");
        let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
        s.push('\n');
        std::fs::write(&path, s).map_err(|e| io_err(&path, e))
    }
}
