//! Run manifest and error diagnostics.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub status: &'static str,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumption: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn from_error(err: &anyhow::Error) -> Self {
        match err.downcast_ref::<driftbound::Error>() {
            Some(e) => Diagnostic {
                status: if e.is_input_error() { "config_error" } else { "certification_failure" },
                kind: e.kind().to_string(),
                assumption: e.assumption().map(str::to_string),
                message: format!("{err:#}"),
            },
            None => Diagnostic {
                status: "config_error",
                kind: "io".into(),
                assumption: None,
                message: format!("{err:#}"),
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.status == "certification_failure" {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: Option<PathBuf>,
    pub command: String,
    /// Resolved constants of the run.
    pub constants: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    /// `pass` or `fail`.
    pub summary: String,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Diagnostic>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str, config: Option<&Path>) -> Self {
        RunManifest {
            config: config.map(Path::to_path_buf),
            command: command.to_string(),
            constants: serde_json::Value::Null,
            outputs: Vec::new(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            wall_clock_seconds: 0.0,
            summary: "pass".into(),
            failures: Vec::new(),
            error: None,
            started: Some(Instant::now()),
        }
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failures.push(what.into());
        self.summary = "fail".into();
    }

    pub fn passed(&self) -> bool {
        self.summary == "pass"
    }

    /// Write `contents` to `dir/name` and list it as an output.
    pub fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> anyhow::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn finish(&mut self, dir: &Path) -> anyhow::Result<()> {
        if let Some(t) = self.started {
            self.wall_clock_seconds = t.elapsed().as_secs_f64();
        }
        let path = dir.join(MANIFEST);
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))
    }
}
