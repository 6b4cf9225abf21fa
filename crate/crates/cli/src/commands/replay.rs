//! Reruns a command from its manifest and compares output hashes.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{execute, Command};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub command: String,
    pub output_dir: PathBuf,
    pub identical: Vec<String>,
    pub mismatched: Vec<String>,
    pub missing: Vec<String>,
}

impl ReplayReport {
    pub fn is_identical(&self) -> bool {
        self.mismatched.is_empty() && self.missing.is_empty()
    }
}

/// Default replay directory: `<original>-replay`.
pub fn default_replay_dir(original: &Path) -> PathBuf {
    let mut name = original.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push("-replay");
    original.with_file_name(name)
}

/// Reruns into `out_dir` (default [`default_replay_dir`]) with an optional
/// thread count, then checks every recorded output hash.
pub fn replay(manifest_path: &Path, out_dir: Option<PathBuf>, threads: Option<usize>) -> Result<ReplayReport> {
    let original = RunManifest::load(manifest_path)?;
    let command: Command = original.command.parse()?;
    let mut cfg = original.config.clone();
    let out_dir = out_dir.unwrap_or_else(|| default_replay_dir(&original.config.output_dir));
    cfg.output_dir = out_dir.clone();
    if threads.is_some() {
        cfg.threads = threads;
    }
    let rerun = execute(command, &cfg)?;

    let mut report = ReplayReport {
        command: original.command.clone(),
        output_dir: out_dir,
        identical: Vec::new(),
        mismatched: Vec::new(),
        missing: Vec::new(),
    };
    for rec in &original.outputs {
        match rerun.outputs.iter().find(|r| r.file == rec.file) {
            Some(r) if r.sha256 == rec.sha256 => report.identical.push(rec.file.clone()),
            Some(_) => report.mismatched.push(rec.file.clone()),
            None => report.missing.push(rec.file.clone()),
        }
    }
    if report.is_identical() {
        Ok(report)
    } else {
        let mut bad = report.mismatched.clone();
        bad.extend(report.missing.iter().map(|m| format!("{m} (missing)")));
        Err(CliError::ReplayMismatch(bad.len(), bad.join(", ")))
    }
}
