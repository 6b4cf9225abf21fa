//! Output directory with content-hashed artifacts.
//!
//! CSV files start with `#`-prefixed metadata lines followed by a plain
//! header row and data. Nothing time- or host-dependent goes into a CSV, so
//! a rerun of the same configuration reproduces every byte.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// One written file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

pub struct OutputDir {
    root: PathBuf,
    metadata: Vec<(String, String)>,
    records: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputDir {
    /// Creates the directory (and parents) if missing.
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            metadata: Vec::new(),
            records: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Metadata line repeated at the top of every CSV.
    pub fn add_metadata(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.records
    }

    /// Writes a CSV whose body is produced by `body`. `columns` documents
    /// the columns and their units in the metadata block.
    pub fn csv<F>(&mut self, name: &str, columns: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
    {
        let mut buf = Vec::new();
        for (k, v) in &self.metadata {
            writeln!(buf, "# {k}: {v}").expect("write to memory");
        }
        writeln!(buf, "# columns: {columns}").expect("write to memory");
        body(&mut buf).expect("write to memory");
        self.write_bytes(name, &buf)
    }

    /// Pretty JSON followed by a newline.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut buf = serde_json::to_vec_pretty(value).expect("value serializes");
        buf.push(b'\n');
        self.write_bytes(name, &buf)
    }

    /// One compact JSON object per line.
    pub fn json_lines<T: Serialize>(&mut self, name: &str, values: &[T]) -> Result<()> {
        let mut buf = Vec::new();
        for v in values {
            serde_json::to_writer(&mut buf, v).expect("value serializes");
            buf.push(b'\n');
        }
        self.write_bytes(name, &buf)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.records.push(OutputRecord {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Writes a file that is not listed among the hashed outputs.
    pub fn write_unrecorded(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_metadata_and_matching_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("a/b")).unwrap();
        out.add_metadata("seed", 7);
        out.csv("x.csv", "j [site], p [1]", |w| writeln!(w, "j,p\n1,0.5")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("a/b/x.csv")).unwrap();
        assert_eq!(text, "# seed: 7\n# columns: j [site], p [1]\nj,p\n1,0.5\n");
        assert_eq!(out.records()[0].sha256, sha256_hex(text.as_bytes()));
        assert_eq!(out.records()[0].bytes, text.len());
    }

    #[test]
    fn json_lines_one_object_per_line() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.json_lines("m.jsonl", &[serde_json::json!({"a": 1}), serde_json::json!({"a": 2})])
            .unwrap();
        let text = std::fs::read_to_string(dir.path().join("m.jsonl")).unwrap();
        assert_eq!(text, "{\"a\":1}\n{\"a\":2}\n");
    }
}
