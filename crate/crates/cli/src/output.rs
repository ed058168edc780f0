use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const VERSION: &str = concat!("bslab ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subcommand: String,
    pub version: String,
    pub config: RunConfig,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub outputs: Vec<OutputEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    }
}

/// Float cell: shortest round-trip form, exponent for extreme magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Collects output files and their checksums.
pub struct Outputs {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Outputs> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs { dir: dir.to_path_buf(), entries: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.entries.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let csv_err = |e: csv::Error| CliError::io(name, std::io::Error::other(e));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(&r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(name, e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(name, e.into()))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Writes through `f` into memory, then to disk.
    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> bslab::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write_bytes(name, &buf)
    }

    /// Writes the manifest last, through a temporary file and a rename.
    pub fn finish(self, manifest: &Manifest) -> Result<PathBuf> {
        let path = self.dir.join(MANIFEST);
        let tmp = self.dir.join(format!("{MANIFEST}.tmp"));
        let bytes = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::io(&path, e.into()))?;
        let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        f.write_all(&bytes).and_then(|_| f.write_all(b"\n")).and_then(|_| f.sync_all()).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
