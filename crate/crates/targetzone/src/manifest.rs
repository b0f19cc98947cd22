//! Run manifests: everything needed to repeat a command bit for bit.
//!
//! Output paths are stored relative to the output directory and no wall-clock time is
//! recorded, so two runs of the same parameters produce identical manifests too.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Fully resolved parameters, including input paths.
    pub params: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        io::read_json(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Output directory of one run; remembers every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
    protected: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            protected: Vec::new(),
        })
    }

    /// Refuses any later output that would overwrite one of `inputs`.
    pub fn protect(&mut self, inputs: &[PathBuf]) {
        self.protected.extend(inputs.iter().filter_map(|p| p.canonicalize().ok()));
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Registers `name` as an output and returns its full path.
    pub fn file(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        if let Ok(existing) = path.canonicalize() {
            if self.protected.contains(&existing) {
                return Err(CliError::Usage(format!(
                    "output {} would overwrite an input",
                    path.display()
                )));
            }
        }
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.file(name)?;
        io::write_json(&path, value)
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let path = self.file(name)?;
        io::write_csv(&path, rows)
    }

    pub fn digests(&self) -> Result<Vec<OutputFile>> {
        self.files
            .iter()
            .map(|f| {
                Ok(OutputFile {
                    file: f.clone(),
                    sha256: sha256_file(&self.root.join(f))?,
                })
            })
            .collect()
    }
}
