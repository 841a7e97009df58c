//! Output directory handling and provenance records.
//!
//! Every CSV gets a JSON sidecar with the same stem; JSON reports embed the
//! record under `provenance`. The record holds the resolved options (seed
//! included) and the tool version, which is enough to rerun the command
//! and get byte-identical numbers. No timestamps are written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Options;
use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a Options,
}

#[derive(Serialize)]
struct Sidecar<'a, T> {
    file: &'a str,
    #[serde(flatten)]
    provenance: &'a Provenance<'a>,
    #[serde(flatten)]
    details: &'a T,
}

#[derive(Serialize)]
struct Document<'a, T> {
    provenance: &'a Provenance<'a>,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Output<'a> {
    dir: PathBuf,
    provenance: Provenance<'a>,
}

impl<'a> Output<'a> {
    /// Creates the output directory.
    pub fn create(command: &'a str, config: &'a Options) -> Result<Self, CliError> {
        let dir = config.out_dir();
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            stage: "output",
            path: dir.clone(),
            source,
        })?;
        Ok(Output {
            dir,
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command,
                config,
            },
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes the sidecar of a data file written at `path`.
    pub fn sidecar<T: Serialize>(&self, path: &Path, details: &T) -> Result<(), CliError> {
        let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let doc = Sidecar {
            file: &file,
            provenance: &self.provenance,
            details,
        };
        write_json(&path.with_extension("json"), &doc)
    }

    /// Writes a JSON report with the provenance record embedded.
    pub fn report<T: Serialize>(&self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let doc = Document {
            provenance: &self.provenance,
            body,
        };
        write_json(&path, &doc)?;
        Ok(path)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        stage: "output",
        path: path.to_path_buf(),
        source,
    })
}
