use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::ExperimentError;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub(crate) struct Outputs {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, ExperimentError> {
        std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    pub fn checksums(&self) -> &BTreeMap<String, String> {
        &self.checksums
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), ExperimentError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| ExperimentError::Io { path, source })?;
        self.checksums
            .insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), ExperimentError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut text = String::new();
        let line = |text: &mut String, cells: &mut dyn Iterator<Item = &str>| {
            let cells: Vec<String> = cells.map(quote).collect();
            let _ = writeln!(text, "{}", cells.join(","));
        };
        line(&mut text, &mut header.iter().copied());
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            line(&mut text, &mut row.iter().map(String::as_str));
        }
        self.write(name, text.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), ExperimentError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// The manifest carries wall-clock time, so it is not checksummed.
    pub fn write_manifest<T: Serialize>(&self, manifest: &T) -> Result<(), ExperimentError> {
        let path = self.dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|source| ExperimentError::Io { path, source })
    }
}
