//! Output files: small CSV tables and the per-run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

/// CSV table built in memory and written in one go.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: &[&dyn std::fmt::Display]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{c}").unwrap();
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &self.text)?;
        Ok(())
    }
}

fn collect(dir: &Path, base: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            collect(&path, base, out)?;
        } else {
            let rel = path.strip_prefix(base).unwrap().to_path_buf();
            if rel != Path::new("manifest.csv") {
                out.push(rel);
            }
        }
    }
    Ok(())
}

/// Writes `manifest.csv` (file, bytes, sha256) covering every file under `dir`.
pub fn write_manifest(dir: &Path) -> Result<()> {
    let mut files = Vec::new();
    collect(dir, dir, &mut files)?;
    let mut csv = Csv::new(&["file", "bytes", "sha256"]);
    for rel in files {
        let bytes = fs::read(dir.join(&rel))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        let name = rel.to_string_lossy().replace('\\', "/");
        csv.row(&[&name, &bytes.len(), &digest]);
    }
    csv.write(&dir.join("manifest.csv"))
}
