//! Small CSV and text artifact writers with stable, documented layouts.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub struct CsvTable {
    lines: Vec<String>,
}

impl CsvTable {
    pub fn new(header: &str) -> Self {
        CsvTable {
            lines: vec![header.to_string()],
        }
    }

    pub fn row(&mut self, fields: &[&str]) {
        self.lines.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        write_text(path, &self.render())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}
