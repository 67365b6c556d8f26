use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

pub const MANIFEST: &str = "manifest.json";
pub const FAILED: &str = "FAILED";

/// Output directory of one run. Tracks the files written so far.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        // A marker from an earlier failed run would be stale now.
        let stale = root.join(FAILED);
        if stale.exists() {
            fs::remove_file(&stale)?;
        }
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn text(&mut self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.root.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(name, &body)
    }

    pub fn fail_marker(&self, subcommand: &str, err: &anyhow::Error) {
        let body = format!("subcommand {subcommand} failed: {err:#}\n");
        let _ = fs::write(self.root.join(FAILED), body);
    }
}
