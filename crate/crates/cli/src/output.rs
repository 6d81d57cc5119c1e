//! Artifact writing. Every file is UTF-8 with LF line endings and a trailing
//! newline; timings go to `*.timing.json` sidecars so that the artifacts
//! themselves are byte-identical across reruns.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::args::Format;

pub struct Output {
    dir: PathBuf,
    pub format: Format,
    pub quiet: bool,
}

impl Output {
    pub fn new(dir: &Path, format: Format, quiet: bool) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), format, quiet })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&self, name: &str, body: &str) -> anyhow::Result<PathBuf> {
        let path = self.path(name);
        let mut body = body.replace("\r\n", "\n");
        if !body.ends_with('\n') {
            body.push('\n');
        }
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        self.text(name, &serde_json::to_string_pretty(value)?)
    }

    pub fn csv<R: Serialize>(
        &self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = R>,
    ) -> anyhow::Result<PathBuf> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.text(name, &String::from_utf8(bytes)?)
    }

    /// Writes `<stem>.timing.json` next to the artifact `<stem>.json`.
    pub fn timing(&self, stem: &str, wall_time_ms: u64) -> anyhow::Result<PathBuf> {
        self.json(&format!("{stem}.timing.json"), &serde_json::json!({ "wall_time_ms": wall_time_ms }))
    }
}
