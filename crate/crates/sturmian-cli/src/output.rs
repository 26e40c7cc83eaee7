//! Artifact emission: one versioned header line, then CSV rows or JSON lines.
//!
//! Everything is buffered and written by a single writer at the end, so an
//! artifact is either complete or absent, and identical runs produce
//! byte-identical files.

use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{Format, RunConfig};

/// Schema revision of every artifact kind; bump when columns change.
pub const SCHEMA_REVISION: u32 = 1;

/// An artifact being assembled in memory.
pub struct Artifact {
    format: Format,
    buf: Vec<u8>,
    csv: Option<csv::Writer<Vec<u8>>>,
}

impl Artifact {
    /// Start an artifact of the given kind with its header line.
    ///
    /// CSV artifacts begin with a `#` comment line; JSON-lines artifacts begin
    /// with a header object carrying the same fields.
    pub fn new(kind: &str, cfg: &RunConfig) -> Result<Self> {
        let schema = format!("sturmian.{kind}/{SCHEMA_REVISION}");
        let mut buf = Vec::new();
        match cfg.format {
            Format::Csv => {
                writeln!(
                    buf,
                    "# schema={schema} version={} config={}",
                    sturmian::VERSION,
                    serde_json::to_string(cfg)?
                )?;
            }
            Format::Jsonl => {
                let header = serde_json::json!({
                    "schema": schema,
                    "version": sturmian::VERSION,
                    "config": cfg,
                });
                writeln!(buf, "{header}")?;
            }
        }
        let csv = (cfg.format == Format::Csv).then(|| csv::Writer::from_writer(Vec::new()));
        Ok(Self {
            format: cfg.format,
            buf,
            csv,
        })
    }

    /// Append one record (a CSV row or a JSON line).
    pub fn row<T: Serialize>(&mut self, record: &T) -> Result<()> {
        match self.format {
            Format::Csv => self.csv.as_mut().expect("csv writer").serialize(record)?,
            Format::Jsonl => {
                serde_json::to_writer(&mut self.buf, record)?;
                self.buf.push(b'\n');
            }
        }
        Ok(())
    }

    /// Append pre-rendered JSON lines (JSON-lines artifacts only).
    pub fn raw_lines(&mut self, lines: &str) {
        debug_assert_eq!(self.format, Format::Jsonl);
        self.buf.extend_from_slice(lines.as_bytes());
    }

    /// The finished bytes.
    pub fn into_bytes(mut self) -> Result<Vec<u8>> {
        if let Some(w) = self.csv.take() {
            let body = w
                .into_inner()
                .map_err(|e| anyhow::anyhow!("csv writer: {e}"))?;
            self.buf.extend_from_slice(&body);
        }
        Ok(self.buf)
    }

    /// Write to the configured destination (file or standard output).
    pub fn emit(self, cfg: &RunConfig) -> Result<()> {
        let bytes = self.into_bytes()?;
        match cfg.artifact_path() {
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                }
                std::fs::write(&path, &bytes)
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    }
}
