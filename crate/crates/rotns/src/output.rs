//! Result files: CSV tables, JSON records and the timing sidecar.
//!
//! CSV files always start with a header row; floats are written as
//! `{:.16e}` (17 significant digits, `.` decimal separator, `NaN`/`inf`
//! spelled as Rust prints them). JSON records carry the schema tag
//! [`SCHEMA`] and serialize fields in declaration order. Wall-clock timing
//! goes to `timing.json` only, so every other artifact is byte-identical
//! across runs with the same config and seed.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};

pub const SCHEMA: &str = "rotns.result/1";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

#[derive(Debug, Serialize)]
pub struct ResultRecord<'a, T: Serialize> {
    pub schema: &'static str,
    pub experiment: &'a str,
    pub command: &'static str,
    pub seed: u64,
    pub inputs: &'a RunConfig,
    pub outputs: T,
}

#[derive(Debug, Serialize)]
struct Timing<'a> {
    schema: &'static str,
    command: &'a str,
    wall_seconds: f64,
}

/// Writer bound to an output directory and the enabled formats.
#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    csv: bool,
    json: bool,
}

impl Output {
    pub fn create(dir: &Path, formats: &[Format]) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            csv: formats.contains(&Format::Csv),
            json: formats.contains(&Format::Json),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        if !self.csv {
            return Ok(());
        }
        let mut w = csv::Writer::from_path(self.path(name)).map_err(std::io::Error::other)?;
        w.write_record(header).map_err(std::io::Error::other)?;
        for r in rows {
            w.write_record(r).map_err(std::io::Error::other)?;
        }
        w.flush()
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> std::io::Result<()> {
        if !self.json {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(self.path(name), text)
    }

    pub fn timing(&self, command: &str, wall_seconds: f64) -> std::io::Result<()> {
        let t = Timing {
            schema: SCHEMA,
            command,
            wall_seconds,
        };
        let mut text = serde_json::to_string_pretty(&t).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(self.path("timing.json"), text)
    }
}
