use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed-width scientific formatting so CSV bodies compare byte for byte.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

/// Outcome of one experiment. Everything here is a function of the config;
/// wall time and thread count go to a separate metadata file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultTable {
    pub schema_version: u32,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub summary: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_time_s: f64,
    pub threads: usize,
}

impl ResultTable {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.echo(),
            checks: Vec::new(),
            pass: true,
            summary: serde_json::Value::Null,
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            pass,
        });
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    fn stem(&self) -> &'static str {
        self.config.kind.name()
    }

    /// `(file name, contents)` of every deterministic output.
    pub fn files(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let mut out = vec![(format!("{}.json", self.stem()), self.summary_json()?.into_bytes())];
        for t in &self.tables {
            out.push((format!("{}.{}.csv", self.stem(), t.name), t.to_csv()?));
        }
        Ok(out)
    }

    /// Write all outputs into `dir`; nothing is written if serialization fails.
    pub fn write_to(&self, dir: &Path, meta: &RunMetadata) -> Result<()> {
        let files = self.files()?;
        let meta = serde_json::to_string_pretty(meta)? + "\n";
        fs::create_dir_all(dir)?;
        for (name, bytes) in files {
            fs::write(dir.join(name), bytes)?;
        }
        fs::write(dir.join(format!("{}.meta.json", self.stem())), meta)?;
        Ok(())
    }
}
