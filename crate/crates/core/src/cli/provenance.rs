//! `provenance.json`: what produced an output directory.

use std::path::Path;

use serde::Serialize;

use crate::cli::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Serialize)]
pub struct Provenance<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

pub fn write_provenance(dir: &Path, p: &Provenance) -> Result<()> {
    write_json(dir, "provenance.json", p)
}
