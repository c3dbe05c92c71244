// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Output assembly. Everything is built in memory and written once, so a
//! failed run never leaves a partial file behind.

use std::io::Write;
use std::path::Path;

use epm_core::dataio::{format_float, ExperimentConfig};
use epm_core::montecarlo::{RNG_ALGORITHM, RNG_IMPLEMENTATION, RNG_SEEDING};
use epm_core::Result;
use serde::Serialize;

pub const TOOL: &str = "epm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Comment block opening every CSV: tool, subcommand, effective config and,
/// for sampled output, the random generator.
pub fn preamble(command: &str, config: &ExperimentConfig, sampled: bool) -> Vec<String> {
    let mut lines = vec![format!("{TOOL} {VERSION} {command}"), "effective config:".to_string()];
    lines.extend(config.to_json().lines().map(|l| format!("  {l}")));
    if sampled {
        lines.push(format!("rng: {RNG_ALGORITHM} ({RNG_IMPLEMENTATION}), seed {}", config.seed));
        lines.push(format!("rng streams: {RNG_SEEDING}"));
    } else {
        lines.push("sampling: none (exact probabilities)".to_string());
    }
    lines
}

#[derive(Serialize)]
pub struct RngInfo {
    pub algorithm: &'static str,
    pub implementation: &'static str,
    pub seeding: &'static str,
    pub seed: u64,
}

impl RngInfo {
    pub fn new(seed: u64) -> Self {
        RngInfo {
            algorithm: RNG_ALGORITHM,
            implementation: RNG_IMPLEMENTATION,
            seeding: RNG_SEEDING,
            seed,
        }
    }
}

/// CSV text with a `#` comment preamble.
pub struct CsvDocument {
    text: String,
}

impl CsvDocument {
    pub fn new(comments: &[String], columns: &[&str]) -> Self {
        let mut text = String::new();
        for c in comments {
            text.push_str("# ");
            text.push_str(c);
            text.push('\n');
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvDocument { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let cells: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(k) => k.to_string(),
            Cell::Num(x) if x.is_nan() => "nan".to_string(),
            // Adding +0 folds -0 into 0.
            Cell::Num(x) => format_float(*x + 0.0),
        }
    }
}

pub fn num(x: f64) -> Cell {
    Cell::Num(x)
}

pub fn int(k: impl Into<u64>) -> Cell {
    Cell::Int(k.into())
}

pub fn text(s: impl ToString) -> Cell {
    Cell::Text(s.to_string())
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}
