// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Measured (or simulated) final populations per initial state and pulse
//! count, stored as CSV with header `state,N,p_excited,std_err`.
//!
//! Lines starting with `#` are comments. `p_excited` is the final
//! probability of level index 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::thermo::DensityMatrix;
use crate::{Error, Result};

pub const TABLE_HEADER: [&str; 4] = ["state", "N", "p_excited", "std_err"];

/// The four pure initial states measured in the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateLabel {
    Ket0,
    Ket1,
    PlusY,
    MinusY,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [StateLabel::Ket0, StateLabel::Ket1, StateLabel::PlusY, StateLabel::MinusY];

    pub fn as_str(&self) -> &'static str {
        match self {
            StateLabel::Ket0 => "ket0",
            StateLabel::Ket1 => "ket1",
            StateLabel::PlusY => "plus_y",
            StateLabel::MinusY => "minus_y",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn density(&self) -> DensityMatrix<f64> {
        match self {
            StateLabel::Ket0 => DensityMatrix::ket0(),
            StateLabel::Ket1 => DensityMatrix::ket1(),
            StateLabel::PlusY => DensityMatrix::plus_y(),
            StateLabel::MinusY => DensityMatrix::minus_y(),
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StateLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown state label `{s}` (expected ket0, ket1, plus_y or minus_y)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRow {
    pub state: StateLabel,
    pub n: u32,
    pub p_excited: f64,
    pub std_err: f64,
}

/// Rows sorted by `(state, N)`; each state has a contiguous run `N = 0..=n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeasurementTable {
    rows: Vec<MeasurementRow>,
}

fn check_row(row: &MeasurementRow) -> std::result::Result<(), String> {
    if !(0.0..=1.0).contains(&row.p_excited) {
        return Err(format!("p_excited = {} outside [0, 1]", row.p_excited));
    }
    if !(row.std_err >= 0.0 && row.std_err.is_finite()) {
        return Err(format!("std_err = {} must be finite and non-negative", row.std_err));
    }
    Ok(())
}

impl MeasurementTable {
    pub fn new(rows: Vec<MeasurementRow>) -> Result<Self> {
        for row in &rows {
            check_row(row).map_err(|m| Error::parse(None, Some("p_excited"), m))?;
        }
        Self::assemble(rows.into_iter().map(|r| (r, None)).collect())
    }

    fn assemble(rows: Vec<(MeasurementRow, Option<u64>)>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (row, line) in &rows {
            if seen.insert((row.state, row.n), *line).is_some() {
                return Err(Error::parse(
                    *line,
                    None,
                    format!("duplicate row for state {} and N = {}", row.state, row.n),
                ));
            }
        }
        let mut per_state: BTreeMap<StateLabel, Vec<u32>> = BTreeMap::new();
        for (state, n) in seen.keys() {
            per_state.entry(*state).or_default().push(*n);
        }
        for (state, ns) in &per_state {
            if let Some((k, &n)) = ns.iter().enumerate().find(|(k, &n)| n as usize != *k) {
                return Err(Error::parse(
                    None,
                    Some("N"),
                    format!("pulse counts for {state} are not contiguous from 0 (missing N = {k}, next is {n})"),
                ));
            }
        }
        let mut rows: Vec<MeasurementRow> = rows.into_iter().map(|(r, _)| r).collect();
        rows.sort_by_key(|r| (r.state, r.n));
        Ok(MeasurementTable { rows })
    }

    pub fn rows(&self) -> &[MeasurementRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn states(&self) -> BTreeSet<StateLabel> {
        self.rows.iter().map(|r| r.state).collect()
    }

    pub fn pulse_counts(&self) -> BTreeSet<u32> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn get(&self, state: StateLabel, n: u32) -> Option<&MeasurementRow> {
        self.rows
            .binary_search_by_key(&(state, n), |r| (r.state, r.n))
            .ok()
            .map(|k| &self.rows[k])
    }

    pub fn curve(&self, state: StateLabel) -> Vec<MeasurementRow> {
        self.rows.iter().filter(|r| r.state == state).copied().collect()
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let header = csv
            .headers()
            .map_err(|e| Error::parse(Some(1), None, e.to_string()))?
            .clone();
        let found: Vec<&str> = header.iter().collect();
        if found != TABLE_HEADER {
            return Err(Error::parse(
                header.position().map(|p| p.line()),
                None,
                format!("expected header `{}`, found `{}`", TABLE_HEADER.join(","), found.join(",")),
            ));
        }
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| {
                Error::parse(e.position().map(|p| p.line()), None, e.to_string())
            })?;
            let line = record.position().map(|p| p.line());
            if record.len() != 4 {
                return Err(Error::parse(
                    line,
                    None,
                    format!("expected 4 fields, found {}", record.len()),
                ));
            }
            let state = record[0].parse::<StateLabel>().map_err(|m| Error::parse(line, Some("state"), m))?;
            let n = record[1]
                .parse::<u32>()
                .map_err(|e| Error::parse(line, Some("N"), format!("`{}`: {e}", &record[1])))?;
            let number = |k: usize, name: &str| {
                record[k]
                    .parse::<f64>()
                    .map_err(|e| Error::parse(line, Some(name), format!("`{}`: {e}", &record[k])))
            };
            let row = MeasurementRow {
                state,
                n,
                p_excited: number(2, "p_excited")?,
                std_err: number(3, "std_err")?,
            };
            check_row(&row).map_err(|m| {
                let field = if m.starts_with("p_excited") { "p_excited" } else { "std_err" };
                Error::parse(line, Some(field), m)
            })?;
            rows.push((row, line));
        }
        Self::assemble(rows)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Writes `# `-prefixed comment lines, the header, then one row per
    /// entry with 17 significant digits.
    pub fn to_writer<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(TABLE_HEADER).map_err(csv_io)?;
        for r in &self.rows {
            csv.write_record([
                r.state.as_str().to_string(),
                r.n.to_string(),
                format_float(r.p_excited),
                format_float(r.std_err),
            ])
            .map_err(csv_io)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path, comments: &[String]) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_writer(std::io::BufWriter::new(file), comments)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Scientific notation with 17 significant digits, which round-trips every
/// `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
