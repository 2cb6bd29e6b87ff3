//! Tabular results, reproduction checks and their on-disk form: a CSV file
//! plus a JSON sidecar describing where every column came from.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::AppResult;

/// How tightly reproduction checks are judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// The published tolerances.
    #[default]
    Paper,
    /// Half the relative tolerance, square root of factor windows, half
    /// the width of explicit ranges.
    Strict,
}

/// Acceptance region for a single number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Band {
    /// |v/target − 1| ≤ tol.
    Rel { target: f64, tol: f64 },
    /// target/k ≤ v ≤ target·k.
    Factor { target: f64, k: f64 },
    Within { lo: f64, hi: f64 },
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
}

impl Band {
    pub fn under(self, profile: Profile) -> Band {
        match (profile, self) {
            (Profile::Paper, b) => b,
            (Profile::Strict, Band::Rel { target, tol }) => Band::Rel { target, tol: tol / 2.0 },
            (Profile::Strict, Band::Factor { target, k }) => Band::Factor { target, k: k.sqrt() },
            (Profile::Strict, Band::Within { lo, hi }) => {
                let (mid, half) = (0.5 * (lo + hi), 0.25 * (hi - lo));
                Band::Within { lo: mid - half, hi: mid + half }
            }
            (Profile::Strict, b) => b,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match *self {
            Band::Rel { target, tol } => ((v - target) / target).abs() <= tol,
            Band::Factor { target, k } => v >= target / k && v <= target * k,
            Band::Within { lo, hi } => v >= lo && v <= hi,
            Band::AtMost { limit } => v <= limit,
            Band::AtLeast { limit } => v >= limit,
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Band::Rel { target, tol } => write!(f, "{} ± {}%", num(target), num(tol * 100.0)),
            Band::Factor { target, k } => write!(f, "{} within ×{}", num(target), num(k)),
            Band::Within { lo, hi } => write!(f, "[{}, {}]", num(lo), num(hi)),
            Band::AtMost { limit } => write!(f, "≤ {}", num(limit)),
            Band::AtLeast { limit } => write!(f, "≥ {}", num(limit)),
        }
    }
}

/// Four significant digits, for human-facing lines only.
pub fn num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e5).contains(&v.abs()) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.3e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    /// Acceptance criterion this check belongs to, 1-based.
    pub criterion: u8,
    pub name: String,
    pub value: f64,
    pub band: Band,
    pub pass: bool,
    /// Reason the miss is understood and left standing, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_deviation: Option<String>,
}

impl Check {
    pub fn new(criterion: u8, name: impl Into<String>, value: f64, band: Band, profile: Profile) -> Self {
        let band = band.under(profile);
        Check {
            criterion,
            name: name.into(),
            value,
            band,
            pass: band.contains(value),
            known_deviation: None,
        }
    }

    /// A yes/no property, recorded as 1 or 0.
    pub fn holds(criterion: u8, name: impl Into<String>, ok: bool) -> Self {
        Check {
            criterion,
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            band: Band::AtLeast { limit: 1.0 },
            pass: ok,
            known_deviation: None,
        }
    }

    /// Marks a miss as understood; a pass ignores the note.
    pub fn known(mut self, why: &str) -> Self {
        if !self.pass {
            self.known_deviation = Some(why.into());
        }
        self
    }

    pub fn status(&self) -> &'static str {
        match (self.pass, self.known_deviation.is_some()) {
            (true, _) => "PASS",
            (false, true) => "expected FAIL",
            (false, false) => "FAIL",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} (want {})",
            self.status(),
            self.name,
            num(self.value),
            self.band
        )?;
        if let Some(why) = &self.known_deviation {
            write!(f, "; known deviation: {why}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    /// `input`, `database`, `reference` (published value) or
    /// `computed:<operation>`.
    pub provenance: String,
}

pub fn col(name: &str, unit: &str, provenance: &str) -> Column {
    Column {
        name: name.into(),
        unit: unit.into(),
        provenance: provenance.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // shortest round-trip form, so output is exact and stable
            Cell::Num(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> AppResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(|c| {
            if c.unit.is_empty() {
                c.name.clone()
            } else {
                format!("{}_{}", c.name, c.unit)
            }
        }))?;
        for r in &self.rows {
            out.write_record(r.iter().map(|c| c.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Everything one scenario produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub scenario: String,
    /// Core operation(s) that produced the computed columns.
    pub operations: Vec<String>,
    pub inputs: serde_json::Value,
    pub seed: Option<u64>,
    pub table: Table,
    /// Scalar results that are not rows of the table.
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    scenario: &'a str,
    library_version: &'a str,
    database: &'a str,
    tolerance_profile: Profile,
    seed: Option<u64>,
    operations: &'a [String],
    inputs: &'a serde_json::Value,
    columns: &'a [Column],
    summary: &'a serde_json::Value,
    checks: &'a [Check],
}

/// Path of the JSON sidecar that accompanies a CSV file.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_artifact(a: &Artifact, csv_path: &Path, database: &str, profile: Profile) -> AppResult<PathBuf> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let f = std::fs::File::create(csv_path)?;
    a.table.write_csv(std::io::BufWriter::new(f))?;
    let side = Sidecar {
        scenario: &a.scenario,
        library_version: env!("CARGO_PKG_VERSION"),
        database,
        tolerance_profile: profile,
        seed: a.seed,
        operations: &a.operations,
        inputs: &a.inputs,
        columns: &a.table.columns,
        summary: &a.summary,
        checks: &a.checks,
    };
    let path = sidecar_path(csv_path);
    let mut text = serde_json::to_string_pretty(&side)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
