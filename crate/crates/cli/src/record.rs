//! Newline-delimited JSON spectrum records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use qvhs_core::{EnergyGrid, Spectrum, SuiteSample};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn to_grid(self) -> Result<EnergyGrid> {
        Ok(EnergyGrid::new(self.e_min, self.e_max, self.n_points)?)
    }
}

impl From<EnergyGrid> for GridSpec {
    fn from(g: EnergyGrid) -> Self {
        Self {
            e_min: g.e_min(),
            e_max: g.e_max(),
            n_points: g.n_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    pub atom_id: String,
    pub p1: Vec<f64>,
    pub p3: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRecord {
    pub id: String,
    pub grid: GridSpec,
    /// Coarse (1-layer) prediction. May be omitted when `atoms` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<Vec<f64>>,
    /// Refined (3-layer) prediction. May be omitted when `atoms` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p3: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomRecord>>,
    /// Energies whose nearby candidates are masked out of the fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peaks_excluded: Option<Vec<f64>>,
}

/// A record with every sequence checked against its grid.
#[derive(Debug, Clone)]
pub struct ParsedRecord {
    pub id: String,
    pub grid: EnergyGrid,
    pub p1: Option<Spectrum>,
    pub p3: Option<Spectrum>,
    pub gt: Option<Spectrum>,
    pub atoms: Vec<(String, Spectrum, Spectrum)>,
    pub peaks_excluded: Vec<f64>,
}

fn spectrum(grid: EnergyGrid, values: &[f64], what: &str) -> Result<Spectrum> {
    Spectrum::new(grid, values.to_vec()).with_context(|| format!("field `{what}`"))
}

impl SpectrumRecord {
    pub fn parse(&self) -> Result<ParsedRecord> {
        let grid = self.grid.to_grid()?;
        let opt = |v: &Option<Vec<f64>>, what: &str| {
            v.as_deref().map(|v| spectrum(grid, v, what)).transpose()
        };
        let atoms = self
            .atoms
            .iter()
            .flatten()
            .map(|a| {
                Ok((
                    a.atom_id.clone(),
                    spectrum(grid, &a.p1, &format!("atoms[{}].p1", a.atom_id))?,
                    spectrum(grid, &a.p3, &format!("atoms[{}].p3", a.atom_id))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let parsed = ParsedRecord {
            id: self.id.clone(),
            grid,
            p1: opt(&self.p1, "p1")?,
            p3: opt(&self.p3, "p3")?,
            gt: opt(&self.gt, "gt")?,
            atoms,
            peaks_excluded: self.peaks_excluded.clone().unwrap_or_default(),
        };
        if parsed.atoms.is_empty() && (parsed.p1.is_none() || parsed.p3.is_none()) {
            bail!("record needs `p1` and `p3`, or a non-empty `atoms` list");
        }
        if let Some(&e) = parsed.peaks_excluded.iter().find(|e| !e.is_finite()) {
            bail!("non-finite energy {e} in `peaks_excluded`");
        }
        Ok(parsed)
    }
}

impl ParsedRecord {
    /// The (gt, p1, p3) triple used for scoring.
    pub fn to_suite_sample(&self) -> Result<SuiteSample> {
        let Some(gt) = self.gt.clone() else {
            bail!("record `{}` has no ground truth `gt`", self.id);
        };
        let (Some(p1), Some(p3)) = (self.p1.clone(), self.p3.clone()) else {
            bail!("record `{}` has no top-level `p1`/`p3`", self.id);
        };
        Ok(SuiteSample {
            id: self.id.clone(),
            gt,
            p1,
            p3,
        })
    }
}

/// One input line that could not be turned into a record.
#[derive(Debug)]
pub struct Skipped {
    pub line: usize,
    pub id: Option<String>,
    pub error: anyhow::Error,
}

impl Skipped {
    pub fn describe(&self) -> String {
        match &self.id {
            Some(id) => format!("line {} (record `{id}`): {:#}", self.line, self.error),
            None => format!("line {}: {:#}", self.line, self.error),
        }
    }
}

/// Reads every record. Lines that fail to parse or validate are returned in
/// the second list instead of aborting the read. Blank lines are ignored.
pub fn read_records(path: &Path) -> Result<(Vec<ParsedRecord>, Vec<Skipped>)> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut first_grid: Option<EnergyGrid> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Result<SpectrumRecord> = serde_json::from_str(&line).map_err(Into::into);
        let parsed = raw.and_then(|r| r.parse()).and_then(|r| match first_grid {
            Some(g) if g != r.grid => bail!("grid differs from the first record in the file"),
            _ => Ok(r),
        });
        match parsed {
            Ok(r) => {
                first_grid.get_or_insert(r.grid);
                records.push(r);
            }
            Err(error) => skipped.push(Skipped {
                line: i + 1,
                id: record_id(&line),
                error,
            }),
        }
    }
    Ok((records, skipped))
}

/// Best-effort id of a line that failed to parse as a record.
fn record_id(line: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    v.get("id")?.as_str().map(str::to_owned)
}

/// Writes one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}
