use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use qvhs_core::{
    aggregate_pdos, cosine_distance, fit_peaks, init_peakset, mae, make_pseudo_target,
    recalibrate::baseline_norm, AtomSpectra, AtomicSpectrumSet, Aggregation, BhlConfig,
    EnhancementResult, LossBreakdown, PeakSet, Spectrum,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::HyperFlags;
use crate::record::{read_records, write_jsonl, ParsedRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    /// Plain sum of per-atom enhanced spectra.
    Raw,
    /// Each atom divided by its own baseline integral before summing.
    PerAtom,
    /// One baseline integral shared by all atoms.
    SharedZ,
}

impl From<AggregationArg> for Aggregation {
    fn from(a: AggregationArg) -> Self {
        match a {
            AggregationArg::Raw => Aggregation::Raw,
            AggregationArg::PerAtom => Aggregation::PerAtom,
            AggregationArg::SharedZ => Aggregation::SharedZ,
        }
    }
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    /// Input records (newline-delimited JSON).
    pub input: PathBuf,
    /// Results file (newline-delimited JSON).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Directory for per-sample CSV plot data.
    #[arg(long, value_name = "DIR")]
    pub plot_data: Option<PathBuf>,
    /// How per-atom spectra are combined for records with `atoms`.
    #[arg(long, value_enum, default_value = "per-atom")]
    pub aggregation: AggregationArg,
    #[command(flatten)]
    pub hyper: HyperFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakRow {
    pub bin: usize,
    pub mu: f64,
    pub amp: f64,
    pub sigma: f64,
    pub prior: f64,
    pub included: bool,
}

fn peak_rows(p: &PeakSet) -> Vec<PeakRow> {
    (0..p.len())
        .map(|i| PeakRow {
            bin: p.bin_indices[i],
            mu: p.mus[i],
            amp: p.amps[i],
            sigma: p.sigmas[i],
            prior: p.prior_amps[i],
            included: p.included[i],
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomOutput {
    pub atom_id: String,
    pub recal_scale: f64,
    /// Absolute baseline integral used by the per-atom normalization.
    pub baseline_integral: f64,
    pub peaks: Vec<PeakRow>,
    pub loss_trace: Vec<f64>,
    pub enhanced: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnhanceOutput {
    pub id: String,
    /// Recalibrated enhanced spectrum (aggregated over atoms in pDOS mode).
    pub enhanced: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recal_scale: Option<f64>,
    pub peaks: Vec<PeakRow>,
    /// Total loss recorded at every optimization step.
    pub loss_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<LossBreakdown>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomOutput>,
}

/// Detection, exclusion masking, fit and recalibration of one spectrum.
pub fn enhance_spectrum(
    id: &str,
    base: &Spectrum,
    p1: &Spectrum,
    excluded: &[f64],
    cfg: &BhlConfig,
) -> Result<EnhancementResult> {
    let pseudo = make_pseudo_target(base, cfg)?;
    let mut peaks = init_peakset(p1, cfg)?.with_sample_id(id);
    peaks.exclude_near(excluded, base.grid());
    let fitted = fit_peaks(base, &pseudo, peaks, cfg, |_, _, _| {})?;
    Ok(qvhs_core::fit::recalibrate_result(fitted, cfg)?)
}

struct Processed {
    output: EnhanceOutput,
    base: Spectrum,
    gt_smooth: Option<Spectrum>,
}

fn totals(trace: &[LossBreakdown]) -> Vec<f64> {
    trace.iter().map(|l| l.total).collect()
}

fn process(rec: &ParsedRecord, cfg: &BhlConfig, aggregation: Aggregation) -> Result<Processed> {
    let gt_smooth = rec.gt.as_ref().map(|g| make_pseudo_target(g, cfg)).transpose()?;
    let (mut output, base) = if rec.atoms.is_empty() {
        let (p1, p3) = (rec.p1.as_ref().unwrap(), rec.p3.as_ref().unwrap());
        let r = enhance_spectrum(&rec.id, p3, p1, &rec.peaks_excluded, cfg)?;
        let output = EnhanceOutput {
            id: rec.id.clone(),
            enhanced: r.final_spectrum().values().to_vec(),
            recal_scale: r.recal_scale,
            peaks: peak_rows(&r.fitted_peaks),
            loss_trace: totals(&r.loss_trace),
            final_loss: r.loss_trace.last().cloned(),
            metrics: r.metrics,
            warnings: r.warnings,
            atoms: Vec::new(),
        };
        (output, p3.clone())
    } else {
        process_atoms(rec, cfg, aggregation)?
    };
    if let Some(gt) = &gt_smooth {
        let fin = &output.enhanced;
        let pairs = [
            ("mae_base", mae(base.values(), gt.values())?),
            ("mae_final_recal", mae(fin, gt.values())?),
            ("cos_base", cosine_distance(base.values(), gt.values())?),
            ("cos_final", cosine_distance(fin, gt.values())?),
        ];
        output
            .metrics
            .extend(pairs.into_iter().map(|(k, v)| (k.to_owned(), v)));
    }
    Ok(Processed {
        output,
        base,
        gt_smooth,
    })
}

fn process_atoms(
    rec: &ParsedRecord,
    cfg: &BhlConfig,
    aggregation: Aggregation,
) -> Result<(EnhanceOutput, Spectrum)> {
    let mut atoms = Vec::new();
    let mut outputs = Vec::new();
    let mut warnings = Vec::new();
    for (atom_id, p1, p3) in &rec.atoms {
        let r = enhance_spectrum(&format!("{}/{atom_id}", rec.id), p3, p1, &rec.peaks_excluded, cfg)
            .with_context(|| format!("atom `{atom_id}`"))?;
        warnings.extend(r.warnings.iter().map(|w| format!("atom `{atom_id}`: {w}")));
        let spectra = AtomSpectra {
            atom_id: atom_id.clone(),
            base: p3.clone(),
            enhanced: r.final_spectrum().clone(),
        };
        let z = match aggregation {
            Aggregation::PerAtom => baseline_norm(&spectra)?,
            _ => qvhs_core::trapz_integral(p3).abs(),
        };
        outputs.push(AtomOutput {
            atom_id: atom_id.clone(),
            recal_scale: r.recal_scale.unwrap_or(1.0),
            baseline_integral: z,
            peaks: peak_rows(&r.fitted_peaks),
            loss_trace: totals(&r.loss_trace),
            enhanced: r.final_spectrum().values().to_vec(),
        });
        atoms.push(spectra);
    }
    let set = AtomicSpectrumSet::new(rec.id.clone(), atoms)?;
    let total = aggregate_pdos(&set, aggregation)?;
    let base = match &rec.p3 {
        Some(p3) => p3.clone(),
        None => {
            let mut sum = vec![0.0; rec.grid.n_points()];
            for a in &set.atoms {
                sum.iter_mut().zip(a.base.values()).for_each(|(s, v)| *s += v);
            }
            Spectrum::new(rec.grid, sum)?
        }
    };
    let output = EnhanceOutput {
        id: rec.id.clone(),
        enhanced: total.into_values(),
        recal_scale: None,
        peaks: Vec::new(),
        loss_trace: Vec::new(),
        final_loss: None,
        metrics: BTreeMap::from([("n_atoms".to_owned(), set.atoms.len() as f64)]),
        warnings,
        atoms: outputs,
    };
    Ok((output, base))
}

/// File-name-safe version of a record id.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn write_plot_data(dir: &Path, p: &Processed) -> Result<()> {
    let stem = file_stem(&p.output.id);
    let grid = p.base.grid();
    let mut csv = String::from("energy,gt_smooth,p3,enhanced\n");
    for i in 0..grid.n_points() {
        let gt = p.gt_smooth.as_ref().map(|g| g.values()[i].to_string()).unwrap_or_default();
        writeln!(csv, "{},{gt},{},{}", grid.energy(i), p.base.values()[i], p.output.enhanced[i])?;
    }
    let path = dir.join(format!("{stem}.csv"));
    std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;

    let mut peaks = String::from("atom_id,bin,mu,amp,sigma,prior,included\n");
    let mut push = |atom: &str, rows: &[PeakRow]| -> std::fmt::Result {
        for r in rows {
            writeln!(
                peaks,
                "{atom},{},{},{},{},{},{}",
                r.bin, r.mu, r.amp, r.sigma, r.prior, r.included
            )?;
        }
        Ok(())
    };
    push("", &p.output.peaks)?;
    for a in &p.output.atoms {
        push(&a.atom_id, &a.peaks)?;
    }
    let path = dir.join(format!("{stem}_peaks.csv"));
    std::fs::write(&path, peaks).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Returns the number of skipped records.
pub fn run(args: &EnhanceArgs) -> Result<usize> {
    let cfg = args.hyper.resolve()?;
    let (records, skipped) = read_records(&args.input)?;
    for s in &skipped {
        log::warn!("skipping {}", s.describe());
    }
    let aggregation = Aggregation::from(args.aggregation);
    let results: Vec<Result<Processed>> = records
        .par_iter()
        .map(|r| process(r, &cfg, aggregation))
        .collect();

    if let Some(dir) = &args.plot_data {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut outputs = Vec::new();
    let mut failed = 0;
    for (rec, res) in records.iter().zip(results) {
        match res {
            Ok(p) => {
                if let Some(dir) = &args.plot_data {
                    write_plot_data(dir, &p)?;
                }
                outputs.push(p.output);
            }
            Err(e) => {
                log::warn!("skipping record `{}`: {e:#}", rec.id);
                failed += 1;
            }
        }
    }
    write_jsonl(&args.output, &outputs)?;
    log::info!("enhanced {} records into {}", outputs.len(), args.output.display());
    Ok(skipped.len() + failed)
}
