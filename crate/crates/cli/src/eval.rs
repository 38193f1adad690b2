use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use qvhs_core::eval::{SampleFailure, Stat};
use qvhs_core::{evaluate_sample, BhlConfig, EvalReport, SuiteSample};
use rayon::prelude::*;

use crate::config::HyperFlags;
use crate::record::read_records;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Input records with ground truth (newline-delimited JSON).
    pub input: PathBuf,
    /// Report file (JSON).
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub hyper: HyperFlags,
}

/// Scores every sample in parallel; output order follows the input.
pub fn evaluate(samples: &[SuiteSample], cfg: &BhlConfig) -> EvalReport {
    let results: Vec<_> = samples.par_iter().map(|s| evaluate_sample(s, cfg)).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in samples.iter().zip(results) {
        match r {
            Ok(r) => records.push(r),
            Err(e) => failures.push(SampleFailure {
                id: s.id.clone(),
                error: e.to_string(),
            }),
        }
    }
    EvalReport::from_records(cfg.clone(), records, failures)
}

/// Reads a dataset whose records all carry ground truth. Returns the
/// samples and the number of unreadable lines.
pub fn load_dataset(path: &Path) -> Result<(Vec<SuiteSample>, usize)> {
    let (records, skipped) = read_records(path)?;
    for s in &skipped {
        log::warn!("skipping {}", s.describe());
    }
    let samples = records
        .iter()
        .map(|r| r.to_suite_sample())
        .collect::<Result<Vec<_>>>()?;
    if samples.is_empty() {
        bail!("{} contains no usable records", path.display());
    }
    Ok((samples, skipped.len()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.6}"))
}

pub fn summary_table(report: &EvalReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let rows: [(&str, &Stat); 6] = [
        ("mae_base", &s.mae_base),
        ("mae_final_recal", &s.mae_final_recal),
        ("imp_mae_pct", &s.imp_mae_pct),
        ("cos_base", &s.cos_base),
        ("cos_final", &s.cos_final),
        ("imp_cos_pct", &s.imp_cos_pct),
    ];
    let _ = writeln!(out, "{:<18} {:>12} {:>12} {:>6}", "metric", "mean", "median", "n");
    for (name, st) in rows {
        let _ = writeln!(
            out,
            "{name:<18} {:>12} {:>12} {:>6}",
            fmt_opt(st.mean),
            fmt_opt(st.median),
            st.count
        );
    }
    let _ = writeln!(
        out,
        "samples {}  failures {}  improved cos {}  improved mae {}  mean cos gain {}",
        report.samples.len(),
        report.failures.len(),
        fmt_opt(s.fraction_improved_cos),
        fmt_opt(s.fraction_improved_mae),
        fmt_opt(s.mean_cos_improvement),
    );
    out
}

pub fn write_report<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Returns the number of skipped input lines.
pub fn run(args: &EvalArgs) -> Result<usize> {
    let cfg = args.hyper.resolve()?;
    let (samples, skipped) = load_dataset(&args.input)?;
    let report = evaluate(&samples, &cfg);
    for f in &report.failures {
        log::warn!("sample `{}` failed: {}", f.id, f.error);
    }
    write_report(&args.output, &report)?;
    print!("{}", summary_table(&report));
    Ok(skipped + report.failures.len())
}
