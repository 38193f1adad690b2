//! Scoring the pipeline against (smoothed) ground truth.

use serde::{Deserialize, Serialize};

use crate::config::BhlConfig;
use crate::detect::{init_peakset, smooth_or_identity, PeakSet};
use crate::error::{Error, Result};
use crate::fit::{fit_peaks, make_pseudo_target, recalibrate_result, EnhancementResult};
use crate::loss::LossBreakdown;
use crate::metrics::{cosine_distance, mae};
use crate::spectrum::Spectrum;
use crate::synth::{gen_sample, simulate_predictions, SynthParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSample {
    pub id: String,
    pub gt: Spectrum,
    pub p1: Spectrum,
    pub p3: Spectrum,
}

/// Builds the synthetic suite described by `params`.
pub fn synthetic_suite(params: &SynthParams) -> Result<Vec<SuiteSample>> {
    (0..params.n_samples)
        .map(|i| {
            let s = gen_sample(params, i)?;
            let (p1, p3) = simulate_predictions(&s, params)?;
            Ok(SuiteSample {
                id: format!("synth-{}-{i:04}", params.seed),
                gt: s.gt,
                p1,
                p3,
            })
        })
        .collect()
}

/// `100 (base - final) / base`, undefined when `base` is not positive.
pub fn improvement_pct(base: f64, fin: f64) -> Option<f64> {
    (base > 0.0).then(|| 100.0 * (base - fin) / base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub n_peaks: usize,
    pub recal_scale: f64,
    pub mae_base: f64,
    pub mae_final_recal: f64,
    pub cos_base: f64,
    pub cos_final: f64,
    pub imp_mae_pct: Option<f64>,
    pub imp_cos_pct: Option<f64>,
    pub mae_base_pseudo: f64,
    pub mae_final_pseudo_recal: f64,
    pub imp_mae_pseudo_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Number of defined values the statistics were taken over.
    pub count: usize,
}

impl Stat {
    fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut v: Vec<f64> = values.into_iter().flatten().collect();
        if v.is_empty() {
            return Self::default();
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Self {
            mean: Some(v.iter().sum::<f64>() / n as f64),
            median: Some(median),
            count: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub mae_base: Stat,
    pub mae_final_recal: Stat,
    pub cos_base: Stat,
    pub cos_final: Stat,
    pub imp_mae_pct: Stat,
    pub imp_cos_pct: Stat,
    pub mae_base_pseudo: Stat,
    pub mae_final_pseudo_recal: Stat,
    pub imp_mae_pseudo_pct: Stat,
    /// Mean of `cos_base - cos_final`.
    pub mean_cos_improvement: Option<f64>,
    pub fraction_improved_cos: Option<f64>,
    pub fraction_improved_mae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: BhlConfig,
    pub n_samples: usize,
    pub samples: Vec<SampleRecord>,
    pub failures: Vec<SampleFailure>,
    pub summary: Summary,
}

impl EvalReport {
    pub fn from_records(
        config: BhlConfig,
        samples: Vec<SampleRecord>,
        failures: Vec<SampleFailure>,
    ) -> Self {
        let fraction = |pred: fn(&SampleRecord) -> bool| {
            (!samples.is_empty())
                .then(|| samples.iter().filter(|r| pred(r)).count() as f64 / samples.len() as f64)
        };
        let stat = |f: fn(&SampleRecord) -> Option<f64>| Stat::of(samples.iter().map(f));
        let summary = Summary {
            mae_base: stat(|r| Some(r.mae_base)),
            mae_final_recal: stat(|r| Some(r.mae_final_recal)),
            cos_base: stat(|r| Some(r.cos_base)),
            cos_final: stat(|r| Some(r.cos_final)),
            imp_mae_pct: stat(|r| r.imp_mae_pct),
            imp_cos_pct: stat(|r| r.imp_cos_pct),
            mae_base_pseudo: stat(|r| Some(r.mae_base_pseudo)),
            mae_final_pseudo_recal: stat(|r| Some(r.mae_final_pseudo_recal)),
            imp_mae_pseudo_pct: stat(|r| r.imp_mae_pseudo_pct),
            mean_cos_improvement: stat(|r| Some(r.cos_base - r.cos_final)).mean,
            fraction_improved_cos: fraction(|r| r.cos_final < r.cos_base),
            fraction_improved_mae: fraction(|r| r.mae_final_recal < r.mae_base),
        };
        Self {
            config,
            n_samples: samples.len() + failures.len(),
            samples,
            failures,
            summary,
        }
    }
}

/// Runs detection, fit and recalibration on one sample and scores it.
/// `observer` is forwarded to the fitting loop.
pub fn evaluate_sample_with(
    sample: &SuiteSample,
    cfg: &BhlConfig,
    observer: impl FnMut(usize, &PeakSet, &LossBreakdown),
) -> Result<(SampleRecord, EnhancementResult)> {
    sample.gt.check_same_grid(&sample.p3)?;
    sample.gt.check_same_grid(&sample.p1)?;
    let pseudo = make_pseudo_target(&sample.p3, cfg)?;
    let peaks = init_peakset(&sample.p1, cfg)?.with_sample_id(sample.id.clone());
    let fitted = fit_peaks(&sample.p3, &pseudo, peaks, cfg, observer)?;
    let result = recalibrate_result(fitted, cfg)?;

    let gt_smooth = smooth_or_identity(sample.gt.values(), cfg.pseudo_sigma)?;
    let base = sample.p3.values();
    let fin = result.final_spectrum().values();
    let mae_base = mae(base, &gt_smooth)?;
    let mae_final_recal = mae(fin, &gt_smooth)?;
    let cos_base = cosine_distance(base, &gt_smooth)?;
    let cos_final = cosine_distance(fin, &gt_smooth)?;
    let mae_base_pseudo = mae(base, pseudo.values())?;
    let mae_final_pseudo_recal = mae(fin, pseudo.values())?;
    let record = SampleRecord {
        id: sample.id.clone(),
        n_peaks: result.fitted_peaks.len(),
        recal_scale: result.recal_scale.unwrap_or(1.0),
        mae_base,
        mae_final_recal,
        cos_base,
        cos_final,
        imp_mae_pct: improvement_pct(mae_base, mae_final_recal),
        imp_cos_pct: improvement_pct(cos_base, cos_final),
        mae_base_pseudo,
        mae_final_pseudo_recal,
        imp_mae_pseudo_pct: improvement_pct(mae_base_pseudo, mae_final_pseudo_recal),
    };
    Ok((record, result))
}

pub fn evaluate_sample(sample: &SuiteSample, cfg: &BhlConfig) -> Result<SampleRecord> {
    Ok(evaluate_sample_with(sample, cfg, |_, _, _| {})?.0)
}

/// Scores every sample. Per-sample failures are collected, not fatal.
pub fn evaluate_suite(dataset: &[SuiteSample], cfg: &BhlConfig) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::Empty("evaluation dataset".into()));
    }
    cfg.validate()?;
    let mut records = Vec::with_capacity(dataset.len());
    let mut failures = Vec::new();
    for sample in dataset {
        match evaluate_sample(sample, cfg) {
            Ok(r) => records.push(r),
            Err(e) => failures.push(SampleFailure {
                id: sample.id.clone(),
                error: e.to_string(),
            }),
        }
    }
    Ok(EvalReport::from_records(cfg.clone(), records, failures))
}
