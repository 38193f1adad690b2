//! The fitting loop: pseudo-target, candidate peaks, projected Adam.

use std::collections::BTreeMap;

use crate::config::BhlConfig;
use crate::detect::{init_peakset, smooth_or_identity, PeakSet};
use crate::error::Result;
use crate::loss::{LossBreakdown, LossContext};
use crate::metrics::{cosine_distance, fourier_cosine_distance};
use crate::optim::{project_constraints, FitState};
use crate::recalibrate::gt_free_recalibrate;
use crate::spectrum::{trapz_integral, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementResult {
    /// Smoothed base prediction used as the fitting target.
    pub pseudo: Spectrum,
    /// `base + Σ peaks`, before recalibration.
    pub enhanced: Spectrum,
    pub fitted_peaks: PeakSet,
    /// Loss at the start of each optimization step.
    pub loss_trace: Vec<LossBreakdown>,
    /// Recalibrated spectrum; set by [`enhance`].
    pub recalibrated: Option<Spectrum>,
    pub recal_scale: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl EnhancementResult {
    /// Recalibrated output when available, otherwise the raw enhanced one.
    pub fn final_spectrum(&self) -> &Spectrum {
        self.recalibrated.as_ref().unwrap_or(&self.enhanced)
    }
}

/// Gaussian-smoothed base; `pseudo_sigma < 0.25` bins returns `base` as is.
pub fn make_pseudo_target(base: &Spectrum, cfg: &BhlConfig) -> Result<Spectrum> {
    Spectrum::new(*base.grid(), smooth_or_identity(base.values(), cfg.pseudo_sigma)?)
}

/// Fits amps and sigmas of `peaks` (centers frozen) onto `base` against
/// `pseudo`, running exactly `cfg.fit_steps` projected Adam steps.
///
/// `observer` sees the step index, the projected peaks after the update and
/// the loss recorded for that step.
pub fn fit_peaks(
    base: &Spectrum,
    pseudo: &Spectrum,
    peaks: PeakSet,
    cfg: &BhlConfig,
    mut observer: impl FnMut(usize, &PeakSet, &LossBreakdown),
) -> Result<EnhancementResult> {
    cfg.validate()?;
    peaks.validate(base.grid(), None)?;
    let ctx = LossContext::new(base, pseudo)?;
    let mut peaks = project_constraints(peaks, cfg);
    let k = peaks.len();

    let mut state = FitState::new(peaks.amps.iter().chain(&peaks.sigmas).copied().collect());
    let mut trace = Vec::with_capacity(cfg.fit_steps);
    let mut grad_buf = vec![0.0; 2 * k];
    for step in 0..cfg.fit_steps {
        let (loss, grads) = ctx.evaluate(&peaks, cfg, true);
        let grads = grads.expect("gradients requested");
        grad_buf[..k].copy_from_slice(&grads.d_amps);
        grad_buf[k..].copy_from_slice(&grads.d_sigmas);
        state.adam_step(&grad_buf, cfg.fit_lr);

        peaks.amps.copy_from_slice(&state.params[..k]);
        peaks.sigmas.copy_from_slice(&state.params[k..]);
        peaks = project_constraints(peaks, cfg);
        state.params[..k].copy_from_slice(&peaks.amps);
        state.params[k..].copy_from_slice(&peaks.sigmas);

        observer(step, &peaks, &loss);
        trace.push(loss);
    }

    let enhanced = Spectrum::new(*base.grid(), ctx.enhanced_values(&peaks))?;
    let mut metrics = BTreeMap::new();
    metrics.insert("n_peaks".into(), k as f64);
    metrics.insert("n_included".into(), peaks.n_included() as f64);
    metrics.insert("final_loss".into(), ctx.loss(&peaks, cfg).total);
    metrics.insert(
        "cos_enhanced_vs_pseudo".into(),
        cosine_distance(enhanced.values(), pseudo.values())?,
    );
    metrics.insert(
        "fourier_cos_enhanced_vs_pseudo".into(),
        fourier_cosine_distance(enhanced.values(), pseudo.values())?,
    );
    Ok(EnhancementResult {
        pseudo: pseudo.clone(),
        enhanced,
        fitted_peaks: peaks,
        loss_trace: trace,
        recalibrated: None,
        recal_scale: None,
        metrics,
        warnings: Vec::new(),
    })
}

/// Pseudo-target, candidate detection on `p1`, and the fit on `base`.
/// The result is not recalibrated.
pub fn fit(base: &Spectrum, p1: &Spectrum, cfg: &BhlConfig) -> Result<EnhancementResult> {
    base.check_same_grid(p1)?;
    let pseudo = make_pseudo_target(base, cfg)?;
    let peaks = init_peakset(p1, cfg)?;
    fit_peaks(base, &pseudo, peaks, cfg, |_, _, _| {})
}

/// [`fit`] followed by the ground-truth-free recalibration.
pub fn enhance(base: &Spectrum, p1: &Spectrum, cfg: &BhlConfig) -> Result<EnhancementResult> {
    let result = fit(base, p1, cfg)?;
    recalibrate_result(result, cfg)
}

/// Fills the recalibration fields of a fitted result.
pub fn recalibrate_result(mut result: EnhancementResult, cfg: &BhlConfig) -> Result<EnhancementResult> {
    let recal = gt_free_recalibrate(&result.enhanced, &result.pseudo, cfg.epsilon_recal)?;
    result.metrics.insert("recal_scale".into(), recal.scale);
    result
        .metrics
        .insert("integral_pseudo".into(), trapz_integral(&result.pseudo));
    result
        .metrics
        .insert("integral_enhanced".into(), trapz_integral(&result.enhanced));
    if let Some(w) = &recal.warning {
        log::warn!("sample `{}`: {w}", result.fitted_peaks.sample_id);
        result.warnings.push(w.clone());
    }
    result.recal_scale = Some(recal.scale);
    result.recalibrated = Some(recal.spectrum);
    Ok(result)
}
