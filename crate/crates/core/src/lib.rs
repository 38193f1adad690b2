//! Peak-aware post-processing of density-of-states (DOS) spectra.
//!
//! A coarse prediction of a spectrum (from a shallow model) is scanned for
//! local maxima. Those quasi van Hove singularity candidates seed additive
//! Gaussian peaks that are fitted onto a refined prediction by minimizing a
//! four-term loss:
//!
//! ```text
//! L = [1 - cos(y_enh, pseudo)]
//!   + λ_f [1 - cos(|F(y_enh)|, |F(pseudo)|)]
//!   + λ_A mean(((A - A_prior) / σ_A)^2)
//!   + λ_c mean(|Δ² y_enh|)
//! ```
//!
//! where `y_enh = base + Σ A_i exp(-(E - μ_i)^2 / 2σ_i^2)`, `pseudo` is the
//! smoothed base prediction and `A_prior` comes from the curvature of the
//! coarse prediction at each candidate. The enhanced spectrum is then
//! rescaled so its integral matches the pseudo-target, which needs no ground
//! truth.
//!
//! Module map:
//! - [`spectrum`]: energy grids, smoothing, finite differences, integration
//! - [`metrics`]: cosine, Fourier-magnitude cosine and MAE
//! - [`detect`]: candidate detection and curvature priors
//! - [`loss`], [`optim`], [`fit`]: the loss, its gradients and the fitting loop
//! - [`recalibrate`]: integral recalibration, per-atom normalization, pDOS sums
//! - [`synth`], [`eval`]: synthetic benchmark and scoring

// Negated comparisons are used on purpose so that NaN fails bound checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod fit;
pub mod loss;
pub mod metrics;
pub mod optim;
pub mod recalibrate;
pub mod spectrum;
pub mod synth;

pub use config::{BhlConfig, PriorUnits};
pub use detect::{detect_peaks, hessian_priors, init_peakset, PeakSet};
pub use error::{Error, Result};
pub use eval::{
    evaluate_sample, evaluate_sample_with, evaluate_suite, synthetic_suite, EvalReport, SampleRecord,
    SuiteSample,
};
pub use fit::{enhance, fit, fit_peaks, make_pseudo_target, EnhancementResult};
pub use loss::{bhl_gradients, bhl_loss, gaussian_sum, Gradients, LossBreakdown};
pub use metrics::{cosine_distance, fft_magnitude, fourier_cosine_distance, mae};
pub use optim::{project_constraints, FitState};
pub use recalibrate::{
    aggregate_pdos, gt_free_recalibrate, nbhl_normalize, Aggregation, AtomSpectra,
    AtomicSpectrumSet, Recalibration,
};
pub use spectrum::{
    first_diff, gaussian_smooth, second_diff, trapz_integral, EnergyGrid, Spectrum,
};
pub use synth::{gen_ground_truth, gen_sample, simulate_predictions, SynthParams, SyntheticSample};
