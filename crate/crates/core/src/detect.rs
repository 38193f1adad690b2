//! Quasi van Hove singularity candidates: local maxima of the coarse
//! prediction, with amplitude priors read off its curvature.

use serde::{Deserialize, Serialize};

use crate::config::{BhlConfig, PriorUnits};
use crate::error::{Error, Result};
use crate::spectrum::{second_diff_values, smooth_values, EnergyGrid, Spectrum};

/// Smoothing widths below this many bins are treated as "no smoothing".
pub const IDENTITY_SIGMA_BINS: f64 = 0.25;

pub(crate) fn smooth_or_identity(values: &[f64], sigma_bins: f64) -> Result<Vec<f64>> {
    if sigma_bins < IDENTITY_SIGMA_BINS {
        Ok(values.to_vec())
    } else {
        smooth_values(values, sigma_bins)
    }
}

/// Candidate peaks of one sample. All sequences are parallel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeakSet {
    pub sample_id: String,
    pub bin_indices: Vec<usize>,
    /// Peak centers, eV. Frozen during fitting.
    pub mus: Vec<f64>,
    pub amps: Vec<f64>,
    /// Peak widths, eV.
    pub sigmas: Vec<f64>,
    pub prior_amps: Vec<f64>,
    /// `false` marks a peak excluded by external information; it then
    /// contributes nothing to the spectrum or the prior term.
    pub included: Vec<bool>,
    /// Optional per-peak σ_A overriding [`BhlConfig::sigma_a`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_widths: Option<Vec<f64>>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.bin_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_indices.is_empty()
    }

    pub fn n_included(&self) -> usize {
        self.included.iter().filter(|&&b| b).count()
    }

    pub fn with_sample_id(mut self, id: impl Into<String>) -> Self {
        self.sample_id = id.into();
        self
    }

    /// σ_A for peak `i`.
    pub fn prior_width(&self, i: usize, cfg: &BhlConfig) -> f64 {
        self.prior_widths
            .as_ref()
            .map_or(cfg.sigma_a, |w| w[i])
    }

    /// Marks every peak whose center lies within half a bin of one of
    /// `energies` as excluded.
    pub fn exclude_near(&mut self, energies: &[f64], grid: &EnergyGrid) {
        let half_bin = 0.5 * grid.spacing();
        for (mu, inc) in self.mus.iter().zip(self.included.iter_mut()) {
            if energies.iter().any(|e| (e - mu).abs() <= half_bin) {
                *inc = false;
            }
        }
    }

    /// Checks the structural invariants against a grid and, when given, the
    /// configured width bounds.
    pub fn validate(&self, grid: &EnergyGrid, cfg: Option<&BhlConfig>) -> Result<()> {
        let n = self.len();
        let lens = [
            self.mus.len(),
            self.amps.len(),
            self.sigmas.len(),
            self.prior_amps.len(),
            self.included.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::InvalidPeaks(format!(
                "parallel sequences differ in length: {n} indices vs {lens:?}"
            )));
        }
        if let Some(w) = &self.prior_widths {
            if w.len() != n || w.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidPeaks("prior_widths must be positive, one per peak".into()));
            }
        }
        if self.bin_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPeaks("bin indices must be strictly increasing".into()));
        }
        if self
            .bin_indices
            .iter()
            .any(|&i| i == 0 || i + 1 >= grid.n_points())
        {
            return Err(Error::InvalidPeaks("bin indices must be interior".into()));
        }
        if self.amps.iter().chain(&self.prior_amps).any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidPeaks("amplitudes and priors must be >= 0".into()));
        }
        if let Some(cfg) = cfg {
            if self
                .sigmas
                .iter()
                .any(|s| !(cfg.min_sigma <= *s && *s <= cfg.max_sigma))
            {
                return Err(Error::InvalidPeaks("width outside [min_sigma, max_sigma]".into()));
            }
        }
        Ok(())
    }

    fn retain(&mut self, keep: impl Fn(usize) -> bool) {
        let mask: Vec<bool> = (0..self.len()).map(keep).collect();
        fn filter<T: Clone>(v: &[T], mask: &[bool]) -> Vec<T> {
            v.iter()
                .zip(mask)
                .filter(|(_, &k)| k)
                .map(|(x, _)| x.clone())
                .collect()
        }
        self.bin_indices = filter(&self.bin_indices, &mask);
        self.mus = filter(&self.mus, &mask);
        self.amps = filter(&self.amps, &mask);
        self.sigmas = filter(&self.sigmas, &mask);
        self.prior_amps = filter(&self.prior_amps, &mask);
        self.included = filter(&self.included, &mask);
        if let Some(w) = self.prior_widths.take() {
            self.prior_widths = Some(filter(&w, &mask));
        }
    }
}

/// Interior indices `n` with `y[n-1] < y[n] >= y[n+1]`. A flat-topped
/// maximum therefore reports its leftmost bin.
pub fn detect_peaks(p1: &Spectrum) -> Vec<usize> {
    p1.values()
        .windows(3)
        .enumerate()
        .filter(|(_, w)| w[0] < w[1] && w[1] >= w[2])
        .map(|(i, _)| i + 1)
        .collect()
}

/// Curvature-implied amplitudes `max(0, -D''(E_i) * init_sigma^2)`.
///
/// For a Gaussian `A exp(-(E-μ)²/2σ²)`, `D''(μ) = -A/σ²`, so with
/// `init_sigma = σ` the prior recovers `A`.
pub fn hessian_priors(
    p1: &Spectrum,
    indices: &[usize],
    init_sigma: f64,
    smooth_sigma_bins: f64,
    units: PriorUnits,
) -> Result<Vec<f64>> {
    let n = p1.len();
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i + 1 >= n) {
        return Err(Error::InvalidPeaks(format!("index {bad} is not an interior bin")));
    }
    let mut curvature = second_diff_values(p1.values());
    if units == PriorUnits::Physical {
        let h2 = p1.grid().spacing().powi(2);
        curvature.iter_mut().for_each(|v| *v /= h2);
    }
    let hess = smooth_or_identity(&curvature, smooth_sigma_bins)?;
    Ok(indices
        .iter()
        .map(|&i| (-hess[i] * init_sigma * init_sigma).max(0.0))
        .collect())
}

/// Detects candidates in `p1` and seeds their fit parameters.
pub fn init_peakset(p1: &Spectrum, cfg: &BhlConfig) -> Result<PeakSet> {
    let bin_indices = detect_peaks(p1);
    let prior_amps = hessian_priors(
        p1,
        &bin_indices,
        cfg.init_sigma,
        cfg.hessian_sigma,
        cfg.prior_units,
    )?;
    let n = bin_indices.len();
    let mut peaks = PeakSet {
        sample_id: String::new(),
        mus: bin_indices.iter().map(|&i| p1.grid().energy(i)).collect(),
        amps: bin_indices.iter().map(|&i| p1.values()[i].max(0.0)).collect(),
        sigmas: vec![cfg.init_sigma; n],
        prior_amps,
        included: vec![true; n],
        prior_widths: None,
        bin_indices,
    };
    if cfg.drop_zero_prior {
        let priors = peaks.prior_amps.clone();
        peaks.retain(|i| priors[i] > 0.0);
    }
    Ok(peaks)
}
