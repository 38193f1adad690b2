//! The four-term fitting objective and its analytic gradient.
//!
//! With `y = base + Σ_i A_i g_i`, `g_i(E) = exp(-(E - μ_i)² / 2σ_i²)`:
//!
//! ```text
//! total = cos(y, pseudo) + λ_f cos(|F y|, |F pseudo|)
//!       + λ_A mean_i ((A_i - prior_i) / σ_A)^2 + λ_c mean_n |Δ² y_n|
//! ```
//!
//! where `cos` is the cosine *distance*. Gradients flow through `y` for the
//! spectral terms (`∂y/∂A_i = g_i`, `∂y/∂σ_i = A_i g_i (E - μ_i)² / σ_i³`)
//! and directly for the prior term. The curvature term uses the subgradient
//! `sign(Δ²y)` with `sign(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::config::BhlConfig;
use crate::detect::PeakSet;
use crate::error::{Error, Result};
use crate::metrics::{cosine_distance_grad, FourierPlan};
use crate::spectrum::{second_diff_values, EnergyGrid, Spectrum};

/// Unweighted loss terms plus the weights that produced `total`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub cos_term: f64,
    pub fourier_term: f64,
    pub prior_term: f64,
    pub curvature_term: f64,
    pub total: f64,
    pub freq_weight: f64,
    pub lambda_reg: f64,
    pub curv_weight: f64,
}

impl LossBreakdown {
    fn assemble(cos: f64, fourier: f64, prior: f64, curvature: f64, cfg: &BhlConfig) -> Self {
        Self {
            cos_term: cos,
            fourier_term: fourier,
            prior_term: prior,
            curvature_term: curvature,
            total: cos
                + cfg.freq_weight * fourier
                + cfg.lambda_reg * prior
                + cfg.curv_weight * curvature,
            freq_weight: cfg.freq_weight,
            lambda_reg: cfg.lambda_reg,
            curv_weight: cfg.curv_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients {
    pub d_amps: Vec<f64>,
    pub d_sigmas: Vec<f64>,
}

fn gaussian(e: f64, mu: f64, sigma: f64) -> f64 {
    let d = e - mu;
    (-d * d / (2.0 * sigma * sigma)).exp()
}

fn gaussian_sum_values(energies: &[f64], peaks: &PeakSet) -> Vec<f64> {
    let mut out = vec![0.0; energies.len()];
    for i in (0..peaks.len()).filter(|&i| peaks.included[i]) {
        let (a, mu, s) = (peaks.amps[i], peaks.mus[i], peaks.sigmas[i]);
        for (o, &e) in out.iter_mut().zip(energies) {
            *o += a * gaussian(e, mu, s);
        }
    }
    out
}

/// Sum of the included Gaussian peaks sampled on `grid`.
pub fn gaussian_sum(grid: &EnergyGrid, peaks: &PeakSet) -> Result<Spectrum> {
    peaks.validate(grid, None)?;
    Spectrum::new(*grid, gaussian_sum_values(&grid.energies(), peaks))
}

/// Precomputed pieces shared by every loss evaluation of one fit.
#[derive(Debug, Clone)]
pub struct LossContext<'a> {
    base: &'a Spectrum,
    pseudo: &'a Spectrum,
    energies: Vec<f64>,
    plan: FourierPlan,
    pseudo_mag: Vec<f64>,
}

impl<'a> LossContext<'a> {
    pub fn new(base: &'a Spectrum, pseudo: &'a Spectrum) -> Result<Self> {
        base.check_same_grid(pseudo)?;
        let plan = FourierPlan::new(base.len());
        let pseudo_mag = plan.magnitude(pseudo.values());
        Ok(Self {
            base,
            pseudo,
            energies: base.grid().energies(),
            plan,
            pseudo_mag,
        })
    }

    pub fn enhanced_values(&self, peaks: &PeakSet) -> Vec<f64> {
        let mut y = gaussian_sum_values(&self.energies, peaks);
        y.iter_mut().zip(self.base.values()).for_each(|(v, b)| *v += b);
        y
    }

    fn prior_term(peaks: &PeakSet, cfg: &BhlConfig) -> (f64, Vec<f64>) {
        let k = peaks.n_included();
        let mut grad = vec![0.0; peaks.len()];
        if k == 0 {
            return (0.0, grad);
        }
        let mut sum = 0.0;
        for i in (0..peaks.len()).filter(|&i| peaks.included[i]) {
            let w = peaks.prior_width(i, cfg);
            let z = (peaks.amps[i] - peaks.prior_amps[i]) / w;
            sum += z * z;
            grad[i] = 2.0 * z / (w * k as f64);
        }
        (sum / k as f64, grad)
    }

    pub fn loss(&self, peaks: &PeakSet, cfg: &BhlConfig) -> LossBreakdown {
        self.evaluate(peaks, cfg, false).0
    }

    /// Loss and, when `with_grad`, its gradient with respect to amps and
    /// sigmas.
    pub fn evaluate(
        &self,
        peaks: &PeakSet,
        cfg: &BhlConfig,
        with_grad: bool,
    ) -> (LossBreakdown, Option<Gradients>) {
        let y = self.enhanced_values(peaks);
        let n = y.len();
        let (cos, d_cos) = cosine_distance_grad(&y, self.pseudo.values());

        let coeffs = self.plan.transform(&y);
        let mag: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
        let (fourier, d_mag) = cosine_distance_grad(&mag, &self.pseudo_mag);

        let curv = second_diff_values(&y);
        let curvature = curv.iter().map(|v| v.abs()).sum::<f64>() / n as f64;

        let (prior, d_prior) = Self::prior_term(peaks, cfg);
        let breakdown = LossBreakdown::assemble(cos, fourier, prior, curvature, cfg);
        if !with_grad {
            return (breakdown, None);
        }

        // dL/dy
        let mut dy = d_cos;
        if cfg.freq_weight != 0.0 {
            let d_fourier = self.plan.magnitude_pullback(&coeffs, &d_mag);
            dy.iter_mut()
                .zip(&d_fourier)
                .for_each(|(g, f)| *g += cfg.freq_weight * f);
        }
        if cfg.curv_weight != 0.0 {
            let w = cfg.curv_weight / n as f64;
            for j in 1..n - 1 {
                let s = sign(curv[j]);
                if s != 0.0 {
                    dy[j - 1] += w * s;
                    dy[j] -= 2.0 * w * s;
                    dy[j + 1] += w * s;
                }
            }
        }

        let mut grads = Gradients {
            d_amps: vec![0.0; peaks.len()],
            d_sigmas: vec![0.0; peaks.len()],
        };
        for i in (0..peaks.len()).filter(|&i| peaks.included[i]) {
            let (a, mu, s) = (peaks.amps[i], peaks.mus[i], peaks.sigmas[i]);
            let (mut da, mut ds) = (0.0, 0.0);
            for (&e, g) in self.energies.iter().zip(&dy) {
                let gi = gaussian(e, mu, s);
                da += g * gi;
                ds += g * gi * (e - mu).powi(2);
            }
            grads.d_amps[i] = da + cfg.lambda_reg * d_prior[i];
            grads.d_sigmas[i] = ds * a / (s * s * s);
        }
        (breakdown, Some(grads))
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_inputs(base: &Spectrum, pseudo: &Spectrum, peaks: &PeakSet) -> Result<()> {
    base.check_same_grid(pseudo)?;
    peaks.validate(base.grid(), None)?;
    if let Some(i) = peaks.sigmas.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::InvalidPeaks(format!("peak {i} has non-positive width")));
    }
    Ok(())
}

pub fn bhl_loss(
    base: &Spectrum,
    pseudo: &Spectrum,
    peaks: &PeakSet,
    cfg: &BhlConfig,
) -> Result<LossBreakdown> {
    check_inputs(base, pseudo, peaks)?;
    Ok(LossContext::new(base, pseudo)?.loss(peaks, cfg))
}

pub fn bhl_gradients(
    base: &Spectrum,
    pseudo: &Spectrum,
    peaks: &PeakSet,
    cfg: &BhlConfig,
) -> Result<Gradients> {
    check_inputs(base, pseudo, peaks)?;
    let (_, grads) = LossContext::new(base, pseudo)?.evaluate(peaks, cfg, true);
    Ok(grads.expect("gradients requested"))
}
