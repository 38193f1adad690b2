//! wasm-bindgen surface for the browser demo in `www/`.
//!
//! Spectra cross the boundary as plain `Float64Array`s on the fixed
//! [-5, 5] eV window; the grid is inferred from the array length.

use qvhs_core::{
    cosine_distance, enhance, gen_sample, init_peakset, simulate_predictions, BhlConfig,
    EnergyGrid, Spectrum, SynthParams,
};
use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

fn spectrum(values: &[f64]) -> Result<Spectrum, qvhs_core::Error> {
    Spectrum::new(EnergyGrid::fermi_window(values.len())?, values.to_vec())
}

/// One synthetic ground truth with its two simulated predictions.
#[wasm_bindgen]
pub struct Sample {
    energies: Vec<f64>,
    gt: Vec<f64>,
    p1: Vec<f64>,
    p3: Vec<f64>,
}

#[wasm_bindgen]
impl Sample {
    #[wasm_bindgen(getter)]
    pub fn energies(&self) -> Vec<f64> {
        self.energies.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn gt(&self) -> Vec<f64> {
        self.gt.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn p1(&self) -> Vec<f64> {
        self.p1.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn p3(&self) -> Vec<f64> {
        self.p3.clone()
    }
}

#[wasm_bindgen]
pub fn synth_sample(
    seed: u32,
    n_points: usize,
    attenuation: f64,
    noise: f64,
) -> Result<Sample, JsError> {
    let params = SynthParams {
        seed: seed.into(),
        n_samples: 1,
        grid: EnergyGrid::fermi_window(n_points).map_err(js)?,
        peak_attenuation_p3: attenuation,
        noise_amp_p1: noise,
        noise_amp_p3: noise,
        ..Default::default()
    };
    let s = gen_sample(&params, 0).map_err(js)?;
    let (p1, p3) = simulate_predictions(&s, &params).map_err(js)?;
    Ok(Sample {
        energies: params.grid.energies(),
        gt: s.gt.into_values(),
        p1: p1.into_values(),
        p3: p3.into_values(),
    })
}

/// Candidate bins and their curvature priors.
#[wasm_bindgen]
pub struct Detection {
    bins: Vec<u32>,
    mus: Vec<f64>,
    priors: Vec<f64>,
}

#[wasm_bindgen]
impl Detection {
    #[wasm_bindgen(getter)]
    pub fn bins(&self) -> Vec<u32> {
        self.bins.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mus(&self) -> Vec<f64> {
        self.mus.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn priors(&self) -> Vec<f64> {
        self.priors.clone()
    }
}

#[wasm_bindgen]
pub fn detect(p1: &[f64], hessian_sigma: f64) -> Result<Detection, JsError> {
    let cfg = BhlConfig { hessian_sigma, ..Default::default() };
    cfg.validate().map_err(js)?;
    let peaks = init_peakset(&spectrum(p1).map_err(js)?, &cfg).map_err(js)?;
    Ok(Detection {
        bins: peaks.bin_indices.iter().map(|&b| b as u32).collect(),
        mus: peaks.mus,
        priors: peaks.prior_amps,
    })
}

/// Outcome of one fit.
#[wasm_bindgen]
pub struct Enhancement {
    enhanced: Vec<f64>,
    pseudo: Vec<f64>,
    loss_trace: Vec<f64>,
    mus: Vec<f64>,
    amps: Vec<f64>,
    recal_scale: f64,
}

#[wasm_bindgen]
impl Enhancement {
    /// Recalibrated enhanced spectrum.
    #[wasm_bindgen(getter)]
    pub fn enhanced(&self) -> Vec<f64> {
        self.enhanced.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn pseudo(&self) -> Vec<f64> {
        self.pseudo.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn loss_trace(&self) -> Vec<f64> {
        self.loss_trace.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mus(&self) -> Vec<f64> {
        self.mus.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn amps(&self) -> Vec<f64> {
        self.amps.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn recal_scale(&self) -> f64 {
        self.recal_scale
    }
}

#[wasm_bindgen]
pub fn enhance_spectrum(
    p3: &[f64],
    p1: &[f64],
    lambda_reg: f64,
    steps: usize,
) -> Result<Enhancement, JsError> {
    let cfg = BhlConfig { lambda_reg, fit_steps: steps, ..Default::default() };
    cfg.validate().map_err(js)?;
    let r = enhance(&spectrum(p3).map_err(js)?, &spectrum(p1).map_err(js)?, &cfg).map_err(js)?;
    Ok(Enhancement {
        enhanced: r.final_spectrum().values().to_vec(),
        pseudo: r.pseudo.values().to_vec(),
        loss_trace: r.loss_trace.iter().map(|l| l.total).collect(),
        mus: r.fitted_peaks.mus.clone(),
        amps: r.fitted_peaks.amps.clone(),
        recal_scale: r.recal_scale.unwrap_or(1.0),
    })
}

/// Cosine distance, for the metric readout.
#[wasm_bindgen]
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, JsError> {
    cosine_distance(a, b).map_err(js)
}
