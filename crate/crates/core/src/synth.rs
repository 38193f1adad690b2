//! Seeded synthetic DOS benchmark.
//!
//! Ground truth is a smooth background (broad Gaussians) plus a few sharp
//! planted peaks. Two degraded "predictions" are derived from it: a coarse
//! one (`p1`) that keeps the peaks but is smoothed and noisy, and a refined
//! one (`p3`) whose sharp peaks are attenuated. Every random draw comes from
//! a ChaCha stream keyed by `(seed, sample_index, purpose)`, so samples are
//! reproducible individually and across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::detect::smooth_or_identity;
use crate::error::{Error, Result};
use crate::spectrum::{EnergyGrid, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub seed: u64,
    pub n_samples: usize,
    pub grid: EnergyGrid,
    /// Inclusive range of sharp peaks per sample.
    pub n_sharp_peaks: (usize, usize),
    /// Width range of sharp peaks, eV.
    pub sharp_sigma: (f64, f64),
    /// Height range of sharp peaks.
    pub sharp_amp: (f64, f64),
    /// Minimum spacing between sharp peak centers, eV.
    pub min_peak_separation: f64,
    /// Maximum number of broad background Gaussians (at least one is drawn).
    pub background_components: usize,
    /// Width range of background Gaussians, eV (at least 1).
    pub background_sigma: (f64, f64),
    pub background_amp: (f64, f64),
    /// Fraction of each sharp peak removed from `p3`.
    pub peak_attenuation_p3: f64,
    /// Mild smoothing of `p3`, bins.
    pub smooth_p3_bins: f64,
    /// Extra smoothing of `p1`, bins.
    pub extra_smooth_p1_bins: f64,
    /// Per-bin noise standard deviation as a fraction of the ground-truth max.
    pub noise_amp_p1: f64,
    pub noise_amp_p3: f64,
    /// Predictions are clamped from below at this value when set.
    pub floor: Option<f64>,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 64,
            grid: EnergyGrid::fermi_window(512).expect("valid default grid"),
            n_sharp_peaks: (2, 4),
            sharp_sigma: (0.06, 0.12),
            sharp_amp: (1.0, 3.0),
            min_peak_separation: 0.8,
            background_components: 3,
            background_sigma: (1.0, 2.5),
            background_amp: (0.5, 1.5),
            peak_attenuation_p3: 0.5,
            smooth_p3_bins: 1.0,
            extra_smooth_p1_bins: 1.0,
            noise_amp_p1: 0.03,
            noise_amp_p3: 0.01,
            floor: Some(0.0),
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        let (lo, hi) = self.n_sharp_peaks;
        if lo > hi {
            return bad("n_sharp_peaks range is empty");
        }
        for (name, (lo, hi)) in [
            ("sharp_sigma", self.sharp_sigma),
            ("sharp_amp", self.sharp_amp),
            ("background_sigma", self.background_sigma),
            ("background_amp", self.background_amp),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be a nonempty positive range")));
            }
        }
        if self.background_sigma.0 < 1.0 {
            return bad("background components must be at least 1 eV wide");
        }
        if self.background_components == 0 {
            return bad("background_components must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.peak_attenuation_p3) {
            return bad("peak_attenuation_p3 must lie in [0, 1]");
        }
        for v in [
            self.noise_amp_p1,
            self.noise_amp_p3,
            self.smooth_p3_bins,
            self.extra_smooth_p1_bins,
            self.min_peak_separation,
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad("noise, smoothing and separation must be >= 0");
            }
        }
        let usable = self.grid.e_max() - self.grid.e_min() - 6.0 * self.sharp_sigma.1;
        if usable <= 0.0 {
            return bad("grid too narrow for the sharp peak widths");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPeak {
    pub center: f64,
    pub amplitude: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub index: usize,
    pub background: Spectrum,
    pub planted: Vec<PlantedPeak>,
    /// `background + Σ planted`.
    pub gt: Spectrum,
}

impl SyntheticSample {
    /// Sum of the planted peaks scaled by `factor`.
    pub fn sharp_component(&self, factor: f64) -> Result<Spectrum> {
        Spectrum::from_fn(*self.gt.grid(), |e| {
            factor
                * self
                    .planted
                    .iter()
                    .map(|p| p.amplitude * (-(e - p.center).powi(2) / (2.0 * p.sigma * p.sigma)).exp())
                    .sum::<f64>()
        })
    }
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Stream {
    GroundTruth = 0,
    NoiseP1 = 1,
    NoiseP3 = 2,
}

fn rng_for(seed: u64, index: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((index as u64) << 2 | stream as u64);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn gaussian(e: f64, center: f64, sigma: f64) -> f64 {
    (-(e - center).powi(2) / (2.0 * sigma * sigma)).exp()
}

/// Ground truth, its background and the planted peaks of sample `index`.
pub fn gen_sample(params: &SynthParams, index: usize) -> Result<SyntheticSample> {
    params.validate()?;
    let grid = params.grid;
    let mut rng = rng_for(params.seed, index, Stream::GroundTruth);

    let n_bg = rng.random_range(1..=params.background_components);
    let span = (grid.e_min(), grid.e_max());
    let inner = (span.0 + 0.1 * (span.1 - span.0), span.1 - 0.1 * (span.1 - span.0));
    let components: Vec<(f64, f64, f64)> = (0..n_bg)
        .map(|_| {
            (
                uniform(&mut rng, inner),
                uniform(&mut rng, params.background_sigma),
                uniform(&mut rng, params.background_amp),
            )
        })
        .collect();
    let background = Spectrum::from_fn(grid, |e| {
        components
            .iter()
            .map(|&(c, s, a)| a * gaussian(e, c, s))
            .sum()
    })?;

    let n_sharp = rng.random_range(params.n_sharp_peaks.0..=params.n_sharp_peaks.1);
    let mut planted: Vec<PlantedPeak> = Vec::with_capacity(n_sharp);
    // Bounded rejection sampling; if the window is too crowded fewer peaks
    // are planted.
    for _ in 0..n_sharp * 50 {
        if planted.len() == n_sharp {
            break;
        }
        let sigma = uniform(&mut rng, params.sharp_sigma);
        let center = uniform(&mut rng, (span.0 + 3.0 * sigma, span.1 - 3.0 * sigma));
        let amplitude = uniform(&mut rng, params.sharp_amp);
        if planted
            .iter()
            .all(|p| (p.center - center).abs() >= params.min_peak_separation)
        {
            planted.push(PlantedPeak {
                center,
                amplitude,
                sigma,
            });
        }
    }
    planted.sort_by(|a, b| a.center.total_cmp(&b.center));

    let mut sample = SyntheticSample {
        index,
        gt: background.clone(),
        background,
        planted,
    };
    sample.gt = sample.background.add(&sample.sharp_component(1.0)?)?;
    Ok(sample)
}

pub fn gen_ground_truth(params: &SynthParams, index: usize) -> Result<Spectrum> {
    Ok(gen_sample(params, index)?.gt)
}

fn add_noise(values: &mut [f64], sd: f64, rng: &mut ChaCha8Rng) {
    if sd > 0.0 {
        for v in values.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += sd * z;
        }
    }
}

/// Degraded coarse (`p1`) and refined (`p3`) predictions for one sample.
pub fn simulate_predictions(
    sample: &SyntheticSample,
    params: &SynthParams,
) -> Result<(Spectrum, Spectrum)> {
    params.validate()?;
    let grid = *sample.gt.grid();
    let scale = sample.gt.max_value().max(0.0);
    let floor = |v: &mut Vec<f64>| {
        if let Some(f) = params.floor {
            v.iter_mut().for_each(|x| *x = x.max(f));
        }
    };

    let attenuated = sample
        .background
        .add(&sample.sharp_component(1.0 - params.peak_attenuation_p3)?)?;
    let mut p3 = smooth_or_identity(attenuated.values(), params.smooth_p3_bins)?;
    add_noise(
        &mut p3,
        params.noise_amp_p3 * scale,
        &mut rng_for(params.seed, sample.index, Stream::NoiseP3),
    );
    floor(&mut p3);

    let mut p1 = smooth_or_identity(sample.gt.values(), params.extra_smooth_p1_bins)?;
    add_noise(
        &mut p1,
        params.noise_amp_p1 * scale,
        &mut rng_for(params.seed, sample.index, Stream::NoiseP1),
    );
    floor(&mut p1);

    Ok((Spectrum::new(grid, p1)?, Spectrum::new(grid, p3)?))
}
