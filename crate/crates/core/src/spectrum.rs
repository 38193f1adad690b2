//! Uniform energy grids and the 1-D numerics that run on them.
//!
//! Smoothing widths are expressed in grid bins, not eV. Use
//! [`EnergyGrid::ev_to_bins`] / [`EnergyGrid::bins_to_ev`] to convert.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid the pipeline accepts.
pub const MIN_POINTS: usize = 8;

/// Uniform discretization `e_min + i * spacing`, `0 <= i < n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct EnergyGrid {
    e_min: f64,
    e_max: f64,
    n_points: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    e_min: f64,
    e_max: f64,
    n_points: usize,
}

impl TryFrom<RawGrid> for EnergyGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        EnergyGrid::new(raw.e_min, raw.e_max, raw.n_points)
    }
}

impl From<EnergyGrid> for RawGrid {
    fn from(g: EnergyGrid) -> Self {
        RawGrid {
            e_min: g.e_min,
            e_max: g.e_max,
            n_points: g.n_points,
        }
    }
}

impl EnergyGrid {
    pub fn new(e_min: f64, e_max: f64, n_points: usize) -> Result<Self> {
        if !e_min.is_finite() || !e_max.is_finite() {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if e_min >= e_max {
            return Err(Error::InvalidGrid(format!(
                "e_min ({e_min}) must be below e_max ({e_max})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            e_min,
            e_max,
            n_points,
        })
    }

    /// The default `[-5, 5]` eV window with `n_points` samples.
    pub fn fermi_window(n_points: usize) -> Result<Self> {
        Self::new(-5.0, 5.0, n_points)
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.e_max - self.e_min) / (self.n_points - 1) as f64
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.e_min + i as f64 * self.spacing()
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.energy(i)).collect()
    }

    /// Index of the grid point closest to `e`, clamped to the grid.
    pub fn nearest_bin(&self, e: f64) -> usize {
        let pos = ((e - self.e_min) / self.spacing()).round();
        pos.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    pub fn ev_to_bins(&self, width_ev: f64) -> f64 {
        width_ev / self.spacing()
    }

    pub fn bins_to_ev(&self, width_bins: f64) -> f64 {
        width_bins * self.spacing()
    }
}

/// Values of a DOS (or pDOS) sampled on an [`EnergyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: EnergyGrid,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: EnergyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "non-finite value {} at bin {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: EnergyGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    /// Samples `f(E)` at every grid energy.
    pub fn from_fn(grid: EnergyGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.energies().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    /// Bin-wise sum; both spectra must share a grid.
    pub fn add(&self, other: &Spectrum) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn check_same_grid(&self, other: &Spectrum) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Re-checks the finiteness invariant (values are public through
    /// construction only, so this matters for spectra built by arithmetic).
    fn validated(self) -> Result<Self> {
        Self::new(self.grid, self.values)
    }
}

/// Index into a whole-sample mirrored extension of a length-`n` signal
/// (`... x2 x1 | x0 x1 ... x_{n-1} | x_{n-2} ...`).
///
/// With this boundary rule a symmetric, unit-mass kernel preserves the
/// trapezoidal integral exactly.
fn mirror_index(j: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = j.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Truncated (radius `ceil(4 sigma)`) and renormalized Gaussian kernel.
pub fn gaussian_kernel(sigma_bins: f64) -> Vec<f64> {
    let radius = (4.0 * sigma_bins).ceil().max(1.0) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma_bins * sigma_bins)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);
    kernel
}

/// Gaussian smoothing of a raw value sequence with mirrored boundaries.
pub fn smooth_values(values: &[f64], sigma_bins: f64) -> Result<Vec<f64>> {
    if !(sigma_bins > 0.0 && sigma_bins.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "smoothing sigma must be positive, got {sigma_bins}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpectrum("non-finite input to smoothing".into()));
    }
    let n = values.len();
    let kernel = gaussian_kernel(sigma_bins);
    let radius = (kernel.len() / 2) as isize;
    Ok((0..n as isize)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * values[mirror_index(i + k as isize - radius, n)])
                .sum()
        })
        .collect())
}

pub fn gaussian_smooth(s: &Spectrum, sigma_bins: f64) -> Result<Spectrum> {
    Spectrum::new(s.grid, smooth_values(&s.values, sigma_bins)?)
}

/// Central differences on the interior, one-sided at both ends.
pub fn first_diff(s: &Spectrum) -> Result<Spectrum> {
    let y = &s.values;
    let n = y.len();
    let h = s.grid.spacing();
    let mut out = vec![0.0; n];
    out[0] = (y[1] - y[0]) / h;
    out[n - 1] = (y[n - 1] - y[n - 2]) / h;
    for i in 1..n - 1 {
        out[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    Spectrum { grid: s.grid, values: out }.validated()
}

/// Raw second difference `y[n+1] - 2y[n] + y[n-1]` of a value sequence,
/// zero at both endpoints.
pub fn second_diff_values(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        out[i] = y[i + 1] - 2.0 * y[i] + y[i - 1];
    }
    out
}

/// Second difference of `s`. Unscaled (`scaled = false`) it is the curvature
/// penalty's stencil; scaled it divides by `spacing^2` and approximates
/// `d²D/dE²`.
pub fn second_diff(s: &Spectrum, scaled: bool) -> Result<Spectrum> {
    let mut out = second_diff_values(&s.values);
    if scaled {
        let h2 = s.grid.spacing().powi(2);
        out.iter_mut().for_each(|v| *v /= h2);
    }
    Spectrum { grid: s.grid, values: out }.validated()
}

pub fn trapz_values(values: &[f64], spacing: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => spacing * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

pub fn trapz_integral(s: &Spectrum) -> f64 {
    trapz_values(&s.values, s.grid.spacing())
}
