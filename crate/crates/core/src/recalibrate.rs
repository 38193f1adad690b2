//! Integral recalibration, per-atom normalization and pDOS aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{trapz_integral, Spectrum};

/// Baseline integrals with magnitude below this are rejected by
/// [`nbhl_normalize`].
pub const DEGENERATE_INTEGRAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Recalibration {
    pub spectrum: Spectrum,
    pub scale: f64,
    /// Set when the scale is negative (the enhanced integral and the target
    /// integral disagree in sign). The output is not clamped.
    pub warning: Option<String>,
}

/// Rescales `enh` by `∫pseudo / (∫enh + eps)` (trapezoidal integrals).
pub fn gt_free_recalibrate(enh: &Spectrum, pseudo: &Spectrum, eps: f64) -> Result<Recalibration> {
    enh.check_same_grid(pseudo)?;
    let scale = trapz_integral(pseudo) / (trapz_integral(enh) + eps);
    let warning = (scale < 0.0).then(|| {
        format!("negative recalibration scale {scale:.6e}: enhanced and target integrals differ in sign")
    });
    Ok(Recalibration {
        spectrum: enh.scaled(scale)?,
        scale,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpectra {
    pub atom_id: String,
    /// Deep-model baseline prediction for this atom.
    pub base: Spectrum,
    pub enhanced: Spectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSpectrumSet {
    pub sample_id: String,
    pub atoms: Vec<AtomSpectra>,
}

impl AtomicSpectrumSet {
    pub fn new(sample_id: impl Into<String>, atoms: Vec<AtomSpectra>) -> Result<Self> {
        let set = Self {
            sample_id: sample_id.into(),
            atoms,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .atoms
            .first()
            .ok_or_else(|| Error::Empty(format!("sample `{}` has no atoms", self.sample_id)))?;
        for a in &self.atoms {
            first.base.check_same_grid(&a.base)?;
            first.base.check_same_grid(&a.enhanced)?;
        }
        Ok(())
    }
}

/// `Z_a = |∫ base_a dE|`.
pub fn baseline_norm(atom: &AtomSpectra) -> Result<f64> {
    let z = trapz_integral(&atom.base).abs();
    if z < DEGENERATE_INTEGRAL {
        return Err(Error::DegenerateBaseline {
            atom_id: atom.atom_id.clone(),
            integral: z,
        });
    }
    Ok(z)
}

/// Divides every atom's enhanced spectrum by its own `Z_a`.
pub fn nbhl_normalize(set: &AtomicSpectrumSet) -> Result<AtomicSpectrumSet> {
    set.validate()?;
    let atoms = set
        .atoms
        .iter()
        .map(|a| {
            let z = baseline_norm(a)?;
            Ok(AtomSpectra {
                atom_id: a.atom_id.clone(),
                base: a.base.clone(),
                enhanced: a.enhanced.scaled(1.0 / z)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomicSpectrumSet {
        sample_id: set.sample_id.clone(),
        atoms,
    })
}

/// How per-atom spectra are combined into a total DOS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Plain `Σ_a enhanced_a`.
    #[default]
    Raw,
    /// `Σ_a enhanced_a / Z_a`, each atom normalized by its own baseline.
    PerAtom,
    /// `(Σ_a enhanced_a) / Z` with one `Z = |∫ Σ_a base_a dE|`.
    SharedZ,
}

/// Bin-wise sum of the per-atom enhanced spectra.
pub fn aggregate_pdos(set: &AtomicSpectrumSet, mode: Aggregation) -> Result<Spectrum> {
    set.validate()?;
    let grid = *set.atoms[0].enhanced.grid();
    let sum_of = |pick: fn(&AtomSpectra) -> &Spectrum, atoms: &[AtomSpectra]| {
        let mut total = vec![0.0; grid.n_points()];
        for a in atoms {
            total
                .iter_mut()
                .zip(pick(a).values())
                .for_each(|(t, v)| *t += v);
        }
        Spectrum::new(grid, total)
    };
    match mode {
        Aggregation::Raw => sum_of(|a| &a.enhanced, &set.atoms),
        Aggregation::PerAtom => sum_of(|a| &a.enhanced, &nbhl_normalize(set)?.atoms),
        Aggregation::SharedZ => {
            let base_total = sum_of(|a| &a.base, &set.atoms)?;
            let z = trapz_integral(&base_total).abs();
            if z < DEGENERATE_INTEGRAL {
                return Err(Error::DegenerateBaseline {
                    atom_id: "<all atoms>".into(),
                    integral: z,
                });
            }
            sum_of(|a| &a.enhanced, &set.atoms)?.scaled(1.0 / z)
        }
    }
}
