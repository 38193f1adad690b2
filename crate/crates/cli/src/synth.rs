use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qvhs_core::{synthetic_suite, EnergyGrid, SynthParams};

use crate::config::read_structured;
use crate::record::{write_jsonl, SpectrumRecord};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Destination file (newline-delimited JSON).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Generator parameters (TOML, or JSON for `.json`); flags win.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub e_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e_max: Option<f64>,
    /// Fraction of sharp-peak amplitude removed from p3.
    #[arg(long)]
    pub attenuation: Option<f64>,
    /// p1 noise amplitude, fraction of the spectrum maximum.
    #[arg(long)]
    pub noise_p1: Option<f64>,
    /// p3 noise amplitude, fraction of the spectrum maximum.
    #[arg(long)]
    pub noise_p3: Option<f64>,
}

impl SynthArgs {
    pub fn params(&self) -> Result<SynthParams> {
        let mut p = match &self.params {
            Some(path) => read_structured(path)?,
            None => SynthParams::default(),
        };
        p.n_samples = self.n_samples.unwrap_or(p.n_samples);
        p.seed = self.seed.unwrap_or(p.seed);
        p.peak_attenuation_p3 = self.attenuation.unwrap_or(p.peak_attenuation_p3);
        p.noise_amp_p1 = self.noise_p1.unwrap_or(p.noise_amp_p1);
        p.noise_amp_p3 = self.noise_p3.unwrap_or(p.noise_amp_p3);
        if self.n_points.is_some() || self.e_min.is_some() || self.e_max.is_some() {
            p.grid = EnergyGrid::new(
                self.e_min.unwrap_or(p.grid.e_min()),
                self.e_max.unwrap_or(p.grid.e_max()),
                self.n_points.unwrap_or(p.grid.n_points()),
            )
            .map_err(|e| UsageError(e.to_string()))?;
        }
        p.validate()
            .map_err(|e| UsageError(format!("invalid synthesis parameters: {e}")))?;
        Ok(p)
    }
}

pub fn to_records(params: &SynthParams) -> Result<Vec<SpectrumRecord>> {
    Ok(synthetic_suite(params)?
        .into_iter()
        .map(|s| SpectrumRecord {
            id: s.id,
            grid: (*s.gt.grid()).into(),
            p1: Some(s.p1.into_values()),
            p3: Some(s.p3.into_values()),
            gt: Some(s.gt.into_values()),
            atoms: None,
            peaks_excluded: None,
        })
        .collect())
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let params = args.params()?;
    let records = to_records(&params)?;
    write_jsonl(&args.output, &records)?;
    log::info!("wrote {} records to {}", records.len(), args.output.display());
    Ok(())
}
