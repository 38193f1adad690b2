//! Fit configuration from an optional file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use qvhs_core::{BhlConfig, PriorUnits};
use serde::de::DeserializeOwned;

use crate::UsageError;

#[derive(Debug, Clone, Default, Args)]
pub struct HyperFlags {
    /// Config file (TOML, or JSON when the extension is `.json`); flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    #[arg(long)]
    pub freq_weight: Option<f64>,
    #[arg(long)]
    pub curv_weight: Option<f64>,
    #[arg(long)]
    pub sigma_a: Option<f64>,
    /// Initial peak width, eV.
    #[arg(long)]
    pub init_sigma: Option<f64>,
    #[arg(long)]
    pub min_sigma: Option<f64>,
    #[arg(long)]
    pub max_sigma: Option<f64>,
    /// Pseudo-target smoothing, bins.
    #[arg(long)]
    pub pseudo_sigma: Option<f64>,
    /// Smoothing of the second derivative used for priors, bins.
    #[arg(long)]
    pub hessian_sigma: Option<f64>,
    #[arg(long, value_parser = parse_units)]
    pub prior_units: Option<PriorUnits>,
    #[arg(long)]
    pub drop_zero_prior: bool,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_units(s: &str) -> Result<PriorUnits, String> {
    match s {
        "physical" => Ok(PriorUnits::Physical),
        "bins" => Ok(PriorUnits::Bins),
        _ => Err(format!("expected `physical` or `bins`, got `{s}`")),
    }
}

/// Parses TOML, or JSON for `.json` files.
pub fn read_structured<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(anyhow::Error::from)
    } else {
        toml::from_str(&text).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("cannot parse {}", path.display()))
}

impl HyperFlags {
    pub fn resolve(&self) -> Result<BhlConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_structured(path)?,
            None => BhlConfig::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.lambda_reg, self.lambda_reg);
        set(&mut cfg.freq_weight, self.freq_weight);
        set(&mut cfg.curv_weight, self.curv_weight);
        set(&mut cfg.sigma_a, self.sigma_a);
        set(&mut cfg.init_sigma, self.init_sigma);
        set(&mut cfg.min_sigma, self.min_sigma);
        set(&mut cfg.max_sigma, self.max_sigma);
        set(&mut cfg.pseudo_sigma, self.pseudo_sigma);
        set(&mut cfg.hessian_sigma, self.hessian_sigma);
        set(&mut cfg.fit_lr, self.lr);
        if let Some(u) = self.prior_units {
            cfg.prior_units = u;
        }
        if self.drop_zero_prior {
            cfg.drop_zero_prior = true;
        }
        if let Some(s) = self.steps {
            cfg.fit_steps = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()
            .map_err(|e| UsageError(format!("invalid fit configuration: {e}")))?;
        Ok(cfg)
    }
}
