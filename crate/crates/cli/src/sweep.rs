//! Hyperparameter sweeps over a fixed dataset.
//!
//! A sweep spec is a TOML file with exactly one of two tables:
//!
//! ```toml
//! [grid]                  # Cartesian product, keys in alphabetical order,
//! lambda_reg = [1.0, 10.0] # the last key varying fastest
//! curv_weight = [0.0, 0.01]
//! ```
//!
//! ```toml
//! [sample]
//! count = 8
//! seed = 3
//! lambda_reg = [0.1, 10.0] # [low, high], drawn uniformly
//! steps = [100, 300]       # integer fields draw integers
//! ```
//!
//! Keys are `BhlConfig` field names; `lr` and `steps` are accepted for
//! `fit_lr` and `fit_steps`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qvhs_core::eval::Summary;
use qvhs_core::BhlConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{read_structured, HyperFlags};
use crate::eval::{evaluate, load_dataset, write_report};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Dataset with ground truth (newline-delimited JSON).
    pub input: PathBuf,
    /// Sweep specification (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Ranked results (JSON).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Base configuration that sweep points override.
    #[command(flatten)]
    pub hyper: HyperFlags,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub grid: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default)]
    pub sample: Option<SampleSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub ranges: BTreeMap<String, [f64; 2]>,
}

pub type Point = BTreeMap<String, f64>;

fn canonical(key: &str) -> &str {
    match key {
        "lr" => "fit_lr",
        "steps" => "fit_steps",
        other => other,
    }
}

fn is_integer_field(key: &str) -> bool {
    matches!(canonical(key), "fit_steps" | "seed")
}

impl SweepSpec {
    /// Expands the spec into the ordered list of parameter points.
    pub fn points(&self) -> Result<Vec<Point>> {
        match (&self.grid, &self.sample) {
            (Some(grid), None) => {
                if grid.is_empty() || grid.values().any(Vec::is_empty) {
                    return Err(UsageError("sweep grid has no points".into()).into());
                }
                let mut points = vec![Point::new()];
                for (key, values) in grid {
                    points = points
                        .into_iter()
                        .flat_map(|p| {
                            values.iter().map(move |&v| {
                                let mut q = p.clone();
                                q.insert(key.clone(), v);
                                q
                            })
                        })
                        .collect();
                }
                Ok(points)
            }
            (None, Some(s)) => {
                if s.count == 0 || s.ranges.is_empty() {
                    return Err(UsageError("sampled sweep needs count > 0 and at least one range".into()).into());
                }
                if let Some((k, _)) = s.ranges.iter().find(|(_, [lo, hi])| !(lo <= hi)) {
                    return Err(UsageError(format!("range for `{k}` is empty")).into());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
                Ok((0..s.count)
                    .map(|_| {
                        s.ranges
                            .iter()
                            .map(|(k, &[lo, hi])| {
                                let v = if is_integer_field(k) {
                                    rng.random_range(lo.ceil() as u64..=hi.floor() as u64) as f64
                                } else if lo == hi {
                                    lo
                                } else {
                                    rng.random_range(lo..hi)
                                };
                                (k.clone(), v)
                            })
                            .collect()
                    })
                    .collect())
            }
            _ => Err(UsageError("sweep spec needs exactly one of [grid] or [sample]".into()).into()),
        }
    }
}

/// Applies a sweep point on top of `base`.
pub fn apply(base: &BhlConfig, point: &Point) -> Result<BhlConfig> {
    let mut value = serde_json::to_value(base)?;
    let obj = value.as_object_mut().expect("config serializes to an object");
    for (key, &v) in point {
        let json = if is_integer_field(key) {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(UsageError(format!("`{key}` must be a nonnegative integer, got {v}")).into());
            }
            serde_json::Value::from(v as u64)
        } else {
            serde_json::Value::from(v)
        };
        obj.insert(canonical(key).to_owned(), json);
    }
    let cfg: BhlConfig = serde_json::from_value(value)
        .map_err(|e| UsageError(format!("bad sweep parameter: {e}")))?;
    cfg.validate()
        .map_err(|e| UsageError(format!("sweep point {point:?}: {e}")))?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rank: usize,
    /// Position of the configuration in the expanded spec.
    pub index: usize,
    pub params: Point,
    pub config: BhlConfig,
    pub n_failures: usize,
    pub summary: Summary,
}

/// Sorts by mean cosine improvement, best first; ties keep spec order.
pub fn rank(mut rows: Vec<SweepRow>) -> Vec<SweepRow> {
    let key = |r: &SweepRow| r.summary.mean_cos_improvement.unwrap_or(f64::NEG_INFINITY);
    rows.sort_by(|a, b| key(b).total_cmp(&key(a)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}

/// Returns the number of skipped input lines.
pub fn run(args: &SweepArgs) -> Result<usize> {
    let base = args.hyper.resolve()?;
    let spec: SweepSpec = read_structured(&args.spec)?;
    let points = spec.points()?;
    let configs = points
        .iter()
        .map(|p| apply(&base, p))
        .collect::<Result<Vec<_>>>()?;
    let (samples, skipped) = load_dataset(&args.input)?;
    let mut rows = Vec::with_capacity(points.len());
    for (index, (params, config)) in points.into_iter().zip(configs).enumerate() {
        log::info!("sweep point {}: {params:?}", index + 1);
        let report = evaluate(&samples, &config);
        rows.push(SweepRow {
            rank: 0,
            index,
            params,
            config,
            n_failures: report.failures.len(),
            summary: report.summary,
        });
    }
    let rows = rank(rows);
    write_report(&args.output, &rows)?;
    print!("{}", ranking_table(&rows));
    Ok(skipped)
}

fn ranking_table(rows: &[SweepRow]) -> String {
    let mut out = format!("{:>4} {:>5} {:>14} {:>10}  params\n", "rank", "index", "mean_cos_gain", "improved");
    for r in rows {
        let f = |v: Option<f64>| v.map_or_else(|| "-".into(), |v| format!("{v:.6}"));
        let _ = writeln!(
            out,
            "{:>4} {:>5} {:>14} {:>10}  {:?}",
            r.rank,
            r.index,
            f(r.summary.mean_cos_improvement),
            f(r.summary.fraction_improved_cos),
            r.params
        );
    }
    out
}
