//! Runs the default synthetic suite and prints the summary.
//!
//! `cargo run --release -p qvhs-core --example suite`

use std::time::Instant;

use qvhs_core::{evaluate_suite, synthetic_suite, BhlConfig, SynthParams};

fn main() {
    let params = SynthParams::default();
    let cfg = BhlConfig::default();
    let suite = synthetic_suite(&params).expect("suite");
    let t = Instant::now();
    let report = evaluate_suite(&suite, &cfg).expect("evaluation");
    for r in &report.samples {
        println!(
            "{:>16} peaks {:>3} cos {:.5} -> {:.5}  mae {:.4} -> {:.4}",
            r.id, r.n_peaks, r.cos_base, r.cos_final, r.mae_base, r.mae_final_recal
        );
    }
    let s = &report.summary;
    println!(
        "improved cos {:.3}  mae {:.3}  mean Δcos {:.5}  mean imp_cos {:.2}%  ({:.1?})",
        s.fraction_improved_cos.unwrap_or(f64::NAN),
        s.fraction_improved_mae.unwrap_or(f64::NAN),
        s.mean_cos_improvement.unwrap_or(f64::NAN),
        s.imp_cos_pct.mean.unwrap_or(f64::NAN),
        t.elapsed()
    );
}
