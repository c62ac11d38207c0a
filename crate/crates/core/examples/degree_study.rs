//! Spline degree 0, 1 and 3 on the same data.
//!
//! cargo run --release --example degree_study -- [N] [lambda]

use rds::{run_sweep, Method, SensitivitySpec, SweepConfig};
use std::env;

fn main() -> rds::Result<()> {
    let args: Vec<String> = env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let lambda: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let cfg = SweepConfig {
        distribution: "gg".into(),
        sensitivity: SensitivitySpec::SinSq.map(),
        n_list: vec![n],
        lambda_list: vec![lambda],
        grid_sizes: vec![vec![44, 44]],
        degrees: vec![0, 1, 3],
        seed: 8,
        methods: vec![Method::Rds],
        reference_scale: 4,
        fit: None,
    };
    for r in run_sweep(&cfg)? {
        // degree 0 has no Hessian, so it is the unregularized histogram-like MLE
        println!(
            "degree {}  {:7.2} dB  {:5} iterations  {:.2} s{}",
            r.degree.unwrap_or(0),
            r.mse_db,
            r.iterations,
            r.fit_seconds,
            if r.converged { "" } else { "  (max_iter)" }
        );
    }
    Ok(())
}
