//! RDS against KDE and the histogram on UGL with the sin² sensitivity.
//!
//! cargo run --release --example compare_baselines -- [N] [grid] [seeds]

use rds::experiments::{estimate, mse_db, sample_observed, GroundTruth, Method, SensitivitySpec};
use rds::FitConfig;
use std::env;

fn main() -> rds::Result<()> {
    let args: Vec<String> = env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let m: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(44);
    let seeds: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    let gt = GroundTruth::ugl();
    let xi = SensitivitySpec::SinSq.map();
    let fit_grid = gt.grid(&[m, m])?;
    let reference = gt.grid(&[4 * m, 4 * m])?;
    let truth = gt.pdf_field(&reference);
    let cfg = FitConfig::default();
    println!("seed  method  mse_db  fit_s  iters  converged");
    for seed in 0..seeds {
        let (samples, draws) = sample_observed(&gt, &xi, n, seed)?;
        for method in [Method::Rds, Method::Kde, Method::He] {
            let est = estimate(method, &samples, &xi, &fit_grid, &reference, &cfg)?;
            println!(
                "{seed:4}  {method:6}  {:7.2}  {:5.2}  {:5}  {}   (draws {draws})",
                mse_db(&truth, &est.field)?,
                est.fit_seconds,
                est.iterations,
                est.converged
            );
        }
    }
    Ok(())
}
