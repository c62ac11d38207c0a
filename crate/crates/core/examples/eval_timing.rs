//! Evaluation cost against sample count. The spline does not depend on N
//! once fitted, the KDE sums over every sample.
//!
//! cargo run --release --example eval_timing

use rds::experiments::{eval_model_on, sample_observed};
use rds::{fit, FitConfig, GroundTruth, KdeModel, SensitivitySpec};
use std::time::{Duration, Instant};

fn best_of<F: FnMut()>(reps: usize, mut f: F) -> Duration {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn main() -> rds::Result<()> {
    let gt = GroundTruth::ugl();
    let xi = SensitivitySpec::SinSq.map();
    let grid = gt.grid(&[44, 44])?;
    let reference = gt.grid(&[176, 176])?;
    let cfg = FitConfig::default();
    println!("{:>7}  {:>9}  {:>9}  {:>9}", "N", "rds fit", "rds eval", "kde eval");
    for n in [1_000, 10_000, 100_000] {
        let (samples, _) = sample_observed(&gt, &xi, n, 9)?;
        let t = Instant::now();
        let model = fit(&samples, &xi, &grid, &cfg)?.model(cfg.degree, cfg.quad_scale)?;
        let fit_time = t.elapsed();
        let rds_eval = best_of(5, || {
            std::hint::black_box(eval_model_on(&model, &reference).unwrap());
        });
        let kde = KdeModel::fit(&samples, &xi, &grid)?;
        let kde_eval = best_of(2, || {
            std::hint::black_box(kde.eval_grid(&reference).unwrap());
        });
        println!("{n:7}  {fit_time:9.2?}  {rds_eval:9.2?}  {kde_eval:9.2?}");
    }
    Ok(())
}
