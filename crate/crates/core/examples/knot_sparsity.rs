//! The Schatten-1 penalty switches Hessian entries off as λ grows.
//!
//! cargo run --release --example knot_sparsity -- [N]

use rds::experiments::sample_observed;
use rds::{fit, FitConfig, GroundTruth, HessianOperator, SchattenP, SensitivityMap, SplineDegree};
use std::env;

fn main() -> rds::Result<()> {
    let n: usize = env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let gt = GroundTruth::laplace_ridge();
    let xi = SensitivityMap::Uniform;
    let (samples, _) = sample_observed(&gt, &xi, n, 10)?;
    let grid = gt.grid(&[44, 44])?;
    let op = HessianOperator::new(&grid, SplineDegree::LINEAR)?;
    println!("{:>6}  {:>8}  {:>6}  converged", "lambda", "active", "iters");
    for lambda in [0.03, 0.1, 0.3, 1.0, 3.0, 10.0] {
        let cfg = FitConfig { lambda, max_iter: 2000, ..FitConfig::default() };
        let res = fit(&samples, &xi, &grid, &cfg)?;
        let norms = op.apply(&res.coeffs)?.pointwise_norms(SchattenP::One);
        let max = norms.iter().copied().fold(0.0, f64::max);
        let active = norms.iter().filter(|&&v| v > 1e-3 * max).count() as f64 / norms.len() as f64;
        println!("{lambda:6}  {active:8.4}  {:6}  {}", res.trace.len(), res.converged);
    }
    Ok(())
}
