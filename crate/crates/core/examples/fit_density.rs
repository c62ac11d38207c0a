//! Fit one density from thinned samples, save it, and read it back.
//!
//! cargo run --release --example fit_density -- [N] [lambda] [out_dir]

use rds::experiments::{eval_model_on, sample_observed, GroundTruth, SensitivitySpec};
use rds::io::{load_model, save_field, save_model};
use rds::{fit, mse_db, FitConfig};
use std::env;
use std::path::PathBuf;

fn main() -> rds::Result<()> {
    let args: Vec<String> = env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let lambda: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let out = args.get(3).map(PathBuf::from).unwrap_or_else(|| env::temp_dir().join("rds_fit"));
    std::fs::create_dir_all(&out)?;

    let gt = GroundTruth::ugl();
    let xi = SensitivitySpec::SinSq.map();
    let (samples, draws) = sample_observed(&gt, &xi, n, 1)?;
    println!("kept {} of {draws} draws", samples.len());

    let grid = gt.grid(&[44, 44])?;
    let cfg = FitConfig { lambda, ..FitConfig::default() };
    let res = fit(&samples, &xi, &grid, &cfg)?;
    let last = res.trace.records.last().expect("at least one iteration");
    println!(
        "converged {} after {} iterations ({} restarts), J = {:.4}, B_Lip = {:.3e}",
        res.converged,
        res.trace.len(),
        res.trace.restarts(),
        res.objective,
        last.blip
    );

    let model = res.model(cfg.degree, cfg.quad_scale)?;
    let reference = gt.grid(&[176, 176])?;
    let est = eval_model_on(&model, &reference)?;
    println!("MSE vs truth {:.2} dB", mse_db(&gt.pdf_field(&reference), &est)?);

    save_model(out.join("model.rdsm"), &model)?;
    save_field(out.join("pdf.rdsf"), &est)?;
    let back = load_model(out.join("model.rdsm"))?;
    assert_eq!(back.coeffs, model.coeffs);
    println!("wrote {}", out.display());
    Ok(())
}
