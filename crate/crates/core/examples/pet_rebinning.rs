//! Sinogram rebinning with all three estimators, scored in the sinogram and
//! after filtered back-projection.
//!
//! cargo run --release --example pet_rebinning -- [gauss4|derenzo] [N] [lambda] [seed]

use rds::pet::{run_pet, PetConfig};
use std::env;

fn main() -> rds::Result<()> {
    let args: Vec<String> = env::args().collect();
    let mut cfg = PetConfig::default();
    if let Some(p) = args.get(1) {
        cfg.phantom = p.clone();
    }
    if let Some(n) = args.get(2).and_then(|s| s.parse().ok()) {
        cfg.n = n;
    }
    if let Some(l) = args.get(3).and_then(|s| s.parse().ok()) {
        cfg.fit.lambda = l;
    }
    if let Some(s) = args.get(4).and_then(|s| s.parse().ok()) {
        cfg.seed = s;
    }
    let report = run_pet(&cfg)?;
    println!("{} events kept of {} emitted", report.events, report.emitted);
    println!("method  sinogram_db  image_db  seconds");
    for r in &report.results {
        println!("{:6}  {:11.2}  {:8.2}  {:7.2}", r.method, r.sinogram_mse_db, r.image_mse_db, r.seconds);
    }
    Ok(())
}
