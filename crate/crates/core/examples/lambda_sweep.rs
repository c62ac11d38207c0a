//! MSE against λ on two grid sizes. The optimum should sit at the same λ.
//!
//! cargo run --release --example lambda_sweep -- [N] [seed]

use rds::experiments::SweepRow;
use rds::{run_sweep, Method, SensitivitySpec, SweepConfig};
use std::env;

fn main() -> rds::Result<()> {
    let args: Vec<String> = env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = SweepConfig {
        distribution: "ugl".into(),
        sensitivity: SensitivitySpec::SinSq.map(),
        n_list: vec![n],
        lambda_list: vec![0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0],
        grid_sizes: vec![vec![22, 22], vec![44, 44]],
        degrees: vec![1],
        seed,
        methods: vec![Method::Rds],
        reference_scale: 4,
        fit: None,
    };
    let rows = run_sweep(&cfg)?;
    println!("{:>8}  {:>10}  {:>10}", "lambda", "22x22 dB", "44x44 dB");
    let cell = |m: usize, l: f64| -> Option<&SweepRow> { rows.iter().find(|r| r.grid == Some(vec![m, m]) && r.lambda == Some(l)) };
    for &l in &cfg.lambda_list {
        let show = |r: Option<&SweepRow>| r.map(|r| format!("{:.2}{}", r.mse_db, if r.converged { " " } else { "*" })).unwrap_or_default();
        println!("{l:8.4}  {:>10}  {:>10}", show(cell(22, l)), show(cell(44, l)));
    }
    println!("* stopped at max_iter");
    Ok(())
}
