//! The `rds` command line. Every subcommand accepts `--config FILE`, a JSON
//! object whose keys are the flag names in snake case; flags given on the
//! command line win over the file.
//!
//! Exit codes: 0 success, 1 I/O or runtime failure, 2 fit stopped at the
//! iteration cap, 64 usage error.

use crate::bspline::SplineDegree;
use crate::density::SensitivityMap;
use crate::error::RdsError;
use crate::experiments::{estimate, mse_db, run_sweep, sample_observed, write_sweep_csv, GroundTruth, Method, SensitivitySpec, SweepConfig};
use crate::grid::{BoundaryCondition, GridSpec, ScalarField};
use crate::io;
use crate::optimizer::{fit, FitConfig};
use crate::pet::{run_pet, PetConfig};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Rds(#[from] RdsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Rds(
                RdsError::InvalidConfig(_) | RdsError::InvalidGrid(_) | RdsError::UnsupportedDegree(_) | RdsError::InvalidSensitivity(_),
            ) => EXIT_USAGE,
            CliError::Rds(_) => EXIT_IO,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "rds", version, about = "Sensitivity-aware density estimation with exponential B-splines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw thinned samples from a synthetic distribution.
    Sample(SampleArgs),
    /// Fit a density to samples and write the model and its trace.
    Fit(FitArgs),
    /// Evaluate a model on a refined grid or at points.
    Eval(EvalArgs),
    /// Run RDS, KDE and the histogram on one synthetic data set.
    Compare(CompareArgs),
    /// Run a parameter sweep described by a JSON file.
    Sweep(SweepArgs),
    /// Rebin synthetic PET events and reconstruct by filtered back-projection.
    PetDemo(PetArgs),
    /// Turn a fit trace or a field into plot-ready CSV.
    TracePlotdata(PlotArgs),
}

/// Flags shared by commands that describe a fitting grid.
#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct GridFlags {
    /// Points per axis, e.g. `44,44`.
    #[arg(long)]
    grid: Option<String>,
    /// Boundary condition per axis (periodic, zeropad, mirror); one value applies to all.
    #[arg(long)]
    bc: Option<String>,
    /// Lower domain corner; one value applies to all axes.
    #[arg(long)]
    lo: Option<String>,
    /// Upper domain corner.
    #[arg(long)]
    hi: Option<String>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct SampleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// ugl, gg, ridge or uniform.
    #[arg(long)]
    dist: Option<String>,
    /// uniform, sinsq, or a sensitivity file.
    #[arg(long)]
    sens: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `.csv` writes text, anything else RDSS.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridFlags,
    #[arg(long)]
    degree: Option<u8>,
    #[arg(long)]
    lambda: Option<f64>,
    /// uniform, sinsq, or a sensitivity file.
    #[arg(long, alias = "sens")]
    sensitivity: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    quad_scale: Option<usize>,
    #[arg(long)]
    init: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct EvalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Grid refinement for field output.
    #[arg(long)]
    scale: Option<usize>,
    /// Write the log-density instead of the density.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    log: Option<bool>,
    /// Evaluate at these points and write CSV instead of a field.
    #[arg(long)]
    points: Option<PathBuf>,
    /// With --points: density of the observed samples, `ξ ρ̂ / E(ρ̂)`.
    #[arg(long, alias = "sens")]
    sensitivity: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct CompareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    sens: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Points per axis of the fit grid, e.g. `44` or `44,44`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    degree: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of rds, kde, he.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    reference_scale: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct SweepArgs {
    /// Sweep description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct PetArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// gauss4 or derenzo.
    #[arg(long)]
    phantom: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    n_s: Option<usize>,
    #[arg(long)]
    image_size: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
struct PlotArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace CSV written by `fit`.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// RDSF field to flatten into coordinate rows.
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Fills unset flags from the `--config` JSON object.
fn merged<T: Serialize + DeserializeOwned>(flags: T, config: Option<&Path>) -> CliResult<T> {
    let Some(path) = config else { return Ok(flags) };
    let text = fs::read_to_string(path).map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let file: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| RdsError::format(format!("{}, line {}", path.display(), e.line()), e.to_string()))?;
    let serde_json::Value::Object(mut base) = file else {
        return Err(usage(format!("{} must hold a JSON object", path.display())));
    };
    let serde_json::Value::Object(over) = serde_json::to_value(&flags).map_err(RdsError::from)? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in over {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(serde_json::Value::Object(base)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required")))
}

fn parse_list<T: FromStr>(s: &str, flag: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| usage(format!("--{flag}: cannot parse {t:?}"))))
        .collect()
}

/// A per-axis list; a single entry is repeated `d` times.
fn broadcast<T: Clone>(v: Vec<T>, d: usize, flag: &str) -> CliResult<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); d]),
        n if n == d => Ok(v),
        n => Err(usage(format!("--{flag} has {n} entries for {d} axes"))),
    }
}

fn parse_bc(s: &str) -> CliResult<BoundaryCondition> {
    match s.trim().to_ascii_lowercase().as_str() {
        "periodic" => Ok(BoundaryCondition::Periodic),
        "zeropad" | "zero" => Ok(BoundaryCondition::ZeroPad),
        "mirror" => Ok(BoundaryCondition::Mirror),
        other => Err(usage(format!("--bc: unknown boundary condition {other:?}"))),
    }
}

/// Grid from flags; `dim` lets a single size stand for every axis.
fn build_grid(flags: &GridFlags, dim: Option<usize>) -> CliResult<GridSpec> {
    let sizes: Vec<usize> = parse_list(&required(flags.grid.clone(), "grid")?, "grid")?;
    let sizes = match dim {
        Some(d) => broadcast(sizes, d, "grid")?,
        None => sizes,
    };
    let d = sizes.len();
    let bcs = match &flags.bc {
        Some(s) => broadcast(s.split(',').map(parse_bc).collect::<CliResult<Vec<_>>>()?, d, "bc")?,
        None => vec![BoundaryCondition::Periodic; d],
    };
    let lo = broadcast(flags.lo.as_deref().map(|s| parse_list(s, "lo")).transpose()?.unwrap_or(vec![0.0]), d, "lo")?;
    let hi = broadcast(flags.hi.as_deref().map(|s| parse_list(s, "hi")).transpose()?.unwrap_or(vec![1.0]), d, "hi")?;
    Ok(GridSpec::from_box(&sizes, &lo, &hi, &bcs)?)
}

/// `uniform`, `sinsq` (the frozen synthetic map) or a sensitivity file.
fn parse_sensitivity(s: Option<&str>) -> CliResult<SensitivityMap> {
    match s {
        None => Ok(SensitivityMap::Uniform),
        Some(v) => match SensitivitySpec::from_str(v) {
            Ok(spec) => Ok(spec.map()),
            Err(_) if Path::new(v).exists() => Ok(io::load_sensitivity(v)?),
            Err(_) => Err(usage(format!("sensitivity {v:?} is neither uniform, sinsq nor an existing file"))),
        },
    }
}

fn parse_methods(s: Option<&str>) -> CliResult<Vec<Method>> {
    match s {
        None => Ok(vec![Method::Rds, Method::Kde, Method::He]),
        Some(s) => s.split(',').map(|m| Method::from_str(m).map_err(|e| usage(e.to_string()))).collect(),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))).into())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))).into())
}

fn cmd_sample(a: SampleArgs, out: &mut String) -> CliResult<i32> {
    let gt = GroundTruth::by_name(&required(a.dist, "dist")?).map_err(|e| usage(e.to_string()))?;
    let xi = parse_sensitivity(a.sens.as_deref())?;
    let n = required(a.n, "n")?;
    let seed = a.seed.unwrap_or(0);
    let path = a.out.unwrap_or_else(|| PathBuf::from("samples.rdss"));
    let (samples, draws) = sample_observed(&gt, &xi, n, seed)?;
    io::save_samples(&path, &samples)?;
    let rate = samples.len() as f64 / draws.max(1) as f64;
    writeln!(out, "kept {} of {draws} draws, keep rate {rate}", samples.len()).ok();
    Ok(EXIT_OK)
}

fn cmd_fit(a: FitArgs, out: &mut String) -> CliResult<i32> {
    let samples_path = required(a.samples.clone(), "samples")?;
    required(a.grid.grid.as_ref(), "grid")?;
    let lambda = required(a.lambda, "lambda")?;
    let mut cfg = FitConfig { lambda, ..FitConfig::default() };
    if let Some(d) = a.degree {
        cfg.degree = SplineDegree::new(d)?;
    }
    cfg.max_iter = a.max_iter.unwrap_or(cfg.max_iter);
    cfg.eps_tol = a.eps.unwrap_or(cfg.eps_tol);
    cfg.quad_scale = a.quad_scale.unwrap_or(cfg.quad_scale);
    cfg.init = a.init.unwrap_or(cfg.init);
    cfg.validate()?;
    let xi = parse_sensitivity(a.sensitivity.as_deref())?;
    let model_path = a.out.unwrap_or_else(|| PathBuf::from("model.rdsm"));
    let trace_path = a.trace.unwrap_or_else(|| model_path.with_extension("trace.csv"));

    let mut samples = io::load_samples(&samples_path)?;
    let grid = build_grid(&a.grid, Some(samples.dim()))?;
    samples.fold_into(&grid);
    let res = fit(&samples, &xi, &grid, &cfg)?;
    io::save_model(&model_path, &res.model(cfg.degree, cfg.quad_scale)?)?;
    let mut trace = Vec::new();
    res.trace.write_csv(&mut trace).map_err(RdsError::from)?;
    fs::write(&trace_path, trace).map_err(RdsError::from)?;
    writeln!(
        out,
        "{} after {} iterations, objective {}",
        if res.converged { "converged" } else { "stopped at max_iter" },
        res.trace.len(),
        res.objective
    )
    .ok();
    for w in &res.warnings {
        writeln!(out, "warning: {w}").ok();
    }
    Ok(if res.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_eval(a: EvalArgs, out: &mut String) -> CliResult<i32> {
    let model = io::load_model(required(a.model, "model")?)?;
    let dest = required(a.out, "out")?;
    let log = a.log.unwrap_or(false);
    if let Some(points) = a.points {
        let pts = io::load_samples(points)?;
        let xi = parse_sensitivity(a.sensitivity.as_deref())?;
        let observed = a.sensitivity.is_some();
        let vals = model.pdf_at(&xi, pts.coords(), observed)?;
        let mut text = String::new();
        for (p, v) in pts.iter().zip(vals) {
            let v = if log { v.ln() } else { v };
            p.iter().for_each(|x| write!(text, "{x:?},").unwrap());
            writeln!(text, "{v:?}").unwrap();
        }
        write_text(&dest, &text)?;
        writeln!(out, "{} points", pts.len()).ok();
    } else {
        let s = a.scale.unwrap_or(1);
        let field = if log { model.log_density_grid(s)? } else { model.pdf_grid(s)? };
        io::save_field(&dest, &field)?;
        writeln!(out, "{} values on {:?}", field.len(), field.grid().sizes()).ok();
    }
    Ok(EXIT_OK)
}

pub const COMPARE_CSV_HEADER: &str = "method,distribution,n,lambda,grid,degree,seed,mse_db,fit_seconds,eval_seconds,converged,iterations";

fn cmd_compare(a: CompareArgs, out: &mut String) -> CliResult<i32> {
    let dist = a.dist.unwrap_or_else(|| "ugl".into());
    let gt = GroundTruth::by_name(&dist).map_err(|e| usage(e.to_string()))?;
    let xi = parse_sensitivity(Some(a.sens.as_deref().unwrap_or("sinsq")))?;
    let methods = parse_methods(a.methods.as_deref())?;
    let n = a.n.unwrap_or(5000);
    let sizes = broadcast(parse_list::<usize>(a.grid.as_deref().unwrap_or("44"), "grid")?, gt.dim(), "grid")?;
    let mut cfg = FitConfig { lambda: a.lambda.unwrap_or(FitConfig::default().lambda), ..FitConfig::default() };
    if let Some(d) = a.degree {
        cfg.degree = SplineDegree::new(d)?;
    }
    cfg.max_iter = a.max_iter.unwrap_or(cfg.max_iter);
    cfg.validate()?;
    let seed = a.seed.unwrap_or(0);
    let scale = a.reference_scale.unwrap_or(4).max(1);
    let dir = a.out_dir.unwrap_or_else(|| PathBuf::from("compare"));

    let fit_grid = gt.grid(&sizes)?;
    let reference = gt.grid(&sizes.iter().map(|m| m * scale).collect::<Vec<_>>())?;
    let (samples, _) = sample_observed(&gt, &xi, n, seed)?;
    let truth = gt.pdf_field(&reference);
    create_dir(&dir)?;
    io::save_field(dir.join("truth.rdsf"), &truth)?;
    let mut csv = format!("{COMPARE_CSV_HEADER}\n");
    let mut all_converged = true;
    let grid_label = sizes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("x");
    for m in methods {
        let est = estimate(m, &samples, &xi, &fit_grid, &reference, &cfg)?;
        let db = mse_db(&truth, &est.field)?;
        io::save_field(dir.join(format!("{m}.rdsf")), &est.field)?;
        all_converged &= est.converged;
        let lambda = if m == Method::Rds { cfg.lambda.to_string() } else { String::new() };
        writeln!(
            csv,
            "{m},{dist},{n},{lambda},{grid_label},{},{seed},{db:?},{:?},{:?},{},{}",
            cfg.degree.get(),
            est.fit_seconds,
            est.eval_seconds,
            est.converged,
            est.iterations
        )
        .unwrap();
        writeln!(out, "{m:4} mse {db:8.2} dB  fit {:.3} s  eval {:.4} s", est.fit_seconds, est.eval_seconds).ok();
    }
    write_text(&dir.join("results.csv"), &csv)?;
    Ok(if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_sweep(a: SweepArgs, out: &mut String) -> CliResult<i32> {
    let path = required(a.config, "config")?;
    let text = fs::read_to_string(&path).map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut cfg: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| RdsError::format(format!("{}, line {}", path.display(), e.line()), e.to_string()))?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let rows = run_sweep(&cfg)?;
    let dest = a.out.unwrap_or_else(|| PathBuf::from("results.csv"));
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).map_err(RdsError::from)?;
    fs::write(&dest, buf).map_err(RdsError::from)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    writeln!(out, "{} cells, {failed} failed, {unconverged} not converged", rows.len()).ok();
    Ok(if unconverged > 0 { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

fn cmd_pet(a: PetArgs, out: &mut String) -> CliResult<i32> {
    let mut cfg = PetConfig::default();
    if let Some(p) = a.phantom {
        crate::pet::Phantom::by_name(&p).map_err(|e| usage(e.to_string()))?;
        cfg.phantom = p;
    }
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.methods = parse_methods(a.methods.as_deref())?;
    cfg.fit.lambda = a.lambda.unwrap_or(cfg.fit.lambda);
    cfg.n_theta = a.n_theta.unwrap_or(cfg.n_theta);
    cfg.n_s = a.n_s.unwrap_or(cfg.n_s);
    cfg.image_size = a.image_size.unwrap_or(cfg.image_size);
    cfg.fit.validate()?;
    let dir = a.out_dir.unwrap_or_else(|| PathBuf::from("pet"));
    create_dir(&dir)?;
    let report = run_pet(&cfg)?;
    io::save_field(dir.join("truth_sinogram.rdsf"), &report.truth_sinogram)?;
    io::save_field(dir.join("truth_image.rdsf"), &report.truth_image)?;
    let mut csv = String::from("method,sinogram_mse_db,image_mse_db,seconds\n");
    for r in &report.results {
        io::save_field(dir.join(format!("{}_sinogram.rdsf", r.method)), &r.sinogram)?;
        io::save_field(dir.join(format!("{}_image.rdsf", r.method)), &r.image)?;
        writeln!(csv, "{},{:?},{:?},{:?}", r.method, r.sinogram_mse_db, r.image_mse_db, r.seconds).unwrap();
        writeln!(out, "{:4} sinogram {:8.2} dB  image {:8.2} dB", r.method, r.sinogram_mse_db, r.image_mse_db).ok();
    }
    write_text(&dir.join("summary.csv"), &csv)?;
    writeln!(out, "{} events kept of {} emitted", report.events, report.emitted).ok();
    Ok(EXIT_OK)
}

/// Trace rows with the objective gap to the last iterate appended, so a
/// log-scale convergence plot needs no post-processing.
fn trace_plotdata(text: &str) -> CliResult<String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| RdsError::format("line 1", "empty trace"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let obj = cols.iter().position(|c| *c == "objective").ok_or_else(|| RdsError::format("line 1", "no objective column"))?;
    let rows: Vec<(usize, &str, f64)> = lines
        .enumerate()
        .map(|(i, l)| {
            let v = l.split(',').nth(obj).and_then(|v| v.parse::<f64>().ok());
            v.map(|v| (i + 2, l, v)).ok_or_else(|| RdsError::format(format!("line {}", i + 2), "missing objective"))
        })
        .collect::<Result<_, _>>()?;
    let last = rows.last().map(|r| r.2).unwrap_or(0.0);
    let mut out = format!("{header},rel_gap\n");
    for (_, l, v) in rows {
        writeln!(out, "{l},{:?}", (v - last) / last.abs().max(f64::MIN_POSITIVE)).unwrap();
    }
    Ok(out)
}

fn field_plotdata(field: &ScalarField) -> String {
    let d = field.grid().dim();
    let mut out = (0..d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",") + ",value\n";
    let coords = field.grid().node_coords();
    for (i, v) in field.values().iter().enumerate() {
        coords[i * d..(i + 1) * d].iter().for_each(|x| write!(out, "{x:?},").unwrap());
        writeln!(out, "{v:?}").unwrap();
    }
    out
}

fn cmd_plot(a: PlotArgs, out: &mut String) -> CliResult<i32> {
    let text = match (&a.trace, &a.field) {
        (Some(t), None) => {
            let raw = fs::read_to_string(t).map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", t.display()))))?;
            trace_plotdata(&raw).map_err(|e| match e {
                CliError::Rds(RdsError::Format { location, message }) => {
                    CliError::Rds(RdsError::Format { location: format!("{}, {location}", t.display()), message })
                }
                other => other,
            })?
        }
        (None, Some(f)) => field_plotdata(&io::load_field(f)?),
        _ => return Err(usage("give exactly one of --trace and --field")),
    };
    match a.out {
        Some(p) => write_text(&p, &text)?,
        None => out.push_str(&text),
    }
    Ok(EXIT_OK)
}

fn dispatch(cmd: Command, out: &mut String) -> CliResult<i32> {
    match cmd {
        Command::Sample(a) => {
            let c = a.config.clone();
            cmd_sample(merged(a, c.as_deref())?, out)
        }
        Command::Fit(a) => {
            let c = a.config.clone();
            cmd_fit(merged(a, c.as_deref())?, out)
        }
        Command::Eval(a) => {
            let c = a.config.clone();
            cmd_eval(merged(a, c.as_deref())?, out)
        }
        Command::Compare(a) => {
            let c = a.config.clone();
            cmd_compare(merged(a, c.as_deref())?, out)
        }
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::PetDemo(a) => {
            let c = a.config.clone();
            cmd_pet(merged(a, c.as_deref())?, out)
        }
        Command::TracePlotdata(a) => {
            let c = a.config.clone();
            cmd_plot(merged(a, c.as_deref())?, out)
        }
    }
}

/// Runs one invocation; returns the exit code and what goes to stdout and
/// stderr.
pub fn run_capture<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() { (code, String::new(), text) } else { (code, text, String::new()) };
        }
    };
    let mut out = String::new();
    match dispatch(cli.command, &mut out) {
        Ok(code) => (code, out, String::new()),
        Err(e) => (e.exit_code(), out, format!("rds: {e}\n")),
    }
}

/// Entry point of the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, out, err) = run_capture(args);
    print!("{out}");
    eprint!("{err}");
    code
}
