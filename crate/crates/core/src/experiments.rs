//! Synthetic ground truths on the periodic unit box, sensitivity thinning,
//! the dB mean-squared error, and sweep drivers comparing the estimators.

use crate::baselines::{HistModel, KdeModel};
use crate::bspline::SplineDegree;
use crate::density::{DensityModel, SensitivityMap};
use crate::error::{RdsError, Result};
use crate::grid::{BoundaryCondition, GridSpec, ScalarField};
use crate::optimizer::{fit, FitConfig};
use crate::samples::SampleSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

/// Floor returned by [`mse_db`] for identical fields.
pub const MSE_DB_FLOOR: f64 = -400.0;

/// Images per side summed when periodizing the analytic pdfs.
const PERIODIC_IMAGES: i32 = 2;

/// One mixture component, defined on all of `R^d` and folded into the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Component {
    Uniform,
    /// Axis-aligned Gaussian with per-axis variances.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Product of one-dimensional Laplace laws.
    Laplace { loc: Vec<f64>, scale: Vec<f64> },
    /// Uniform along the axes where `loc` is `None`, Laplace elsewhere.
    Ridge { loc: Vec<Option<f64>>, scale: f64 },
}

impl Component {
    fn pdf_unfolded(&self, x: &[f64], volume: f64) -> f64 {
        match self {
            Component::Uniform => 1.0 / volume,
            Component::Gaussian { mean, var } => x
                .iter()
                .zip(mean.iter().zip(var))
                .map(|(xi, (m, v))| (-(xi - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt())
                .product(),
            Component::Laplace { loc, scale } => {
                x.iter().zip(loc.iter().zip(scale)).map(|(xi, (m, b))| (-(xi - m).abs() / b).exp() / (2.0 * b)).product()
            }
            Component::Ridge { .. } => unreachable!("ridge components are periodized per axis"),
        }
    }
}

/// Mixture density on a periodic box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub name: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub components: Vec<(f64, Component)>,
}

impl GroundTruth {
    pub fn new(name: &str, lo: Vec<f64>, hi: Vec<f64>, components: Vec<(f64, Component)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(RdsError::InvalidConfig("mixture weights must be non-negative and sum to 1".into()));
        }
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            return Err(RdsError::InvalidConfig("box bounds must satisfy lo < hi".into()));
        }
        Ok(GroundTruth { name: name.to_string(), lo, hi, components })
    }

    /// Uniform + Gaussian + Laplacian on `[0,1)²`.
    pub fn ugl() -> Self {
        GroundTruth::new(
            "ugl",
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![
                (0.2, Component::Uniform),
                (0.4, Component::Gaussian { mean: vec![0.35, 0.6], var: vec![0.01, 0.01] }),
                (0.4, Component::Laplace { loc: vec![0.7, 0.3], scale: vec![0.05, 0.05] }),
            ],
        )
        .expect("frozen parameters are valid")
    }

    /// Two Gaussians on `[0,1)²`.
    pub fn gg() -> Self {
        GroundTruth::new(
            "gg",
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![
                (0.5, Component::Gaussian { mean: vec![0.3, 0.4], var: vec![0.005, 0.005] }),
                (0.5, Component::Gaussian { mean: vec![0.65, 0.6], var: vec![0.02, 0.02] }),
            ],
        )
        .expect("frozen parameters are valid")
    }

    /// Laplace profile along axis 0, uniform along axis 1, on `[0,1)²`.
    pub fn laplace_ridge() -> Self {
        GroundTruth::new(
            "ridge",
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![(1.0, Component::Ridge { loc: vec![Some(0.5), None], scale: 0.08 })],
        )
        .expect("frozen parameters are valid")
    }

    /// Uniform on `[0,1)²`.
    pub fn uniform() -> Self {
        GroundTruth::new("uniform", vec![0.0, 0.0], vec![1.0, 1.0], vec![(1.0, Component::Uniform)])
            .expect("frozen parameters are valid")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ugl" => Ok(Self::ugl()),
            "gg" => Ok(Self::gg()),
            "ridge" => Ok(Self::laplace_ridge()),
            "uniform" => Ok(Self::uniform()),
            other => Err(RdsError::InvalidConfig(format!("unknown distribution {other:?} (ugl, gg, ridge, uniform)"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Periodic grid of the given size covering the box.
    pub fn grid(&self, sizes: &[usize]) -> Result<GridSpec> {
        if sizes.len() != self.dim() {
            return Err(RdsError::ShapeMismatch(format!("{}-D grid for a {}-D distribution", sizes.len(), self.dim())));
        }
        GridSpec::from_box(sizes, &self.lo, &self.hi, &vec![BoundaryCondition::Periodic; self.dim()])
    }

    fn component_pdf(&self, comp: &Component, x: &[f64]) -> f64 {
        let d = self.dim();
        let lengths: Vec<f64> = self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect();
        if let Component::Ridge { loc, scale } = comp {
            return (0..d)
                .map(|k| match loc[k] {
                    None => 1.0 / lengths[k],
                    Some(m) => (-PERIODIC_IMAGES..=PERIODIC_IMAGES)
                        .map(|i| {
                            let t = x[k] + i as f64 * lengths[k] - m;
                            (-t.abs() / scale).exp() / (2.0 * scale)
                        })
                        .sum(),
                })
                .product();
        }
        if let Component::Uniform = comp {
            return 1.0 / self.volume();
        }
        let span = (2 * PERIODIC_IMAGES + 1) as usize;
        let mut shifted = vec![0.0; d];
        let mut acc = 0.0;
        for code in 0..span.pow(d as u32) {
            let mut rem = code;
            for k in 0..d {
                let img = (rem % span) as i32 - PERIODIC_IMAGES;
                rem /= span;
                shifted[k] = x[k] + img as f64 * lengths[k];
            }
            acc += comp.pdf_unfolded(&shifted, self.volume());
        }
        acc
    }

    /// Periodized mixture density at one point.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|(w, c)| w * self.component_pdf(c, x)).sum()
    }

    pub fn pdf_field(&self, grid: &GridSpec) -> ScalarField {
        ScalarField::from_fn(grid.clone(), |x| self.pdf(x))
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        let d = self.dim();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = &self.components[self.components.len() - 1].1;
        for (w, c) in &self.components {
            acc += w;
            if u < acc {
                chosen = c;
                break;
            }
        }
        for k in 0..d {
            let len = self.hi[k] - self.lo[k];
            let v = match chosen {
                Component::Uniform => self.lo[k] + len * rng.random::<f64>(),
                Component::Gaussian { mean, var } => {
                    let z: f64 = StandardNormal.sample(rng);
                    mean[k] + var[k].sqrt() * z
                }
                Component::Laplace { loc, scale } => loc[k] + scale[k] * laplace(rng),
                Component::Ridge { loc, scale } => match loc[k] {
                    None => self.lo[k] + len * rng.random::<f64>(),
                    Some(m) => m + scale * laplace(rng),
                },
            };
            let mut folded = self.lo[k] + (v - self.lo[k]).rem_euclid(len);
            if folded >= self.hi[k] {
                folded = self.lo[k];
            }
            out.push(folded);
        }
    }
}

fn laplace(rng: &mut ChaCha8Rng) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if rng.random::<bool>() {
        e
    } else {
        -e
    }
}

/// The two sensitivity maps of the synthetic study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensitivitySpec {
    /// `ξ ≡ 1`.
    #[serde(rename = "su")]
    Uniform,
    /// `sin²(x₀/T + φ) + ε` with three periods across the unit box.
    #[serde(rename = "ss")]
    SinSq,
}

impl SensitivitySpec {
    pub const PERIOD: f64 = 1.0 / (3.0 * std::f64::consts::PI);
    pub const PHASE: f64 = 0.4;
    pub const EPS: f64 = 1e-3;

    pub fn map(self) -> SensitivityMap {
        match self {
            SensitivitySpec::Uniform => SensitivityMap::Uniform,
            SensitivitySpec::SinSq => SensitivityMap::SinSq { period: Self::PERIOD, phase: Self::PHASE, eps: Self::EPS },
        }
    }
}

impl FromStr for SensitivitySpec {
    type Err = RdsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su" | "uniform" => Ok(SensitivitySpec::Uniform),
            "ss" | "sinsq" => Ok(SensitivitySpec::SinSq),
            other => Err(RdsError::InvalidConfig(format!("unknown sensitivity {other:?} (uniform, sinsq)"))),
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const DRAW_STREAM: u64 = 0;
const THIN_STREAM: u64 = 1;

/// `n` i.i.d. draws from the ground truth.
pub fn sample_ground_truth(gt: &GroundTruth, n: usize, seed: u64) -> SampleSet {
    let mut rng = stream_rng(seed, DRAW_STREAM);
    let mut coords = Vec::with_capacity(n * gt.dim());
    for _ in 0..n {
        gt.draw(&mut rng, &mut coords);
    }
    SampleSet::new(gt.dim(), coords).expect("finite draws").with_seed(seed)
}

fn keep(xi_val: f64, max: f64, rng: &mut ChaCha8Rng) -> bool {
    xi_val / max > rng.random::<f64>()
}

/// Rejection step: keeps `x` when `ξ(x)/max ξ > u` with `u ~ U[0,1)`.
pub fn thin_by_sensitivity(samples: &SampleSet, xi: &SensitivityMap, seed: u64) -> Result<SampleSet> {
    let max = xi.max_value();
    if !(max > 0.0) {
        return Err(RdsError::InvalidSensitivity("maximum sensitivity is zero".into()));
    }
    let vals = xi.eval_points(samples.coords(), samples.dim())?;
    let mut rng = stream_rng(seed, THIN_STREAM);
    Ok(samples.filter_indexed(|i| keep(vals[i], max, &mut rng)))
}

/// Draws and thins until `n_kept` samples survive. Returns the kept set and
/// the number of draws.
pub fn sample_observed(gt: &GroundTruth, xi: &SensitivityMap, n_kept: usize, seed: u64) -> Result<(SampleSet, usize)> {
    let max = xi.max_value();
    if !(max > 0.0) {
        return Err(RdsError::InvalidSensitivity("maximum sensitivity is zero".into()));
    }
    let mut draw_rng = stream_rng(seed, DRAW_STREAM);
    let mut thin_rng = stream_rng(seed, THIN_STREAM);
    let d = gt.dim();
    let mut kept = SampleSet::empty(d).with_seed(seed);
    let mut buf = Vec::with_capacity(d);
    let mut draws = 0usize;
    while kept.len() < n_kept {
        buf.clear();
        gt.draw(&mut draw_rng, &mut buf);
        draws += 1;
        if keep(xi.eval(&buf)?, max, &mut thin_rng) {
            kept.push(&buf);
        }
        if draws > 1000 * n_kept.max(1000) {
            return Err(RdsError::InvalidSensitivity("acceptance rate too low to reach the requested count".into()));
        }
    }
    Ok((kept, draws))
}

/// `10 log₁₀(mean (truth − est)²)`, floored at −400 dB.
pub fn mse_db(truth: &ScalarField, est: &ScalarField) -> Result<f64> {
    if !truth.grid().same_lattice(est.grid()) {
        return Err(RdsError::ShapeMismatch("MSE fields live on different grids".into()));
    }
    let mse = truth.values().iter().zip(est.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / truth.len() as f64;
    Ok(if mse > 0.0 { (10.0 * mse.log10()).max(MSE_DB_FLOOR) } else { MSE_DB_FLOOR })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rds,
    Kde,
    He,
}

impl FromStr for Method {
    type Err = RdsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rds" => Ok(Method::Rds),
            "kde" => Ok(Method::Kde),
            "he" | "hist" => Ok(Method::He),
            other => Err(RdsError::InvalidConfig(format!("unknown method {other:?} (rds, kde, he)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rds => "rds",
            Method::Kde => "kde",
            Method::He => "he",
        })
    }
}

/// One estimate sampled on a reference grid, with wall times.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub field: ScalarField,
    pub fit_seconds: f64,
    pub eval_seconds: f64,
    pub converged: bool,
    pub iterations: usize,
    pub model: Option<DensityModel>,
}

/// Samples `π̂` of a fitted model on `reference`, which must be the fit
/// lattice refined by an integer factor, or arbitrary otherwise.
pub fn eval_model_on(model: &DensityModel, reference: &GridSpec) -> Result<ScalarField> {
    let grid = &model.grid;
    let s = reference.sizes()[0] / grid.sizes()[0];
    if s >= 1 && grid.fine_grid(s).same_lattice(reference) {
        let f = model.pdf_grid(s)?;
        return ScalarField::new(reference.clone(), f.into_values());
    }
    let vals = model.pdf_at(&SensitivityMap::Uniform, &reference.node_coords(), false)?;
    ScalarField::new(reference.clone(), vals)
}

/// Runs one estimator on `samples` and samples the estimate on `reference`.
pub fn estimate(
    method: Method,
    samples: &SampleSet,
    xi: &SensitivityMap,
    fit_grid: &GridSpec,
    reference: &GridSpec,
    config: &FitConfig,
) -> Result<Estimate> {
    let t0 = Instant::now();
    match method {
        Method::Rds => {
            let res = fit(samples, xi, fit_grid, config)?;
            let model = res.model(config.degree, config.quad_scale)?;
            let fit_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let field = eval_model_on(&model, reference)?;
            Ok(Estimate {
                field,
                fit_seconds,
                eval_seconds: t1.elapsed().as_secs_f64(),
                converged: res.converged,
                iterations: res.trace.len(),
                model: Some(model),
            })
        }
        Method::Kde => {
            let kde = KdeModel::fit(samples, xi, fit_grid)?;
            let fit_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let field = kde.eval_grid(reference)?;
            Ok(Estimate { field, fit_seconds, eval_seconds: t1.elapsed().as_secs_f64(), converged: true, iterations: 0, model: None })
        }
        Method::He => {
            let he = HistModel::fit(samples, xi, fit_grid)?;
            let fit_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let field = he.eval_grid(reference)?;
            Ok(Estimate { field, fit_seconds, eval_seconds: t1.elapsed().as_secs_f64(), converged: true, iterations: 0, model: None })
        }
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Rds, Method::Kde, Method::He]
}

fn default_degrees() -> Vec<u8> {
    vec![1]
}

fn default_reference_scale() -> usize {
    4
}

fn default_sensitivity() -> SensitivityMap {
    SensitivitySpec::SinSq.map()
}

/// Sweep description; the Cartesian product of its lists is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub distribution: String,
    #[serde(default = "default_sensitivity")]
    pub sensitivity: SensitivityMap,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub lambda_list: Vec<f64>,
    pub grid_sizes: Vec<Vec<usize>>,
    #[serde(default = "default_degrees")]
    pub degrees: Vec<u8>,
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Refinement of the largest fit grid used for the MSE.
    #[serde(default = "default_reference_scale")]
    pub reference_scale: usize,
    #[serde(default)]
    pub fit: Option<FitConfig>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        GroundTruth::by_name(&self.distribution)?;
        if self.n_list.is_empty() || self.grid_sizes.is_empty() || self.methods.is_empty() {
            return Err(RdsError::InvalidConfig("n_list, grid_sizes and methods must be non-empty".into()));
        }
        if self.methods.contains(&Method::Rds) && self.lambda_list.is_empty() {
            return Err(RdsError::InvalidConfig("lambda_list is required for rds".into()));
        }
        for &d in &self.degrees {
            SplineDegree::new(d)?;
        }
        Ok(())
    }

    /// Reference lattice: the largest fit grid refined by `reference_scale`.
    pub fn reference_grid(&self, gt: &GroundTruth) -> Result<GridSpec> {
        let largest = self
            .grid_sizes
            .iter()
            .max_by_key(|s| s.iter().product::<usize>())
            .ok_or_else(|| RdsError::InvalidConfig("no grid sizes".into()))?;
        let sizes: Vec<usize> = largest.iter().map(|n| n * self.reference_scale).collect();
        gt.grid(&sizes)
    }
}

/// Seed of the sample set for the `index`-th entry of `n_list`; shared by
/// every estimator and parameter so they see the same data.
pub fn data_seed(master: u64, index: usize) -> u64 {
    master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One row of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub distribution: String,
    pub n: usize,
    pub lambda: Option<f64>,
    pub grid: Option<Vec<usize>>,
    pub degree: Option<u8>,
    pub seed: u64,
    pub mse_db: f64,
    /// MSE of the pdf expressed as probability per fit-grid cell.
    pub mse_db_cell_units: f64,
    pub fit_seconds: f64,
    pub eval_seconds: f64,
    pub converged: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

pub const SWEEP_CSV_HEADER: &str =
    "method,distribution,n,lambda,grid,degree,seed,mse_db,mse_db_cell_units,fit_seconds,eval_seconds,converged,iterations,error";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.distribution,
            self.n,
            opt(self.lambda.map(|l| l.to_string())),
            opt(self.grid.as_ref().map(|g| g.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x"))),
            opt(self.degree.map(|d| d.to_string())),
            self.seed,
            self.mse_db,
            self.mse_db_cell_units,
            self.fit_seconds,
            self.eval_seconds,
            self.converged as u8,
            self.iterations,
            opt(self.error.as_ref().map(|e| format!("\"{}\"", e.replace('"', "'")))),
        )
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Converts an MSE in density units on `[lo, hi)` to probability-per-cell
/// units of a grid with `cells` cells.
pub fn cell_units_offset_db(volume: f64, cells: usize) -> f64 {
    20.0 * (volume / cells as f64).log10()
}

/// Evaluates every cell of the sweep; failures are recorded in the row and
/// the sweep continues.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let gt = GroundTruth::by_name(&config.distribution)?;
    let reference = config.reference_grid(&gt)?;
    let truth = gt.pdf_field(&reference);
    let base = config.fit.clone().unwrap_or_default();
    let largest_cells: usize = config.grid_sizes.iter().map(|s| s.iter().product::<usize>()).max().unwrap_or(1);
    let mut rows = Vec::new();
    for (ni, &n) in config.n_list.iter().enumerate() {
        let seed = data_seed(config.seed, ni);
        let samples = sample_observed(&gt, &config.sensitivity, n, seed)?.0;
        for &method in &config.methods {
            let mut cells: Vec<(Option<f64>, Option<Vec<usize>>, Option<u8>)> = Vec::new();
            if method == Method::Rds {
                for g in &config.grid_sizes {
                    for &deg in &config.degrees {
                        for &lam in &config.lambda_list {
                            cells.push((Some(lam), Some(g.clone()), Some(deg)));
                        }
                    }
                }
            } else {
                cells.push((None, None, None));
            }
            for (lambda, grid_sizes, degree) in cells {
                let sizes = grid_sizes.clone().unwrap_or_else(|| reference.sizes().to_vec());
                let cell_count: usize = grid_sizes.as_ref().map(|g| g.iter().product()).unwrap_or(largest_cells);
                let outcome = (|| -> Result<Estimate> {
                    let fit_grid = gt.grid(&sizes)?;
                    let mut cfg = base.clone();
                    if let Some(l) = lambda {
                        cfg.lambda = l;
                    }
                    if let Some(d) = degree {
                        cfg.degree = SplineDegree::new(d)?;
                    }
                    estimate(method, &samples, &config.sensitivity, &fit_grid, &reference, &cfg)
                })();
                let offset = cell_units_offset_db(gt.volume(), cell_count);
                let row = match outcome {
                    Ok(est) => {
                        let m = mse_db(&truth, &est.field)?;
                        SweepRow {
                            method,
                            distribution: gt.name.clone(),
                            n,
                            lambda,
                            grid: grid_sizes,
                            degree,
                            seed,
                            mse_db: m,
                            mse_db_cell_units: m + offset,
                            fit_seconds: est.fit_seconds,
                            eval_seconds: est.eval_seconds,
                            converged: est.converged,
                            iterations: est.iterations,
                            error: None,
                        }
                    }
                    Err(e) => SweepRow {
                        method,
                        distribution: gt.name.clone(),
                        n,
                        lambda,
                        grid: grid_sizes,
                        degree,
                        seed,
                        mse_db: f64::NAN,
                        mse_db_cell_units: f64::NAN,
                        fit_seconds: 0.0,
                        eval_seconds: 0.0,
                        converged: false,
                        iterations: 0,
                        error: Some(e.to_string()),
                    },
                };
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
