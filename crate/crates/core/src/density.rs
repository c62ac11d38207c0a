//! The exponential-family density `ρ̂(x; c) = exp(Σ_m c[m] φ_m(x))`, the
//! sensitivity measure `ξ`, and the `ξ`-weighted integrals `E(·) = ∫ · ξ dx`.
//!
//! Integrals are Riemann sums on the lattice refined by the quadrature scale
//! `s_int`: every node carries the cell volume `Π μ_k / s_int`, halved at the
//! two end nodes of non-periodic axes (trapezoid rule). Grid samples of the
//! log-density come from one separable convolution of the upsampled
//! coefficients, and the moments `E(φ_k ρ̂)` from its adjoint.

use crate::bspline::{eval_spline_grid, eval_spline_points, filter_taps, SplineDegree};
use crate::error::{RdsError, Result};
use crate::grid::{downsample, separable_convolve_adjoint, GridSpec, ScalarField};
use serde::{Deserialize, Serialize};

/// Largest log-density accepted before exponentiation.
pub const LOG_DENSITY_LIMIT: f64 = 700.0;

/// Default refinement of the quadrature lattice.
pub const DEFAULT_QUAD_SCALE: usize = 4;

/// Detection probability `ξ ≥ 0` over the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SensitivityMap {
    Uniform,
    /// `ξ(x) = sin²(x₀/T + φ) + ε`.
    #[serde(rename = "sinsq")]
    SinSq {
        #[serde(rename = "T")]
        period: f64,
        phase: f64,
        eps: f64,
    },
    /// B-spline with the given non-negative coefficients, so `ξ ≥ 0`
    /// everywhere and `max ξ ≤ max coefficient`.
    #[serde(skip)]
    Gridded { field: ScalarField, degree: SplineDegree },
}

impl SensitivityMap {
    pub fn sinsq(period: f64, phase: f64, eps: f64) -> Result<Self> {
        if !(period > 0.0) || eps < 0.0 || !phase.is_finite() {
            return Err(RdsError::InvalidSensitivity(format!(
                "sinsq needs T > 0 and eps ≥ 0 (T = {period}, eps = {eps})"
            )));
        }
        Ok(SensitivityMap::SinSq { period, phase, eps })
    }

    pub fn gridded(field: ScalarField, degree: SplineDegree) -> Result<Self> {
        if let Some(v) = field.values().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(RdsError::InvalidSensitivity(format!("gridded sensitivity value {v} is negative or non-finite")));
        }
        Ok(SensitivityMap::Gridded { field, degree })
    }

    /// Pointwise value at one world point.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            SensitivityMap::Uniform => Ok(1.0),
            SensitivityMap::SinSq { period, phase, eps } => {
                let s = (x[0] / period + phase).sin();
                Ok(s * s + eps)
            }
            SensitivityMap::Gridded { field, degree } => {
                Ok(eval_spline_points(field, *degree, x, &vec![0; field.grid().dim()])?[0])
            }
        }
    }

    /// Values at `pts.len() / d` points.
    pub fn eval_points(&self, pts: &[f64], d: usize) -> Result<Vec<f64>> {
        match self {
            SensitivityMap::Gridded { field, degree } => {
                if field.grid().dim() != d {
                    return Err(RdsError::ShapeMismatch("sensitivity dimension differs from points".into()));
                }
                eval_spline_points(field, *degree, pts, &vec![0; d])
            }
            _ => pts.chunks_exact(d).map(|x| self.eval(x)).collect(),
        }
    }

    /// Upper bound on `ξ` used for thinning.
    pub fn max_value(&self) -> f64 {
        match self {
            SensitivityMap::Uniform => 1.0,
            SensitivityMap::SinSq { eps, .. } => 1.0 + eps,
            SensitivityMap::Gridded { field, .. } => field.values().iter().copied().fold(0.0, f64::max),
        }
    }

    /// Values at every node of `grid`.
    pub fn sample_on(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        self.eval_points(&grid.node_coords(), grid.dim())
    }
}

/// Per-node Riemann weights of `grid`: cell volume, halved at the ends of
/// non-periodic axes.
pub fn quadrature_weights(grid: &GridSpec) -> Vec<f64> {
    let d = grid.dim();
    let axis_weights: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let n = grid.sizes()[k];
            let h = grid.step()[k];
            (0..n)
                .map(|i| if !grid.bcs()[k].is_periodic() && (i == 0 || i == n - 1) { 0.5 * h } else { h })
                .collect()
        })
        .collect();
    let mut out = vec![1.0; grid.len()];
    let mut m = vec![0usize; d];
    for w in out.iter_mut() {
        for k in 0..d {
            *w *= axis_weights[k][m[k]];
        }
        crate::grid::increment(&mut m, grid.sizes());
    }
    out
}

/// Quadrature lattice for a model grid together with the sampled measure.
///
/// Built once per (grid, degree, scale, ξ); evaluating it at a coefficient
/// field yields an immutable [`QuadratureCache`].
#[derive(Clone, Debug)]
pub struct Quadrature {
    coarse: GridSpec,
    fine: GridSpec,
    degree: SplineDegree,
    scale: usize,
    taps: Vec<Vec<f64>>,
    lebesgue: Vec<f64>,
    measure: Vec<f64>,
}

impl Quadrature {
    pub fn new(grid: &GridSpec, degree: SplineDegree, scale: usize, xi: &SensitivityMap) -> Result<Self> {
        // A degree-0 spline jumps halfway between knots. With an even
        // refinement some nodes land on the jumps, where exp of the averaged
        // log is not the averaged density, so round up to odd.
        let scale = if degree.get() == 0 && scale % 2 == 0 { scale + 1 } else { scale.max(1) };
        let fine = grid.fine_grid(scale);
        let lebesgue = quadrature_weights(&fine);
        let xi_nodes = match xi {
            SensitivityMap::Uniform => vec![1.0; fine.len()],
            other => other.sample_on(&fine)?,
        };
        let nonpositive = xi_nodes.iter().filter(|&&v| !(v > 0.0)).count();
        if xi_nodes.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(RdsError::InvalidSensitivity("negative or non-finite sensitivity on quadrature nodes".into()));
        }
        if nonpositive as f64 >= 0.1 * fine.len() as f64 {
            return Err(RdsError::InvalidSensitivity(format!(
                "sensitivity vanishes on {nonpositive} of {} quadrature nodes",
                fine.len()
            )));
        }
        let measure = xi_nodes.iter().zip(&lebesgue).map(|(x, w)| x * w).collect();
        let taps = vec![filter_taps(degree, 0, scale); grid.dim()];
        Ok(Quadrature { coarse: grid.clone(), fine, degree, scale, taps, lebesgue, measure })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.coarse
    }

    pub fn fine_grid(&self) -> &GridSpec {
        &self.fine
    }

    pub fn degree(&self) -> SplineDegree {
        self.degree
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// `ξ` times the Riemann weight at each fine node.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// Riemann weight at each fine node (`ξ ≡ 1`).
    pub fn lebesgue_weights(&self) -> &[f64] {
        &self.lebesgue
    }

    pub fn log_density(&self, c: &ScalarField) -> Result<ScalarField> {
        if !c.grid().same_lattice(&self.coarse) {
            return Err(RdsError::ShapeMismatch("coefficients do not live on the quadrature grid".into()));
        }
        eval_spline_grid(c, self.degree, self.scale, &vec![0; self.coarse.dim()])
    }

    pub fn evaluate(&self, c: &ScalarField) -> Result<QuadratureCache> {
        let log_rho = self.log_density(c)?.into_values();
        if log_rho.iter().any(|&v| !(v <= LOG_DENSITY_LIMIT)) {
            return Err(RdsError::DensityOverflow);
        }
        let weighted: Vec<f64> = log_rho.iter().zip(&self.measure).map(|(l, m)| l.exp() * m).collect();
        let total: f64 = weighted.iter().sum();
        if !total.is_finite() {
            return Err(RdsError::DensityOverflow);
        }
        Ok(QuadratureCache { log_rho, weighted, total })
    }

    /// Adjoint of fine-grid sampling: `out[k] = Σ_j y[j] φ_k(x_j)`.
    pub fn sampling_adjoint(&self, y: &[f64]) -> Result<ScalarField> {
        let field = ScalarField::new(self.fine.clone(), y.to_vec())?;
        let corr = separable_convolve_adjoint(&field, &self.taps, self.fine.bcs())?;
        downsample(&corr, &self.coarse, self.scale)
    }

    /// `f[k] = E(φ_k ρ̂) / E(ρ̂)`.
    pub fn basis_moments(&self, cache: &QuadratureCache) -> Result<ScalarField> {
        if !(cache.total > 0.0) {
            return Err(RdsError::DegenerateMeasure);
        }
        let mut f = self.sampling_adjoint(&cache.weighted)?;
        let inv = 1.0 / cache.total;
        f.values_mut().iter_mut().for_each(|v| *v *= inv);
        Ok(f)
    }

    /// `∫ ρ̂ dx` with the Lebesgue measure on the same nodes.
    pub fn lebesgue_integral(&self, cache: &QuadratureCache) -> f64 {
        cache.log_rho.iter().zip(&self.lebesgue).map(|(l, w)| l.exp() * w).sum()
    }
}

/// Log-density samples and `ξ`-weighted density on the quadrature nodes for
/// one coefficient field.
#[derive(Clone, Debug)]
pub struct QuadratureCache {
    pub log_rho: Vec<f64>,
    /// `ρ̂ · ξ · weight` per node.
    pub weighted: Vec<f64>,
    /// `E(ρ̂)`.
    pub total: f64,
}

impl QuadratureCache {
    /// `E(f ρ̂)` for fine-grid samples of `f`.
    pub fn expectation(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weighted).map(|(a, b)| a * b).sum()
    }
}

/// Spline coefficients on a grid together with the quadrature refinement
/// used to integrate the density.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityModel {
    pub grid: GridSpec,
    pub degree: SplineDegree,
    pub coeffs: ScalarField,
    pub quad_scale: usize,
}

impl DensityModel {
    pub fn new(coeffs: ScalarField, degree: SplineDegree, quad_scale: usize) -> Result<Self> {
        if !coeffs.is_finite() {
            return Err(RdsError::InvalidConfig("non-finite coefficients".into()));
        }
        if quad_scale == 0 || quad_scale > u8::MAX as usize {
            return Err(RdsError::InvalidConfig(format!("quadrature scale {quad_scale} outside 1..=255")));
        }
        Ok(DensityModel { grid: coeffs.grid().clone(), degree, coeffs, quad_scale })
    }

    pub fn constant(grid: GridSpec, degree: SplineDegree, value: f64) -> Self {
        DensityModel {
            coeffs: ScalarField::constant(grid.clone(), value),
            grid,
            degree,
            quad_scale: DEFAULT_QUAD_SCALE,
        }
    }

    /// Exact samples of `log ρ̂` on the lattice refined by `s`.
    pub fn log_density_grid(&self, s: usize) -> Result<ScalarField> {
        eval_spline_grid(&self.coeffs, self.degree, s, &vec![0; self.grid.dim()])
    }

    pub fn quadrature(&self, xi: &SensitivityMap) -> Result<Quadrature> {
        Quadrature::new(&self.grid, self.degree, self.quad_scale, xi)
    }

    /// `E(f ρ̂)` for `f` sampled on the model's quadrature lattice.
    pub fn expectation(&self, f_samples: &ScalarField, xi: &SensitivityMap) -> Result<f64> {
        let quad = self.quadrature(xi)?;
        if !f_samples.grid().same_lattice(quad.fine_grid()) {
            return Err(RdsError::ShapeMismatch("samples are not on the quadrature lattice".into()));
        }
        let cache = quad.evaluate(&self.coeffs)?;
        Ok(cache.expectation(f_samples.values()))
    }

    /// `f[k] = E(φ_k ρ̂) / E(ρ̂)`.
    pub fn weighted_basis_moments(&self, xi: &SensitivityMap) -> Result<ScalarField> {
        let quad = self.quadrature(xi)?;
        let cache = quad.evaluate(&self.coeffs)?;
        quad.basis_moments(&cache)
    }

    /// `∫_X ρ̂ dx`.
    pub fn lebesgue_normalizer(&self) -> Result<f64> {
        let quad = self.quadrature(&SensitivityMap::Uniform)?;
        let cache = quad.evaluate(&self.coeffs)?;
        Ok(cache.total)
    }

    /// `π̂ = ρ̂ / ∫ρ̂` at the given points, or the observed-density estimate
    /// `ν̂ = ρ̂ ξ / E(ρ̂)` when `observed` is set.
    pub fn pdf_at(&self, xi: &SensitivityMap, pts: &[f64], observed: bool) -> Result<Vec<f64>> {
        let d = self.grid.dim();
        let logs = eval_spline_points(&self.coeffs, self.degree, pts, &vec![0; d])?;
        if logs.iter().any(|&v| v > LOG_DENSITY_LIMIT) {
            return Err(RdsError::DensityOverflow);
        }
        if observed {
            let quad = self.quadrature(xi)?;
            let total = quad.evaluate(&self.coeffs)?.total;
            if !(total > 0.0) {
                return Err(RdsError::DegenerateMeasure);
            }
            let xis = xi.eval_points(pts, d)?;
            Ok(logs.iter().zip(xis).map(|(l, x)| l.exp() * x / total).collect())
        } else {
            let z = self.lebesgue_normalizer()?;
            Ok(logs.iter().map(|l| l.exp() / z).collect())
        }
    }

    /// `π̂` sampled on the lattice refined by `s`.
    pub fn pdf_grid(&self, s: usize) -> Result<ScalarField> {
        if self.degree.get() == 0 {
            // Mean of the one-sided densities at the jumps, not of their logs.
            if self.coeffs.values().iter().any(|&v| v > LOG_DENSITY_LIMIT) {
                return Err(RdsError::DensityOverflow);
            }
            let z = self.lebesgue_normalizer()?;
            let rho = eval_spline_grid(&self.coeffs.map(f64::exp), self.degree, s, &vec![0; self.grid.dim()])?;
            return Ok(rho.map(|r| r / z));
        }
        let logs = self.log_density_grid(s)?;
        if logs.values().iter().any(|&v| v > LOG_DENSITY_LIMIT) {
            return Err(RdsError::DensityOverflow);
        }
        let z = self.lebesgue_normalizer()?;
        Ok(logs.map(|l| l.exp() / z))
    }
}
