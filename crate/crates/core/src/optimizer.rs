//! Minimization of `J(c) = λ R(c) − log L_N(c)` by accelerated proximal
//! gradient with a local Lipschitz step and gradient-based restarts.

use crate::bspline::SplineDegree;
use crate::density::{DensityModel, SensitivityMap, DEFAULT_QUAD_SCALE};
use crate::error::{RdsError, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::hessian::{HessianField, HessianOperator, ProxConfig};
use crate::likelihood::{accumulate_data_sums, DataSums, LogLikelihood, SecondOrder};
use crate::samples::SampleSet;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// How the step size follows the iterates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LipschitzMode {
    /// Recomputed at every extrapolated point.
    Adaptive,
    /// Computed once at the first iterate and kept.
    Frozen,
}

/// Weight of each grid point in the regularizer sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegWeight {
    /// `Π μ_k`, so `R` approximates `∫ ‖H‖` and `λ` does not depend on the
    /// grid resolution.
    Volume,
    /// Plain sum over grid points.
    Unit,
}

impl RegWeight {
    pub fn factor(self, grid: &GridSpec) -> f64 {
        match self {
            RegWeight::Volume => grid.step().iter().product(),
            RegWeight::Unit => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub lambda: f64,
    pub max_iter: usize,
    pub eps_tol: f64,
    pub degree: SplineDegree,
    pub quad_scale: usize,
    pub prox: ProxConfig,
    /// Constant value of every coefficient at start.
    pub init: f64,
    pub lipschitz: LipschitzMode,
    /// Reuse the previous dual variable to start each proximal solve.
    pub warm_start_dual: bool,
    /// Coefficients held at fixed values, as `(flat index, value)`.
    pub pinned: Vec<(usize, f64)>,
    pub reg_weight: RegWeight,
    /// Double `B_Lip` and redo the step whenever the quadratic upper bound
    /// fails at the new point. The bound is local to the extrapolated
    /// point, so a long step into a sharper region can break it.
    pub backtrack: bool,
}

/// Proximal settings used by [`FitConfig::default`]: the inner solve runs to
/// a 50-iteration cap. A warm-started dual barely moves per step, so a
/// relative-change stop fires while the dual is still far off.
pub fn fit_prox_default() -> ProxConfig {
    ProxConfig { inner_iters: 50, inner_tol: 0.0, ..ProxConfig::default() }
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 0.5,
            max_iter: 500,
            eps_tol: 1e-6,
            degree: SplineDegree::LINEAR,
            quad_scale: DEFAULT_QUAD_SCALE,
            prox: fit_prox_default(),
            init: -1.0,
            lipschitz: LipschitzMode::Adaptive,
            warm_start_dual: true,
            pinned: Vec::new(),
            reg_weight: RegWeight::Volume,
            backtrack: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(RdsError::InvalidConfig(format!("lambda must be ≥ 0, got {}", self.lambda)));
        }
        if !(self.eps_tol > 0.0) {
            return Err(RdsError::InvalidConfig(format!("eps_tol must be > 0, got {}", self.eps_tol)));
        }
        if self.max_iter == 0 {
            return Err(RdsError::InvalidConfig("max_iter must be ≥ 1".into()));
        }
        if !self.init.is_finite() {
            return Err(RdsError::InvalidConfig("non-finite initial coefficient".into()));
        }
        Ok(())
    }
}

/// One outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub negloglik: f64,
    pub reg: f64,
    pub objective: f64,
    pub blip: f64,
    pub restarted: bool,
    /// `‖c_{k+1} − c_k‖ / ‖c_k‖`.
    pub step: f64,
    /// Whether the quadratic upper bound held for this step.
    pub descent_ok: bool,
    pub prox_iters: usize,
    /// Doublings of `B_Lip` needed for the quadratic bound.
    #[serde(default)]
    pub backtracks: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub records: Vec<TraceRecord>,
}

impl FitTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn restarts(&self) -> usize {
        self.records.iter().filter(|r| r.restarted).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,negloglik,reg,blip,restarted,objective,step,descent_ok,prox_iters,backtracks")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{},{:e},{:e},{},{},{}",
                r.iter, r.negloglik, r.reg, r.blip, r.restarted as u8, r.objective, r.step, r.descent_ok as u8, r.prox_iters, r.backtracks
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub coeffs: ScalarField,
    pub trace: FitTrace,
    pub converged: bool,
    pub warnings: Vec<String>,
    /// Objective at `coeffs`.
    pub objective: f64,
}

impl FitResult {
    pub fn model(&self, degree: SplineDegree, quad_scale: usize) -> Result<DensityModel> {
        DensityModel::new(self.coeffs.clone(), degree, quad_scale)
    }
}

/// `N (‖f‖² + min(Gershgorin(D), ‖D‖_F))`, an upper bound on the spectral
/// norm of the negative log-likelihood Hessian `N (D − f fᵀ)`.
pub fn lipschitz_from_parts(n_samples: usize, f: &ScalarField, d: &crate::likelihood::BandedHessianPart) -> f64 {
    n_samples as f64 * (f.dot(f) + d.gershgorin().min(d.frobenius()))
}

pub fn lipschitz_bound(c: &ScalarField, data: &DataSums, xi: &SensitivityMap) -> Result<f64> {
    let like = LogLikelihood::new(data.clone(), xi, DEFAULT_QUAD_SCALE)?;
    let (f, d) = like.hessian_parts(c)?;
    Ok(lipschitz_from_parts(data.n_samples, &f, &d))
}

/// `λ w R(c) − log L_N(c)` (up to the `Σ log ξ` constant), `w` the
/// regularizer weight.
pub struct Objective<'a> {
    pub like: &'a LogLikelihood,
    pub hessian: Option<HessianOperator>,
    pub lambda: f64,
    pub p: crate::hessian::SchattenP,
    pub weight: f64,
}

impl<'a> Objective<'a> {
    pub fn new(like: &'a LogLikelihood, lambda: f64, p: crate::hessian::SchattenP) -> Result<Self> {
        Self::weighted(like, lambda, p, RegWeight::Volume)
    }

    pub fn weighted(like: &'a LogLikelihood, lambda: f64, p: crate::hessian::SchattenP, w: RegWeight) -> Result<Self> {
        let degree = like.data().degree;
        let hessian = if degree == SplineDegree::CONSTANT { None } else { Some(HessianOperator::new(like.grid(), degree)?) };
        Ok(Objective { like, hessian, lambda, p, weight: w.factor(like.grid()) })
    }

    /// Multiplier of `R` in `J`.
    pub fn reg_factor(&self) -> f64 {
        self.lambda * self.weight
    }

    pub fn regularizer(&self, c: &ScalarField) -> Result<f64> {
        match &self.hessian {
            Some(h) => h.regularizer(c, self.p),
            None => Ok(0.0),
        }
    }

    /// `(J, −log L, R)`.
    pub fn parts(&self, c: &ScalarField) -> Result<(f64, f64, f64)> {
        let nll = self.like.value(c)?;
        let reg = self.regularizer(c)?;
        Ok((self.reg_factor() * reg + nll, nll, reg))
    }

    pub fn value(&self, c: &ScalarField) -> Result<f64> {
        Ok(self.parts(c)?.0)
    }
}

pub fn objective(c: &ScalarField, like: &LogLikelihood, lambda: f64, p: crate::hessian::SchattenP) -> Result<f64> {
    Objective::new(like, lambda, p)?.value(c)
}

fn apply_pins(c: &mut ScalarField, pins: &[(usize, f64)]) {
    let v = c.values_mut();
    for &(i, val) in pins {
        v[i] = val;
    }
}

fn rel_change(new: &ScalarField, old: &ScalarField) -> f64 {
    let diff: f64 = new.values().iter().zip(old.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let base = old.norm();
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

/// Ceiling on the inner-iteration cap, as a multiple of the configured one.
const MAX_INNER_GROWTH: usize = 20;

/// Doublings of `B_Lip` tried per iteration before the step is taken anyway.
const MAX_BACKTRACKS: usize = 30;

/// Runs the accelerated proximal-gradient loop on a prepared data term.
pub fn fit_likelihood(like: &LogLikelihood, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let grid = like.grid().clone();
    if like.data().degree != config.degree {
        return Err(RdsError::InvalidConfig("data sums were accumulated for another degree".into()));
    }
    if let Some(&(i, _)) = config.pinned.iter().find(|(i, _)| *i >= grid.len()) {
        return Err(RdsError::InvalidConfig(format!("pinned index {i} outside the grid")));
    }
    let obj = Objective::weighted(like, config.lambda, config.prox.p, config.reg_weight)?;
    let mut warnings = Vec::new();
    let support = (config.degree.get() as usize + 1).pow(grid.dim() as u32);
    if like.data().phi_sums.values().iter().filter(|&&v| v > 0.0).count() <= support {
        warnings.push("all samples fall within a single basis support; the fit is degenerate".to_string());
    }

    let mut c_k = ScalarField::constant(grid.clone(), config.init);
    apply_pins(&mut c_k, &config.pinned);
    let mut c_temp = c_k.clone();
    let mut t = 1.0f64;
    let mut dual: Option<HessianField> = None;
    let mut frozen: Option<f64> = None;
    let mut trace = FitTrace::default();
    let (j0, _, _) = obj.parts(&c_k)?;
    let mut best = (j0, c_k.clone());
    let use_prox = config.lambda > 0.0 && obj.hessian.is_some();
    // Raised whenever an inexact prox lets the objective rise.
    let mut prox_cfg = config.prox;
    let max_inner = config.prox.inner_iters.saturating_mul(MAX_INNER_GROWTH);
    let mut j_k = j0;

    'outer: for iter in 1..=config.max_iter {
        let (f_temp, g, blip) = match (config.lipschitz, frozen) {
            (LipschitzMode::Frozen, Some(b)) => {
                let (v, g) = like.value_and_gradient(&c_temp)?;
                (v, g, b)
            }
            _ => {
                let SecondOrder { value, gradient, f, d } = like.evaluate_with_hessian(&c_temp)?;
                let b = lipschitz_from_parts(like.n_samples(), &f, &d);
                if config.lipschitz == LipschitzMode::Frozen {
                    frozen = Some(b);
                }
                (value, gradient, b)
            }
        };
        let mut blip = blip;
        let mut backtracks = 0;
        let (c_next, prox_iters, j_next, nll_next, reg_next, descent_ok) = loop {
            let tau = 1.0 / blip;
            let z = c_temp.with_values(c_temp.values().iter().zip(g.values()).map(|(c, gk)| c - tau * gk).collect());
            let (mut c_next, prox_iters) = if use_prox {
                let op = obj.hessian.as_ref().expect("checked above");
                let warm = if config.warm_start_dual { dual.as_ref() } else { None };
                let res = op.prox(&z, obj.reg_factor() * tau, &prox_cfg, warm)?;
                dual = Some(res.dual);
                (res.c, res.iterations)
            } else {
                (z, 0)
            };
            apply_pins(&mut c_next, &config.pinned);

            let parts = match obj.parts(&c_next) {
                Ok(v) => Some(v),
                Err(RdsError::DensityOverflow) if config.backtrack && backtracks < MAX_BACKTRACKS => None,
                // A frozen step can overshoot into overflow; report it as divergence.
                Err(RdsError::DensityOverflow) if config.lipschitz == LipschitzMode::Frozen => {
                    warnings.push(format!("density overflow at iteration {iter}; iterations diverged"));
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            let descent_ok = parts.is_some_and(|(_, nll_next, _)| {
                let lin: f64 = g.values().iter().zip(c_next.values().iter().zip(c_temp.values())).map(|(a, (n, t))| a * (n - t)).sum();
                let quad: f64 = c_next.values().iter().zip(c_temp.values()).map(|(n, t)| (n - t).powi(2)).sum::<f64>() * 0.5 * blip;
                nll_next <= f_temp + lin + quad + 1e-10 * (1.0 + f_temp.abs())
            });
            if let Some((j, nll, reg)) = parts {
                if descent_ok || !config.backtrack || backtracks >= MAX_BACKTRACKS {
                    break (c_next, prox_iters, j, nll, reg, descent_ok);
                }
            }
            blip *= 2.0;
            backtracks += 1;
        };
        if backtracks > 0 && config.lipschitz == LipschitzMode::Frozen {
            frozen = Some(blip);
        }
        let step = rel_change(&c_next, &c_k);
        if j_next < best.0 {
            best = (j_next, c_next.clone());
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let ip: f64 = c_temp
            .values()
            .iter()
            .zip(c_next.values())
            .zip(c_k.values())
            .map(|((ct, cn), ck)| (ct - cn) * (cn - ck))
            .sum();
        let restarted = ip >= 0.0;
        trace.records.push(TraceRecord {
            iter,
            negloglik: nll_next,
            reg: reg_next,
            objective: j_next,
            blip,
            restarted,
            step,
            descent_ok,
            prox_iters,
            backtracks,
        });
        if step < config.eps_tol {
            return Ok(FitResult { coeffs: c_next, trace, converged: true, warnings, objective: j_next });
        }
        if restarted && j_next > j_k {
            prox_cfg.inner_iters = (prox_cfg.inner_iters * 2).min(max_inner);
        }
        let (c_new, t_new) = if restarted {
            (c_k.clone(), 1.0)
        } else {
            j_k = j_next;
            (c_next, t_next)
        };
        let beta = (t - 1.0) / t_new;
        c_temp = c_new.with_values(c_new.values().iter().zip(c_k.values()).map(|(a, b)| a + beta * (a - b)).collect());
        c_k = c_new;
        t = t_new;
    }
    warnings.push(format!("no convergence within {} iterations; returning the best iterate", config.max_iter));
    Ok(FitResult { coeffs: best.1, trace, converged: false, warnings, objective: best.0 })
}

/// Fits the density to `samples` observed through `xi` on `grid`.
pub fn fit(samples: &SampleSet, xi: &SensitivityMap, grid: &GridSpec, config: &FitConfig) -> Result<FitResult> {
    if samples.is_empty() {
        return Err(RdsError::TooFewSamples { needed: 1, got: 0 });
    }
    config.validate()?;
    let data = accumulate_data_sums(samples, grid, config.degree)?;
    let like = LogLikelihood::new(data, xi, config.quad_scale)?;
    fit_likelihood(&like, config)
}
