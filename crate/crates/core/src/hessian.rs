//! The Hessian–Schatten regularizer `R(c) = Σ_m ‖H{log ρ̂}(m)‖_{S_p}` and
//! its proximal operator.
//!
//! The Hessian samples on the coefficient lattice are `d(d+1)/2` separable
//! convolutions of `c`; mixed entries are computed once and mirrored. The
//! proximal map is solved on the dual by accelerated gradient projection.

use crate::bspline::{filter_taps, SplineDegree};
use crate::error::{RdsError, Result};
use crate::grid::{lane_matrix, GridSpec, ScalarField};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Schatten exponent of the per-point matrix norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchattenP {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl SchattenP {
    /// Index `q` with `1/p + 1/q = 1`.
    pub fn dual(self) -> SchattenP {
        match self {
            SchattenP::One => SchattenP::Inf,
            SchattenP::Two => SchattenP::Two,
            SchattenP::Inf => SchattenP::One,
        }
    }

    /// Vector `p`-norm.
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            SchattenP::One => v.iter().map(|x| x.abs()).sum(),
            SchattenP::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            SchattenP::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl FromStr for SchattenP {
    type Err = RdsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "nuclear" => Ok(SchattenP::One),
            "2" | "frobenius" => Ok(SchattenP::Two),
            "inf" | "infinity" | "spectral" => Ok(SchattenP::Inf),
            other => Err(RdsError::InvalidConfig(format!("Schatten exponent must be 1, 2 or inf, got {other:?}"))),
        }
    }
}

impl fmt::Display for SchattenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchattenP::One => "1",
            SchattenP::Two => "2",
            SchattenP::Inf => "inf",
        })
    }
}

/// Position of entry `(i, j)`, `i ≤ j`, among the upper-triangular
/// components ordered row by row.
pub fn component_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

/// Symmetric `d × d` matrices on every lattice point, stored as the
/// `d(d+1)/2` upper-triangular component fields.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianField {
    grid: GridSpec,
    comps: Vec<Vec<f64>>,
}

impl HessianField {
    pub fn zeros(grid: &GridSpec) -> Self {
        let d = grid.dim();
        HessianField { grid: grid.clone(), comps: vec![vec![0.0; grid.len()]; d * (d + 1) / 2] }
    }

    /// Builds a field from one full `d × d` row-major matrix per point;
    /// the upper triangle is kept.
    pub fn from_matrices(grid: &GridSpec, mats: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if mats.len() != grid.len() * d * d {
            return Err(RdsError::ShapeMismatch(format!("{} matrix entries for {} points", mats.len(), grid.len())));
        }
        let mut out = HessianField::zeros(grid);
        for m in 0..grid.len() {
            out.set_matrix(m, &mats[m * d * d..(m + 1) * d * d]);
        }
        Ok(out)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        &self.comps[component_index(self.dim(), i, j)]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Full matrix at point `m` written row-major into `out`.
    pub fn matrix(&self, m: usize, out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let v = self.comps[component_index(d, i, j)][m];
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
    }

    pub fn set_matrix(&mut self, m: usize, mat: &[f64]) {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                self.comps[component_index(d, i, j)][m] = mat[i * d + j];
            }
        }
    }

    /// Frobenius inner product summed over points; off-diagonal components
    /// count twice.
    pub fn inner(&self, other: &HessianField) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in i..d {
                let k = component_index(d, i, j);
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.comps[k].iter().zip(&other.comps[k]).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Per-point Schatten norms.
    pub fn pointwise_norms(&self, p: SchattenP) -> Vec<f64> {
        let d = self.dim();
        let mut mat = vec![0.0; d * d];
        (0..self.grid.len())
            .map(|m| {
                self.matrix(m, &mut mat);
                schatten_norm(&mat, d, p)
            })
            .collect()
    }
}

/// Eigenvalues (descending) and row-major eigenvectors (columns) of a
/// symmetric matrix. Closed form for `d ≤ 2`, cyclic Jacobi otherwise.
pub fn symmetric_eigen(mat: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    match d {
        1 => (vec![mat[0]], vec![1.0]),
        2 => {
            let (a, b, c) = (mat[0], 0.5 * (mat[1] + mat[2]), mat[3]);
            let mean = 0.5 * (a + c);
            let r = (0.5 * (a - c)).hypot(b);
            if r == 0.0 {
                return (vec![mean, mean], vec![1.0, 0.0, 0.0, 1.0]);
            }
            let theta = 0.5 * (2.0 * b).atan2(a - c);
            let (s, co) = theta.sin_cos();
            (vec![mean + r, mean - r], vec![co, -s, s, co])
        }
        _ => jacobi_eigen(mat, d),
    }
}

fn jacobi_eigen(mat: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = mat.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..64 {
        let off: f64 = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * d + j].powi(2)).sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]));
    let vals = order.iter().map(|&i| a[i * d + i]).collect();
    let mut vecs = vec![0.0; d * d];
    for (col, &i) in order.iter().enumerate() {
        for k in 0..d {
            vecs[k * d + col] = v[k * d + i];
        }
    }
    (vals, vecs)
}

pub fn symmetric_eigenvalues(mat: &[f64], d: usize) -> Vec<f64> {
    symmetric_eigen(mat, d).0
}

/// Schatten `p`-norm of a symmetric matrix (the `p`-norm of its absolute
/// eigenvalues).
pub fn schatten_norm(mat: &[f64], d: usize, p: SchattenP) -> f64 {
    if p == SchattenP::Two {
        return mat.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    p.norm(&symmetric_eigenvalues(mat, d))
}

/// Euclidean projection of `v` onto the unit `ℓ1` ball.
fn project_l1_ball(v: &mut [f64]) {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= 1.0 {
        return;
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk > t {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - theta).max(0.0);
    }
}

/// Projects one symmetric matrix onto the unit `S_q` ball in place.
pub fn project_matrix(mat: &mut [f64], d: usize, q: SchattenP) {
    if q == SchattenP::Two {
        let norm = mat.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 {
            mat.iter_mut().for_each(|x| *x /= norm);
        }
        return;
    }
    if d == 2 {
        project_2x2(mat, q);
        return;
    }
    let (mut vals, vecs) = symmetric_eigen(mat, d);
    let inside = match q {
        SchattenP::Inf => vals.iter().all(|v| v.abs() <= 1.0),
        _ => vals.iter().map(|v| v.abs()).sum::<f64>() <= 1.0,
    };
    if inside {
        return;
    }
    match q {
        SchattenP::Inf => vals.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0)),
        _ => project_l1_ball(&mut vals),
    }
    for i in 0..d {
        for j in 0..d {
            mat[i * d + j] = (0..d).map(|k| vecs[i * d + k] * vals[k] * vecs[j * d + k]).sum();
        }
    }
}

/// `M = m I + r N` with `N` traceless of unit spectral norm; projecting the
/// eigenvalues `m ± r` keeps `N`.
fn project_2x2(mat: &mut [f64], q: SchattenP) {
    let (a, b, c) = (mat[0], mat[1], mat[3]);
    let m = 0.5 * (a + c);
    let h = 0.5 * (a - c);
    let r = h.hypot(b);
    let mut vals = [m + r, m - r];
    match q {
        SchattenP::Inf if vals.iter().all(|v| v.abs() <= 1.0) => return,
        SchattenP::Inf => vals.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0)),
        _ if vals[0].abs() + vals[1].abs() <= 1.0 => return,
        _ => project_l1_ball(&mut vals),
    }
    let mean = 0.5 * (vals[0] + vals[1]);
    let half = 0.5 * (vals[0] - vals[1]);
    let (nh, nb) = if r > 0.0 { (h / r, b / r) } else { (1.0, 0.0) };
    mat[0] = mean + half * nh;
    mat[3] = mean - half * nh;
    mat[1] = half * nb;
    mat[2] = half * nb;
}

/// Per-point projection onto the unit ball of the dual Schatten norm `S_q`.
pub fn project_dual_ball(a: &HessianField, q: SchattenP) -> HessianField {
    let mut out = a.clone();
    project_dual_ball_in_place(&mut out, q);
    out
}

fn project_dual_ball_in_place(a: &mut HessianField, q: SchattenP) {
    let d = a.dim();
    if d == 2 {
        let mut mat = [0.0; 4];
        let (first, rest) = a.comps.split_at_mut(1);
        let (mid, last) = rest.split_at_mut(1);
        for ((x, y), z) in first[0].iter_mut().zip(mid[0].iter_mut()).zip(last[0].iter_mut()) {
            mat = [*x, *y, *y, *z];
            project_2x2(&mut mat, q);
            *x = mat[0];
            *y = mat[1];
            *z = mat[3];
        }
        let _ = mat;
        return;
    }
    let mut mat = vec![0.0; d * d];
    for m in 0..a.grid.len() {
        a.matrix(m, &mut mat);
        project_matrix(&mut mat, d, q);
        a.set_matrix(m, &mat);
    }
}

/// Compressed sparse rows.
#[derive(Clone, Debug)]
struct Csr {
    start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Kronecker product of per-axis sparse matrices in row-major order.
    fn kron(axes: &[Vec<Vec<(usize, f64)>>], sizes: &[usize], scale: f64) -> Csr {
        let strides = crate::grid::strides_of(sizes);
        let len: usize = sizes.iter().product();
        let mut csr = Csr { start: Vec::with_capacity(len + 1), cols: Vec::new(), vals: Vec::new() };
        csr.start.push(0);
        let mut m = vec![0usize; sizes.len()];
        let mut entries: Vec<(usize, f64)> = Vec::new();
        let mut grown: Vec<(usize, f64)> = Vec::new();
        for _ in 0..len {
            entries.clear();
            entries.push((0, scale));
            for (k, rows) in axes.iter().enumerate() {
                grown.clear();
                for &(col, w) in &entries {
                    for &(j, v) in &rows[m[k]] {
                        grown.push((col + j * strides[k], w * v));
                    }
                }
                std::mem::swap(&mut entries, &mut grown);
            }
            entries.sort_unstable_by_key(|e| e.0);
            for &(col, v) in &entries {
                csr.cols.push(col);
                csr.vals.push(v);
            }
            csr.start.push(csr.cols.len());
            crate::grid::increment(&mut m, sizes);
        }
        csr
    }

    fn transpose(&self, ncols: usize) -> Csr {
        let mut count = vec![0usize; ncols + 1];
        for &c in &self.cols {
            count[c + 1] += 1;
        }
        for i in 0..ncols {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut cols = vec![0usize; self.cols.len()];
        let mut vals = vec![0.0; self.vals.len()];
        for r in 0..self.start.len() - 1 {
            for e in self.start[r]..self.start[r + 1] {
                let c = self.cols[e];
                cols[fill[c]] = r;
                vals[fill[c]] = self.vals[e];
                fill[c] += 1;
            }
        }
        Csr { start: count, cols, vals }
    }

    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (a, b) = (self.start[r], self.start[r + 1]);
        self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, v)| v * x[c]).sum()
    }

    fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(r, x);
        }
    }

    fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o += self.row_dot(r, x);
        }
    }
}

/// The linear map `c ↦ H{log ρ̂}` sampled on the coefficient lattice, with
/// its adjoint.
#[derive(Clone, Debug)]
pub struct HessianOperator {
    grid: GridSpec,
    degree: SplineDegree,
    /// One sparse matrix per upper-triangular component, chain-rule factor
    /// included.
    mats: Vec<Csr>,
    /// Transposes, off-diagonal components doubled.
    adjoints: Vec<Csr>,
}

impl HessianOperator {
    pub fn new(grid: &GridSpec, degree: SplineDegree) -> Result<Self> {
        if degree == SplineDegree::CONSTANT {
            return Err(RdsError::HessianUndefined);
        }
        let d = grid.dim();
        let mut mats = Vec::with_capacity(d * (d + 1) / 2);
        let mut adjoints = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                let mut orders = vec![0u8; d];
                orders[i] += 1;
                orders[j] += 1;
                let kernels: Vec<Vec<f64>> = orders.iter().map(|&o| filter_taps(degree, o, 1)).collect();
                for (k, ker) in kernels.iter().enumerate() {
                    if grid.bcs()[k].is_periodic() && ker.len() / 2 > grid.sizes()[k] {
                        return Err(RdsError::KernelExceedsPeriod { taps: ker.len(), size: grid.sizes()[k] });
                    }
                }
                let factor = 1.0 / (grid.step()[i] * grid.step()[j]);
                let axes: Vec<_> =
                    kernels.iter().enumerate().map(|(k, ker)| lane_matrix(ker, grid.bcs()[k], grid.sizes()[k])).collect();
                let mat = Csr::kron(&axes, grid.sizes(), factor);
                let mut adj = mat.transpose(grid.len());
                if i != j {
                    adj.vals.iter_mut().for_each(|v| *v *= 2.0);
                }
                mats.push(mat);
                adjoints.push(adj);
            }
        }
        Ok(HessianOperator { grid: grid.clone(), degree, mats, adjoints })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn degree(&self) -> SplineDegree {
        self.degree
    }

    /// Upper bound on the squared operator norm, `(4d)² max_k μ_k^{−4}`.
    pub fn norm_sq_bound(&self) -> f64 {
        let d = self.grid.dim() as f64;
        let min_step = self.grid.step().iter().copied().fold(f64::INFINITY, f64::min);
        (4.0 * d).powi(2) * min_step.powi(-4)
    }

    pub fn apply(&self, c: &ScalarField) -> Result<HessianField> {
        if !c.grid().same_lattice(&self.grid) {
            return Err(RdsError::ShapeMismatch("coefficients not on the operator grid".into()));
        }
        let mut out = HessianField::zeros(&self.grid);
        self.apply_into(c.values(), &mut out.comps);
        Ok(out)
    }

    fn apply_into(&self, c: &[f64], comps: &mut [Vec<f64>]) {
        for (mat, comp) in self.mats.iter().zip(comps.iter_mut()) {
            mat.mul_into(c, comp);
        }
    }

    fn adjoint_into(&self, comps: &[Vec<f64>], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (adj, comp) in self.adjoints.iter().zip(comps) {
            adj.mul_add(comp, out);
        }
    }

    /// `H*(A) = Σ_{i,j} (b_{ij})ᵀ A_ij`, off-diagonal pairs counted twice.
    pub fn adjoint(&self, a: &HessianField) -> Result<ScalarField> {
        if !a.grid.same_lattice(&self.grid) {
            return Err(RdsError::ShapeMismatch("Hessian field not on the operator grid".into()));
        }
        let mut out = vec![0.0; self.grid.len()];
        self.adjoint_into(&a.comps, &mut out);
        ScalarField::new(self.grid.clone(), out)
    }

    /// `Σ_m ‖H(m)‖_{S_p}`.
    pub fn regularizer(&self, c: &ScalarField, p: SchattenP) -> Result<f64> {
        Ok(self.apply(c)?.pointwise_norms(p).iter().sum())
    }
}

pub fn hessian_field(c: &ScalarField, degree: SplineDegree) -> Result<HessianField> {
    HessianOperator::new(c.grid(), degree)?.apply(c)
}

pub fn hessian_adjoint(a: &HessianField, degree: SplineDegree) -> Result<ScalarField> {
    HessianOperator::new(a.grid(), degree)?.adjoint(a)
}

pub fn regularizer_value(c: &ScalarField, degree: SplineDegree, p: SchattenP) -> Result<f64> {
    HessianOperator::new(c.grid(), degree)?.regularizer(c, p)
}

/// Inner-solver settings of the proximal map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxConfig {
    pub p: SchattenP,
    pub inner_iters: usize,
    /// Stop once the dual moves less than this fraction of its norm.
    pub inner_tol: f64,
    /// Stop once the duality gap certifies `‖c − prox‖ ≤ gap_tol · ‖c̃‖`;
    /// zero disables the test.
    pub gap_tol: f64,
    /// Nesterov momentum on the dual iterates; plain projected ascent when off.
    pub accelerated: bool,
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig { p: SchattenP::One, inner_iters: 25, inner_tol: 1e-5, gap_tol: 0.0, accelerated: true }
    }
}

/// Iterations between duality-gap evaluations.
const GAP_CHECK_EVERY: usize = 5;

/// Output of one proximal evaluation.
#[derive(Clone, Debug)]
pub struct ProxResult {
    pub c: ScalarField,
    /// Final dual variable, reusable as a warm start.
    pub dual: HessianField,
    pub iterations: usize,
}

impl HessianOperator {
    /// Approximate `argmin_c ½‖c − c̃‖² + τ R(c)` by projected gradient on
    /// the dual, starting from `warm` (or zero).
    pub fn prox(&self, c_in: &ScalarField, tau: f64, cfg: &ProxConfig, warm: Option<&HessianField>) -> Result<ProxResult> {
        if !(tau > 0.0) {
            return Err(RdsError::InvalidConfig(format!("prox step must be positive, got {tau}")));
        }
        let q = cfg.p.dual();
        let step_tau = 1.0 / (tau * self.norm_sq_bound());
        let mut omega = match warm {
            Some(w) if w.grid.same_lattice(&self.grid) => project_dual_ball(w, q),
            _ => HessianField::zeros(&self.grid),
        };
        let mut psi = omega.clone();
        let mut next = HessianField::zeros(&self.grid);
        let mut primal = vec![0.0; self.grid.len()];
        let weights: Vec<f64> = {
            let d = self.grid.dim();
            let mut w = vec![2.0; d * (d + 1) / 2];
            (0..d).for_each(|i| w[component_index(d, i, i)] = 1.0);
            w
        };
        let mut t = 1.0f64;
        let mut iterations = 0;
        while iterations < cfg.inner_iters {
            iterations += 1;
            self.adjoint_into(&psi.comps, &mut primal);
            for (p, c) in primal.iter_mut().zip(c_in.values()) {
                *p = c - tau * *p;
            }
            self.apply_into(&primal, &mut next.comps);
            for (n, s) in next.comps.iter_mut().zip(&psi.comps) {
                for (nv, sv) in n.iter_mut().zip(s) {
                    *nv = sv + step_tau * *nv;
                }
            }
            project_dual_ball_in_place(&mut next, q);
            let (mut change, mut size) = (0.0, 0.0);
            let beta = if cfg.accelerated {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let beta = (t - 1.0) / t_next;
                t = t_next;
                beta
            } else {
                0.0
            };
            for (k, w) in weights.iter().enumerate() {
                let (nk, ok, pk) = (&next.comps[k], &mut omega.comps[k], &mut psi.comps[k]);
                for i in 0..nk.len() {
                    let delta = nk[i] - ok[i];
                    change += w * delta * delta;
                    size += w * nk[i] * nk[i];
                    pk[i] = nk[i] + beta * delta;
                    ok[i] = nk[i];
                }
            }
            let (change, size) = (change.sqrt(), size.sqrt());
            if change <= cfg.inner_tol * size || change == 0.0 {
                break;
            }
            if cfg.gap_tol > 0.0 && iterations % GAP_CHECK_EVERY == 0 {
                // The prox objective is 1-strongly convex: gap ≥ ½‖c − prox‖².
                let bound = cfg.gap_tol * c_in.norm().max(1.0);
                if self.duality_gap(c_in, tau, cfg.p, &omega)? <= 0.5 * bound * bound {
                    break;
                }
            }
        }
        let c = primal_from_dual(self, c_in, tau, &omega)?;
        Ok(ProxResult { c, dual: omega, iterations })
    }

    /// Primal objective minus dual objective at a feasible dual point.
    pub fn duality_gap(&self, c_in: &ScalarField, tau: f64, p: SchattenP, dual: &HessianField) -> Result<f64> {
        let c = primal_from_dual(self, c_in, tau, dual)?;
        let primal = 0.5 * sq_dist(&c, c_in) + tau * self.regularizer(&c, p)?;
        let dual_value = 0.5 * c_in.dot(c_in) - 0.5 * c.dot(&c);
        Ok(primal - dual_value)
    }
}

fn primal_from_dual(op: &HessianOperator, c_in: &ScalarField, tau: f64, dual: &HessianField) -> Result<ScalarField> {
    let h = op.adjoint(dual)?;
    Ok(c_in.with_values(c_in.values().iter().zip(h.values()).map(|(a, b)| a - tau * b).collect()))
}

fn sq_dist(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum()
}

pub fn prox(c_in: &ScalarField, tau: f64, degree: SplineDegree, cfg: &ProxConfig) -> Result<ScalarField> {
    Ok(HessianOperator::new(c_in.grid(), degree)?.prox(c_in, tau, cfg, None)?.c)
}
