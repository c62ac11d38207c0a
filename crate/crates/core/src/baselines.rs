//! Sensitivity-weighted baselines: Gaussian kernel density estimation and
//! histograms, both weighting each sample by `1/ξ(x)`.

use crate::density::SensitivityMap;
use crate::error::{RdsError, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::samples::SampleSet;

/// Gaussian tail beyond which kernel contributions are dropped, in units of
/// the bandwidth; `exp(−r²/2)` is below `1e−18` there.
const KDE_CUTOFF: f64 = 9.2;

fn inverse_sensitivity_weights(samples: &SampleSet, xi: &SensitivityMap) -> Result<Vec<f64>> {
    let vals = xi.eval_points(samples.coords(), samples.dim())?;
    vals.iter()
        .enumerate()
        .map(|(i, &v)| if v > 0.0 && v.is_finite() { Ok(1.0 / v) } else { Err(RdsError::ZeroSensitivity(i)) })
        .collect()
}

/// Weighted Gaussian KDE with a diagonal bandwidth. Kernels wrap across
/// periodic axes with one image on either side.
#[derive(Clone, Debug)]
pub struct KdeModel {
    samples: SampleSet,
    weights: Vec<f64>,
    bandwidth: Vec<f64>,
    /// Period of each axis, or `None` for open axes.
    periods: Vec<Option<f64>>,
    total_weight: f64,
}

impl KdeModel {
    /// Weights `1/ξ(x_k)` and per-axis Scott bandwidth
    /// `h_j = σ̂_j N_eff^{−1/(d+4)}` from weighted moments, with
    /// `N_eff = (Σw)²/Σw²`.
    pub fn fit(samples: &SampleSet, xi: &SensitivityMap, domain: &GridSpec) -> Result<Self> {
        if samples.len() < 2 {
            return Err(RdsError::TooFewSamples { needed: 2, got: samples.len() });
        }
        let weights = inverse_sensitivity_weights(samples, xi)?;
        let d = samples.dim();
        let total: f64 = weights.iter().sum();
        let n_eff = total * total / weights.iter().map(|w| w * w).sum::<f64>();
        let factor = n_eff.powf(-1.0 / (d as f64 + 4.0));
        let bandwidth = (0..d)
            .map(|j| {
                let mean = samples.iter().zip(&weights).map(|(x, w)| w * x[j]).sum::<f64>() / total;
                let var = samples.iter().zip(&weights).map(|(x, w)| w * (x[j] - mean).powi(2)).sum::<f64>() / total;
                var.sqrt() * factor
            })
            .collect::<Vec<f64>>();
        if bandwidth.iter().any(|h| !(*h > 0.0)) {
            return Err(RdsError::InvalidConfig("zero sample spread along an axis; KDE bandwidth undefined".into()));
        }
        Self::with_bandwidth(samples, xi, domain, bandwidth)
    }

    pub fn with_bandwidth(samples: &SampleSet, xi: &SensitivityMap, domain: &GridSpec, bandwidth: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(RdsError::TooFewSamples { needed: 1, got: 0 });
        }
        if bandwidth.len() != samples.dim() || domain.dim() != samples.dim() {
            return Err(RdsError::ShapeMismatch("bandwidth, domain and samples disagree in dimension".into()));
        }
        if bandwidth.iter().any(|h| !(*h > 0.0)) {
            return Err(RdsError::InvalidConfig("bandwidth must be positive".into()));
        }
        let weights = inverse_sensitivity_weights(samples, xi)?;
        let total_weight = weights.iter().sum();
        let periods = (0..domain.dim())
            .map(|k| domain.bcs()[k].is_periodic().then(|| domain.extent(k)))
            .collect();
        Ok(KdeModel { samples: samples.clone(), weights, bandwidth, periods, total_weight })
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn axis_kernel(&self, axis: usize, delta: f64) -> f64 {
        let h = self.bandwidth[axis];
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h);
        let g = |t: f64| (-0.5 * (t / h).powi(2)).exp();
        match self.periods[axis] {
            Some(l) => norm * (g(delta - l) + g(delta) + g(delta + l)),
            None => norm * g(delta),
        }
    }

    /// `(1/Σw) Σ_k w_k Π_j K_{h_j}(x_j − x_{k,j})` at each point.
    pub fn eval(&self, pts: &[f64]) -> Vec<f64> {
        let d = self.samples.dim();
        pts.chunks_exact(d)
            .map(|x| {
                let mut acc = 0.0;
                for (s, w) in self.samples.iter().zip(&self.weights) {
                    let mut k = *w;
                    for j in 0..d {
                        k *= self.axis_kernel(j, x[j] - s[j]);
                    }
                    acc += k;
                }
                acc / self.total_weight
            })
            .collect()
    }

    /// Evaluation on every node of `grid`, exploiting separability: each
    /// sample contributes an outer product of per-axis kernel vectors.
    pub fn eval_grid(&self, grid: &GridSpec) -> Result<ScalarField> {
        let d = self.samples.dim();
        if grid.dim() != d {
            return Err(RdsError::ShapeMismatch("grid dimension differs from the samples".into()));
        }
        let sizes = grid.sizes();
        let strides = grid.strides();
        let mut out = vec![0.0; grid.len()];
        // Per-axis (first index, values) windows for the current sample.
        let mut windows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
        let mut partial: Vec<(usize, f64)> = Vec::new();
        let mut next: Vec<(usize, f64)> = Vec::new();
        for (s, &w) in self.samples.iter().zip(&self.weights) {
            for j in 0..d {
                let win = &mut windows[j];
                win.clear();
                let h = self.bandwidth[j];
                let step = grid.step()[j];
                let n = sizes[j] as isize;
                let centre = (s[j] - grid.origin()[j]) / step;
                let reach = (KDE_CUTOFF * h / step).ceil() as isize;
                let lo = centre.floor() as isize - reach;
                let hi = centre.ceil() as isize + reach;
                let (lo, hi) = match self.periods[j] {
                    Some(_) if hi - lo + 1 >= n => (0, n - 1),
                    Some(_) => (lo, hi),
                    None => (lo.max(0), hi.min(n - 1)),
                };
                for i in lo..=hi {
                    let idx = i.rem_euclid(n) as usize;
                    let x = grid.world_coord(j, idx as f64);
                    win.push((idx, self.axis_kernel(j, x - s[j])));
                }
            }
            partial.clear();
            partial.push((0, w));
            for j in 0..d {
                next.clear();
                for &(base, v) in &partial {
                    for &(i, k) in &windows[j] {
                        next.push((base + i * strides[j], v * k));
                    }
                }
                std::mem::swap(&mut partial, &mut next);
            }
            for &(i, v) in &partial {
                out[i] += v;
            }
        }
        let inv = 1.0 / self.total_weight;
        out.iter_mut().for_each(|v| *v *= inv);
        ScalarField::new(grid.clone(), out)
    }
}

pub fn kde_fit(samples: &SampleSet, xi: &SensitivityMap, domain: &GridSpec) -> Result<KdeModel> {
    KdeModel::fit(samples, xi, domain)
}

/// Weighted histogram on a regular partition of the domain box.
#[derive(Clone, Debug)]
pub struct HistModel {
    origin: Vec<f64>,
    widths: Vec<f64>,
    bins: Vec<usize>,
    /// Normalized density per bin, row-major.
    density: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl HistModel {
    /// Per axis the bin width is the larger of Freedman–Diaconis
    /// `2·IQR·N^{−1/3}` and Sturges `range/(⌈log₂N⌉+1)`, then shrunk so an
    /// integer number of bins tiles the domain. Zero IQR falls back to
    /// Sturges.
    pub fn fit(samples: &SampleSet, xi: &SensitivityMap, domain: &GridSpec) -> Result<Self> {
        if samples.is_empty() {
            return Err(RdsError::TooFewSamples { needed: 1, got: 0 });
        }
        if domain.dim() != samples.dim() {
            return Err(RdsError::ShapeMismatch("domain dimension differs from the samples".into()));
        }
        let weights = inverse_sensitivity_weights(samples, xi)?;
        let d = samples.dim();
        let n = samples.len() as f64;
        let sturges_bins = n.log2().ceil() + 1.0;
        let mut bins = Vec::with_capacity(d);
        let mut widths = Vec::with_capacity(d);
        for j in 0..d {
            let mut col: Vec<f64> = samples.iter().map(|x| x[j]).collect();
            col.sort_by(f64::total_cmp);
            let range = col[col.len() - 1] - col[0];
            let iqr = quantile(&col, 0.75) - quantile(&col, 0.25);
            let fd = 2.0 * iqr * n.powf(-1.0 / 3.0);
            let sturges = range / sturges_bins;
            let width = if iqr > 0.0 { fd.max(sturges) } else { sturges };
            let extent = domain.extent(j);
            let count = if width > 0.0 { (extent / width).ceil().max(1.0) as usize } else { 1 };
            bins.push(count);
            widths.push(extent / count as f64);
        }
        let total_bins: usize = bins.iter().product();
        let mut counts = vec![0.0; total_bins];
        let origin = domain.origin().to_vec();
        let model = HistModel { origin, widths, bins, density: Vec::new() };
        for (x, w) in samples.iter().zip(&weights) {
            counts[model.bin_of(x)] += w;
        }
        let total: f64 = weights.iter().sum();
        let volume: f64 = model.widths.iter().product();
        let density = counts.iter().map(|c| c / (total * volume)).collect();
        Ok(HistModel { density, ..model })
    }

    fn bin_of(&self, x: &[f64]) -> usize {
        let mut flat = 0;
        for j in 0..self.bins.len() {
            let b = ((x[j] - self.origin[j]) / self.widths[j]).floor();
            let b = (b.max(0.0) as usize).min(self.bins[j] - 1);
            flat = flat * self.bins[j] + b;
        }
        flat
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Normalized density per bin, row-major.
    pub fn bin_densities(&self) -> &[f64] {
        &self.density
    }

    pub fn eval(&self, pts: &[f64]) -> Vec<f64> {
        pts.chunks_exact(self.bins.len()).map(|x| self.density[self.bin_of(x)]).collect()
    }

    pub fn eval_grid(&self, grid: &GridSpec) -> Result<ScalarField> {
        if grid.dim() != self.bins.len() {
            return Err(RdsError::ShapeMismatch("grid dimension differs from the histogram".into()));
        }
        ScalarField::new(grid.clone(), self.eval(&grid.node_coords()))
    }
}

/// Fits the weighted histogram and samples it on `eval_grid`.
pub fn hist_fit_eval(samples: &SampleSet, xi: &SensitivityMap, domain: &GridSpec, eval_grid: &GridSpec) -> Result<ScalarField> {
    HistModel::fit(samples, xi, domain)?.eval_grid(eval_grid)
}
