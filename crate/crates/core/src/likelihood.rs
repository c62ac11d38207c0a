//! Data term of the objective: the negative log-likelihood
//! `−⟨c, Σ_x φ(x)⟩ + N log E(ρ̂)`, its gradient, and the pieces of its Hessian
//! `N (D − f fᵀ)` with `f_k = E(φ_k ρ̂)/E(ρ̂)` and
//! `D_kl = E(φ_k φ_l ρ̂)/E(ρ̂)`.
//!
//! The constant `Σ log ξ(x)` is left out; [`log_sensitivity_sum`] reports it.

use crate::bspline::{axis_stencil, SplineDegree, Stencil};
use crate::density::{Quadrature, SensitivityMap, DEFAULT_QUAD_SCALE};
use crate::error::{RdsError, Result};
use crate::grid::{increment, BoundaryCondition, GridSpec, ScalarField};
use crate::samples::SampleSet;

/// `phi_sums[k] = Σ_x φ_k(x)` over the sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSums {
    pub phi_sums: ScalarField,
    pub n_samples: usize,
    pub degree: SplineDegree,
}

impl DataSums {
    pub fn grid(&self) -> &GridSpec {
        self.phi_sums.grid()
    }

    /// Same per-basis sums with the sample count scaled by `factor`.
    pub fn scaled(&self, factor: usize) -> DataSums {
        DataSums {
            phi_sums: self.phi_sums.map(|v| v * factor as f64),
            n_samples: self.n_samples * factor,
            degree: self.degree,
        }
    }
}

/// Scatter-adds the active basis values of every sample, in sample order.
/// Periodic coordinates are folded; points outside a non-periodic axis are
/// rejected with their index.
pub fn accumulate_data_sums(samples: &SampleSet, grid: &GridSpec, degree: SplineDegree) -> Result<DataSums> {
    if samples.dim() != grid.dim() {
        return Err(RdsError::ShapeMismatch(format!("{}-D samples on a {}-D grid", samples.dim(), grid.dim())));
    }
    let mut sums = vec![0.0; grid.len()];
    let orders = vec![0u8; grid.dim()];
    let mut st = Stencil::default();
    let mut buf = Vec::new();
    for (index, x) in samples.iter().enumerate() {
        if let Err(axis) = st.fill(grid, degree, &orders, x, &mut buf) {
            return Err(RdsError::SampleOutOfDomain { index, axis, coord: x[axis] });
        }
        for &(i, w) in &st.entries {
            sums[i] += w;
        }
    }
    Ok(DataSums {
        phi_sums: ScalarField::new(grid.clone(), sums)?,
        n_samples: samples.len(),
        degree,
    })
}

/// `Σ_x log ξ(x)`, or `None` if `ξ` vanishes at some sample.
pub fn log_sensitivity_sum(samples: &SampleSet, xi: &SensitivityMap) -> Result<Option<f64>> {
    let vals = xi.eval_points(samples.coords(), samples.dim())?;
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Ok(None);
    }
    Ok(Some(vals.iter().map(|v| v.ln()).sum()))
}

/// Entries `D[k, k + off]` of a symmetric matrix whose nonzeros lie within
/// the `(2n+1)^d` lattice neighborhood of the diagonal.
///
/// Offsets on periodic axes are the minimal wrapped representatives.
#[derive(Clone, Debug)]
pub struct BandedHessianPart {
    grid: GridSpec,
    radius: usize,
    offsets: Vec<Vec<isize>>,
    bands: Vec<ScalarField>,
}

impl BandedHessianPart {
    fn zeros(grid: &GridSpec, radius: usize) -> Self {
        let d = grid.dim();
        let width = 2 * radius + 1;
        let count = width.pow(d as u32);
        let offsets = (0..count)
            .map(|code| {
                let mut rem = code;
                let mut off = vec![0isize; d];
                for k in (0..d).rev() {
                    off[k] = (rem % width) as isize - radius as isize;
                    rem /= width;
                }
                off
            })
            .collect();
        let bands = vec![ScalarField::zeros(grid.clone()); count];
        BandedHessianPart { grid: grid.clone(), radius, offsets, bands }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn offsets(&self) -> &[Vec<isize>] {
        &self.offsets
    }

    pub fn bands(&self) -> &[ScalarField] {
        &self.bands
    }

    pub fn band(&self, off: &[isize]) -> Option<&ScalarField> {
        self.code(off).map(|c| &self.bands[c])
    }

    fn code(&self, off: &[isize]) -> Option<usize> {
        let r = self.radius as isize;
        let width = 2 * r + 1;
        let mut code = 0isize;
        for &o in off {
            if o < -r || o > r {
                return None;
            }
            code = code * width + o + r;
        }
        Some(code as usize)
    }

    /// Flat index of `k + off`, if it lies on the grid.
    pub fn neighbor(&self, k: usize, off: &[isize]) -> Option<usize> {
        let m = self.grid.unravel(k);
        let sizes = self.grid.sizes();
        let mut target = vec![0usize; m.len()];
        for a in 0..m.len() {
            let j = m[a] as isize + off[a];
            target[a] = if self.grid.bcs()[a].is_periodic() {
                j.rem_euclid(sizes[a] as isize) as usize
            } else if (0..sizes[a] as isize).contains(&j) {
                j as usize
            } else {
                return None;
            };
        }
        Some(self.grid.ravel(&target))
    }

    /// `D v`.
    pub fn apply(&self, v: &ScalarField) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        let vals = v.values();
        for (off, band) in self.offsets.iter().zip(&self.bands) {
            for (k, &b) in band.values().iter().enumerate() {
                if b != 0.0 {
                    if let Some(l) = self.neighbor(k, off) {
                        out[k] += b * vals[l];
                    }
                }
            }
        }
        v.with_values(out)
    }

    /// Largest absolute row sum (Gershgorin disc radius plus center).
    pub fn gershgorin(&self) -> f64 {
        let mut rows = vec![0.0; self.grid.len()];
        for band in &self.bands {
            for (r, b) in rows.iter_mut().zip(band.values()) {
                *r += b.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.bands.iter().flat_map(|b| b.values()).map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense `|M| × |M|` matrix, for small grids.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.grid.len();
        let mut out = vec![vec![0.0; n]; n];
        for (off, band) in self.offsets.iter().zip(&self.bands) {
            for (k, &b) in band.values().iter().enumerate() {
                if let Some(l) = self.neighbor(k, off) {
                    out[k][l] += b;
                }
            }
        }
        out
    }
}

fn axis_offset(a: usize, b: usize, size: usize, bc: BoundaryCondition) -> isize {
    let diff = b as isize - a as isize;
    if bc.is_periodic() {
        let r = diff.rem_euclid(size as isize);
        if r > size as isize / 2 {
            r - size as isize
        } else {
            r
        }
    } else {
        diff
    }
}

/// The data term for one sample set, grid, degree and sensitivity.
///
/// Construction samples `ξ` on the quadrature lattice and tabulates the
/// active basis functions at each of its nodes; evaluations are then pure.
#[derive(Clone, Debug)]
pub struct LogLikelihood {
    quad: Quadrature,
    data: DataSums,
    axis_tables: Vec<Vec<Vec<(usize, f64)>>>,
}

impl LogLikelihood {
    pub fn new(data: DataSums, xi: &SensitivityMap, quad_scale: usize) -> Result<Self> {
        if data.n_samples == 0 {
            return Err(RdsError::TooFewSamples { needed: 1, got: 0 });
        }
        let quad = Quadrature::new(data.grid(), data.degree, quad_scale, xi)?;
        let grid = data.grid();
        let fine = quad.fine_grid();
        let s = quad.scale() as f64;
        let axis_tables = (0..grid.dim())
            .map(|k| {
                (0..fine.sizes()[k])
                    .map(|i| {
                        let mut out = Vec::new();
                        axis_stencil(data.degree, 0, i as f64 / s, grid.sizes()[k], grid.bcs()[k], &mut out);
                        out
                    })
                    .collect()
            })
            .collect();
        Ok(LogLikelihood { quad, data, axis_tables })
    }

    pub fn from_samples(
        samples: &SampleSet,
        grid: &GridSpec,
        degree: SplineDegree,
        xi: &SensitivityMap,
        quad_scale: usize,
    ) -> Result<Self> {
        let data = accumulate_data_sums(samples, grid, degree)?;
        Self::new(data, xi, quad_scale)
    }

    pub fn data(&self) -> &DataSums {
        &self.data
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    pub fn grid(&self) -> &GridSpec {
        self.data.grid()
    }

    pub fn n_samples(&self) -> usize {
        self.data.n_samples
    }

    fn check(&self, c: &ScalarField) -> Result<()> {
        if !c.grid().same_lattice(self.grid()) {
            return Err(RdsError::ShapeMismatch("coefficients and data sums live on different grids".into()));
        }
        Ok(())
    }

    pub fn value(&self, c: &ScalarField) -> Result<f64> {
        self.check(c)?;
        let cache = self.quad.evaluate(c)?;
        if !(cache.total > 0.0) {
            return Err(RdsError::DegenerateMeasure);
        }
        Ok(-c.dot(&self.data.phi_sums) + self.data.n_samples as f64 * cache.total.ln())
    }

    /// Value and gradient `−phi_sums + N f`.
    pub fn value_and_gradient(&self, c: &ScalarField) -> Result<(f64, ScalarField)> {
        self.check(c)?;
        let cache = self.quad.evaluate(c)?;
        let f = self.quad.basis_moments(&cache)?;
        let n = self.data.n_samples as f64;
        let value = -c.dot(&self.data.phi_sums) + n * cache.total.ln();
        let g: Vec<f64> = f.values().iter().zip(self.data.phi_sums.values()).map(|(fk, s)| n * fk - s).collect();
        Ok((value, c.with_values(g)))
    }

    pub fn gradient(&self, c: &ScalarField) -> Result<ScalarField> {
        Ok(self.value_and_gradient(c)?.1)
    }

    /// `f` and the banded `D`, so that the Hessian is `N (D − f fᵀ)`.
    pub fn hessian_parts(&self, c: &ScalarField) -> Result<(ScalarField, BandedHessianPart)> {
        let all = self.evaluate_with_hessian(c)?;
        Ok((all.f, all.d))
    }

    /// Value, gradient, `f` and `D` from a single quadrature pass.
    pub fn evaluate_with_hessian(&self, c: &ScalarField) -> Result<SecondOrder> {
        self.check(c)?;
        let cache = self.quad.evaluate(c)?;
        let f = self.quad.basis_moments(&cache)?;
        let n = self.data.n_samples as f64;
        let value = -c.dot(&self.data.phi_sums) + n * cache.total.ln();
        let g: Vec<f64> = f.values().iter().zip(self.data.phi_sums.values()).map(|(fk, s)| n * fk - s).collect();
        let d = self.scatter_pairs(&cache.weighted, cache.total);
        Ok(SecondOrder { value, gradient: c.with_values(g), f, d })
    }

    fn scatter_pairs(&self, weighted: &[f64], total: f64) -> BandedHessianPart {
        let grid = self.grid();
        let d = grid.dim();
        let radius = self.data.degree.get() as usize;
        let mut part = BandedHessianPart::zeros(grid, radius);
        let width = 2 * radius + 1;
        let strides = grid.strides();
        let inv_total = 1.0 / total;
        let fine_sizes = self.quad.fine_grid().sizes().to_vec();

        // Band-code contribution of every pair of active functions, per axis
        // and fine index, pre-multiplied by the axis radix.
        let pair_codes: Vec<Vec<Vec<usize>>> = (0..d)
            .map(|k| {
                let radix = width.pow((d - 1 - k) as u32);
                self.axis_tables[k]
                    .iter()
                    .map(|table| {
                        let mut codes = Vec::with_capacity(table.len() * table.len());
                        for &(a, _) in table {
                            for &(b, _) in table {
                                let off = axis_offset(a, b, grid.sizes()[k], grid.bcs()[k]);
                                codes.push((off + radius as isize) as usize * radix);
                            }
                        }
                        codes
                    })
                    .collect()
            })
            .collect();

        let mut j = vec![0usize; d];
        let mut flat: Vec<usize> = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        let mut codes: Vec<usize> = Vec::new();
        let mut scratch_flat: Vec<usize> = Vec::new();
        let mut scratch_weight: Vec<f64> = Vec::new();
        let mut scratch_codes: Vec<usize> = Vec::new();
        let mut band_vals: Vec<&mut [f64]> = part.bands.iter_mut().map(|b| b.values_mut()).collect();
        for &p in weighted {
            let p = p * inv_total;
            if p != 0.0 {
                flat.clear();
                weight.clear();
                codes.clear();
                flat.push(0);
                weight.push(1.0);
                codes.push(0);
                for k in 0..d {
                    let table = &self.axis_tables[k][j[k]];
                    let pc = &pair_codes[k][j[k]];
                    let t = table.len();
                    let prev = flat.len();
                    scratch_flat.clear();
                    scratch_weight.clear();
                    for e in 0..prev {
                        for &(i, w) in table {
                            scratch_flat.push(flat[e] + i * strides[k]);
                            scratch_weight.push(weight[e] * w);
                        }
                    }
                    // Pair (a·t + la, b·t + lb) of the grown tensor.
                    scratch_codes.clear();
                    for a in 0..prev {
                        for la in 0..t {
                            for b in 0..prev {
                                let base = codes[a * prev + b];
                                scratch_codes.extend(pc[la * t..(la + 1) * t].iter().map(|c| base + c));
                            }
                        }
                    }
                    std::mem::swap(&mut flat, &mut scratch_flat);
                    std::mem::swap(&mut weight, &mut scratch_weight);
                    std::mem::swap(&mut codes, &mut scratch_codes);
                }
                let count = flat.len();
                for a in 0..count {
                    let pa = p * weight[a];
                    let row = flat[a];
                    for b in 0..count {
                        band_vals[codes[a * count + b]][row] += pa * weight[b];
                    }
                }
            }
            increment(&mut j, &fine_sizes);
        }
        drop(band_vals);
        part
    }
}

/// Everything the step-size rule needs at one coefficient field.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    pub value: f64,
    pub gradient: ScalarField,
    pub f: ScalarField,
    pub d: BandedHessianPart,
}

/// `−log L_N(c)` with the `Σ log ξ` constant dropped, at the default
/// quadrature scale.
pub fn neg_log_likelihood(c: &ScalarField, data: &DataSums, xi: &SensitivityMap) -> Result<f64> {
    LogLikelihood::new(data.clone(), xi, DEFAULT_QUAD_SCALE)?.value(c)
}

pub fn gradient(c: &ScalarField, data: &DataSums, xi: &SensitivityMap) -> Result<ScalarField> {
    LogLikelihood::new(data.clone(), xi, DEFAULT_QUAD_SCALE)?.gradient(c)
}

pub fn hessian_parts(c: &ScalarField, data: &DataSums, xi: &SensitivityMap) -> Result<(ScalarField, BandedHessianPart)> {
    LogLikelihood::new(data.clone(), xi, DEFAULT_QUAD_SCALE)?.hessian_parts(c)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::bspline::{bspline_eval, eval_spline_points};
    use crate::density::quadrature_weights;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_instance(
        rng: &mut ChaCha8Rng,
        grid: &GridSpec,
        n: usize,
    ) -> (ScalarField, SampleSet, SensitivityMap) {
        let c = ScalarField::new(grid.clone(), (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let mut pts = Vec::new();
        for _ in 0..n {
            for k in 0..grid.dim() {
                let lo = grid.origin()[k];
                let hi = if grid.bcs()[k].is_periodic() { lo + grid.extent(k) } else { grid.world_coord(k, (grid.sizes()[k] - 1) as f64) };
                pts.push(rng.random_range(lo..hi));
            }
        }
        let xi_vals = (0..grid.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        let xi = SensitivityMap::gridded(ScalarField::new(grid.clone(), xi_vals).unwrap(), SplineDegree::LINEAR).unwrap();
        (c, SampleSet::new(grid.dim(), pts).unwrap(), xi)
    }

    /// Dense basis value `φ_k(x)` from the scalar B-spline, with periodic
    /// images summed and mirror reflections folded.
    pub(crate) fn basis_value(grid: &GridSpec, n: SplineDegree, k: usize, x: &[f64]) -> f64 {
        let m = grid.unravel(k);
        let mut phi = 1.0;
        for a in 0..grid.dim() {
            let u = grid.to_grid_coord(a, x[a]);
            let size = grid.sizes()[a] as isize;
            let mut acc = 0.0;
            for j in (u.floor() as isize - 3)..=(u.floor() as isize + 4) {
                if grid.bcs()[a].extend(j, size as usize) == Some(m[a]) {
                    acc += bspline_eval(n, 0, u - j as f64).unwrap();
                }
            }
            phi *= acc;
        }
        phi
    }

    fn dense_hessian(like: &LogLikelihood, c: &ScalarField, xi: &SensitivityMap) -> Vec<Vec<f64>> {
        let grid = like.grid().clone();
        let n = like.data.degree;
        let fine = like.quad.fine_grid().clone();
        let w = quadrature_weights(&fine);
        let coords = fine.node_coords();
        let xis = xi.eval_points(&coords, grid.dim()).unwrap();
        let logs = eval_spline_points(c, n, &coords, &vec![0; grid.dim()]).unwrap();
        let d = grid.dim();
        let phis: Vec<Vec<f64>> =
            (0..fine.len()).map(|j| (0..grid.len()).map(|k| basis_value(&grid, n, k, &coords[j * d..(j + 1) * d])).collect()).collect();
        let p: Vec<f64> = (0..fine.len()).map(|j| logs[j].exp() * xis[j] * w[j]).collect();
        let total: f64 = p.iter().sum();
        let m = grid.len();
        let f: Vec<f64> = (0..m).map(|k| (0..fine.len()).map(|j| phis[j][k] * p[j]).sum::<f64>() / total).collect();
        let nn = like.n_samples() as f64;
        (0..m)
            .map(|k| {
                (0..m)
                    .map(|l| {
                        let dkl = (0..fine.len()).map(|j| phis[j][k] * phis[j][l] * p[j]).sum::<f64>() / total;
                        nn * (dkl - f[k] * f[l])
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn data_sums_one_hot_and_linear() {
        let grid = GridSpec::unit_periodic(&[5, 5]).unwrap();
        let x = grid.grid_to_world(&[2, 3]);
        let single = SampleSet::new(2, x.clone()).unwrap();
        let sums = accumulate_data_sums(&single, &grid, SplineDegree::LINEAR).unwrap();
        for (k, &v) in sums.phi_sums.values().iter().enumerate() {
            assert_eq!(v, if k == grid.ravel(&[2, 3]) { 1.0 } else { 0.0 });
        }
        let y = vec![0.137, 0.862];
        let one = accumulate_data_sums(&SampleSet::new(2, y.clone()).unwrap(), &grid, SplineDegree::CUBIC).unwrap();
        let seven = accumulate_data_sums(&SampleSet::new(2, y.repeat(7)).unwrap(), &grid, SplineDegree::CUBIC).unwrap();
        assert_eq!(seven.n_samples, 7);
        for (a, b) in one.phi_sums.values().iter().zip(seven.phi_sums.values()) {
            assert!((7.0 * a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn data_sums_match_basis_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for bcs in [
            [BoundaryCondition::Periodic; 2],
            [BoundaryCondition::ZeroPad, BoundaryCondition::Mirror],
        ] {
            let grid = GridSpec::from_box(&[7, 6], &[0.0, -1.0], &[1.0, 1.0], &bcs).unwrap();
            for n in [SplineDegree::LINEAR, SplineDegree::CUBIC] {
                let (_, samples, _) = random_instance(&mut rng, &grid, 50);
                let sums = accumulate_data_sums(&samples, &grid, n).unwrap();
                for k in 0..grid.len() {
                    let oracle: f64 = samples.iter().map(|x| basis_value(&grid, n, k, x)).sum();
                    assert!((sums.phi_sums.values()[k] - oracle).abs() < 1e-12);
                }
                if bcs[0].is_periodic() {
                    assert!((sums.phi_sums.sum() - 50.0).abs() < 1e-9);
                }
                assert!(sums.phi_sums.values().iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn out_of_domain_sample_is_named() {
        let grid = GridSpec::from_box(&[5, 5], &[0.0, 0.0], &[1.0, 1.0], &[BoundaryCondition::ZeroPad; 2]).unwrap();
        let s = SampleSet::new(2, vec![0.5, 0.5, 0.2, 1.2]).unwrap();
        assert!(matches!(
            accumulate_data_sums(&s, &grid, SplineDegree::LINEAR),
            Err(RdsError::SampleOutOfDomain { index: 1, axis: 1, .. })
        ));
    }

    #[test]
    fn value_examples() {
        let grid = GridSpec::from_box(&[6, 6], &[0.0, 0.0], &[2.0, 1.5], &[BoundaryCondition::Periodic; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let (c, samples, xi) = random_instance(&mut rng, &grid, 40);
        let like = LogLikelihood::from_samples(&samples, &grid, SplineDegree::LINEAR, &SensitivityMap::Uniform, 4).unwrap();
        let zero = ScalarField::zeros(grid.clone());
        assert!((like.value(&zero).unwrap() - 40.0 * 3.0f64.ln()).abs() < 1e-12);

        let like = LogLikelihood::from_samples(&samples, &grid, SplineDegree::CUBIC, &xi, 4).unwrap();
        let shifted = c.map(|v| v + 2.5);
        assert!((like.value(&c).unwrap() - like.value(&shifted).unwrap()).abs() < 1e-9);

        // Direct formula with pointwise evaluation and explicit quadrature.
        let logs = eval_spline_points(&c, SplineDegree::CUBIC, samples.coords(), &[0, 0]).unwrap();
        let fine = grid.fine_grid(4);
        let coords = fine.node_coords();
        let w = quadrature_weights(&fine);
        let lf = eval_spline_points(&c, SplineDegree::CUBIC, &coords, &[0, 0]).unwrap();
        let xs = xi.eval_points(&coords, 2).unwrap();
        let e: f64 = (0..fine.len()).map(|j| lf[j].exp() * xs[j] * w[j]).sum();
        let direct = -logs.iter().sum::<f64>() + 40.0 * e.ln();
        assert!((like.value(&c).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let grid = GridSpec::unit_periodic(&[6, 6]).unwrap();
        for n in [SplineDegree::LINEAR, SplineDegree::CUBIC] {
            let (c, samples, xi) = random_instance(&mut rng, &grid, 50);
            let like = LogLikelihood::from_samples(&samples, &grid, n, &xi, 4).unwrap();
            let g = like.gradient(&c).unwrap();
            assert!(g.sum().abs() < 1e-8);
            let h = 1e-5;
            let fd: Vec<f64> = (0..grid.len())
                .map(|k| {
                    let mut a = c.clone();
                    let mut b = c.clone();
                    a.values_mut()[k] += h;
                    b.values_mut()[k] -= h;
                    (like.value(&a).unwrap() - like.value(&b).unwrap()) / (2.0 * h)
                })
                .collect();
            let err: f64 = fd.iter().zip(g.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err / g.norm() < 1e-5, "relative error {}", err / g.norm());
        }
    }

    #[test]
    fn gradient_invariant_under_sensitivity_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let grid = GridSpec::unit_periodic(&[6, 5]).unwrap();
        let (c, samples, xi) = random_instance(&mut rng, &grid, 30);
        let SensitivityMap::Gridded { field, degree } = &xi else { unreachable!() };
        let xi3 = SensitivityMap::gridded(field.map(|v| 3.0 * v), *degree).unwrap();
        let g1 = LogLikelihood::from_samples(&samples, &grid, SplineDegree::LINEAR, &xi, 4).unwrap().gradient(&c).unwrap();
        let g3 = LogLikelihood::from_samples(&samples, &grid, SplineDegree::LINEAR, &xi3, 4).unwrap().gradient(&c).unwrap();
        assert!(g1.max_abs_diff(&g3) < 1e-10);
    }

    #[test]
    fn balanced_uniform_data_is_stationary() {
        let grid = GridSpec::unit_periodic(&[4, 4]).unwrap();
        // One sample at every node: perfectly balanced over the lattice.
        let pts: Vec<f64> = (0..grid.len()).flat_map(|k| grid.grid_to_world(&grid.unravel(k))).collect();
        let samples = SampleSet::new(2, pts).unwrap();
        let like = LogLikelihood::from_samples(&samples, &grid, SplineDegree::LINEAR, &SensitivityMap::Uniform, 4).unwrap();
        let g = like.gradient(&ScalarField::constant(grid, -1.0)).unwrap();
        assert!(g.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn d_matches_dense_pair_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for (bcs, n) in [
            ([BoundaryCondition::Periodic; 2], SplineDegree::LINEAR),
            ([BoundaryCondition::Periodic; 2], SplineDegree::CUBIC),
            ([BoundaryCondition::ZeroPad, BoundaryCondition::Periodic], SplineDegree::CUBIC),
            ([BoundaryCondition::Mirror, BoundaryCondition::ZeroPad], SplineDegree::LINEAR),
        ] {
            let grid = GridSpec::from_box(&[5, 5], &[0.0, 0.0], &[1.0, 1.0], &bcs).unwrap();
            let (c, samples, xi) = random_instance(&mut rng, &grid, 20);
            let like = LogLikelihood::from_samples(&samples, &grid, n, &xi, 3).unwrap();
            let (f, part) = like.hessian_parts(&c).unwrap();
            let dense = dense_hessian(&like, &c, &xi);
            let dd = part.to_dense();
            let nn = like.n_samples() as f64;
            for k in 0..grid.len() {
                for l in 0..grid.len() {
                    let ours = nn * (dd[k][l] - f.values()[k] * f.values()[l]);
                    assert!((ours - dense[k][l]).abs() < 1e-9 * nn, "{bcs:?} n={n} ({k},{l})");
                }
            }
            let diag = part.band(&[0, 0]).unwrap();
            assert!(diag.values().iter().all(|&v| v > 0.0));
            assert!(part.band(&[n.get() as isize + 1, 0]).is_none());
        }
    }

    #[test]
    fn bands_symmetric_under_negation() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let grid = GridSpec::unit_periodic(&[9, 8]).unwrap();
        let (c, samples, xi) = random_instance(&mut rng, &grid, 20);
        let like = LogLikelihood::from_samples(&samples, &grid, SplineDegree::CUBIC, &xi, 2).unwrap();
        let (_, part) = like.hessian_parts(&c).unwrap();
        for off in part.offsets() {
            let neg: Vec<isize> = off.iter().map(|o| -o).collect();
            let a = part.band(off).unwrap();
            let b = part.band(&neg).unwrap();
            for k in 0..grid.len() {
                let l = part.neighbor(k, off).unwrap();
                assert!((a.values()[k] - b.values()[l]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hessian_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let grid = GridSpec::unit_periodic(&[6, 6]).unwrap();
        let (c, samples, xi) = random_instance(&mut rng, &grid, 50);
        let like = LogLikelihood::from_samples(&samples, &grid, SplineDegree::LINEAR, &xi, 4).unwrap();
        let (f, part) = like.hessian_parts(&c).unwrap();
        let nn = like.n_samples() as f64;
        for _ in 0..20 {
            let v = ScalarField::new(grid.clone(), (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let q = nn * (v.dot(&part.apply(&v)) - v.dot(&f).powi(2));
            assert!(q > 0.0);
            // Directional second difference.
            let h = 1e-3;
            let shift = |t: f64| c.with_values(c.values().iter().zip(v.values()).map(|(a, b)| a + t * b).collect());
            let second = (like.value(&shift(h)).unwrap() - 2.0 * like.value(&c).unwrap() + like.value(&shift(-h)).unwrap()) / (h * h);
            assert!(((second - q) / q).abs() < 1e-4, "{second} vs {q}");
        }
    }

    #[test]
    fn convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let grid = GridSpec::unit_periodic(&[5, 5]).unwrap();
        let (_, samples, xi) = random_instance(&mut rng, &grid, 25);
        let like = LogLikelihood::from_samples(&samples, &grid, SplineDegree::LINEAR, &xi, 2).unwrap();
        for _ in 0..100 {
            let a = ScalarField::new(grid.clone(), (0..25).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
            let b = ScalarField::new(grid.clone(), (0..25).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
            let mid = a.with_values(a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x + y)).collect());
            let lhs = like.value(&mid).unwrap();
            let rhs = 0.5 * (like.value(&a).unwrap() + like.value(&b).unwrap());
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn log_sensitivity_term() {
        let s = SampleSet::new(1, vec![0.1, 0.2]).unwrap();
        assert_eq!(log_sensitivity_sum(&s, &SensitivityMap::Uniform).unwrap(), Some(0.0));
        let zero = SensitivityMap::sinsq(1.0, 0.0, 0.0).unwrap();
        let s0 = SampleSet::new(1, vec![0.0]).unwrap();
        assert_eq!(log_sensitivity_sum(&s0, &zero).unwrap(), None);
    }
}
