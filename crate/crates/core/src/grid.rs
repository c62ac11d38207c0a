//! Uniform lattices, boundary conditions and separable convolution.
//!
//! All fields are stored row-major with axis 0 slowest. A periodic axis with
//! `N` points covers `[origin, origin + N·step)` without a duplicated
//! endpoint; a non-periodic axis with `N` points covers the closed interval
//! `[origin, origin + (N-1)·step]`.

use crate::error::{RdsError, Result};
use serde::{Deserialize, Serialize};

/// How a field is extended beyond the lattice along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    /// Reads outside the lattice return zero.
    ZeroPad,
    /// Whole-sample symmetric reflection about the end points.
    Mirror,
}

impl BoundaryCondition {
    /// Folds an extended index onto the lattice `0..n`; `None` means the
    /// extended value is zero.
    #[inline]
    pub fn extend(self, i: isize, n: usize) -> Option<usize> {
        let n_i = n as isize;
        if (0..n_i).contains(&i) {
            return Some(i as usize);
        }
        match self {
            BoundaryCondition::Periodic => Some(i.rem_euclid(n_i) as usize),
            BoundaryCondition::ZeroPad => None,
            BoundaryCondition::Mirror => {
                if n == 1 {
                    return Some(0);
                }
                let period = 2 * (n_i - 1);
                let r = i.rem_euclid(period);
                Some(if r >= n_i { (period - r) as usize } else { r as usize })
            }
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BoundaryCondition::Periodic => 0,
            BoundaryCondition::ZeroPad => 1,
            BoundaryCondition::Mirror => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BoundaryCondition::Periodic),
            1 => Some(BoundaryCondition::ZeroPad),
            2 => Some(BoundaryCondition::Mirror),
            _ => None,
        }
    }

    pub fn is_periodic(self) -> bool {
        self == BoundaryCondition::Periodic
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = RdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" | "p" => Ok(BoundaryCondition::Periodic),
            "zeropad" | "zero" | "constant" | "z" => Ok(BoundaryCondition::ZeroPad),
            "mirror" | "m" => Ok(BoundaryCondition::Mirror),
            other => Err(RdsError::InvalidConfig(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// A uniform lattice with per-axis size, step, origin and boundary condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    sizes: Vec<usize>,
    step: Vec<f64>,
    origin: Vec<f64>,
    bcs: Vec<BoundaryCondition>,
}

impl GridSpec {
    pub fn new(
        sizes: Vec<usize>,
        step: Vec<f64>,
        origin: Vec<f64>,
        bcs: Vec<BoundaryCondition>,
    ) -> Result<Self> {
        let d = sizes.len();
        if d == 0 {
            return Err(RdsError::InvalidGrid("grid needs at least one axis".into()));
        }
        if step.len() != d || origin.len() != d || bcs.len() != d {
            return Err(RdsError::InvalidGrid(format!(
                "per-axis lengths disagree: sizes {d}, step {}, origin {}, bcs {}",
                step.len(),
                origin.len(),
                bcs.len()
            )));
        }
        if let Some(k) = sizes.iter().position(|&n| n < 2) {
            return Err(RdsError::InvalidGrid(format!("axis {k} has fewer than 2 points")));
        }
        if let Some(k) = step.iter().position(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(RdsError::InvalidGrid(format!("axis {k} has non-positive step")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(RdsError::InvalidGrid("non-finite origin".into()));
        }
        Ok(GridSpec { sizes, step, origin, bcs })
    }

    /// Grid whose axes span the boxes `[lo, hi)` (periodic) or `[lo, hi]`.
    pub fn from_box(sizes: &[usize], lo: &[f64], hi: &[f64], bcs: &[BoundaryCondition]) -> Result<Self> {
        if lo.len() != sizes.len() || hi.len() != sizes.len() || bcs.len() != sizes.len() {
            return Err(RdsError::InvalidGrid("box and sizes disagree in dimension".into()));
        }
        let step = sizes
            .iter()
            .zip(lo.iter().zip(hi))
            .zip(bcs)
            .map(|((&n, (&a, &b)), bc)| {
                let cells = if bc.is_periodic() { n } else { n.saturating_sub(1).max(1) };
                (b - a) / cells as f64
            })
            .collect();
        GridSpec::new(sizes.to_vec(), step, lo.to_vec(), bcs.to_vec())
    }

    /// Periodic grid on the unit box `[0,1)^d`.
    pub fn unit_periodic(sizes: &[usize]) -> Result<Self> {
        let d = sizes.len();
        GridSpec::from_box(sizes, &vec![0.0; d], &vec![1.0; d], &vec![BoundaryCondition::Periodic; d])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn step(&self) -> &[f64] {
        &self.step
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn bcs(&self) -> &[BoundaryCondition] {
        &self.bcs
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of the domain along `axis` in world units.
    pub fn extent(&self, axis: usize) -> f64 {
        let cells = if self.bcs[axis].is_periodic() { self.sizes[axis] } else { self.sizes[axis] - 1 };
        cells as f64 * self.step[axis]
    }

    /// Lebesgue volume of the domain.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.extent(k)).product()
    }

    pub fn world_coord(&self, axis: usize, index: f64) -> f64 {
        self.origin[axis] + index * self.step[axis]
    }

    pub fn grid_to_world(&self, m: &[usize]) -> Vec<f64> {
        m.iter().enumerate().map(|(k, &i)| self.world_coord(k, i as f64)).collect()
    }

    /// Continuous grid coordinate of a world coordinate. Values within a few
    /// ulps of an integer snap to it, so lattice points round-trip exactly.
    #[inline]
    pub fn to_grid_coord(&self, axis: usize, x: f64) -> f64 {
        let u = (x - self.origin[axis]) / self.step[axis];
        let r = u.round();
        if (u - r).abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0) {
            r
        } else {
            u
        }
    }

    pub fn world_to_grid(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(k, &v)| self.to_grid_coord(k, v)).collect()
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.sizes)
    }

    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        unravel(&self.sizes, flat)
    }

    pub fn ravel(&self, m: &[usize]) -> usize {
        m.iter().zip(self.strides()).map(|(&i, s)| i * s).sum()
    }

    /// The lattice refined by an integer factor `s`; lattice point `s·m` of
    /// the fine grid sits at coarse point `m`.
    pub fn fine_grid(&self, s: usize) -> GridSpec {
        let s = s.max(1);
        let sizes = self.sizes.iter().zip(&self.bcs).map(|(&n, bc)| upsampled_len(n, s, *bc)).collect();
        GridSpec {
            sizes,
            step: self.step.iter().map(|h| h / s as f64).collect(),
            origin: self.origin.clone(),
            bcs: self.bcs.clone(),
        }
    }

    /// World coordinates of every lattice point, row-major, `d` per point.
    pub fn node_coords(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.len() * d);
        let mut m = vec![0usize; d];
        for _ in 0..self.len() {
            for k in 0..d {
                out.push(self.world_coord(k, m[k] as f64));
            }
            increment(&mut m, &self.sizes);
        }
        out
    }

    pub fn same_lattice(&self, other: &GridSpec) -> bool {
        self.sizes == other.sizes && self.bcs == other.bcs
    }
}

pub(crate) fn upsampled_len(n: usize, s: usize, bc: BoundaryCondition) -> usize {
    if bc.is_periodic() {
        s * n
    } else {
        s * (n - 1) + 1
    }
}

pub(crate) fn strides_of(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; sizes.len()];
    for k in (0..sizes.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * sizes[k + 1];
    }
    strides
}

pub(crate) fn unravel(sizes: &[usize], mut flat: usize) -> Vec<usize> {
    let mut m = vec![0usize; sizes.len()];
    for k in (0..sizes.len()).rev() {
        m[k] = flat % sizes[k];
        flat /= sizes[k];
    }
    m
}

/// Row-major odometer increment.
#[inline]
pub(crate) fn increment(m: &mut [usize], sizes: &[usize]) {
    for k in (0..m.len()).rev() {
        m[k] += 1;
        if m[k] < sizes[k] {
            return;
        }
        m[k] = 0;
    }
}

/// Real samples on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(RdsError::ShapeMismatch(format!(
                "field has {} values but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let n = grid.len();
        ScalarField { grid, values: vec![value; n] }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let coords = grid.node_coords();
        let values = coords.chunks_exact(d).map(|x| f(x)).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, m: &[usize]) -> f64 {
        self.values[self.grid.ravel(m)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), self.grid.len());
        ScalarField { grid: self.grid.clone(), values }
    }
}

/// A centered 1-D kernel of odd length.
pub(crate) fn half_width(kernel: &[f64]) -> Result<usize> {
    if kernel.len() % 2 == 0 {
        return Err(RdsError::EvenKernel(kernel.len()));
    }
    Ok(kernel.len() / 2)
}

/// Walks every 1-D lane along `axis`, handing the callback the lane read
/// from `input` and a buffer to fill for the output lane.
fn for_each_lane(
    input: &[f64],
    in_sizes: &[usize],
    output: &mut [f64],
    out_len: usize,
    axis: usize,
    mut f: impl FnMut(&[f64], &mut [f64]),
) {
    let in_len = in_sizes[axis];
    let inner: usize = in_sizes[axis + 1..].iter().product();
    let outer: usize = in_sizes[..axis].iter().product();
    let mut lane_in = vec![0.0; in_len];
    let mut lane_out = vec![0.0; out_len];
    for o in 0..outer {
        let in_base = o * in_len * inner;
        let out_base = o * out_len * inner;
        for i in 0..inner {
            for (t, v) in lane_in.iter_mut().enumerate() {
                *v = input[in_base + t * inner + i];
            }
            f(&lane_in, &mut lane_out);
            for (t, v) in lane_out.iter().enumerate() {
                output[out_base + t * inner + i] = *v;
            }
        }
    }
}

/// `out[i] = Σ_k kernel[k] · in_ext[i − k]`, with `in_ext` the extension of
/// `lane` under `bc`.
fn convolve_lane(lane: &[f64], kernel: &[f64], bc: BoundaryCondition, ext: &mut Vec<f64>, out: &mut [f64]) {
    let n = lane.len();
    let j = kernel.len() / 2;
    ext.clear();
    ext.extend((0..n + 2 * j).map(|e| match bc.extend(e as isize - j as isize, n) {
        Some(i) => lane[i],
        None => 0.0,
    }));
    // ext[e] holds in_ext[e − j]; out[i] = Σ_t kernel[t]·ext[i + 2j − t].
    for (i, o) in out.iter_mut().enumerate() {
        let window = &ext[i..i + 2 * j + 1];
        let mut acc = 0.0;
        for (kt, wv) in kernel.iter().zip(window.iter().rev()) {
            acc += kt * wv;
        }
        *o = acc;
    }
}

/// Adjoint of [`convolve_lane`]: correlate onto the extended support, then
/// fold the extension back onto the lattice.
fn convolve_lane_adjoint(lane: &[f64], kernel: &[f64], bc: BoundaryCondition, ext: &mut Vec<f64>, out: &mut [f64]) {
    let n = lane.len();
    let j = kernel.len() / 2;
    ext.clear();
    ext.resize(n + 2 * j, 0.0);
    for (i, &y) in lane.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        for (t, kt) in kernel.iter().enumerate() {
            ext[i + 2 * j - t] += kt * y;
        }
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    for (e, &z) in ext.iter().enumerate() {
        if let Some(i) = bc.extend(e as isize - j as isize, n) {
            out[i] += z;
        }
    }
}

/// Sparse rows `(column, value)` of the matrix applied by
/// [`separable_convolve`] along one axis of length `n`.
pub(crate) fn lane_matrix(kernel: &[f64], bc: BoundaryCondition, n: usize) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); n];
    let mut unit = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut ext = Vec::new();
    for j in 0..n {
        unit[j] = 1.0;
        convolve_lane(&unit, kernel, bc, &mut ext, &mut out);
        unit[j] = 0.0;
        for (i, &v) in out.iter().enumerate() {
            if v != 0.0 {
                rows[i].push((j, v));
            }
        }
    }
    rows
}

fn check_kernels(sizes: &[usize], kernels: &[Vec<f64>], bcs: &[BoundaryCondition]) -> Result<()> {
    if kernels.len() != sizes.len() || bcs.len() != sizes.len() {
        return Err(RdsError::ShapeMismatch(format!(
            "{} kernels / {} bcs for a {}-d field",
            kernels.len(),
            bcs.len(),
            sizes.len()
        )));
    }
    for (k, kernel) in kernels.iter().enumerate() {
        let hw = half_width(kernel)?;
        if bcs[k].is_periodic() && hw > sizes[k] {
            return Err(RdsError::KernelExceedsPeriod { taps: kernel.len(), size: sizes[k] });
        }
    }
    Ok(())
}

fn is_identity(kernel: &[f64]) -> bool {
    let j = kernel.len() / 2;
    kernel.iter().enumerate().all(|(t, &v)| if t == j { v == 1.0 } else { v == 0.0 })
}

fn separable_apply(
    field: &ScalarField,
    kernels: &[Vec<f64>],
    bcs: &[BoundaryCondition],
    lane_op: fn(&[f64], &[f64], BoundaryCondition, &mut Vec<f64>, &mut [f64]),
) -> Result<ScalarField> {
    let sizes = field.grid.sizes().to_vec();
    check_kernels(&sizes, kernels, bcs)?;
    let mut cur = field.values.clone();
    let mut next = vec![0.0; cur.len()];
    let mut ext = Vec::new();
    for (axis, kernel) in kernels.iter().enumerate() {
        if is_identity(kernel) {
            continue;
        }
        let bc = bcs[axis];
        for_each_lane(&cur, &sizes, &mut next, sizes[axis], axis, |lane, out| {
            lane_op(lane, kernel, bc, &mut ext, out)
        });
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(field.with_values(cur))
}

/// Separable convolution `result[m] = Σ_k field_ext[m − k] Π_j kernel_j[k_j]`
/// with the field extended per axis by `bcs`. Kernels are centered and of odd
/// length.
pub fn separable_convolve(field: &ScalarField, kernels: &[Vec<f64>], bcs: &[BoundaryCondition]) -> Result<ScalarField> {
    separable_apply(field, kernels, bcs, convolve_lane)
}

/// Exact adjoint of [`separable_convolve`] for the same kernels and boundary
/// conditions: `⟨conv(a), b⟩ = ⟨a, conv_adjoint(b)⟩`.
pub fn separable_convolve_adjoint(
    field: &ScalarField,
    kernels: &[Vec<f64>],
    bcs: &[BoundaryCondition],
) -> Result<ScalarField> {
    separable_apply(field, kernels, bcs, convolve_lane_adjoint)
}

/// Expands a field by inserting `s − 1` zeros between samples along every
/// axis. The output lives on `field.grid().fine_grid(s)`.
pub fn upsample_zeros(field: &ScalarField, s: usize) -> ScalarField {
    let s = s.max(1);
    if s == 1 {
        return field.clone();
    }
    let fine = field.grid.fine_grid(s);
    let mut out = vec![0.0; fine.len()];
    let fine_strides = fine.strides();
    let sizes = field.grid.sizes();
    let mut m = vec![0usize; sizes.len()];
    for &v in &field.values {
        let idx: usize = m.iter().zip(&fine_strides).map(|(&i, st)| s * i * st).sum();
        out[idx] = v;
        increment(&mut m, sizes);
    }
    ScalarField { grid: fine, values: out }
}

/// Keeps the fine samples at indices `s·m`; the adjoint of [`upsample_zeros`].
pub fn downsample(field: &ScalarField, coarse: &GridSpec, s: usize) -> Result<ScalarField> {
    let s = s.max(1);
    let expected = coarse.fine_grid(s);
    if !expected.same_lattice(&field.grid) {
        return Err(RdsError::ShapeMismatch("field is not the s-refinement of the coarse grid".into()));
    }
    let fine_strides = field.grid.strides();
    let sizes = coarse.sizes();
    let mut m = vec![0usize; sizes.len()];
    let mut out = Vec::with_capacity(coarse.len());
    for _ in 0..coarse.len() {
        let idx: usize = m.iter().zip(&fine_strides).map(|(&i, st)| s * i * st).sum();
        out.push(field.values[idx]);
        increment(&mut m, sizes);
    }
    Ok(ScalarField { grid: coarse.clone(), values: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn periodic(sizes: &[usize]) -> GridSpec {
        GridSpec::unit_periodic(sizes).unwrap()
    }

    fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
        let v = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        ScalarField::new(grid.clone(), v).unwrap()
    }

    /// Dense N-d convolution with a full tensor kernel, extension applied to
    /// each index independently.
    fn dense_convolve(field: &ScalarField, kernels: &[Vec<f64>], bcs: &[BoundaryCondition]) -> Vec<f64> {
        let grid = field.grid();
        let d = grid.dim();
        let half: Vec<isize> = kernels.iter().map(|k| (k.len() / 2) as isize).collect();
        let ksizes: Vec<usize> = kernels.iter().map(|k| k.len()).collect();
        let ktotal: usize = ksizes.iter().product();
        (0..grid.len())
            .map(|flat| {
                let m = grid.unravel(flat);
                let mut acc = 0.0;
                for kf in 0..ktotal {
                    let t = unravel(&ksizes, kf);
                    let mut w = 1.0;
                    let mut src = Vec::with_capacity(d);
                    let mut zero = false;
                    for a in 0..d {
                        w *= kernels[a][t[a]];
                        let off = t[a] as isize - half[a];
                        match bcs[a].extend(m[a] as isize - off, grid.sizes()[a]) {
                            Some(i) => src.push(i),
                            None => zero = true,
                        }
                    }
                    if !zero {
                        acc += w * field.get(&src);
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn extend_rules() {
        use BoundaryCondition::*;
        assert_eq!(Periodic.extend(-1, 5), Some(4));
        assert_eq!(Periodic.extend(7, 5), Some(2));
        assert_eq!(ZeroPad.extend(-1, 5), None);
        assert_eq!(ZeroPad.extend(5, 5), None);
        assert_eq!(Mirror.extend(-2, 5), Some(2));
        assert_eq!(Mirror.extend(5, 5), Some(3));
        assert_eq!(Mirror.extend(6, 5), Some(2));
        assert_eq!(Mirror.extend(8, 5), Some(0));
    }

    #[test]
    fn second_difference_of_constant_vanishes() {
        let f = ScalarField::constant(periodic(&[8, 8]), 1.0);
        let bcs = [BoundaryCondition::Periodic; 2];
        let out = separable_convolve(&f, &[vec![1.0, -2.0, 1.0], vec![1.0]], &bcs).unwrap();
        assert!(out.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn impulse_response() {
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let f = ScalarField::new(periodic(&[9]), v).unwrap();
        let out = separable_convolve(&f, &[vec![1.0, -2.0, 1.0]], &[BoundaryCondition::Periodic]).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn asymmetric_kernel_orientation() {
        // out[i] = Σ_k kernel[k] in[i-k]: a delta at 2 and kernel [a, b, c]
        // centered at b gives a at 1, b at 2, c at 3.
        let mut v = vec![0.0; 6];
        v[2] = 1.0;
        let f = ScalarField::new(periodic(&[6]), v).unwrap();
        let out = separable_convolve(&f, &[vec![1.0, 2.0, 3.0]], &[BoundaryCondition::Periodic]).unwrap();
        assert_eq!(out.values(), &[0.0, 1.0, 2.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn separable_matches_dense_all_bcs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use BoundaryCondition::*;
        for bcs in [[Periodic, Periodic], [ZeroPad, Mirror], [Mirror, Periodic], [ZeroPad, ZeroPad]] {
            let grid = GridSpec::from_box(&[6, 6], &[0.0, 0.0], &[1.0, 1.0], &bcs).unwrap();
            let f = random_field(&grid, &mut rng);
            let k1: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let k2: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let kernels = vec![k1, k2];
            let sep = separable_convolve(&f, &kernels, &bcs).unwrap();
            let dense = dense_convolve(&f, &kernels, &bcs);
            for (a, b) in sep.values().iter().zip(&dense) {
                assert!((a - b).abs() < 1e-12, "{bcs:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn separable_matches_dense_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bcs = [BoundaryCondition::Periodic, BoundaryCondition::Mirror, BoundaryCondition::ZeroPad];
        let grid = GridSpec::from_box(&[4, 5, 3], &[0.0; 3], &[1.0; 3], &bcs).unwrap();
        let f = random_field(&grid, &mut rng);
        let kernels = vec![vec![0.5, 1.0, -0.25], vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![-1.0, 0.0, 1.0]];
        let sep = separable_convolve(&f, &kernels, &bcs).unwrap();
        let dense = dense_convolve(&f, &kernels, &bcs);
        for (a, b) in sep.values().iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_identity_all_bcs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        use BoundaryCondition::*;
        for bcs in [[Periodic, Periodic], [ZeroPad, Mirror], [Mirror, Mirror]] {
            let grid = GridSpec::from_box(&[7, 5], &[0.0, 0.0], &[1.0, 1.0], &bcs).unwrap();
            let a = random_field(&grid, &mut rng);
            let b = random_field(&grid, &mut rng);
            let kernels = vec![vec![0.3, -1.0, 2.0, 0.7, 0.1], vec![1.0, 0.5, -0.5]];
            let lhs = separable_convolve(&a, &kernels, &bcs).unwrap().dot(&b);
            let rhs = a.dot(&separable_convolve_adjoint(&b, &kernels, &bcs).unwrap());
            assert!((lhs - rhs).abs() < 1e-12, "{bcs:?}");
        }
    }

    #[test]
    fn symmetric_periodic_kernel_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let grid = periodic(&[6, 7]);
        let bcs = [BoundaryCondition::Periodic; 2];
        let kernels = vec![vec![1.0, -2.0, 1.0], vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]];
        let a = random_field(&grid, &mut rng);
        let b = random_field(&grid, &mut rng);
        let lhs = separable_convolve(&a, &kernels, &bcs).unwrap().dot(&b);
        let rhs = a.dot(&separable_convolve(&b, &kernels, &bcs).unwrap());
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn linearity_and_shift_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let grid = periodic(&[8]);
        let bcs = [BoundaryCondition::Periodic];
        let kernels = vec![vec![0.2, -0.7, 1.1, 0.4, 0.05]];
        let a = random_field(&grid, &mut rng);
        let b = random_field(&grid, &mut rng);
        let combo = a.with_values(a.values().iter().zip(b.values()).map(|(x, y)| 2.0 * x - 3.0 * y).collect());
        let ca = separable_convolve(&a, &kernels, &bcs).unwrap();
        let cb = separable_convolve(&b, &kernels, &bcs).unwrap();
        let cc = separable_convolve(&combo, &kernels, &bcs).unwrap();
        for i in 0..8 {
            assert!((cc.values()[i] - (2.0 * ca.values()[i] - 3.0 * cb.values()[i])).abs() < 1e-12);
        }
        let shifted = a.with_values((0..8).map(|i| a.values()[(i + 8 - 3) % 8]).collect());
        let cs = separable_convolve(&shifted, &kernels, &bcs).unwrap();
        for i in 0..8 {
            assert!((cs.values()[i] - ca.values()[(i + 8 - 3) % 8]).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_errors() {
        let f = ScalarField::constant(periodic(&[3]), 1.0);
        let bcs = [BoundaryCondition::Periodic];
        assert!(matches!(separable_convolve(&f, &[vec![1.0, 1.0]], &bcs), Err(RdsError::EvenKernel(2))));
        assert!(matches!(
            separable_convolve(&f, &[vec![1.0; 9]], &bcs),
            Err(RdsError::KernelExceedsPeriod { .. })
        ));
        assert!(separable_convolve(&f, &[vec![1.0; 7]], &bcs).is_ok());
    }

    #[test]
    fn upsample_definition() {
        let g = periodic(&[2]);
        let f = ScalarField::new(g, vec![3.0, 5.0]).unwrap();
        assert_eq!(upsample_zeros(&f, 2).values(), &[3.0, 0.0, 5.0, 0.0]);
        assert_eq!(upsample_zeros(&f, 1), f);
        let gz = GridSpec::from_box(&[3], &[0.0], &[1.0], &[BoundaryCondition::ZeroPad]).unwrap();
        let fz = ScalarField::new(gz, vec![1.0, 2.0, 3.0]).unwrap();
        let up = upsample_zeros(&fz, 3);
        assert_eq!(up.values(), &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 3.0]);
        assert_eq!(downsample(&up, fz.grid(), 3).unwrap(), fz);
    }

    #[test]
    fn fine_grid_alignment() {
        let g = GridSpec::from_box(&[10], &[0.0], &[5.0], &[BoundaryCondition::Periodic]).unwrap();
        assert_eq!(g.step(), &[0.5]);
        let f = g.fine_grid(4);
        assert_eq!(f.sizes(), &[40]);
        assert_eq!(f.step(), &[0.125]);
        assert_eq!(g.fine_grid(1), g);
        for m in 0..10 {
            assert_eq!(f.grid_to_world(&[4 * m]), g.grid_to_world(&[m]));
        }
    }

    #[test]
    fn world_grid_round_trip_is_exact() {
        let g = GridSpec::new(vec![13, 7], vec![0.3, 0.1], vec![0.1, -2.7], vec![BoundaryCondition::Mirror; 2]).unwrap();
        for i in 0..13 {
            for j in 0..7 {
                let x = g.grid_to_world(&[i, j]);
                assert_eq!(g.world_to_grid(&x), vec![i as f64, j as f64]);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn upsample_preserves_sum(vals in proptest::collection::vec(-10.0f64..10.0, 12), s in 1usize..5) {
                let g = GridSpec::from_box(&[3, 4], &[0.0, 0.0], &[1.0, 1.0],
                    &[BoundaryCondition::Periodic, BoundaryCondition::ZeroPad]).unwrap();
                let f = ScalarField::new(g, vals).unwrap();
                let up = upsample_zeros(&f, s);
                prop_assert!((up.sum() - f.sum()).abs() < 1e-12);
            }
        }
    }
}
