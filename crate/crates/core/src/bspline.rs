//! Centered B-splines of degree 0, 1 and 3, their derivatives, and the
//! separable filter banks that evaluate a spline on a refined lattice.

use crate::error::{RdsError, Result};
use crate::grid::{separable_convolve, upsample_zeros, BoundaryCondition, GridSpec, ScalarField};
use serde::{Deserialize, Serialize};

/// Polynomial degree of the B-spline basis, uniform across axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SplineDegree(u8);

impl SplineDegree {
    pub const CONSTANT: SplineDegree = SplineDegree(0);
    pub const LINEAR: SplineDegree = SplineDegree(1);
    pub const CUBIC: SplineDegree = SplineDegree(3);

    pub fn new(n: u8) -> Result<Self> {
        match n {
            0 | 1 | 3 => Ok(SplineDegree(n)),
            other => Err(RdsError::UnsupportedDegree(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Support length `n + 1`.
    pub fn support(self) -> usize {
        self.0 as usize + 1
    }

    /// Half-width of the support, `(n + 1) / 2`.
    pub fn radius(self) -> f64 {
        (self.0 as f64 + 1.0) / 2.0
    }
}

impl TryFrom<u8> for SplineDegree {
    type Error = RdsError;
    fn try_from(n: u8) -> Result<Self> {
        SplineDegree::new(n)
    }
}

impl From<SplineDegree> for u8 {
    fn from(d: SplineDegree) -> u8 {
        d.0
    }
}

impl std::fmt::Display for SplineDegree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Derivative of the even profile `g(r) = β(r)`, `r ≥ 0`, taking the piece
/// on the given side of a breakpoint.
fn profile(n: u8, order: u8, r: f64, side: Side) -> f64 {
    match n {
        0 => {
            if order > 0 {
                return 0.0;
            }
            let inside = match side {
                Side::Right => r < 0.5,
                Side::Left => r <= 0.5,
            };
            if inside {
                1.0
            } else {
                0.0
            }
        }
        1 => {
            let inside = match side {
                Side::Right => r < 1.0,
                Side::Left => r <= 1.0,
            };
            if !inside {
                return 0.0;
            }
            match order {
                0 => 1.0 - r,
                1 => -1.0,
                _ => 0.0,
            }
        }
        3 => {
            let piece = match side {
                Side::Right => r.floor(),
                Side::Left => (r.ceil() - 1.0).max(0.0),
            };
            if piece >= 2.0 {
                return 0.0;
            }
            if piece < 1.0 {
                match order {
                    0 => 2.0 / 3.0 - r * r + 0.5 * r * r * r,
                    1 => -2.0 * r + 1.5 * r * r,
                    _ => -2.0 + 3.0 * r,
                }
            } else {
                let t = 2.0 - r;
                match order {
                    0 => t * t * t / 6.0,
                    1 => -0.5 * t * t,
                    _ => t,
                }
            }
        }
        _ => unreachable!("degree validated by SplineDegree"),
    }
}

fn signed(order: u8, x: f64, value: f64) -> f64 {
    if x < 0.0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}

/// Right limit of `dᵏβⁿ/dxᵏ` at `x`.
fn right_limit(n: u8, order: u8, x: f64) -> f64 {
    let r = x.abs();
    // Moving right means moving outward for x ≥ 0 and inward for x < 0.
    let side = if x >= 0.0 { Side::Right } else { Side::Left };
    signed(order, x, profile(n, order, r, side))
}

fn left_limit(n: u8, order: u8, x: f64) -> f64 {
    let r = x.abs();
    if x == 0.0 {
        let v = profile(n, order, 0.0, Side::Right);
        return if order % 2 == 1 { -v } else { v };
    }
    let side = if x > 0.0 { Side::Left } else { Side::Right };
    signed(order, x, profile(n, order, r, side))
}

/// Centered B-spline `βⁿ` or its derivative of order ≤ 2 at `x`.
///
/// At knots the right limit is returned. Dirac contributions of derivatives
/// beyond the spline's smoothness are dropped, so `n = 1, order = 2` is zero.
pub fn bspline_eval(n: SplineDegree, order: u8, x: f64) -> Result<f64> {
    if order > 2 {
        return Err(RdsError::InvalidConfig(format!("derivative order {order} > 2")));
    }
    Ok(right_limit(n.0, order, x))
}

/// Value used when tabulating filters: the average of the two one-sided
/// limits, which keeps even-order kernels symmetric and odd-order kernels
/// antisymmetric.
fn filter_sample(n: u8, order: u8, x: f64) -> f64 {
    0.5 * (right_limit(n, order, x) + left_limit(n, order, x))
}

/// Per-axis derivative-sampling kernels `b_s^(orders)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    pub degree: SplineDegree,
    pub scale: usize,
    pub derivative_orders: Vec<u8>,
    pub taps: Vec<Vec<f64>>,
}

/// One-dimensional kernel `taps[j] = ∂ᵏβ(j/s)` for `j ∈ [−J, J]`.
///
/// For the linear spline the second derivative is the discrete kernel
/// `[1, −2, 1]` placed on the coarse knots.
pub fn filter_taps(n: SplineDegree, order: u8, s: usize) -> Vec<f64> {
    let s = s.max(1);
    if n.0 == 1 && order == 2 {
        let mut taps = vec![0.0; 2 * s + 1];
        taps[0] = 1.0;
        taps[s] = -2.0;
        taps[2 * s] = 1.0;
        return taps;
    }
    if n.0 == 0 && order > 0 {
        return vec![0.0, 0.0, 0.0];
    }
    let mut half = ((n.0 as usize + 1) * s).div_ceil(2);
    let sample = |j: isize| filter_sample(n.0, order, j as f64 / s as f64);
    while half > 1 && sample(half as isize) == 0.0 && sample(-(half as isize)) == 0.0 {
        half -= 1;
    }
    let half = half.max(1) as isize;
    (-half..=half).map(sample).collect()
}

pub fn make_filter(n: SplineDegree, orders: &[u8], s: usize) -> Result<FilterBank> {
    if let Some(&o) = orders.iter().find(|&&o| o > 2) {
        return Err(RdsError::InvalidConfig(format!("derivative order {o} > 2")));
    }
    Ok(FilterBank {
        degree: n,
        scale: s.max(1),
        derivative_orders: orders.to_vec(),
        taps: orders.iter().map(|&o| filter_taps(n, o, s)).collect(),
    })
}

/// Samples of `Σ_m c[m] ∂^orders φ_m` on the lattice refined by `s`,
/// including the chain-rule factor `Π μ_k^(−orders_k)`.
pub fn eval_spline_grid(c: &ScalarField, n: SplineDegree, s: usize, orders: &[u8]) -> Result<ScalarField> {
    let grid = c.grid();
    if orders.len() != grid.dim() {
        return Err(RdsError::ShapeMismatch(format!("{} orders for a {}-d grid", orders.len(), grid.dim())));
    }
    let bank = make_filter(n, orders, s)?;
    let up = upsample_zeros(c, s);
    let mut out = separable_convolve(&up, &bank.taps, grid.bcs())?;
    let factor: f64 = orders.iter().zip(grid.step()).map(|(&o, &h)| h.powi(-(o as i32))).product();
    if factor != 1.0 {
        out.values_mut().iter_mut().for_each(|v| *v *= factor);
    }
    Ok(out)
}

/// Active basis functions at a point: folded lattice indices with weights.
#[derive(Clone, Debug, Default)]
pub(crate) struct Stencil {
    pub entries: Vec<(usize, f64)>,
}

/// Per-axis active coefficients `(folded index, weight)` at grid coordinate
/// `u`. Returns `None` when `u` lies outside a non-periodic axis.
pub(crate) fn axis_stencil(
    n: SplineDegree,
    order: u8,
    u: f64,
    size: usize,
    bc: BoundaryCondition,
    out: &mut Vec<(usize, f64)>,
) -> bool {
    out.clear();
    let u = if bc.is_periodic() {
        u.rem_euclid(size as f64)
    } else {
        if u < 0.0 || u > (size - 1) as f64 {
            return false;
        }
        u
    };
    let radius = n.radius();
    let lo = (u - radius).floor() as isize;
    let hi = (u + radius).ceil() as isize;
    for m in lo..=hi {
        let w = right_limit(n.0, order, u - m as f64);
        if w == 0.0 {
            continue;
        }
        if let Some(i) = bc.extend(m, size) {
            out.push((i, w));
        }
    }
    true
}

impl Stencil {
    /// Tensor-product stencil at world point `x`, reusing `self`'s storage.
    /// On failure returns the axis along which the point left the domain.
    pub(crate) fn fill(
        &mut self,
        grid: &GridSpec,
        n: SplineDegree,
        orders: &[u8],
        x: &[f64],
        axis_buf: &mut Vec<(usize, f64)>,
    ) -> std::result::Result<(), usize> {
        self.entries.clear();
        self.entries.push((0, 1.0));
        let sizes = grid.sizes();
        let mut stride = grid.len();
        for k in 0..grid.dim() {
            stride /= sizes[k];
            let u = grid.to_grid_coord(k, x[k]);
            if !axis_stencil(n, orders[k], u, sizes[k], grid.bcs()[k], axis_buf) {
                return Err(k);
            }
            let scale = if orders[k] == 0 { 1.0 } else { grid.step()[k].powi(-(orders[k] as i32)) };
            let prev = self.entries.len();
            for p in 0..prev {
                let (base, w) = self.entries[p];
                for &(i, wa) in axis_buf.iter() {
                    self.entries.push((base + i * stride, w * wa * scale));
                }
            }
            self.entries.drain(..prev);
        }
        Ok(())
    }
}

/// Pointwise evaluation of `Σ_m c[m] ∂^orders φ_m(x)` at each of the
/// `pts.len() / d` points (row-major coordinates).
pub fn eval_spline_points(c: &ScalarField, n: SplineDegree, pts: &[f64], orders: &[u8]) -> Result<Vec<f64>> {
    let grid = c.grid();
    let d = grid.dim();
    if orders.len() != d || pts.len() % d != 0 {
        return Err(RdsError::ShapeMismatch("point or order dimension mismatch".into()));
    }
    let vals = c.values();
    let mut st = Stencil::default();
    let mut buf = Vec::new();
    pts.chunks_exact(d)
        .enumerate()
        .map(|(index, x)| match st.fill(grid, n, orders, x, &mut buf) {
            Ok(()) => Ok(st.entries.iter().map(|&(i, w)| vals[i] * w).sum()),
            Err(axis) => Err(RdsError::SampleOutOfDomain { index, axis, coord: x[axis] }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const DEGREES: [SplineDegree; 3] = [SplineDegree::CONSTANT, SplineDegree::LINEAR, SplineDegree::CUBIC];

    /// Cox–de Boor recursion for the cardinal B-spline with knots 0..=n+1,
    /// shifted to be centered.
    fn cox_de_boor(n: usize, x: f64) -> f64 {
        fn rec(i: usize, k: usize, t: f64) -> f64 {
            let fi = i as f64;
            if k == 0 {
                return if fi <= t && t < fi + 1.0 { 1.0 } else { 0.0 };
            }
            let kf = k as f64;
            (t - fi) / kf * rec(i, k - 1, t) + (fi + kf + 1.0 - t) / kf * rec(i + 1, k - 1, t)
        }
        rec(0, n, x + (n as f64 + 1.0) / 2.0)
    }

    #[test]
    fn linear_values() {
        let n = SplineDegree::LINEAR;
        assert_eq!(bspline_eval(n, 0, 0.0).unwrap(), 1.0);
        assert_eq!(bspline_eval(n, 0, 0.5).unwrap(), 0.5);
        assert_eq!(bspline_eval(n, 0, -0.5).unwrap(), 0.5);
        assert_eq!(bspline_eval(n, 0, 1.0).unwrap(), 0.0);
        assert_eq!(bspline_eval(n, 0, -1.3).unwrap(), 0.0);
        assert_eq!(bspline_eval(n, 1, -0.5).unwrap(), 1.0);
        assert_eq!(bspline_eval(n, 1, 0.5).unwrap(), -1.0);
        assert_eq!(bspline_eval(n, 2, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn cubic_matches_cox_de_boor() {
        let n = SplineDegree::CUBIC;
        assert!((bspline_eval(n, 0, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((bspline_eval(n, 0, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((cox_de_boor(3, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        for i in -250..=250 {
            let x = i as f64 * 0.01 + 0.003;
            for deg in [0usize, 1, 3] {
                let a = bspline_eval(SplineDegree(deg as u8), 0, x).unwrap();
                assert!((a - cox_de_boor(deg, x)).abs() < 1e-13, "deg {deg} x {x}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for n in [SplineDegree::LINEAR, SplineDegree::CUBIC] {
            for i in 0..40 {
                let x = -2.2 + i as f64 * 0.1137;
                for order in 1..=(n.0.min(2)) {
                    if n.0 == 1 && order == 2 {
                        continue;
                    }
                    let fd = (bspline_eval(n, order - 1, x + h).unwrap() - bspline_eval(n, order - 1, x - h).unwrap())
                        / (2.0 * h);
                    let an = bspline_eval(n, order, x).unwrap();
                    assert!((fd - an).abs() < 1e-5, "n {n} order {order} x {x}: {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in DEGREES {
            for _ in 0..200 {
                let x: f64 = rng.random_range(-5.0..5.0);
                let s: f64 = (-8..=8).map(|i| bspline_eval(n, 0, x - i as f64).unwrap()).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn filter_examples() {
        assert_eq!(filter_taps(SplineDegree::LINEAR, 0, 1), vec![0.0, 1.0, 0.0]);
        assert_eq!(filter_taps(SplineDegree::LINEAR, 0, 2), vec![0.5, 1.0, 0.5]);
        let cubic = filter_taps(SplineDegree::CUBIC, 0, 1);
        assert_eq!(cubic.len(), 3);
        for (a, b) in cubic.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(filter_taps(SplineDegree::LINEAR, 1, 1), vec![0.5, 0.0, -0.5]);
        assert_eq!(filter_taps(SplineDegree::LINEAR, 2, 1), vec![1.0, -2.0, 1.0]);
        assert_eq!(filter_taps(SplineDegree::CUBIC, 2, 1), vec![1.0, -2.0, 1.0]);
        assert_eq!(filter_taps(SplineDegree::CUBIC, 1, 1), vec![0.5, 0.0, -0.5]);
        assert_eq!(filter_taps(SplineDegree::CONSTANT, 0, 4), vec![0.5, 1.0, 1.0, 1.0, 0.5]);
    }

    #[test]
    fn filter_symmetry_and_zero_sum() {
        for n in DEGREES {
            for s in 1..6 {
                for order in 0..=2u8 {
                    let taps = filter_taps(n, order, s);
                    assert_eq!(taps.len() % 2, 1);
                    let len = taps.len();
                    for i in 0..len {
                        let mirrored = taps[len - 1 - i];
                        if order % 2 == 0 {
                            assert!((taps[i] - mirrored).abs() < 1e-15);
                        } else {
                            assert!((taps[i] + mirrored).abs() < 1e-15);
                        }
                    }
                    let sum: f64 = taps.iter().sum();
                    if order >= 1 {
                        assert!(sum.abs() < 1e-12, "n {n} s {s} order {order}: {sum}");
                    } else {
                        assert!((sum - s as f64).abs() < 1e-12);
                    }
                }
            }
        }
    }

    fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
        let v = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        ScalarField::new(grid.clone(), v).unwrap()
    }

    /// Direct basis summation over all coefficients and all periodic images.
    fn basis_sum(c: &ScalarField, n: SplineDegree, orders: &[u8], x: &[f64]) -> f64 {
        let g = c.grid();
        let mut acc = 0.0;
        for flat in 0..g.len() {
            let m = g.unravel(flat);
            let mut w = 1.0;
            for k in 0..g.dim() {
                let u = (x[k] - g.origin()[k]) / g.step()[k];
                let mut wk = 0.0;
                let nk = g.sizes()[k] as isize;
                match g.bcs()[k] {
                    BoundaryCondition::Periodic => {
                        for img in -3..=3 {
                            wk += bspline_eval(n, orders[k], u - (m[k] as isize + img * nk) as f64).unwrap();
                        }
                    }
                    BoundaryCondition::ZeroPad => wk = bspline_eval(n, orders[k], u - m[k] as f64).unwrap(),
                    BoundaryCondition::Mirror => {
                        let period = 2 * (nk - 1);
                        for img in -3..=3 {
                            let a = m[k] as isize + img * period;
                            wk += bspline_eval(n, orders[k], u - a as f64).unwrap();
                            if m[k] != 0 && m[k] as isize != nk - 1 {
                                let b = -(m[k] as isize) + img * period;
                                wk += bspline_eval(n, orders[k], u - b as f64).unwrap();
                            }
                        }
                    }
                }
                w *= wk * g.step()[k].powi(-(orders[k] as i32));
            }
            acc += c.values()[flat] * w;
        }
        acc
    }

    #[test]
    fn grid_eval_matches_basis_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = GridSpec::from_box(&[7, 7], &[0.0, -1.0], &[2.0, 1.0], &[BoundaryCondition::Periodic; 2]).unwrap();
        let c = random_field(&grid, &mut rng);
        let n = SplineDegree::LINEAR;
        let s = 3;
        let fine = eval_spline_grid(&c, n, s, &[0, 0]).unwrap();
        let coords = fine.grid().node_coords();
        for (i, x) in coords.chunks_exact(2).enumerate() {
            assert!((fine.values()[i] - basis_sum(&c, n, &[0, 0], x)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_eval_matches_points_all_bcs_and_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        use BoundaryCondition::*;
        for bcs in [[Periodic, ZeroPad], [Mirror, Periodic]] {
            let grid = GridSpec::from_box(&[6, 8], &[0.0, 0.0], &[1.5, 2.0], &bcs).unwrap();
            let c = random_field(&grid, &mut rng);
            for n in [SplineDegree::LINEAR, SplineDegree::CUBIC] {
                for orders in [[0u8, 0u8], [1, 0], [0, 1], [1, 1], [2, 0]] {
                    if n.0 == 1 && orders.contains(&1) {
                        continue; // knots sit on fine nodes: one-sided vs averaged slopes
                    }
                    if n.0 == 1 && orders.contains(&2) {
                        continue;
                    }
                    let s = 3;
                    let fine = eval_spline_grid(&c, n, s, &orders).unwrap();
                    let pts = fine.grid().node_coords();
                    let direct = eval_spline_points(&c, n, &pts, &orders).unwrap();
                    for (a, b) in fine.values().iter().zip(&direct) {
                        assert!((a - b).abs() < 1e-10, "{bcs:?} n {n} {orders:?}: {a} vs {b}");
                    }
                    // Off-lattice points against the explicit basis sum.
                    for _ in 0..20 {
                        let x = [rng.random_range(0.0..1.5), rng.random_range(0.0..2.0)];
                        let v = eval_spline_points(&c, n, &x, &orders).unwrap()[0];
                        assert!((v - basis_sum(&c, n, &orders, &x)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_coefficients() {
        let grid = GridSpec::unit_periodic(&[5, 6]).unwrap();
        let c = ScalarField::constant(grid, 2.5);
        for n in DEGREES {
            let v = eval_spline_grid(&c, n, 4, &[0, 0]).unwrap();
            assert!(v.values().iter().all(|x| (x - 2.5).abs() < 1e-12));
            if n.0 > 0 {
                for orders in [[1u8, 0u8], [1, 1], [0, 2]] {
                    let v = eval_spline_grid(&c, n, 2, &orders).unwrap();
                    assert!(v.values().iter().all(|x| x.abs() < 1e-9));
                }
            }
        }
    }

    #[test]
    fn filter_consistency_at_scale_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let grid = GridSpec::unit_periodic(&[9]).unwrap();
        let c = random_field(&grid, &mut rng);
        let lin = eval_spline_grid(&c, SplineDegree::LINEAR, 1, &[0]).unwrap();
        assert_eq!(lin.values(), c.values());
        let cub = eval_spline_grid(&c, SplineDegree::CUBIC, 1, &[0]).unwrap();
        for i in 0..9 {
            let v = c.values();
            let want = (v[(i + 8) % 9] + 4.0 * v[i] + v[(i + 1) % 9]) / 6.0;
            assert!((cub.values()[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn scale_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let grid = GridSpec::from_box(&[5, 6], &[0.0, 0.0], &[1.0, 1.0],
            &[BoundaryCondition::Periodic, BoundaryCondition::Mirror]).unwrap();
        let c = random_field(&grid, &mut rng);
        for n in [SplineDegree::LINEAR, SplineDegree::CUBIC] {
            let a = eval_spline_grid(&c, n, 2, &[0, 0]).unwrap();
            let b = eval_spline_grid(&c, n, 4, &[0, 0]).unwrap();
            let restricted = crate::grid::downsample(&b, a.grid(), 2).unwrap();
            assert!(restricted.max_abs_diff(&a) < 1e-13);
        }
    }

    #[test]
    fn point_evaluation_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let grid = GridSpec::from_box(&[6, 5], &[0.0, 0.0], &[3.0, 1.0],
            &[BoundaryCondition::Periodic, BoundaryCondition::ZeroPad]).unwrap();
        let c = random_field(&grid, &mut rng);
        let node = grid.grid_to_world(&[2, 3]);
        let v = eval_spline_points(&c, SplineDegree::LINEAR, &node, &[0, 0]).unwrap()[0];
        assert_eq!(v, c.get(&[2, 3]));
        let x = [0.77, 0.31];
        let shifted = [0.77 + 3.0, 0.31];
        let a = eval_spline_points(&c, SplineDegree::CUBIC, &x, &[0, 0]).unwrap()[0];
        let b = eval_spline_points(&c, SplineDegree::CUBIC, &shifted, &[0, 0]).unwrap()[0];
        assert!((a - b).abs() < 1e-12);
        let err = eval_spline_points(&c, SplineDegree::LINEAR, &[0.5, 1.2], &[0, 0]).unwrap_err();
        assert!(matches!(err, RdsError::SampleOutOfDomain { index: 0, axis: 1, .. }));
    }

    #[test]
    fn points_match_dense_basis_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let grid = GridSpec::unit_periodic(&[6, 7]).unwrap();
        let c = random_field(&grid, &mut rng);
        let pts: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..1.0)).collect();
        for n in DEGREES {
            let got = eval_spline_points(&c, n, &pts, &[0, 0]).unwrap();
            for (i, x) in pts.chunks_exact(2).enumerate() {
                assert!((got[i] - basis_sum(&c, n, &[0, 0], x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(matches!(SplineDegree::new(2), Err(RdsError::UnsupportedDegree(2))));
        assert!(SplineDegree::new(3).is_ok());
    }
}
