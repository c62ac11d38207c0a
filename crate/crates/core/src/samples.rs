use crate::error::{RdsError, Result};
use crate::grid::GridSpec;

/// `N` points in `d` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    dim: usize,
    coords: Vec<f64>,
    /// Seed of the generator that produced the set, when known.
    pub seed: Option<u64>,
}

impl SampleSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(RdsError::ShapeMismatch(format!("{} coordinates do not form {dim}-D points", coords.len())));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(RdsError::InvalidConfig("non-finite sample coordinate".into()));
        }
        Ok(SampleSet { dim, coords, seed: None })
    }

    pub fn empty(dim: usize) -> Self {
        SampleSet { dim, coords: Vec::new(), seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
    }

    /// Keeps the points for which `keep(i)` holds, in order.
    pub fn filter_indexed(&self, mut keep: impl FnMut(usize) -> bool) -> SampleSet {
        let coords = self.iter().enumerate().filter(|(i, _)| keep(*i)).flat_map(|(_, x)| x.iter().copied()).collect();
        SampleSet { dim: self.dim, coords, seed: self.seed }
    }

    /// Wraps coordinates on the periodic axes of `grid` into `[o, o + Nμ)`.
    pub fn fold_into(&mut self, grid: &GridSpec) {
        let d = self.dim;
        for x in self.coords.chunks_exact_mut(d) {
            for k in 0..d.min(grid.dim()) {
                if grid.bcs()[k].is_periodic() {
                    let o = grid.origin()[k];
                    let l = grid.extent(k);
                    let mut v = o + (x[k] - o).rem_euclid(l);
                    if v >= o + l {
                        v = o;
                    }
                    x[k] = v;
                }
            }
        }
    }

    /// Verifies every point lies in the closed box of the non-periodic axes.
    pub fn check_inside(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(RdsError::ShapeMismatch(format!("{}-D samples on a {}-D grid", self.dim, grid.dim())));
        }
        for (index, x) in self.iter().enumerate() {
            for axis in 0..self.dim {
                if grid.bcs()[axis].is_periodic() {
                    continue;
                }
                let u = grid.to_grid_coord(axis, x[axis]);
                if !(0.0..=(grid.sizes()[axis] - 1) as f64).contains(&u) {
                    return Err(RdsError::SampleOutOfDomain { index, axis, coord: x[axis] });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryCondition;

    #[test]
    fn folding_and_bounds() {
        let grid = GridSpec::from_box(&[4, 5], &[0.0, -1.0], &[1.0, 1.0],
            &[BoundaryCondition::Periodic, BoundaryCondition::ZeroPad]).unwrap();
        let mut s = SampleSet::new(2, vec![1.25, 0.0, -0.25, 1.0, 3.0, -1.0]).unwrap();
        s.fold_into(&grid);
        assert!((s.point(0)[0] - 0.25).abs() < 1e-15);
        assert!((s.point(1)[0] - 0.75).abs() < 1e-15);
        assert_eq!(s.point(2)[0], 0.0);
        assert!(s.check_inside(&grid).is_ok());
        let bad = SampleSet::new(2, vec![0.1, 0.0, 0.2, 1.5]).unwrap();
        assert!(matches!(bad.check_inside(&grid), Err(RdsError::SampleOutOfDomain { index: 1, axis: 1, .. })));
    }

    #[test]
    fn shape_validation() {
        assert!(SampleSet::new(2, vec![0.0; 3]).is_err());
        assert!(SampleSet::new(1, vec![f64::NAN]).is_err());
        assert_eq!(SampleSet::empty(3).len(), 0);
    }
}
