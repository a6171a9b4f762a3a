//! Uniform periodic lattices and the scalar / vector fields sampled on them.

use crate::error::{Error, Result};

/// A uniform periodic lattice on `[0, ell)^dim` with `n` points per axis.
///
/// Node `0` sits at the origin, so the macro point is sampled exactly.
/// Linear indices run with axis 0 fastest: `idx = i0 + n*i1 + n^2*i2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    ell: f64,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize, ell: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!(
                "{n} points per axis, need at least 4"
            )));
        }
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "domain length {ell} must be positive"
            )));
        }
        Ok(Self { dim, n, ell })
    }

    /// Unit cell `[0,1)^dim`.
    pub fn unit_cell(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn h(&self) -> f64 {
        self.ell / self.n as f64
    }

    /// Number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    /// Per-axis integer coordinates of a linear index.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = idx;
        for slot in out.iter_mut().take(self.dim) {
            *slot = rest % self.n;
            rest /= self.n;
        }
        out
    }

    /// Linear index of a (possibly negative or out of range) multi-index, wrapped.
    pub fn wrap_index(&self, ijk: [isize; 3]) -> usize {
        let n = self.n as isize;
        (0..self.dim)
            .map(|k| ijk[k].rem_euclid(n) as usize * self.stride(k))
            .sum()
    }

    /// Neighbour of `idx` one step forward along `axis`, wrapping periodically.
    #[inline]
    pub fn forward(&self, idx: usize, axis: usize) -> usize {
        let s = self.stride(axis);
        let i = (idx / s) % self.n;
        if i + 1 == self.n {
            idx + s - self.n * s
        } else {
            idx + s
        }
    }

    /// Neighbour of `idx` one step backward along `axis`, wrapping periodically.
    #[inline]
    pub fn backward(&self, idx: usize, axis: usize) -> usize {
        let s = self.stride(axis);
        let i = (idx / s) % self.n;
        if i == 0 {
            idx + self.n * s - s
        } else {
            idx - s
        }
    }

    /// Position of node `idx` in `[0, ell)^dim` (unused axes are zero).
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let h = self.h();
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = m[k] as f64 * h;
        }
        x
    }

    /// Minimal-image coordinate of a 1D index, in `[-ell/2, ell/2)`.
    pub fn centered_coordinate(&self, i: usize) -> f64 {
        let i = i % self.n;
        let shifted = if 2 * i >= self.n {
            i as isize - self.n as isize
        } else {
            i as isize
        };
        shifted as f64 * self.h()
    }

    /// Position of node `idx` in `[-ell/2, ell/2)^dim`.
    pub fn centered_position(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = self.centered_coordinate(m[k]);
        }
        x
    }

    pub fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// One real value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: PeriodicGrid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, data }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|v| *v -= m);
    }

    /// Discrete `L^2` norm with node weight `h^d`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Three real values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: PeriodicGrid,
    pub data: Vec<[f64; 3]>,
}

impl VectorField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            data: vec![[0.0; 3]; grid.len()],
        }
    }

    pub fn constant(grid: PeriodicGrid, v: [f64; 3]) -> Self {
        Self {
            grid,
            data: vec![v; grid.len()],
        }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, data }
    }

    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|v| v[c]).collect(),
        }
    }

    /// Rescale every node to unit length.
    pub fn normalize(&mut self) {
        for v in &mut self.data {
            let r = norm(*v);
            v.iter_mut().for_each(|x| *x /= r);
        }
    }

    /// `max_x | |m(x)| - 1 |`.
    pub fn max_norm_deviation(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, v| m.max((norm(*v) - 1.0).abs()))
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        self.max_norm_deviation() <= tol
    }

    /// Discrete `L^2` norm with node weight `h^d`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|v| dot(*v, *v)).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, v| v.iter().fold(m, |m, x| m.max(x.abs())))
    }

    pub fn mean(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for v in &self.data {
            for c in 0..3 {
                s[c] += v[c];
            }
        }
        s.map(|x| x / self.data.len() as f64)
    }

    /// Largest nodewise component difference.
    pub fn max_abs_diff(&self, other: &VectorField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| {
            (0..3).fold(m, |m, c| m.max((a[c] - b[c]).abs()))
        }))
    }

    /// `self + s * other`, nodewise.
    pub fn axpy(&mut self, s: f64, other: &VectorField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for c in 0..3 {
                a[c] += s * b[c];
            }
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.grid.check_same(&other.grid)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| sub(*a, *b))
            .collect();
        Ok(VectorField {
            grid: self.grid,
            data,
        })
    }
}

/// Nodewise cross product `u × v`.
pub fn cross_fields(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    u.grid.check_same(&v.grid)?;
    let data = u
        .data
        .iter()
        .zip(&v.data)
        .map(|(a, b)| cross(*a, *b))
        .collect();
    Ok(VectorField { grid: u.grid, data })
}

/// Nodewise triple product `u × (v × w)`.
pub fn triple_fields(u: &VectorField, v: &VectorField, w: &VectorField) -> Result<VectorField> {
    u.grid.check_same(&v.grid)?;
    u.grid.check_same(&w.grid)?;
    let data = u
        .data
        .iter()
        .zip(&v.data)
        .zip(&w.data)
        .map(|((a, b), c)| cross(*a, cross(*b, *c)))
        .collect();
    Ok(VectorField { grid: u.grid, data })
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(s: f64, a: [f64; 3]) -> [f64; 3] {
    [s * a[0], s * a[1], s * a[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> PeriodicGrid {
        PeriodicGrid::new(1, 8, 1.0).unwrap()
    }

    #[test]
    fn rejects_small_or_bad_grids() {
        assert!(PeriodicGrid::new(1, 3, 1.0).is_err());
        assert!(PeriodicGrid::new(0, 8, 1.0).is_err());
        assert!(PeriodicGrid::new(2, 8, 0.0).is_err());
    }

    #[test]
    fn neighbours_wrap() {
        let g = PeriodicGrid::new(2, 4, 1.0).unwrap();
        assert_eq!(g.forward(3, 0), 0);
        assert_eq!(g.backward(0, 0), 3);
        assert_eq!(g.forward(12, 1), 0);
        assert_eq!(g.backward(1, 1), 13);
        assert_eq!(g.wrap_index([-1, 5, 0]), 3 + 4);
    }

    #[test]
    fn origin_is_node_zero() {
        let g = PeriodicGrid::new(2, 10, 2.0).unwrap();
        assert_eq!(g.position(0), [0.0, 0.0, 0.0]);
        assert_eq!(g.centered_coordinate(9), -0.2);
        assert!((g.centered_coordinate(5) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn cross_identities() {
        let g = grid1();
        let ex = VectorField::constant(g, [1.0, 0.0, 0.0]);
        let ey = VectorField::constant(g, [0.0, 1.0, 0.0]);
        let ez = cross_fields(&ex, &ey).unwrap();
        assert!(ez.data.iter().all(|v| *v == [0.0, 0.0, 1.0]));
        assert!(cross_fields(&ex, &ex).unwrap().max_abs() == 0.0);

        let u = VectorField::from_fn(g, |x| [x[0].sin(), 2.0, x[0] * x[0] - 1.0]);
        let v = VectorField::from_fn(g, |x| [1.0, x[0].cos(), 0.3]);
        let uv = cross_fields(&u, &v).unwrap();
        for (a, b) in u.data.iter().zip(&uv.data) {
            assert!(dot(*a, *b).abs() < 1e-15);
        }
    }

    #[test]
    fn triple_matches_bac_cab() {
        let g = grid1();
        let u = VectorField::from_fn(g, |x| [1.0 + x[0], 0.2, -0.5]);
        let v = VectorField::from_fn(g, |x| [0.1, x[0], 1.0]);
        let w = VectorField::from_fn(g, |x| [x[0] * x[0], -1.0, 0.4]);
        let t = triple_fields(&u, &v, &w).unwrap();
        for i in 0..g.len() {
            let (a, b, c) = (u.data[i], v.data[i], w.data[i]);
            let expect = sub(scale(dot(a, c), b), scale(dot(a, b), c));
            for k in 0..3 {
                assert!((t.data[i][k] - expect[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mismatched_grids_error() {
        let a = VectorField::zeros(grid1());
        let b = VectorField::zeros(PeriodicGrid::new(1, 16, 1.0).unwrap());
        assert!(matches!(cross_fields(&a, &b), Err(Error::GridMismatch(_))));
    }
}
