//! Discrete exchange operators: the conservative flux-form `∇·(a^ε ∇u)` and the
//! constant-tensor homogenized operator `∇·(∇u A^H)`.

use rayon::prelude::*;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, VectorField};

/// Fields above this many nodes are processed in parallel.
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// Default resolution guard: at least this many grid points per period ε.
pub const DEFAULT_MIN_POINTS_PER_PERIOD: usize = 8;

/// Linear operator driving the Landau-Lifshitz dynamics, applied componentwise.
pub trait ExchangeOperator: Sync {
    fn grid(&self) -> &PeriodicGrid;

    fn apply_into(&self, m: &VectorField, out: &mut VectorField);

    /// Upper bound on the magnitude of the operator's eigenvalues.
    fn spectral_radius_bound(&self) -> f64;

    fn apply(&self, m: &VectorField) -> VectorField {
        let mut out = VectorField::zeros(*self.grid());
        self.apply_into(m, &mut out);
        out
    }
}

/// `L u = ∇·(a^ε ∇u)` discretised per axis as
/// `(a_{i+1/2}(u_{i+1} - u_i) - a_{i-1/2}(u_i - u_{i-1})) / h²`
/// with the coefficient sampled at cell midpoints.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    grid: PeriodicGrid,
    /// `faces[k][idx]` is `a` at `x_idx + h/2 e_k`.
    faces: Vec<Vec<f64>>,
    a_max: f64,
}

impl DiffusionOperator {
    pub fn new(grid: PeriodicGrid, coef: &Coefficient) -> Result<Self> {
        Self::with_guard(grid, coef, DEFAULT_MIN_POINTS_PER_PERIOD)
    }

    /// Build with a custom resolution guard `h <= ε / min_points_per_period`.
    pub fn with_guard(
        grid: PeriodicGrid,
        coef: &Coefficient,
        min_points_per_period: usize,
    ) -> Result<Self> {
        if coef.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "coefficient dimension {} vs grid dimension {}",
                coef.dim(),
                grid.dim()
            )));
        }
        let h = grid.h();
        if !coef.cell().is_constant()
            && h > coef.eps() / min_points_per_period as f64 * (1.0 + 1e-12)
        {
            return Err(Error::GridTooCoarse {
                h,
                eps: coef.eps(),
                min_points: min_points_per_period,
            });
        }
        let faces = (0..grid.dim())
            .map(|k| {
                (0..grid.len())
                    .map(|idx| {
                        let mut x = grid.position(idx);
                        x[k] += 0.5 * h;
                        coef.eval(&x[..grid.dim()])
                    })
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>();
        let a_max = faces.iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
        Ok(Self { grid, faces, a_max })
    }

    /// Face coefficients along `axis`, indexed by the node on the face's low side.
    pub fn face_coefficients(&self, axis: usize) -> &[f64] {
        &self.faces[axis]
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// Flux `a_{i+1/2} (m_{i+1} - m_i) / h` through the forward face of `idx` along `axis`.
    #[inline]
    pub fn face_flux(&self, m: &VectorField, idx: usize, axis: usize) -> [f64; 3] {
        let f = self.grid.forward(idx, axis);
        let s = self.faces[axis][idx] / self.grid.h();
        let (a, b) = (m.data[idx], m.data[f]);
        [s * (b[0] - a[0]), s * (b[1] - a[1]), s * (b[2] - a[2])]
    }

    #[inline]
    fn node_value(&self, u: &[[f64; 3]], idx: usize, inv_h2: f64) -> [f64; 3] {
        let mut acc = [0.0; 3];
        let ui = u[idx];
        for k in 0..self.grid.dim() {
            let f = self.grid.forward(idx, k);
            let b = self.grid.backward(idx, k);
            let ap = self.faces[k][idx];
            let am = self.faces[k][b];
            for c in 0..3 {
                acc[c] += ap * (u[f][c] - ui[c]) - am * (ui[c] - u[b][c]);
            }
        }
        acc.map(|v| v * inv_h2)
    }

    /// Apply to a scalar field stored as a flat slice.
    pub fn apply_scalar(&self, u: &[f64], out: &mut [f64]) {
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        let body = |(idx, o): (usize, &mut f64)| {
            let mut acc = 0.0;
            for k in 0..self.grid.dim() {
                let f = self.grid.forward(idx, k);
                let b = self.grid.backward(idx, k);
                acc += self.faces[k][idx] * (u[f] - u[idx]) - self.faces[k][b] * (u[idx] - u[b]);
            }
            *o = acc * inv_h2;
        };
        if out.len() >= PARALLEL_THRESHOLD {
            out.par_iter_mut().enumerate().for_each(body);
        } else {
            out.iter_mut().enumerate().for_each(body);
        }
    }

    /// Discrete energy `Σ_faces h^d a_face |D⁺m|²`.
    pub fn energy(&self, m: &VectorField) -> f64 {
        let mut e = 0.0;
        for k in 0..self.grid.dim() {
            for idx in 0..self.grid.len() {
                let f = self.face_flux(m, idx, k);
                let a = self.faces[k][idx];
                e += (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) / a;
            }
        }
        e * self.grid.cell_volume()
    }
}

impl ExchangeOperator for DiffusionOperator {
    fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn apply_into(&self, m: &VectorField, out: &mut VectorField) {
        debug_assert_eq!(m.grid, self.grid);
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        let body = |(idx, o): (usize, &mut [f64; 3])| *o = self.node_value(&m.data, idx, inv_h2);
        if out.data.len() >= PARALLEL_THRESHOLD {
            out.data.par_iter_mut().enumerate().for_each(body);
        } else {
            out.data.iter_mut().enumerate().for_each(body);
        }
    }

    fn spectral_radius_bound(&self) -> f64 {
        4.0 * self.grid.dim() as f64 * self.a_max / (self.grid.h() * self.grid.h())
    }
}

/// `L u` for a vector field with the oscillatory coefficient `c`.
pub fn apply_l(u: &VectorField, c: &Coefficient) -> Result<VectorField> {
    Ok(DiffusionOperator::new(u.grid, c)?.apply(u))
}

/// A symmetric positive-definite `d×d` tensor (stored padded to 3×3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogenizedTensor {
    dim: usize,
    entries: [[f64; 3]; 3],
}

impl HomogenizedTensor {
    /// Build from a row-major `d×d` slice of rows. Fails unless symmetric positive definite.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if !(1..=3).contains(&dim) || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(
                "tensor must be square with 1..=3 rows".into(),
            ));
        }
        let mut entries = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                entries[i][j] = rows[i][j];
            }
        }
        let t = Self { dim, entries };
        let scale = t.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in 0..i {
                if (entries[i][j] - entries[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "tensor not symmetric: {rows:?}"
                    )));
                }
            }
        }
        if t.eigenvalues().iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tensor not positive definite: {rows:?}"
            )));
        }
        Ok(t)
    }

    pub fn isotropic(dim: usize, c: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { c } else { 0.0 }).collect())
            .collect();
        Self::new(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.entries[i][..self.dim].to_vec())
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| self.entries[i][j]);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// `∇·(∇u A)` with constant `A`: three-point second differences on the diagonal and
/// the four-point cross difference for mixed derivatives.
#[derive(Debug, Clone)]
pub struct HomogenizedOperator {
    grid: PeriodicGrid,
    tensor: HomogenizedTensor,
}

impl HomogenizedOperator {
    pub fn new(grid: PeriodicGrid, tensor: HomogenizedTensor) -> Result<Self> {
        if tensor.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "tensor dimension {} vs grid dimension {}",
                tensor.dim(),
                grid.dim()
            )));
        }
        Ok(Self { grid, tensor })
    }

    pub fn tensor(&self) -> &HomogenizedTensor {
        &self.tensor
    }

    #[inline]
    fn node_value(&self, u: &[[f64; 3]], idx: usize, inv_h2: f64) -> [f64; 3] {
        let g = &self.grid;
        let d = g.dim();
        let mut acc = [0.0; 3];
        let ui = u[idx];
        for k in 0..d {
            let akk = self.tensor.get(k, k);
            let (f, b) = (g.forward(idx, k), g.backward(idx, k));
            for c in 0..3 {
                acc[c] += akk * (u[f][c] - 2.0 * ui[c] + u[b][c]);
            }
            for l in (k + 1)..d {
                let akl = self.tensor.get(k, l) + self.tensor.get(l, k);
                if akl == 0.0 {
                    continue;
                }
                let pp = g.forward(g.forward(idx, k), l);
                let pm = g.backward(g.forward(idx, k), l);
                let mp = g.forward(g.backward(idx, k), l);
                let mm = g.backward(g.backward(idx, k), l);
                for c in 0..3 {
                    acc[c] += 0.25 * akl * (u[pp][c] - u[pm][c] - u[mp][c] + u[mm][c]);
                }
            }
        }
        acc.map(|v| v * inv_h2)
    }
}

impl ExchangeOperator for HomogenizedOperator {
    fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn apply_into(&self, m: &VectorField, out: &mut VectorField) {
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        let body = |(idx, o): (usize, &mut [f64; 3])| *o = self.node_value(&m.data, idx, inv_h2);
        if out.data.len() >= PARALLEL_THRESHOLD {
            out.data.par_iter_mut().enumerate().for_each(body);
        } else {
            out.data.iter_mut().enumerate().for_each(body);
        }
    }

    fn spectral_radius_bound(&self) -> f64 {
        let d = self.grid.dim();
        let mut s = 0.0;
        for k in 0..d {
            s += 4.0 * self.tensor.get(k, k).abs();
            for l in 0..d {
                if l != k {
                    s += self.tensor.get(k, l).abs();
                }
            }
        }
        s / (self.grid.h() * self.grid.h())
    }
}

/// `∇·(∇m A)` for a vector field.
pub fn apply_lh(m: &VectorField, a: &HomogenizedTensor) -> Result<VectorField> {
    Ok(HomogenizedOperator::new(m.grid, *a)?.apply(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::CellCoefficient;
    use crate::grid::dot;
    use std::f64::consts::PI;

    fn oscillatory(eps: f64) -> Coefficient {
        Coefficient::new(CellCoefficient::paper_1d(), eps).unwrap()
    }

    #[test]
    fn constant_field_maps_to_zero() {
        let g = PeriodicGrid::new(2, 32, 1.0).unwrap();
        let c = Coefficient::new(CellCoefficient::paper_2d(), 0.25).unwrap();
        let u = VectorField::constant(g, [0.3, -1.0, 2.0]);
        assert!(apply_l(&u, &c).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn guard_rejects_unresolved_oscillation() {
        let g = PeriodicGrid::new(1, 64, 1.0).unwrap();
        let err = apply_l(&VectorField::zeros(g), &oscillatory(1.0 / 10.0)).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
        assert!(DiffusionOperator::with_guard(g, &oscillatory(1.0 / 10.0), 4).is_ok());
    }

    #[test]
    fn laplacian_of_sine_converges_second_order() {
        let c = Coefficient::constant(1, 1.0).unwrap();
        let mut errs = vec![];
        for n in [16, 32, 64] {
            let g = PeriodicGrid::new(1, n, 1.0).unwrap();
            let u = VectorField::from_fn(g, |x| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
            let lu = apply_l(&u, &c).unwrap();
            let e = (0..g.len())
                .map(|i| (lu.data[i][0] + 4.0 * PI * PI * u.data[i][0]).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn discrete_conservation() {
        let g = PeriodicGrid::new(1, 160, 1.0).unwrap();
        let u = VectorField::from_fn(g, |x| {
            [(6.0 * PI * x[0]).cos() + x[0], 1.0, (2.0 * PI * x[0]).sin()]
        });
        let lu = apply_l(&u, &oscillatory(1.0 / 20.0)).unwrap();
        let total = lu.mean();
        let scale = u.l2_norm();
        for c in 0..3 {
            assert!(
                total[c].abs() <= 1e-10 * scale,
                "component {c}: {}",
                total[c]
            );
        }
    }

    #[test]
    fn constant_coefficient_scales_laplacian() {
        let g = PeriodicGrid::new(2, 16, 1.0).unwrap();
        let u = VectorField::from_fn(g, |x| [(2.0 * PI * x[0]).sin() * x[1], x[0] * x[0], 0.1]);
        let l1 = apply_l(&u, &Coefficient::constant(2, 1.0).unwrap()).unwrap();
        let l3 = apply_l(&u, &Coefficient::constant(2, 3.0).unwrap()).unwrap();
        let scale = l3.max_abs();
        for (a, b) in l1.data.iter().zip(&l3.data) {
            for c in 0..3 {
                assert!((3.0 * a[c] - b[c]).abs() <= 1e-14 * scale);
            }
        }
        let lh = apply_lh(&u, &HomogenizedTensor::isotropic(2, 3.0).unwrap()).unwrap();
        assert!(lh.max_abs_diff(&l3).unwrap() < 1e-9);
    }

    #[test]
    fn homogenized_operator_matches_analytic_second_derivatives() {
        // u = sin(2π x1) cos(2π x2) in every component:
        // ∇·(∇u A) = A11 u11 + 2 A12 u12 + A22 u22.
        let a = HomogenizedTensor::new(&[vec![0.6, 0.1], vec![0.1, 0.7]]).unwrap();
        let mut errs = vec![];
        for n in [32, 64] {
            let g = PeriodicGrid::new(2, n, 1.0).unwrap();
            let k = 2.0 * PI;
            let u = VectorField::from_fn(g, |x| {
                let v = (k * x[0]).sin() * (k * x[1]).cos();
                [v, 0.0, v]
            });
            let lu = apply_lh(&u, &a).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..g.len() {
                let x = g.position(i);
                let (s1, c1, s2, c2) = (
                    (k * x[0]).sin(),
                    (k * x[0]).cos(),
                    (k * x[1]).sin(),
                    (k * x[1]).cos(),
                );
                let exact = -k * k * (0.6 * s1 * c2 + 0.7 * s1 * c2) - 2.0 * 0.1 * k * k * c1 * s2;
                e = e.max((lu.data[i][0] - exact).abs());
            }
            errs.push(e);
        }
        let ratio = errs[0] / errs[1];
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn energy_is_nonnegative_and_zero_for_constants() {
        let g = PeriodicGrid::new(1, 64, 1.0).unwrap();
        let op = DiffusionOperator::new(g, &oscillatory(1.0 / 8.0)).unwrap();
        assert_eq!(op.energy(&VectorField::constant(g, [0.0, 0.0, 1.0])), 0.0);
        let u = VectorField::from_fn(g, |x| [(2.0 * PI * x[0]).sin(), 0.0, 1.0]);
        assert!(op.energy(&u) > 0.0);
        // -Σ u·Lu h = energy (summation by parts)
        let lu = op.apply(&u);
        let pairing: f64 = u
            .data
            .iter()
            .zip(&lu.data)
            .map(|(a, b)| dot(*a, *b))
            .sum::<f64>()
            * g.h();
        assert!((op.energy(&u) + pairing).abs() < 1e-9 * op.energy(&u));
    }

    #[test]
    fn tensor_validation() {
        assert!(HomogenizedTensor::new(&[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(HomogenizedTensor::new(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        let t = HomogenizedTensor::new(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ev = t.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
