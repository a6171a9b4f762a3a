//! Periodic cell problem and the homogenized tensor.
//!
//! For each direction `j` the corrector `χ_j` solves the flux-form discretisation of
//! `∇·(a(e_j + ∇χ_j)) = 0` on the unit cell with zero mean. The homogenized tensor is
//! the cell average of the face fluxes `a_{i-face}(δ_ij + D_i⁺χ_j)`.

use std::sync::Arc;

use crate::coefficient::{CellCoefficient, Coefficient};
use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, ScalarField};
use crate::linalg::cg_mean_zero;
use crate::operator::{DiffusionOperator, HomogenizedTensor};

/// Smallest cell resolution accepted by [`solve_cell`].
pub const MIN_CELL_POINTS: usize = 16;
/// Smallest resolution accepted by [`solve_cell_commensurate`].
pub const MIN_COMMENSURATE_POINTS: usize = 4;

const CG_TOL: f64 = 1e-12;
const CG_ACCEPT: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CellSolution {
    grid: PeriodicGrid,
    coef: Arc<CellCoefficient>,
    op: DiffusionOperator,
    /// One zero-mean corrector per direction.
    pub chi: Vec<ScalarField>,
    /// CG iterations and final relative residual per direction.
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
}

/// `A^H` after symmetrisation, with the size of the antisymmetric part that was removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorEstimate {
    pub tensor: HomogenizedTensor,
    pub asymmetry: f64,
}

/// Solve the cell problem on an `n^d` unit-cell grid (`n >= 16`).
pub fn solve_cell(a: &CellCoefficient, n: usize) -> Result<CellSolution> {
    if n < MIN_CELL_POINTS {
        return Err(Error::InvalidGrid(format!(
            "cell grid needs at least {MIN_CELL_POINTS} points, got {n}"
        )));
    }
    solve_with(Arc::new(a.clone()), n)
}

/// Solve the cell problem at the resolution of a micro lattice with `points_per_period`
/// nodes per `ε`. The face values then coincide with the micro lattice faces, so the
/// resulting tensor is the exact homogenized limit of the discrete micro operator.
pub fn solve_cell_commensurate(
    a: &CellCoefficient,
    points_per_period: usize,
) -> Result<CellSolution> {
    if points_per_period < MIN_COMMENSURATE_POINTS {
        return Err(Error::InvalidGrid(format!(
            "commensurate cell grid needs at least {MIN_COMMENSURATE_POINTS} points, got {points_per_period}"
        )));
    }
    solve_with(Arc::new(a.clone()), points_per_period)
}

fn solve_with(coef: Arc<CellCoefficient>, n: usize) -> Result<CellSolution> {
    let d = coef.dim();
    let grid = PeriodicGrid::unit_cell(d, n)?;
    let op = DiffusionOperator::with_guard(grid, &Coefficient::shared(coef.clone(), 1.0)?, 1)?;
    let h = grid.h();
    let neg_l = |u: &[f64], out: &mut [f64]| {
        op.apply_scalar(u, out);
        out.iter_mut().for_each(|v| *v = -*v);
    };
    let max_iter = 50 * n.pow(d as u32).max(100);
    let diag: Vec<f64> = (0..grid.len())
        .map(|i| {
            (0..d)
                .map(|k| op.face_coefficients(k)[i] + op.face_coefficients(k)[grid.backward(i, k)])
                .sum::<f64>()
                / (h * h)
        })
        .collect();
    let mut chi = Vec::with_capacity(d);
    let mut iterations = Vec::with_capacity(d);
    let mut residuals = Vec::with_capacity(d);
    for j in 0..d {
        let faces = op.face_coefficients(j);
        let rhs: Vec<f64> = (0..grid.len())
            .map(|i| (faces[i] - faces[grid.backward(i, j)]) / h)
            .collect();
        let mut x = vec![0.0; grid.len()];
        let out = cg_mean_zero(
            neg_l,
            Some(&diag),
            &rhs,
            &mut x,
            CG_TOL,
            CG_ACCEPT,
            max_iter,
        )?;
        chi.push(ScalarField { grid, data: x });
        iterations.push(out.iterations);
        residuals.push(out.relative_residual);
    }
    log::debug!("cell problem n={n} d={d}: iterations {iterations:?}, residuals {residuals:?}");
    Ok(CellSolution {
        grid,
        coef,
        op,
        chi,
        iterations,
        residuals,
    })
}

impl CellSolution {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coefficient(&self) -> &CellCoefficient {
        &self.coef
    }

    pub fn operator(&self) -> &DiffusionOperator {
        &self.op
    }

    /// `g_ij = a (δ_ij + ∂_i χ_j)` sampled on the `i`-faces: column `j` is the flux of
    /// the corrected direction `j`.
    pub fn g_face(&self, i: usize, j: usize) -> ScalarField {
        let g = self.grid;
        let faces = self.op.face_coefficients(i);
        let chi = &self.chi[j].data;
        let delta = if i == j { 1.0 } else { 0.0 };
        let data = (0..g.len())
            .map(|idx| faces[idx] * (delta + (chi[g.forward(idx, i)] - chi[idx]) / g.h()))
            .collect();
        ScalarField { grid: g, data }
    }

    /// Discrete divergence `Σ_i D_i⁻ g_ij` of column `j` (zero up to the solver tolerance).
    pub fn g_divergence(&self, j: usize) -> ScalarField {
        let g = self.grid;
        let mut out = ScalarField::zeros(g);
        for i in 0..g.dim() {
            let gij = self.g_face(i, j);
            for idx in 0..g.len() {
                out.data[idx] += (gij.data[idx] - gij.data[g.backward(idx, i)]) / g.h();
            }
        }
        out
    }

    /// `h_j = a χ_j` at the nodes.
    pub fn h_field(&self) -> Vec<ScalarField> {
        let g = self.grid;
        self.chi
            .iter()
            .map(|c| {
                let data = (0..g.len())
                    .map(|idx| self.coef.eval(&g.position(idx)[..g.dim()]) * c.data[idx])
                    .collect();
                ScalarField { grid: g, data }
            })
            .collect()
    }

    /// Corrector values at a cell point `y`. Exact when `y` is a node of the cell grid
    /// (flag `true`), otherwise multilinear interpolation (flag `false`).
    pub fn chi_at(&self, y: &[f64]) -> (Vec<f64>, bool) {
        let g = self.grid;
        let d = g.dim();
        let n = g.n();
        let mut base = [0isize; 3];
        let mut frac = [0.0; 3];
        let mut exact = true;
        for k in 0..d {
            let s = y[k].rem_euclid(1.0) * n as f64;
            let r = s.round();
            if (s - r).abs() < 1e-9 {
                base[k] = r as isize;
                frac[k] = 0.0;
            } else {
                base[k] = s.floor() as isize;
                frac[k] = s - s.floor();
                exact = false;
            }
        }
        let mut vals = vec![0.0; d];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut ijk = [0isize; 3];
            for k in 0..d {
                let bit = (corner >> k) & 1;
                ijk[k] = base[k] + bit as isize;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            }
            if w == 0.0 {
                continue;
            }
            let idx = g.wrap_index(ijk);
            for (j, v) in vals.iter_mut().enumerate() {
                *v += w * self.chi[j].data[idx];
            }
        }
        (vals, exact)
    }
}

/// Cell average of the face fluxes, symmetrised.
pub fn compute_ah(sol: &CellSolution) -> Result<TensorEstimate> {
    let d = sol.grid.dim();
    let mut raw = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let g = sol.g_face(i, j);
            raw[i][j] = g.data.iter().sum::<f64>() / g.data.len() as f64;
        }
    }
    let mut asymmetry: f64 = 0.0;
    let mut sym = raw.clone();
    for i in 0..d {
        for j in 0..d {
            sym[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
            asymmetry = asymmetry.max((raw[i][j] - raw[j][i]).abs());
        }
    }
    if asymmetry > 1e-8 {
        log::warn!("homogenized tensor asymmetry {asymmetry:.3e} removed by symmetrisation");
    }
    Ok(TensorEstimate {
        tensor: HomogenizedTensor::new(&sym)?,
        asymmetry,
    })
}

/// Convenience: solve at resolution `n` and return `A^H`.
pub fn homogenized_tensor(a: &CellCoefficient, n: usize) -> Result<HomogenizedTensor> {
    Ok(compute_ah(&solve_cell(a, n)?)?.tensor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficient_has_trivial_corrector() {
        let a = CellCoefficient::constant(2, 2.5).unwrap();
        let sol = solve_cell(&a, 16).unwrap();
        assert!(sol.chi.iter().all(|c| c.max_abs() == 0.0));
        let t = compute_ah(&sol).unwrap().tensor;
        assert_eq!(t.rows(), vec![vec![2.5, 0.0], vec![0.0, 2.5]]);
    }

    #[test]
    fn one_dimensional_flux_is_constant() {
        let a = CellCoefficient::paper_1d();
        let sol = solve_cell(&a, 1024).unwrap();
        let flux = sol.g_face(0, 0);
        let mean = flux.data.iter().sum::<f64>() / flux.data.len() as f64;
        let spread = flux
            .data
            .iter()
            .map(|v| (v - mean).abs())
            .fold(0.0, f64::max);
        assert!(spread / mean <= 1e-6, "spread {spread}");
        assert!(sol.chi[0].mean().abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_tensor_is_harmonic_mean() {
        let a = CellCoefficient::paper_1d();
        let t = homogenized_tensor(&a, 2048).unwrap();
        assert!((t.get(0, 0) - a.harmonic_mean(1 << 16)).abs() < 1e-8);
    }

    #[test]
    fn commensurate_path_accepts_coarse_cells() {
        let a = CellCoefficient::paper_1d();
        assert!(solve_cell(&a, 8).is_err());
        let sol = solve_cell_commensurate(&a, 8).unwrap();
        let t = compute_ah(&sol).unwrap().tensor.get(0, 0);
        // discrete 1D tensor: harmonic mean of the face values
        let faces = sol.operator().face_coefficients(0);
        let hm = faces.len() as f64 / faces.iter().map(|v| 1.0 / v).sum::<f64>();
        assert!((t - hm).abs() < 1e-12);
        assert!(solve_cell_commensurate(&a, 3).is_err());
    }

    #[test]
    fn gauge_shift_does_not_change_tensor() {
        let a = CellCoefficient::paper_2d();
        let mut sol = solve_cell(&a, 32).unwrap();
        let before = compute_ah(&sol).unwrap();
        for c in sol.chi.iter_mut() {
            c.data.iter_mut().for_each(|v| *v += 0.375);
        }
        let after = compute_ah(&sol).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((before.tensor.get(i, j) - after.tensor.get(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn two_dimensional_invariants() {
        let a = CellCoefficient::paper_2d();
        let sol = solve_cell(&a, 64).unwrap();
        for j in 0..2 {
            assert!(sol.chi[j].mean().abs() < 1e-12);
            let gnorm = sol.g_face(0, j).l2_norm() + sol.g_face(1, j).l2_norm();
            assert!(sol.g_divergence(j).max_abs() <= 1e-8 * gnorm * 64.0);
        }
        let est = compute_ah(&sol).unwrap();
        assert!(est.asymmetry < 1e-8);
        let ev = est.tensor.eigenvalues();
        assert!(ev[0] >= a.harmonic_mean(256) - 1e-12 && ev[1] <= a.arithmetic_mean(256) + 1e-12);
        assert!(ev[0] >= a.a_min() && ev[1] <= a.a_max());
        assert_eq!(sol.h_field().len(), 2);
    }

    #[test]
    fn chi_sampling() {
        let a = CellCoefficient::paper_1d();
        let sol = solve_cell(&a, 32).unwrap();
        let (v, exact) = sol.chi_at(&[3.0 / 32.0]);
        assert!(exact);
        assert_eq!(v[0], sol.chi[0].data[3]);
        let (v, exact) = sol.chi_at(&[3.5 / 32.0 + 1.0]);
        assert!(!exact);
        assert!((v[0] - 0.5 * (sol.chi[0].data[3] + sol.chi[0].data[4])).abs() < 1e-15);
    }
}
