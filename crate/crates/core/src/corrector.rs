//! Spectral description of the fast corrector on the unit cell.
//!
//! The discrete cell operator `-L_yy` is diagonalised densely; its eigenpairs give the
//! mode-wise solution of `∂_t w = -b × L w - α b × (b × L w)` and the transient
//! `v(y, τ)` that the homogenized expansion carries next to `∇m₀ χ`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::cell::CellSolution;
use crate::coefficient::{CellCoefficient, Coefficient};
use crate::error::{Error, Result};
use crate::grid::{cross, dot, PeriodicGrid, VectorField};
use crate::operator::DiffusionOperator;

/// Largest cell (total nodes) accepted by the dense eigensolver.
pub const MAX_DENSE_NODES: usize = 4096;

/// Eigenpairs of `-L_yy`, orthonormal in the `h^d`-weighted inner product.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    grid: PeriodicGrid,
    op: DiffusionOperator,
    omegas: Vec<f64>,
    phis: Vec<Vec<f64>>,
    /// Largest negative round-off eigenvalue that was clipped to zero.
    pub clipped: f64,
}

pub fn eigendecompose(a: &CellCoefficient, n: usize, j_max: usize) -> Result<EigenBasis> {
    let d = a.dim();
    let total = n.checked_pow(d as u32).unwrap_or(usize::MAX);
    if total > MAX_DENSE_NODES {
        return Err(Error::TooLarge {
            size: total,
            limit: MAX_DENSE_NODES,
        });
    }
    if j_max == 0 || j_max > total {
        return Err(Error::InvalidArgument(format!(
            "mode count {j_max} not in 1..={total}"
        )));
    }
    let grid = PeriodicGrid::unit_cell(d, n)?;
    let op = DiffusionOperator::with_guard(grid, &Coefficient::new(a.clone(), 1.0)?, 1)?;
    let mut mat = DMatrix::<f64>::zeros(total, total);
    let mut e = vec![0.0; total];
    let mut col = vec![0.0; total];
    for j in 0..total {
        e[j] = 1.0;
        op.apply_scalar(&e, &mut col);
        for i in 0..total {
            mat[(i, j)] = -col[i];
        }
        e[j] = 0.0;
    }
    // exact symmetry before the solve
    let mat = (&mat + mat.transpose()) * 0.5;
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = grid.cell_volume().powf(-0.5);
    let mut clipped: f64 = 0.0;
    let mut omegas = Vec::with_capacity(j_max);
    let mut phis = Vec::with_capacity(j_max);
    let mut lphi = vec![0.0; total];
    for &k in order.iter().take(j_max) {
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        // Rayleigh quotient: second-order accurate in the eigenvector error
        op.apply_scalar(&v, &mut lphi);
        let mut w = -v.iter().zip(&lphi).map(|(a, b)| a * b).sum::<f64>()
            / v.iter().map(|a| a * a).sum::<f64>();
        if w < 0.0 {
            if w < -1e-10 * eig.eigenvalues.amax().max(1.0) {
                log::warn!("eigenvalue {w:.3e} of -L_yy is negative beyond round-off");
            }
            clipped = clipped.max(-w);
            w = 0.0;
        }
        omegas.push(w);
        phis.push(v.iter().map(|x| x * scale).collect::<Vec<f64>>());
    }
    // constant mode with a positive sign
    if phis[0].iter().sum::<f64>() < 0.0 {
        phis[0].iter_mut().for_each(|v| *v = -*v);
    }
    if clipped > 0.0 {
        log::debug!("clipped negative eigenvalue round-off {clipped:.3e}");
    }
    Ok(EigenBasis {
        grid,
        op,
        omegas,
        phis,
        clipped,
    })
}

impl EigenBasis {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn operator(&self) -> &DiffusionOperator {
        &self.op
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn phi(&self, j: usize) -> &[f64] {
        &self.phis[j]
    }

    /// `⟨u, φ_j⟩ = h^d Σ u φ_j`.
    pub fn project(&self, u: &[f64], j: usize) -> f64 {
        self.grid.cell_volume() * u.iter().zip(&self.phis[j]).map(|(a, b)| a * b).sum::<f64>()
    }

    /// First positive eigenvalue.
    pub fn omega1(&self) -> f64 {
        self.omegas
            .iter()
            .copied()
            .find(|w| *w > 1e-9)
            .unwrap_or(0.0)
    }
}

/// Mode-wise solution of `∂_t w = -b × L w - α b × (b × L w)`, `w(0) = f`.
///
/// Each component of `f` is expanded as `Σ f_j φ_j`; `u_j(t) = f_j e^{(i-α)ω_j t}` and
/// `w = b bᵀ f + (I - b bᵀ) Re u + b × Im u`.
pub fn schrodinger_map(
    b: [f64; 3],
    f: &VectorField,
    alpha: f64,
    t: f64,
    basis: &EigenBasis,
) -> Result<VectorField> {
    f.grid.check_same(&basis.grid)?;
    if (dot(b, b).sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("b must be a unit vector".into()));
    }
    let n = f.grid.len();
    let comps: Vec<Vec<f64>> = (0..3)
        .map(|c| f.data.iter().map(|v| v[c]).collect())
        .collect();
    let mut re = vec![[0.0; 3]; n];
    let mut im = vec![[0.0; 3]; n];
    for j in 0..basis.len() {
        let w = basis.omegas[j];
        let decay = (-alpha * w * t).exp();
        let (s, c) = (w * t).sin_cos();
        let phi = &basis.phis[j];
        for comp in 0..3 {
            let fj = basis.project(&comps[comp], j);
            if fj == 0.0 {
                continue;
            }
            let (a, bb) = (fj * decay * c, fj * decay * s);
            for i in 0..n {
                re[i][comp] += a * phi[i];
                im[i][comp] += bb * phi[i];
            }
        }
    }
    let mut out = VectorField::zeros(f.grid);
    for i in 0..n {
        let fb = dot(b, f.data[i]);
        let rb = dot(b, re[i]);
        let bxi = cross(b, im[i]);
        for c in 0..3 {
            out.data[i][c] = b[c] * fb + (re[i][c] - b[c] * rb) + bxi[c];
        }
    }
    Ok(out)
}

/// Expansion coefficients `χ_j` of the cell corrector in an eigenbasis.
#[derive(Debug, Clone)]
pub struct CorrectorField {
    /// `coeffs[j][k] = ⟨χ_k, φ_j⟩`.
    coeffs: Vec<Vec<f64>>,
    alpha: f64,
    /// `max_k ‖χ_k - Σ_j χ_j^k φ_j‖` in the discrete `L²` norm.
    pub truncation_error: f64,
}

impl CorrectorField {
    pub fn new(cell: &CellSolution, basis: &EigenBasis, alpha: f64) -> Result<Self> {
        cell.grid().check_same(&basis.grid)?;
        let d = basis.grid.dim();
        let coeffs: Vec<Vec<f64>> = (0..basis.len())
            .map(|j| {
                (0..d)
                    .map(|k| basis.project(&cell.chi[k].data, j))
                    .collect()
            })
            .collect();
        let mut truncation_error: f64 = 0.0;
        for k in 0..d {
            let mut rest = cell.chi[k].data.clone();
            for (j, c) in coeffs.iter().enumerate() {
                for (r, p) in rest.iter_mut().zip(&basis.phis[j]) {
                    *r -= c[k] * p;
                }
            }
            let norm = (basis.grid.cell_volume() * rest.iter().map(|v| v * v).sum::<f64>()).sqrt();
            truncation_error = truncation_error.max(norm);
        }
        Ok(Self {
            coeffs,
            alpha,
            truncation_error,
        })
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(ω_j, |χ_j|)` for every retained mode.
    pub fn spectrum(&self, basis: &EigenBasis) -> Vec<(f64, f64)> {
        self.coeffs
            .iter()
            .zip(&basis.omegas)
            .map(|(c, w)| (*w, c.iter().map(|v| v * v).sum::<f64>().sqrt()))
            .collect()
    }

    /// `Ψ(y, τ) = Σ_{j>=1} χ_j e^{(-α+i)ω_j τ} φ_j(y)` as `(Re, Im)`, each `d` values per node.
    pub fn psi(&self, basis: &EigenBasis, tau: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let d = basis.grid.dim();
        let n = basis.grid.len();
        let mut re = vec![vec![0.0; d]; n];
        let mut im = vec![vec![0.0; d]; n];
        for j in 1..basis.len() {
            let w = basis.omegas[j];
            let decay = (-self.alpha * w * tau).exp();
            let (s, c) = (w * tau).sin_cos();
            for i in 0..n {
                let p = basis.phis[j][i] * decay;
                for k in 0..d {
                    re[i][k] += self.coeffs[j][k] * c * p;
                    im[i][k] += self.coeffs[j][k] * s * p;
                }
            }
        }
        (re, im)
    }

    /// `v(y, τ) = -Σ_{j>=1} φ_j e^{-αω_jτ} [cos(ω_jτ) G_j + sin(ω_jτ) m₀ × G_j]` with
    /// `G_j = Σ_k grad[k] χ_j^k`. Requires `m₀` unit and orthogonal to every gradient row.
    pub fn build_v(
        &self,
        basis: &EigenBasis,
        m0: [f64; 3],
        grad: &[[f64; 3]],
        tau: f64,
    ) -> Result<VectorField> {
        let d = basis.grid.dim();
        if grad.len() != d {
            return Err(Error::InvalidArgument(format!(
                "gradient has {} rows, cell dimension is {d}",
                grad.len()
            )));
        }
        if (dot(m0, m0).sqrt() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("m0 must be a unit vector".into()));
        }
        for row in grad {
            if dot(*row, m0).abs() > 1e-10 * (1.0 + dot(*row, *row).sqrt()) {
                return Err(Error::InvalidArgument(
                    "gradient rows must be orthogonal to m0".into(),
                ));
            }
        }
        let mut out = VectorField::zeros(basis.grid);
        for j in 1..basis.len() {
            let mut g = [0.0; 3];
            for k in 0..d {
                for c in 0..3 {
                    g[c] += grad[k][c] * self.coeffs[j][k];
                }
            }
            let w = basis.omegas[j];
            let decay = (-self.alpha * w * tau).exp();
            let (s, c) = (w * tau).sin_cos();
            let mg = cross(m0, g);
            let amp: [f64; 3] = std::array::from_fn(|i| -decay * (c * g[i] + s * mg[i]));
            for (o, p) in out.data.iter_mut().zip(&basis.phis[j]) {
                for i in 0..3 {
                    o[i] += amp[i] * p;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::solve_cell;
    use crate::grid::norm;
    use std::f64::consts::PI;

    #[test]
    fn constant_coefficient_spectrum() {
        let n = 64;
        let b = eigendecompose(&CellCoefficient::constant(1, 1.0).unwrap(), n, n).unwrap();
        assert!(b.omegas()[0] <= 1e-12);
        let phi0 = b.phi(0);
        assert!(phi0.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let h = 1.0 / n as f64;
        for k in 1..n / 2 {
            let discrete = 4.0 / (h * h) * (PI * k as f64 / n as f64).sin().powi(2);
            let continuum = (2.0 * PI * k as f64).powi(2);
            for w in [b.omegas()[2 * k - 1], b.omegas()[2 * k]] {
                assert!(
                    (w - discrete).abs() < 1e-9 * discrete,
                    "k={k}: {w} vs {discrete}"
                );
                if 18 * k <= n {
                    assert!((w - continuum).abs() < 0.01 * continuum);
                }
            }
        }
    }

    #[test]
    fn orthonormal_and_rayleigh_consistent() {
        let b = eigendecompose(&CellCoefficient::paper_1d(), 32, 32).unwrap();
        let mut lu = vec![0.0; 32];
        for i in 0..b.len() {
            for j in 0..b.len() {
                let ip = b.project(b.phi(i), j);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).abs() <= 1e-10);
            }
            b.operator().apply_scalar(b.phi(i), &mut lu);
            let rq = -b.project(&lu, i);
            assert!((rq - b.omegas()[i]).abs() <= 1e-9 * b.omegas()[i].max(1.0));
        }
        assert!(b.omega1() > 0.0);
    }

    #[test]
    fn dense_guard() {
        let a = CellCoefficient::paper_2d();
        assert!(matches!(
            eigendecompose(&a, 65, 10),
            Err(Error::TooLarge { .. })
        ));
        assert!(eigendecompose(&CellCoefficient::paper_1d(), 16, 17).is_err());
    }

    #[test]
    fn schrodinger_map_trivial_cases() {
        let basis = eigendecompose(&CellCoefficient::paper_1d(), 16, 16).unwrap();
        let g = *basis.grid();
        let f = VectorField::from_fn(g, |y| {
            [(2.0 * PI * y[0]).sin(), 0.3, (4.0 * PI * y[0]).cos()]
        });
        let w0 = schrodinger_map([0.0, 0.0, 1.0], &f, 0.1, 0.0, &basis).unwrap();
        assert!(w0.max_abs_diff(&f).unwrap() < 1e-13);
        let c = VectorField::constant(g, [0.2, -0.4, 0.1]);
        let wc = schrodinger_map([0.6, 0.0, 0.8], &c, 0.1, 0.37, &basis).unwrap();
        assert!(wc.max_abs_diff(&c).unwrap() < 1e-13);
    }

    #[test]
    fn corrector_v_properties() {
        let a = CellCoefficient::paper_1d();
        let cell = solve_cell(&a, 32).unwrap();
        let basis = eigendecompose(&a, 32, 32).unwrap();
        let corr = CorrectorField::new(&cell, &basis, 0.1).unwrap();
        assert!(corr.coefficients()[0][0].abs() < 1e-12);
        assert!(corr.truncation_error < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m0 = [s, 0.0, s];
        let grad = [[0.0, 2.0 * PI * s, 0.0]];
        let v0 = corr.build_v(&basis, m0, &grad, 0.0).unwrap();
        for (i, v) in v0.data.iter().enumerate() {
            for c in 0..3 {
                assert!((v[c] + grad[0][c] * cell.chi[0].data[i]).abs() < 1e-12);
            }
        }
        for tau in [1e-4, 1e-3, 1e-2] {
            let v = corr.build_v(&basis, m0, &grad, tau).unwrap();
            assert!(v.data.iter().all(|x| dot(*x, m0).abs() <= 1e-8));
            assert!(norm(v.mean()) <= 1e-10);
        }
        assert!(corr.build_v(&basis, m0, &[[1.0, 0.0, 0.0]], 0.0).is_err());
    }
}
