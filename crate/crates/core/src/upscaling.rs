//! Kernel averages of micro quantities around the macro point `(x, t) = (0, 0)`.
//!
//! One micro run feeds three observers at once:
//! M1 averages the flux `a^ε ∇m^ε` (face-centred), M2 the field `L m^ε` and M3 the
//! torque `m^ε × L m^ε`. Each is compared with its homogenized target.

use std::fmt;
use std::sync::Arc;

use crate::cell::{compute_ah, solve_cell, solve_cell_commensurate};
use crate::coefficient::{CellCoefficient, Coefficient};
use crate::error::{Error, Result};
use crate::grid::{cross, PeriodicGrid, VectorField};
use crate::homogenized::{reference_quantities, References};
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::macro_field::MacroField;
use crate::micro::{
    max_stable_dt, restrict_initial_data, solve_window, LLState, Observer, Restriction, Scheme,
    SphereObserver, StepControl, DEFAULT_CFL,
};
use crate::operator::{DiffusionOperator, HomogenizedTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    M1,
    M2,
    M3,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::M1, Model::M2, Model::M3];
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::M1 => "M1",
            Model::M2 => "M2",
            Model::M3 => "M3",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "M1" | "m1" => Ok(Model::M1),
            "M2" | "m2" => Ok(Model::M2),
            "M3" | "m3" => Ok(Model::M3),
            other => Err(Error::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

/// Trapezoid weights of the scaled tensor kernel on the lattice nodes, and on the
/// face centres `x + h/2 e_k` for each axis `k`.
#[derive(Debug, Clone)]
pub struct SpatialAverager {
    grid: PeriodicGrid,
    mu: f64,
    nodes: Vec<(usize, f64)>,
    faces: Vec<Vec<(usize, f64)>>,
}

impl SpatialAverager {
    /// `mu` must already be a multiple of `h` (see [`snap_mu`]).
    pub fn new(grid: PeriodicGrid, kernel: &Kernel, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidWindow(format!(
                "spatial half-width {mu} must be positive"
            )));
        }
        if 2.0 * mu >= grid.ell() {
            return Err(Error::WindowExceedsDomain {
                mu,
                ell: grid.ell(),
            });
        }
        let d = grid.dim();
        let h = grid.h();
        let vol = grid.cell_volume();
        let m = (mu / h).round() as isize;
        let side = (2 * m + 1) as usize;
        let mut nodes = vec![];
        let mut faces = vec![vec![]; d];
        let count = side.pow(d as u32);
        for lin in 0..count {
            let mut off = [0isize; 3];
            let mut rest = lin;
            for o in off.iter_mut().take(d) {
                *o = (rest % side) as isize - m;
                rest /= side;
            }
            let idx = grid.wrap_index(off);
            let x: Vec<f64> = off[..d].iter().map(|o| *o as f64 * h).collect();
            let w = kernel.eval_tensor(mu, &x);
            if w != 0.0 {
                nodes.push((idx, w * vol));
            }
            for (k, list) in faces.iter_mut().enumerate() {
                let mut xf = x.clone();
                xf[k] += 0.5 * h;
                let w = kernel.eval_tensor(mu, &xf);
                if w != 0.0 {
                    list.push((idx, w * vol));
                }
            }
        }
        Ok(Self {
            grid,
            mu,
            nodes,
            faces,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Sum of the node weights (the discrete kernel mass).
    pub fn node_mass(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }

    pub fn average_nodes(&self, f: &VectorField) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for (idx, w) in &self.nodes {
            for c in 0..3 {
                acc[c] += w * f.data[*idx][c];
            }
        }
        acc
    }

    /// Average of `g(idx, axis)` over the face centres of `axis`.
    pub fn average_faces(&self, axis: usize, g: impl Fn(usize) -> [f64; 3]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for (idx, w) in &self.faces[axis] {
            let v = g(*idx);
            for c in 0..3 {
                acc[c] += w * v[c];
            }
        }
        acc
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }
}

/// Round `mu` to the nearest positive multiple of `h`.
pub fn snap_mu(mu: f64, h: f64) -> f64 {
    (mu / h).round().max(1.0) * h
}

/// Kernel-weighted average of a nodal field over `[-μ, μ]^d` (μ snapped to the grid).
pub fn average_space(field: &VectorField, kernel: &Kernel, mu: f64) -> Result<[f64; 3]> {
    let mu = snap_mu(mu, field.grid.h());
    Ok(SpatialAverager::new(field.grid, kernel, mu)?.average_nodes(field))
}

/// Streaming trapezoid quadrature of `∫₀^η K⁰_η(t) f(t) dt`.
#[derive(Debug, Clone)]
pub struct TimeAccumulator {
    kernel: Kernel,
    eta: f64,
    prev: Option<(f64, Vec<f64>)>,
    sum: Vec<f64>,
}

impl TimeAccumulator {
    pub fn new(kernel: Kernel, eta: f64) -> Self {
        Self {
            kernel,
            eta,
            prev: None,
            sum: vec![],
        }
    }

    /// Add the sample `f(t)`; samples must arrive in increasing `t`.
    pub fn push(&mut self, t: f64, f: &[f64]) {
        let k = self.kernel.eval_scaled(self.eta, t);
        let g: Vec<f64> = f.iter().map(|v| k * v).collect();
        if self.sum.is_empty() {
            self.sum = vec![0.0; f.len()];
        }
        if let Some((tp, gp)) = &self.prev {
            let half = 0.5 * (t - tp);
            for ((s, a), b) in self.sum.iter_mut().zip(gp).zip(&g) {
                *s += half * (a + b);
            }
        }
        self.prev = Some((t, g));
    }

    pub fn value(&self) -> &[f64] {
        &self.sum
    }
}

/// Parameters of one averaging window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub mu: f64,
    pub eta: f64,
    pub px: usize,
    pub qx: usize,
    pub pt: usize,
    pub qt: usize,
}

/// How the scale-separation conditions `ε < μ` and `ε² < η` are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowCheck {
    /// Violations are errors.
    #[default]
    Strict,
    /// Violations are logged and flagged on the reports; useful for ε ladders that
    /// deliberately start in the pre-asymptotic regime.
    Warn,
}

impl std::str::FromStr for WindowCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "strict" => Ok(WindowCheck::Strict),
            "warn" => Ok(WindowCheck::Warn),
            other => Err(Error::InvalidArgument(format!(
                "unknown window check '{other}' (strict | warn)"
            ))),
        }
    }
}

impl fmt::Display for WindowCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowCheck::Strict => "strict",
            WindowCheck::Warn => "warn",
        })
    }
}

/// A validated window with `μ` snapped to the grid.
#[derive(Debug, Clone)]
pub struct AveragingWindow {
    pub spec: WindowSpec,
    /// `μ` after snapping to a whole number of cells.
    pub mu: f64,
    pub spatial: Kernel,
    pub temporal: Kernel,
    /// Whether `ε < μ` and `ε² < η` hold.
    pub separated: bool,
}

impl AveragingWindow {
    /// Strict construction: requires `ε < μ < 1` and `ε² < η`.
    pub fn new(spec: WindowSpec, eps: f64, grid: &PeriodicGrid) -> Result<Self> {
        Self::with_check(spec, eps, grid, WindowCheck::Strict)
    }

    pub fn with_check(
        spec: WindowSpec,
        eps: f64,
        grid: &PeriodicGrid,
        check: WindowCheck,
    ) -> Result<Self> {
        if !(spec.mu > 0.0 && spec.mu < 1.0) {
            return Err(Error::InvalidWindow(format!(
                "need 0 < mu < 1, got mu = {}",
                spec.mu
            )));
        }
        if !(spec.eta > 0.0 && spec.eta.is_finite()) {
            return Err(Error::InvalidWindow(format!(
                "need eta > 0, got eta = {}",
                spec.eta
            )));
        }
        let mut problems = vec![];
        if !(eps < spec.mu) {
            problems.push(format!("eps = {eps} is not below mu = {}", spec.mu));
        }
        if !(eps * eps < spec.eta) {
            problems.push(format!(
                "eps^2 = {} is not below eta = {}",
                eps * eps,
                spec.eta
            ));
        }
        if !problems.is_empty() {
            match check {
                WindowCheck::Strict => return Err(Error::InvalidWindow(problems.join("; "))),
                WindowCheck::Warn => {
                    log::info!("window outside scale separation: {}", problems.join("; "))
                }
            }
        }
        if 2.0 * spec.mu >= grid.ell() {
            return Err(Error::WindowExceedsDomain {
                mu: spec.mu,
                ell: grid.ell(),
            });
        }
        let mu = snap_mu(spec.mu, grid.h());
        if (mu - spec.mu).abs() > 1e-12 * spec.mu {
            log::info!(
                "mu snapped from {} to {} ({} cells)",
                spec.mu,
                mu,
                (mu / grid.h()).round()
            );
        }
        let spatial = Kernel::build(KernelSpec {
            p: spec.px,
            q: spec.qx,
            family: KernelFamily::Symmetric,
        })?;
        let temporal = Kernel::build(KernelSpec {
            p: spec.pt,
            q: spec.qt,
            family: KernelFamily::OneSided,
        })?;
        Ok(Self {
            spec,
            mu,
            spatial,
            temporal,
            separated: problems.is_empty(),
        })
    }
}

/// Which homogenized tensor the errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceTensor {
    /// Cell problem on the micro lattice itself (`points_per_period` nodes per cell):
    /// the exact homogenized limit of the discrete micro operator.
    Commensurate,
    /// Cell problem on an independent `n^d` grid.
    Cell(usize),
}

/// Everything needed for one micro run.
#[derive(Debug, Clone)]
pub struct MicroRunSpec {
    pub cell: Arc<CellCoefficient>,
    pub m_init: MacroField,
    pub eps: f64,
    pub ell: f64,
    pub points_per_period: usize,
    pub alpha: f64,
    pub window: WindowSpec,
    pub cfl: f64,
    pub scheme: Scheme,
    pub restriction: Restriction,
    pub reference: ReferenceTensor,
    pub window_check: WindowCheck,
}

impl MicroRunSpec {
    /// Defaults: `ℓ = 1`, 8 points per period, CFL 0.25, RK4 with projection, exact
    /// restriction and the commensurate reference tensor.
    pub fn new(
        cell: CellCoefficient,
        m_init: MacroField,
        eps: f64,
        alpha: f64,
        window: WindowSpec,
    ) -> Self {
        Self {
            cell: Arc::new(cell),
            m_init,
            eps,
            ell: 1.0,
            points_per_period: 8,
            alpha,
            window,
            cfl: DEFAULT_CFL,
            scheme: Scheme::Rk4Project,
            restriction: Restriction::Exact,
            reference: ReferenceTensor::Commensurate,
            window_check: WindowCheck::Strict,
        }
    }

    /// Number of periods `ℓ/ε`, which must be an integer.
    pub fn periods(&self) -> Result<usize> {
        let n = self.ell / self.eps;
        let r = n.round();
        if !(self.eps > 0.0) || r < 1.0 || (n - r).abs() > 1e-9 * n {
            return Err(Error::InvalidArgument(format!(
                "ell/eps = {n} is not an integer"
            )));
        }
        Ok(r as usize)
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(
            self.cell.dim(),
            self.periods()? * self.points_per_period,
            self.ell,
        )
    }

    pub fn reference_tensor(&self) -> Result<HomogenizedTensor> {
        let sol = match self.reference {
            ReferenceTensor::Commensurate => {
                solve_cell_commensurate(&self.cell, self.points_per_period)?
            }
            ReferenceTensor::Cell(n) => solve_cell(&self.cell, n)?,
        };
        Ok(compute_ah(&sol)?.tensor)
    }
}

/// Echo of the parameters behind a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub dim: usize,
    pub eps: f64,
    /// Snapped half-width actually used.
    pub mu: f64,
    pub eta: f64,
    pub alpha: f64,
    pub px: usize,
    pub qx: usize,
    pub pt: usize,
    pub qt: usize,
    pub n: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpscalingReport {
    pub model: Model,
    pub params: RunParams,
    /// `d×3` row-major for M1, three values for M2 and M3.
    pub value: Vec<f64>,
    pub reference: Vec<f64>,
    /// Frobenius / Euclidean norm of `value - reference`.
    pub error: f64,
    /// False when the run was accepted under [`WindowCheck::Warn`] despite `ε ≥ μ` or `ε² ≥ η`.
    pub separated: bool,
}

/// Per-run diagnostics shared by the three reports.
#[derive(Debug, Clone)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub max_norm_deviation: f64,
    pub tensor: HomogenizedTensor,
    pub kernel_mass: f64,
}

struct MultiModelObserver<'a> {
    op: &'a DiffusionOperator,
    avg: SpatialAverager,
    acc: TimeAccumulator,
    dim: usize,
}

impl Observer for MultiModelObserver<'_> {
    fn observe(&mut self, t: f64, m: &VectorField, lm: &VectorField) {
        let d = self.dim;
        let mut sample = Vec::with_capacity(3 * d + 6);
        for axis in 0..d {
            let f = self
                .avg
                .average_faces(axis, |idx| self.op.face_flux(m, idx, axis));
            sample.extend_from_slice(&f);
        }
        sample.extend_from_slice(&self.avg.average_nodes(lm));
        let mut torque = [0.0; 3];
        for (idx, w) in &self.avg.nodes {
            let c = cross(m.data[*idx], lm.data[*idx]);
            for i in 0..3 {
                torque[i] += w * c[i];
            }
        }
        sample.extend_from_slice(&torque);
        self.acc.push(t, &sample);
    }
}

fn error_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Run one micro window and return the M1, M2 and M3 reports.
pub fn upscale_all(spec: &MicroRunSpec) -> Result<([UpscalingReport; 3], RunDiagnostics)> {
    let grid = spec.grid()?;
    let d = grid.dim();
    if spec.m_init.min_dim() > d {
        return Err(Error::InvalidArgument(format!(
            "initial data '{}' needs dimension {}",
            spec.m_init.label(),
            spec.m_init.min_dim()
        )));
    }
    let window = AveragingWindow::with_check(spec.window, spec.eps, &grid, spec.window_check)?;
    let coef = Coefficient::shared(spec.cell.clone(), spec.eps)?;
    let op = DiffusionOperator::new(grid, &coef)?;
    let dt_max = max_stable_dt(&op, spec.cfl);
    let eta = spec.window.eta;
    let steps = (eta / dt_max * (1.0 - 1e-12)).ceil().max(1.0);
    let ctl = StepControl {
        dt: eta / steps,
        cfl: spec.cfl,
        scheme: spec.scheme,
    };
    let m0 = restrict_initial_data(&spec.m_init, grid, spec.restriction)?;
    let state = LLState::new(m0, spec.alpha)?;
    let avg = SpatialAverager::new(grid, &window.spatial, window.mu)?;
    let kernel_mass = avg.node_mass();
    let mut obs = MultiModelObserver {
        op: &op,
        avg,
        acc: TimeAccumulator::new(window.temporal.clone(), eta),
        dim: d,
    };
    let mut sphere = SphereObserver::default();
    let out = solve_window(&op, &state, eta, &ctl, &mut [&mut obs, &mut sphere])?;
    let f = obs.acc.value().to_vec();

    let tensor = spec.reference_tensor()?;
    let refs: References = reference_quantities(&spec.m_init.at_origin(), &tensor);
    let params = RunParams {
        dim: d,
        eps: spec.eps,
        mu: window.mu,
        eta,
        alpha: spec.alpha,
        px: spec.window.px,
        qx: spec.window.qx,
        pt: spec.window.pt,
        qt: spec.window.qt,
        n: grid.n(),
        dt: ctl.dt,
    };
    let flux_ref: Vec<f64> = refs.flux[..d].iter().flatten().copied().collect();
    let f1 = f[..3 * d].to_vec();
    let f2 = f[3 * d..3 * d + 3].to_vec();
    let f3 = f[3 * d + 3..].to_vec();
    let make = |model, value: Vec<f64>, reference: Vec<f64>| UpscalingReport {
        model,
        params,
        error: error_norm(&value, &reference),
        value,
        reference,
        separated: window.separated,
    };
    let reports = [
        make(Model::M1, f1, flux_ref),
        make(Model::M2, f2, refs.field.to_vec()),
        make(Model::M3, f3, refs.torque.to_vec()),
    ];
    let diag = RunDiagnostics {
        steps: out.steps,
        max_norm_deviation: sphere.max_deviation,
        tensor,
        kernel_mass,
    };
    Ok((reports, diag))
}

/// Single-model convenience wrapper around [`upscale_all`].
pub fn upscale(model: Model, spec: &MicroRunSpec) -> Result<UpscalingReport> {
    let (reports, _) = upscale_all(spec)?;
    Ok(reports
        .into_iter()
        .find(|r| r.model == model)
        .expect("all models computed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn window(mu: f64, eta: f64) -> WindowSpec {
        WindowSpec {
            mu,
            eta,
            px: 5,
            qx: 7,
            pt: 5,
            qt: 7,
        }
    }

    #[test]
    fn spatial_average_of_constant_and_odd_fields() {
        let g = PeriodicGrid::new(1, 1120, 1.0).unwrap();
        let k = Kernel::build_symmetric(5, 7).unwrap();
        let c = VectorField::constant(g, [0.3, -2.0, 1.0]);
        let a = average_space(&c, &k, 0.03).unwrap();
        assert!((a[0] - 0.3).abs() < 1e-10 && (a[1] + 2.0).abs() < 1e-10);
        let x = VectorField::from_fn(g, |p| {
            let y = g.centered_coordinate((p[0] / g.h()).round() as usize);
            [y, 2.0 * y, 0.0]
        });
        let a = average_space(&x, &k, 0.03).unwrap();
        assert!(a[0].abs() < 1e-10 && a[1].abs() < 1e-10);
    }

    #[test]
    fn spatial_average_damps_oscillation() {
        let eps = 1.0 / 140.0;
        let g = PeriodicGrid::new(1, 1120 * 4, 1.0).unwrap();
        let k = Kernel::build_symmetric(5, 7).unwrap();
        let f = VectorField::from_fn(g, |p| [(2.0 * PI * p[0] / eps).sin(), 0.0, 0.0]);
        let a = average_space(&f, &k, 0.03).unwrap();
        assert!(a[0].abs() <= 1e-6);
    }

    #[test]
    fn oscillation_decays_at_kernel_rate() {
        // mean-zero periodic integrand: the average decays like (eps/mu)^(q+2)
        let eps = 1.0 / 64.0;
        let g = PeriodicGrid::new(1, 64 * 256, 1.0).unwrap();
        let f = VectorField::from_fn(g, |p| [(2.0 * PI * p[0] / eps).cos(), 0.0, 0.0]);
        for q in [0usize, 1, 2] {
            let k = Kernel::build_symmetric(1, q).unwrap();
            let e = |n: f64| average_space(&f, &k, (n + 0.25) * eps).unwrap()[0].abs();
            let (a, b) = (e(4.0), e(8.0));
            let slope = (a / b).ln() / (8.25f64 / 4.25).ln();
            assert!(slope >= q as f64 + 2.0 - 0.3, "q = {q}: slope {slope}");
        }
    }

    #[test]
    fn window_invariants() {
        let g = PeriodicGrid::new(1, 160, 1.0).unwrap();
        let eps = 1.0 / 20.0;
        assert!(AveragingWindow::new(window(0.03, 1e-3), eps, &g).is_err());
        assert!(AveragingWindow::new(window(0.1, 1e-3), eps, &g).is_err());
        assert!(AveragingWindow::new(window(0.1, 3e-3), eps, &g).is_ok());
        let loose =
            AveragingWindow::with_check(window(0.03, 1e-3), eps, &g, WindowCheck::Warn).unwrap();
        assert!(!loose.separated);
        assert!(
            AveragingWindow::with_check(window(1.2, 1e-3), eps, &g, WindowCheck::Warn).is_err()
        );
        let g2 = PeriodicGrid::new(1, 160, 0.15).unwrap();
        assert!(matches!(
            AveragingWindow::new(window(0.1, 3e-3), eps, &g2),
            Err(Error::WindowExceedsDomain { .. })
        ));
        let w = AveragingWindow::new(window(0.1034, 3e-3), eps, &g).unwrap();
        assert!((w.mu - 17.0 / 160.0).abs() < 1e-15);
    }

    #[test]
    fn time_accumulator_moments() {
        let eta = 1.5e-4;
        let k = Kernel::build_one_sided(3, 3).unwrap();
        let n = 2000;
        for r in 0..=3 {
            let mut acc = TimeAccumulator::new(k.clone(), eta);
            for i in 0..=n {
                let t = eta * i as f64 / n as f64;
                acc.push(t, &[t.powi(r as i32), 2.5]);
            }
            let target = if r == 0 { 1.0 } else { 0.0 };
            assert!(
                (acc.value()[0] - target).abs() <= 1e-7 * eta.powi(r as i32),
                "r = {r}"
            );
            assert!((acc.value()[1] - 2.5).abs() <= 1e-9);
        }
    }

    #[test]
    fn constant_data_gives_zero_errors() {
        let mut spec = MicroRunSpec::new(
            CellCoefficient::paper_1d(),
            MacroField::Constant([0.0, 0.0, 1.0]),
            1.0 / 20.0,
            0.1,
            window(0.1, 3e-3),
        );
        spec.window.pt = 1;
        spec.window.qt = 1;
        let (reports, diag) = upscale_all(&spec).unwrap();
        for r in &reports {
            assert!(r.error <= 1e-10, "{} {}", r.model, r.error);
        }
        assert!(diag.max_norm_deviation <= 1e-12);
    }

    #[test]
    fn constant_coefficient_helix() {
        let spec = MicroRunSpec::new(
            CellCoefficient::constant(1, 0.8).unwrap(),
            MacroField::Helix,
            1.0 / 40.0,
            0.1,
            WindowSpec {
                mu: 0.1,
                eta: 2e-3,
                px: 7,
                qx: 7,
                pt: 5,
                qt: 7,
            },
        );
        let (reports, diag) = upscale_all(&spec).unwrap();
        for r in &reports {
            let scale = r.reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
            eprintln!("{} {:e} {:e}", r.model, r.error, scale);
            assert!(r.error <= 1e-3 * scale, "{} {}", r.model, r.error);
        }
        assert!((diag.tensor.get(0, 0) - 0.8).abs() < 1e-15);
        let m1 = upscale(Model::M1, &spec).unwrap();
        assert_eq!(m1, reports[0]);
    }

    #[test]
    fn rejects_non_integer_period_count() {
        let spec = MicroRunSpec::new(
            CellCoefficient::paper_1d(),
            MacroField::Helix,
            0.03,
            0.1,
            window(0.1, 1e-3),
        );
        assert!(spec.grid().is_err());
    }
}
