//! Time integration of `∂_t m = -m × Lm - α m × (m × Lm)` on a periodic grid.

use crate::error::{Error, Result};
use crate::grid::{cross, PeriodicGrid, VectorField};
use crate::macro_field::{MacroField, PointDerivatives};
use crate::operator::{DiffusionOperator, ExchangeOperator};

/// Default CFL factor in `dt <= cfl · h² / a_max`.
pub const DEFAULT_CFL: f64 = 0.25;

const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_ACCEPT: f64 = 1e-12;
const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical RK4 followed by nodewise projection onto the unit sphere.
    Rk4Project,
    /// Implicit midpoint solved by fixed-point iteration.
    ImexMidpoint,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rk4_project" | "rk4" => Ok(Scheme::Rk4Project),
            "imex_midpoint" | "midpoint" => Ok(Scheme::ImexMidpoint),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Rk4Project => "rk4_project",
            Scheme::ImexMidpoint => "imex_midpoint",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub cfl: f64,
    pub scheme: Scheme,
}

/// Largest step allowed by the CFL factor. For the flux-form operator this is `cfl·h²/a_max`.
pub fn max_stable_dt<O: ExchangeOperator + ?Sized>(op: &O, cfl: f64) -> f64 {
    cfl * 4.0 * op.grid().dim() as f64 / op.spectral_radius_bound()
}

impl StepControl {
    /// The largest admissible step for `op` with the given CFL factor.
    pub fn from_cfl<O: ExchangeOperator + ?Sized>(
        op: &O,
        cfl: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        let ctl = Self {
            dt: max_stable_dt(op, cfl),
            cfl,
            scheme,
        };
        ctl.validate(op)?;
        Ok(ctl)
    }

    pub fn validate<O: ExchangeOperator + ?Sized>(&self, op: &O) -> Result<()> {
        if !(self.cfl > 0.0) || !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidStep(format!(
                "dt {} and cfl {} must be positive",
                self.dt, self.cfl
            )));
        }
        let limit = max_stable_dt(op, self.cfl);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidStep(format!(
                "dt {:.3e} exceeds the CFL limit {:.3e}",
                self.dt, limit
            )));
        }
        Ok(())
    }
}

/// Magnetisation at time `t` together with its damping constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LLState {
    pub t: f64,
    pub m: VectorField,
    pub alpha: f64,
}

impl LLState {
    /// Fails unless `m` is unit to 1e-12 and `α ∈ [0, 1]`.
    pub fn new(m: VectorField, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "damping {alpha} not in [0, 1]"
            )));
        }
        let dev = m.max_norm_deviation();
        if dev > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "initial field is not unit (deviation {dev:.3e})"
            )));
        }
        Ok(Self { t: 0.0, m, alpha })
    }
}

/// Receives `(t, m, Lm)` at `t = 0` and after every accepted step.
pub trait Observer {
    fn observe(&mut self, t: f64, m: &VectorField, lm: &VectorField);
}

impl<F: FnMut(f64, &VectorField, &VectorField)> Observer for F {
    fn observe(&mut self, t: f64, m: &VectorField, lm: &VectorField) {
        self(t, m, lm)
    }
}

/// Records the largest nodewise `| |m| - 1 |` seen.
#[derive(Debug, Default, Clone)]
pub struct SphereObserver {
    pub max_deviation: f64,
}

impl Observer for SphereObserver {
    fn observe(&mut self, _t: f64, m: &VectorField, _lm: &VectorField) {
        self.max_deviation = self.max_deviation.max(m.max_norm_deviation());
    }
}

/// Records the exchange energy `h^d Σ a |D⁺m|²`.
#[derive(Debug, Clone)]
pub struct EnergyObserver<'a> {
    op: &'a DiffusionOperator,
    pub samples: Vec<(f64, f64)>,
}

impl<'a> EnergyObserver<'a> {
    pub fn new(op: &'a DiffusionOperator) -> Self {
        Self {
            op,
            samples: vec![],
        }
    }
}

impl Observer for EnergyObserver<'_> {
    fn observe(&mut self, t: f64, m: &VectorField, _lm: &VectorField) {
        self.samples.push((t, self.op.energy(m)));
    }
}

#[inline]
fn rhs_node(m: [f64; 3], lm: [f64; 3], alpha: f64) -> [f64; 3] {
    let p = cross(m, lm);
    let d = cross(m, p);
    [
        -p[0] - alpha * d[0],
        -p[1] - alpha * d[1],
        -p[2] - alpha * d[2],
    ]
}

fn rhs_from(m: &VectorField, lm: &VectorField, alpha: f64) -> VectorField {
    let data = m
        .data
        .iter()
        .zip(&lm.data)
        .map(|(a, b)| rhs_node(*a, *b, alpha))
        .collect();
    VectorField { grid: m.grid, data }
}

/// `-m × Lm - α m × (m × Lm)` nodewise.
pub fn llg_rhs<O: ExchangeOperator + ?Sized>(op: &O, m: &VectorField, alpha: f64) -> VectorField {
    rhs_from(m, &op.apply(m), alpha)
}

fn shifted(m: &VectorField, s: f64, k: &VectorField) -> VectorField {
    let mut out = m.clone();
    out.axpy(s, k);
    out
}

fn rk4_project<O: ExchangeOperator + ?Sized>(
    op: &O,
    m: &VectorField,
    lm: &VectorField,
    dt: f64,
    alpha: f64,
) -> VectorField {
    let k1 = rhs_from(m, lm, alpha);
    let k2 = llg_rhs(op, &shifted(m, 0.5 * dt, &k1), alpha);
    let k3 = llg_rhs(op, &shifted(m, 0.5 * dt, &k2), alpha);
    let k4 = llg_rhs(op, &shifted(m, dt, &k3), alpha);
    let mut out = m.clone();
    for (i, o) in out.data.iter_mut().enumerate() {
        for c in 0..3 {
            o[c] += dt / 6.0
                * (k1.data[i][c] + 2.0 * k2.data[i][c] + 2.0 * k3.data[i][c] + k4.data[i][c]);
        }
    }
    out.normalize();
    out
}

fn implicit_midpoint<O: ExchangeOperator + ?Sized>(
    op: &O,
    m: &VectorField,
    lm: &VectorField,
    dt: f64,
    alpha: f64,
) -> Result<VectorField> {
    // explicit Euler predictor
    let mut next = shifted(m, dt, &rhs_from(m, lm, alpha));
    let mut last_inc = f64::INFINITY;
    for it in 1..=MIDPOINT_MAX_ITER {
        let mut mid = m.clone();
        for (a, b) in mid.data.iter_mut().zip(&next.data) {
            for c in 0..3 {
                a[c] = 0.5 * (a[c] + b[c]);
            }
        }
        let candidate = shifted(m, dt, &llg_rhs(op, &mid, alpha));
        let inc = candidate.max_abs_diff(&next)?;
        next = candidate;
        if !inc.is_finite() || (it > 3 && inc > 2.0 * last_inc) {
            return Err(Error::FixedPointDiverged {
                iterations: it,
                increment: inc,
            });
        }
        if inc <= MIDPOINT_TOL || (inc <= MIDPOINT_ACCEPT && inc >= 0.5 * last_inc) {
            return Ok(next);
        }
        last_inc = inc;
    }
    if last_inc <= MIDPOINT_ACCEPT {
        return Ok(next);
    }
    Err(Error::FixedPointDiverged {
        iterations: MIDPOINT_MAX_ITER,
        increment: last_inc,
    })
}

fn advance<O: ExchangeOperator + ?Sized>(
    op: &O,
    m: &VectorField,
    lm: &VectorField,
    dt: f64,
    alpha: f64,
    scheme: Scheme,
) -> Result<VectorField> {
    match scheme {
        Scheme::Rk4Project => Ok(rk4_project(op, m, lm, dt, alpha)),
        Scheme::ImexMidpoint => implicit_midpoint(op, m, lm, dt, alpha),
    }
}

/// One step of size `ctl.dt`.
pub fn step<O: ExchangeOperator + ?Sized>(
    op: &O,
    state: &LLState,
    ctl: &StepControl,
) -> Result<LLState> {
    state.m.grid.check_same(op.grid())?;
    ctl.validate(op)?;
    let lm = op.apply(&state.m);
    let m = advance(op, &state.m, &lm, ctl.dt, state.alpha, ctl.scheme)?;
    Ok(LLState {
        t: state.t + ctl.dt,
        m,
        alpha: state.alpha,
    })
}

/// Result of a window integration.
#[derive(Debug, Clone)]
pub struct WindowOutcome {
    pub state: LLState,
    pub steps: usize,
    /// Length of the last step (shorter than `ctl.dt` when `η/dt` is not an integer).
    pub last_dt: f64,
}

/// Integrate from `state0.t` over a window of length `eta`, calling every observer at the
/// start and after each step. The last step is shortened to land exactly on the end.
pub fn solve_window<O: ExchangeOperator + ?Sized>(
    op: &O,
    state0: &LLState,
    eta: f64,
    ctl: &StepControl,
    observers: &mut [&mut dyn Observer],
) -> Result<WindowOutcome> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "window length {eta} must be positive"
        )));
    }
    state0.m.grid.check_same(op.grid())?;
    ctl.validate(op)?;
    let t0 = state0.t;
    let n_full = (eta / ctl.dt * (1.0 - 1e-12)).floor() as usize;
    let remainder = eta - n_full as f64 * ctl.dt;
    let steps = if remainder > 1e-12 * ctl.dt {
        n_full + 1
    } else {
        n_full.max(1)
    };
    let mut m = state0.m.clone();
    let mut lm = op.apply(&m);
    for o in observers.iter_mut() {
        o.observe(0.0, &m, &lm);
    }
    let mut last_dt = ctl.dt;
    for s in 1..=steps {
        let dt = if s == steps {
            eta - (steps - 1) as f64 * ctl.dt
        } else {
            ctl.dt
        };
        m = advance(op, &m, &lm, dt, state0.alpha, ctl.scheme)?;
        lm = op.apply(&m);
        let t = if s == steps { eta } else { s as f64 * ctl.dt };
        for o in observers.iter_mut() {
            o.observe(t, &m, &lm);
        }
        last_dt = dt;
    }
    Ok(WindowOutcome {
        state: LLState {
            t: t0 + eta,
            m,
            alpha: state0.alpha,
        },
        steps,
        last_dt,
    })
}

/// How the macro field is transferred to the micro grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Sample the analytic field at every node.
    Exact,
    /// Sample the second-order Taylor polynomial at the origin (minimal-image
    /// coordinates) and renormalise. Derivatives up to order two at the origin match
    /// the macro field's because the field is unit there and its gradient rows are
    /// orthogonal to it.
    Taylor2,
}

impl std::str::FromStr for Restriction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Restriction::Exact),
            "taylor2" | "taylor" => Ok(Restriction::Taylor2),
            other => Err(Error::InvalidArgument(format!(
                "unknown restriction '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Restriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Restriction::Exact => "exact",
            Restriction::Taylor2 => "taylor2",
        })
    }
}

/// Build a unit micro field from analytic macro data.
pub fn restrict_initial_data(
    field: &MacroField,
    grid: PeriodicGrid,
    mode: Restriction,
) -> Result<VectorField> {
    if field.min_dim() > grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial data '{}' needs dimension {}, grid has {}",
            field.label(),
            field.min_dim(),
            grid.dim()
        )));
    }
    match mode {
        Restriction::Exact => {
            let mut m = VectorField::from_fn(grid, |x| field.value(x));
            m.normalize();
            Ok(m)
        }
        Restriction::Taylor2 => taylor2_field(&field.at_origin(), grid),
    }
}

/// Sample the second-order Taylor polynomial built from `o` at minimal-image node
/// coordinates and renormalise. Fails with `DegenerateData` where its length drops below 0.1.
pub fn taylor2_field(o: &PointDerivatives, grid: PeriodicGrid) -> Result<VectorField> {
    let d = grid.dim();
    let mut m = VectorField::zeros(grid);
    for (idx, slot) in m.data.iter_mut().enumerate() {
        let x = grid.centered_position(idx);
        let mut v = o.value;
        for c in 0..3 {
            for k in 0..d {
                v[c] += o.grad[k][c] * x[k];
                for l in 0..d {
                    v[c] += 0.5 * o.hess[c][k][l] * x[k] * x[l];
                }
            }
        }
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 0.1 {
            return Err(Error::DegenerateData { norm: n, node: idx });
        }
        *slot = [v[0] / n, v[1] / n, v[2] / n];
    }
    Ok(m)
}
