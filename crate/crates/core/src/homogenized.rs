//! Homogenized Landau-Lifshitz dynamics with a constant tensor, and the reference
//! quantities at the macro point.

use std::io::Write;

use crate::error::Result;
use crate::grid::{cross, VectorField};
use crate::macro_field::PointDerivatives;
use crate::micro::{solve_window, LLState, Observer, StepControl};
use crate::operator::{HomogenizedOperator, HomogenizedTensor};
use crate::snapshot::write_snapshot;

/// Homogenized targets at `x = 0`, computed from analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct References {
    pub dim: usize,
    /// `flux[i][c] = Σ_k A_ik ∂_k m_c` (rows are space).
    pub flux: [[f64; 3]; 3],
    /// `field[c] = Σ_kl A_kl ∂_k ∂_l m_c`.
    pub field: [f64; 3],
    /// `m × field`.
    pub torque: [f64; 3],
}

pub fn reference_quantities(m: &PointDerivatives, a: &HomogenizedTensor) -> References {
    let d = a.dim();
    let mut flux = [[0.0; 3]; 3];
    let mut field = [0.0; 3];
    for c in 0..3 {
        for i in 0..d {
            for k in 0..d {
                flux[i][c] += a.get(i, k) * m.grad[k][c];
                field[c] += a.get(i, k) * m.hess[c][i][k];
            }
        }
    }
    References {
        dim: d,
        flux,
        field,
        torque: cross(m.value, field),
    }
}

/// States recorded along a homogenized run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VectorField>,
}

/// Integrate the homogenized equation to time `t_end`, recording the initial state,
/// every `record_every`-th step, and the final state.
pub fn solve_homogenized(
    op: &HomogenizedOperator,
    state0: &LLState,
    t_end: f64,
    ctl: &StepControl,
    record_every: usize,
) -> Result<Trajectory> {
    let every = record_every.max(1);
    let mut traj = Trajectory {
        times: vec![],
        states: vec![],
    };
    let mut count = 0usize;
    {
        let mut rec = |t: f64, m: &VectorField, _: &VectorField| {
            if count % every == 0 {
                traj.times.push(state0.t + t);
                traj.states.push(m.clone());
            }
            count += 1;
        };
        let out = solve_window(
            op,
            state0,
            t_end - state0.t,
            ctl,
            &mut [&mut rec as &mut dyn Observer],
        )?;
        if traj.times.last().copied() != Some(out.state.t) {
            traj.times.push(out.state.t);
            traj.states.push(out.state.m);
        }
    }
    Ok(traj)
}

/// Snapshot with the tensor stored row-major in the header extension.
pub fn write_homogenized_snapshot<W: Write>(
    w: W,
    field: &VectorField,
    t: f64,
    a: &HomogenizedTensor,
) -> Result<()> {
    let ext: Vec<f64> = a.rows().into_iter().flatten().collect();
    write_snapshot(w, field, t, &ext)
}
