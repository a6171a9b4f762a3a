//! Conjugate gradients for singular consistent periodic systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖` after projection onto mean-zero vectors.
    pub relative_residual: f64,
}

fn project_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` for symmetric `A` that is positive definite on mean-zero vectors
/// and annihilates constants. `b` is projected to zero mean, as is every residual;
/// the returned `x` has zero mean.
///
/// `diag`, when given, is used as a Jacobi preconditioner. The iteration restarts
/// from the true residual whenever the recursive residual claims convergence, which
/// guards against drift on badly conditioned systems.
///
/// Fails with `NoConvergence` if the relative residual is still above `accept`
/// after `max_iter` iterations in total. Iteration stops once it drops below `tol`.
pub fn cg_mean_zero(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: Option<&[f64]>,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    accept: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    const MAX_RESTARTS: usize = 8;
    let n = b.len();
    let mut rhs = b.to_vec();
    project_mean(&mut rhs);
    project_mean(x);
    let bnorm = dot(&rhs, &rhs).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let precondition = |r: &[f64], z: &mut [f64]| match diag {
        Some(d) => z
            .iter_mut()
            .zip(r.iter().zip(d))
            .for_each(|(z, (r, d))| *z = r / d),
        None => z.copy_from_slice(r),
    };
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut rel = f64::INFINITY;
    for _ in 0..=MAX_RESTARTS {
        apply(x, &mut ax);
        r.iter_mut()
            .zip(rhs.iter().zip(&ax))
            .for_each(|(r, (b, a))| *r = b - a);
        project_mean(&mut r);
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol || it >= max_iter {
            break;
        }
        precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while it < max_iter && dot(&r, &r).sqrt() > tol * bnorm {
            apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            project_mean(&mut r);
            precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            it += 1;
        }
        project_mean(x);
    }
    if rel > accept {
        return Err(Error::NoConvergence {
            iterations: it,
            residual: rel,
        });
    }
    Ok(CgOutcome {
        iterations: it,
        relative_residual: rel,
    })
}
