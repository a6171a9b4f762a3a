//! Compactly supported averaging kernels with vanishing moments.
//!
//! One-sided kernels live on `[0,1]` and have the form `t^{q+1}(1-t)^{q+1} P(t)`;
//! symmetric kernels live on `[-1,1]` and have the form `(1-t²)^{q+1} P(t²)`.
//! `P` is fixed by requiring `∫K = 1` and `∫K t^r = 0` for `1 <= r <= p`.

use std::fmt;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest supported number of vanishing moments.
pub const MAX_MOMENTS: usize = 12;

const MASS_TOL: f64 = 1e-10;
const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelFamily {
    Symmetric,
    OneSided,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Symmetric => "symmetric",
            KernelFamily::OneSided => "one_sided",
        })
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "symmetric" => Ok(KernelFamily::Symmetric),
            "one_sided" | "one-sided" => Ok(KernelFamily::OneSided),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel family '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    pub p: usize,
    pub q: usize,
    pub family: KernelFamily,
}

/// `B(a, m)` for real `a > 0` and integer `m >= 1`: `(m-1)! / Π_{i<m} (a+i)`.
pub fn beta_int(a: f64, m: usize) -> f64 {
    assert!(m >= 1 && a > 0.0);
    let mut b = 1.0 / a;
    for i in 1..m {
        b *= i as f64 / (a + i as f64);
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    spec: KernelSpec,
    /// Coefficients of `P` in the variable `t` (one-sided) or `t²` (symmetric).
    coeffs: Vec<f64>,
    /// `moments[r] = ∫K t^r` for `0 <= r <= p`, by Gauss-Legendre quadrature.
    moments: Vec<f64>,
}

impl Kernel {
    pub fn build(spec: KernelSpec) -> Result<Self> {
        match spec.family {
            KernelFamily::OneSided => Self::build_one_sided(spec.p, spec.q),
            KernelFamily::Symmetric => Self::build_symmetric(spec.p, spec.q),
        }
    }

    pub fn build_one_sided(p: usize, q: usize) -> Result<Self> {
        check_orders(p, q)?;
        // I_j = ∫₀¹ t^{q+1+j} (1-t)^{q+1} dt = B(q+2+j, q+2)
        let moment = |j: usize| beta_int((q + 2 + j) as f64, q + 2);
        let m = DMatrix::from_fn(p + 1, p + 1, |r, j| moment(r + j));
        let spec = KernelSpec {
            p,
            q,
            family: KernelFamily::OneSided,
        };
        Self::finish(spec, m)
    }

    pub fn build_symmetric(p: usize, q: usize) -> Result<Self> {
        check_orders(p, q)?;
        // ∫₋₁¹ (1-t²)^{q+1} t^{2k} dt = B(k + 1/2, q + 2)
        let moment = |k: usize| beta_int(k as f64 + 0.5, q + 2);
        let n = p / 2 + 1;
        let m = DMatrix::from_fn(n, n, |s, j| moment(s + j));
        let spec = KernelSpec {
            p,
            q,
            family: KernelFamily::Symmetric,
        };
        Self::finish(spec, m)
    }

    fn finish(spec: KernelSpec, m: DMatrix<f64>) -> Result<Self> {
        let mut rhs = DVector::zeros(m.nrows());
        rhs[0] = 1.0;
        let coeffs = m.lu().solve(&rhs).ok_or(Error::IllConditioned {
            p: spec.p,
            q: spec.q,
            residual: f64::INFINITY,
        })?;
        let mut k = Self {
            spec,
            coeffs: coeffs.iter().copied().collect(),
            moments: vec![],
        };
        k.moments = (0..=spec.p).map(|r| k.quadrature_moment(r)).collect();
        let residual = k.max_moment_residual();
        let mass_err = (k.moments[0] - 1.0).abs();
        if !(mass_err <= MASS_TOL && residual <= MOMENT_TOL) {
            return Err(Error::IllConditioned {
                p: spec.p,
                q: spec.q,
                residual: residual.max(mass_err),
            });
        }
        Ok(k)
    }

    /// `∫ K(t) t^r dt` over the support, by Gauss-Legendre quadrature exact for the integrand.
    pub fn quadrature_moment(&self, r: usize) -> f64 {
        let (a, b) = self.support();
        let degree = 2 * (self.spec.q + 1) + 2 * self.coeffs.len() + r;
        let nodes = NonZeroUsize::new(degree / 2 + 2).expect("positive");
        GaussLegendre::new(nodes).integrate(a, b, |t| self.eval(t) * t.powi(r as i32))
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    /// Largest `|∫K t^r - δ_{r0}|` over `0 <= r <= p`.
    pub fn max_moment_residual(&self) -> f64 {
        self.moments
            .iter()
            .enumerate()
            .map(|(r, m)| if r == 0 { (m - 1.0).abs() } else { m.abs() })
            .fold(0.0, f64::max)
    }

    pub fn support(&self) -> (f64, f64) {
        match self.spec.family {
            KernelFamily::OneSided => (0.0, 1.0),
            KernelFamily::Symmetric => (-1.0, 1.0),
        }
    }

    fn poly(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `K(t)`, zero outside the open support.
    pub fn eval(&self, t: f64) -> f64 {
        let e = (self.spec.q + 1) as i32;
        match self.spec.family {
            KernelFamily::OneSided => {
                if t <= 0.0 || t >= 1.0 {
                    0.0
                } else {
                    (t * (1.0 - t)).powi(e) * self.poly(t)
                }
            }
            KernelFamily::Symmetric => {
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    let s = t * t;
                    (1.0 - s).powi(e) * self.poly(s)
                }
            }
        }
    }

    /// `d^j K / dt^j` at `t` (one-sided side limits are taken from inside the support).
    pub fn derivative(&self, t: f64, order: usize) -> f64 {
        let (a, b) = self.support();
        if t < a || t > b {
            return 0.0;
        }
        // Expand K as w(t)·P(u(t)) and differentiate both factors by Leibniz.
        let e = self.spec.q + 1;
        let w: Vec<f64>;
        let pd: Vec<f64>;
        match self.spec.family {
            KernelFamily::OneSided => {
                let left = power_derivatives(t, e, 1.0, order);
                let right = power_derivatives(1.0 - t, e, -1.0, order);
                w = leibniz(&left, &right);
                pd = poly_derivatives(&self.coeffs, t, order);
            }
            KernelFamily::Symmetric => {
                let left = power_derivatives(1.0 - t, e, -1.0, order);
                let right = power_derivatives(1.0 + t, e, 1.0, order);
                w = leibniz(&left, &right);
                // P(t²) written as a polynomial in t.
                let mut full = vec![0.0; 2 * self.coeffs.len()];
                for (j, c) in self.coeffs.iter().enumerate() {
                    full[2 * j] = *c;
                }
                pd = poly_derivatives(&full, t, order);
            }
        }
        leibniz(&w, &pd)[order]
    }

    /// `K_s(x) = K(x/s)/s`.
    pub fn eval_scaled(&self, scale: f64, x: f64) -> f64 {
        debug_assert!(scale > 0.0);
        self.eval(x / scale) / scale
    }

    /// `Π_k K_s(x_k)` over the first `x.len()` axes.
    pub fn eval_tensor(&self, scale: f64, x: &[f64]) -> f64 {
        x.iter().map(|xi| self.eval_scaled(scale, *xi)).product()
    }
}

fn check_orders(p: usize, q: usize) -> Result<()> {
    if p > MAX_MOMENTS {
        return Err(Error::InvalidArgument(format!(
            "p = {p} exceeds the conditioning guard {MAX_MOMENTS}"
        )));
    }
    if q > 20 {
        return Err(Error::InvalidArgument(format!("q = {q} exceeds 20")));
    }
    Ok(())
}

/// Derivatives `0..=order` of `(s)^e` where `ds/dt = sign`.
fn power_derivatives(s: f64, e: usize, sign: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    let mut falling = 1.0;
    for (j, slot) in out.iter_mut().enumerate() {
        if j > e {
            break;
        }
        *slot = falling * s.powi((e - j) as i32) * sign.powi(j as i32);
        falling *= (e - j) as f64;
    }
    out
}

fn poly_derivatives(coeffs: &[f64], t: f64, order: usize) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        out.push(c.iter().rev().fold(0.0, |acc, v| acc * t + v));
        c = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, v)| i as f64 * v)
            .collect();
    }
    out
}

/// Derivatives of a product from derivatives of its factors.
fn leibniz(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len().min(g.len());
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            *slot += binom * f[j] * g[k - j];
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_closed_form() {
        assert!((beta_int(2.0, 2) - 1.0 / 6.0).abs() < 1e-16);
        assert!((beta_int(3.0, 2) - 1.0 / 12.0).abs() < 1e-16);
        assert!((beta_int(0.5, 2) - 4.0 / 3.0).abs() < 1e-15);
        // B(a,b) = B(b,a)
        assert!((beta_int(5.0, 3) - beta_int(3.0, 5)).abs() < 1e-17);
    }

    #[test]
    fn low_order_one_sided_coefficients() {
        let k = Kernel::build_one_sided(0, 0).unwrap();
        assert!((k.coefficients()[0] - 6.0).abs() < 1e-12);
        let k = Kernel::build_one_sided(1, 0).unwrap();
        assert!((k.coefficients()[0] - 36.0).abs() < 1e-10);
        assert!((k.coefficients()[1] + 60.0).abs() < 1e-10);
        for q in 0..6 {
            let k = Kernel::build_one_sided(0, q).unwrap();
            let c0 = 1.0 / beta_int((q + 2) as f64, q + 2);
            assert!((k.coefficients()[0] - c0).abs() < 1e-10 * c0);
        }
    }

    #[test]
    fn low_order_symmetric() {
        let k = Kernel::build_symmetric(0, 0).unwrap();
        assert!((k.coefficients()[0] - 0.75).abs() < 1e-14);
        assert!((k.eval(0.5) - 0.75 * 0.75).abs() < 1e-14);
        let k = Kernel::build_symmetric(2, 2).unwrap();
        assert!(k.quadrature_moment(1).abs() < 1e-14);
        assert!(k.quadrature_moment(2).abs() < 1e-8);
        assert!((k.quadrature_moment(0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn odd_p_symmetric_kernels_get_the_next_odd_moment_free() {
        let k = Kernel::build_symmetric(3, 1).unwrap();
        assert_eq!(k.coefficients().len(), 2);
        for r in 1..=3 {
            assert!(k.quadrature_moment(r).abs() < 1e-8);
        }
    }

    #[test]
    fn high_order_kernels_pass_the_gate() {
        for (p, q) in [(5, 7), (6, 5), (4, 12), (3, 3)] {
            let k = Kernel::build_one_sided(p, q).unwrap();
            assert!(k.max_moment_residual() < 1e-8, "{p} {q}");
        }
        for (p, q) in [(5, 7), (7, 7), (10, 3), (12, 12)] {
            let k = Kernel::build_symmetric(p, q).unwrap();
            assert!(k.max_moment_residual() < 1e-12, "{p} {q}");
        }
    }

    #[test]
    fn gate_reports_ill_conditioned_one_sided_kernels() {
        assert!(matches!(
            Kernel::build_one_sided(7, 7),
            Err(Error::IllConditioned { p: 7, q: 7, .. })
        ));
        assert!(matches!(
            Kernel::build_one_sided(12, 12),
            Err(Error::IllConditioned { .. })
        ));
        assert!(matches!(
            Kernel::build_one_sided(13, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for k in [
            Kernel::build_one_sided(3, 3).unwrap(),
            Kernel::build_symmetric(4, 2).unwrap(),
        ] {
            for &t in &[0.2, 0.37, 0.81] {
                let step = 1e-5;
                for order in 1..4 {
                    let fd = (k.derivative(t + step, order - 1)
                        - k.derivative(t - step, order - 1))
                        / (2.0 * step);
                    let exact = k.derivative(t, order);
                    assert!(
                        (fd - exact).abs() < 1e-5 * exact.abs().max(1.0),
                        "order {order} t {t}"
                    );
                }
                assert!((k.derivative(t, 0) - k.eval(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn endpoint_flatness() {
        for (p, q) in [(0, 0), (1, 0), (3, 3), (5, 7)] {
            let k = Kernel::build_one_sided(p, q).unwrap();
            for j in 0..=q {
                assert!(k.derivative(0.0, j).abs() <= 1e-10);
                assert!(k.derivative(1.0, j).abs() <= 1e-10);
            }
            assert!(k.derivative(0.0, q + 1).abs() > 1e-3);
            let s = Kernel::build_symmetric(p, q).unwrap();
            for j in 0..=q {
                assert!(
                    s.derivative(-1.0, j).abs() <= 1e-10 && s.derivative(1.0, j).abs() <= 1e-10
                );
            }
        }
    }

    #[test]
    fn scaled_kernel_support_and_mass() {
        let k = Kernel::build_symmetric(5, 7).unwrap();
        let mu = 0.03;
        assert_eq!(k.eval_scaled(mu, 0.031), 0.0);
        assert_eq!(k.eval_scaled(1.0, 0.4), k.eval(0.4));
        let gl = GaussLegendre::new(NonZeroUsize::new(40).unwrap());
        let mass = gl.integrate(-mu, mu, |x| k.eval_scaled(mu, x));
        assert!((mass - 1.0).abs() < 1e-10);
        let o = Kernel::build_one_sided(2, 1).unwrap();
        assert_eq!(o.eval_scaled(mu, -1e-9), 0.0);
        assert_eq!(o.eval_scaled(mu, mu), 0.0);
        let mass2 = gl.integrate(-mu, mu, |x| {
            gl.integrate(-mu, mu, |y| k.eval_tensor(mu, &[x, y]))
        });
        assert!((mass2 - 1.0).abs() < 1e-8);
        assert!((k.eval_tensor(mu, &[0.0, 0.0]) - k.eval_scaled(mu, 0.0).powi(2)).abs() < 1e-9);
    }
}
