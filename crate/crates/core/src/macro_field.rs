//! Analytic macro-scale initial data with exact derivatives up to second order.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A value carried together with its gradient and Hessian (forward mode, order two).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }

    /// The coordinate `x_axis` evaluated at `value`.
    pub fn variable(value: f64, axis: usize) -> Self {
        let mut j = Self::constant(value);
        j.g[axis] = 1.0;
        j
    }

    /// Chain rule for a scalar function with value `f0`, slope `f1`, curvature `f2`.
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for k in 0..3 {
            out.g[k] = f1 * self.g[k];
            for l in 0..3 {
                out.h[k][l] = f1 * self.h[k][l] + f2 * self.g[k] * self.g[l];
            }
        }
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for k in 0..3 {
            self.g[k] += o.g[k];
            for l in 0..3 {
                self.h[k][l] += o.h[k][l];
            }
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for k in 0..3 {
            out.g[k] = self.v * o.g[k] + o.v * self.g[k];
            for l in 0..3 {
                out.h[k][l] = self.v * o.h[k][l]
                    + o.v * self.h[k][l]
                    + self.g[k] * o.g[l]
                    + o.g[k] * self.g[l];
            }
        }
        out
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, s: f64) -> Jet {
        self.v *= s;
        for k in 0..3 {
            self.g[k] *= s;
            for l in 0..3 {
                self.h[k][l] *= s;
            }
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.v += s;
        self
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

/// Value, gradient and Hessian of a vector field at one point.
///
/// `grad[k][c] = ∂_k m_c` (rows are space) and `hess[c][k][l] = ∂_k ∂_l m_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDerivatives {
    pub value: [f64; 3],
    pub grad: [[f64; 3]; 3],
    pub hess: [[[f64; 3]; 3]; 3],
}

impl PointDerivatives {
    fn from_jets(j: [Jet; 3]) -> Self {
        let mut grad = [[0.0; 3]; 3];
        for (k, row) in grad.iter_mut().enumerate() {
            for c in 0..3 {
                row[c] = j[c].g[k];
            }
        }
        Self {
            value: [j[0].v, j[1].v, j[2].v],
            grad,
            hess: [j[0].h, j[1].h, j[2].h],
        }
    }
}

/// Built-in smooth unit-vector fields, 1-periodic in every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MacroField {
    /// A fixed direction (normalised on construction).
    Constant([f64; 3]),
    /// `(cos 2πx₁, sin 2πx₁, 1)/√2`.
    Helix,
    /// `(cos θ, sin θ, 1)/√2` with `θ = 2π(x₁ + x₂)`.
    Helix2d,
    /// `normalize(0.6 cos 2πx₁, 0.6 sin 2πx₂, 1 + 0.3 sin 2π(x₁ - x₂))`.
    Wave2d,
}

impl MacroField {
    /// Parse `constant`, `constant:x,y,z`, `helix`, `helix2d` or `wave2d`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "constant" => return Ok(MacroField::Constant([0.0, 0.0, 1.0])),
            "helix" => return Ok(MacroField::Helix),
            "helix2d" => return Ok(MacroField::Helix2d),
            "wave2d" => return Ok(MacroField::Wave2d),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix("constant:") {
            let v: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| {
                    Error::InvalidArgument(format!("bad constant direction '{rest}': {e}"))
                })?;
            if v.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "constant direction needs 3 entries, got {}",
                    v.len()
                )));
            }
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidArgument(
                    "constant direction must be nonzero".into(),
                ));
            }
            return Ok(MacroField::Constant([v[0] / n, v[1] / n, v[2] / n]));
        }
        Err(Error::InvalidArgument(format!(
            "unknown initial data '{name}' (expected constant, constant:x,y,z, helix, helix2d, wave2d)"
        )))
    }

    pub fn label(&self) -> String {
        match self {
            MacroField::Constant(v) => format!("constant:{},{},{}", v[0], v[1], v[2]),
            MacroField::Helix => "helix".into(),
            MacroField::Helix2d => "helix2d".into(),
            MacroField::Wave2d => "wave2d".into(),
        }
    }

    /// Smallest spatial dimension the field needs.
    pub fn min_dim(&self) -> usize {
        match self {
            MacroField::Helix2d | MacroField::Wave2d => 2,
            _ => 1,
        }
    }

    /// The three components as jets at `x`.
    pub fn jets(&self, x: [f64; 3]) -> [Jet; 3] {
        let tau = 2.0 * PI;
        let x1 = Jet::variable(x[0], 0);
        let x2 = Jet::variable(x[1], 1);
        let raw = match self {
            MacroField::Constant(v) => return v.map(Jet::constant),
            MacroField::Helix => {
                let th = x1 * tau;
                [th.cos(), th.sin(), Jet::constant(1.0)]
            }
            MacroField::Helix2d => {
                let th = (x1 + x2) * tau;
                [th.cos(), th.sin(), Jet::constant(1.0)]
            }
            MacroField::Wave2d => [
                (x1 * tau).cos() * 0.6,
                (x2 * tau).sin() * 0.6,
                ((x1 - x2) * tau).sin() * 0.3 + 1.0,
            ],
        };
        let n = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2])
            .sqrt()
            .recip();
        raw.map(|c| c * n)
    }

    pub fn value(&self, x: [f64; 3]) -> [f64; 3] {
        self.jets(x).map(|j| j.v)
    }

    pub fn derivatives(&self, x: [f64; 3]) -> PointDerivatives {
        PointDerivatives::from_jets(self.jets(x))
    }

    /// Derivatives at the macro point `x = 0`.
    pub fn at_origin(&self) -> PointDerivatives {
        self.derivatives([0.0; 3])
    }
}
