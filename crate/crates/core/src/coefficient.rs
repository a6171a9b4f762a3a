//! The periodic material coefficient `a(y)` and its `epsilon`-scaled version `a(x/epsilon)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use evalexpr::{
    ContextWithMutableFunctions, ContextWithMutableVariables, Function, HashMapContext, Node, Value,
};

use crate::error::{Error, Result};

/// Shape of a 1-periodic coefficient on the unit cell.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// `1 + 0.5 sin(2πy) + 0.5 sin(4πy)`.
    Paper1d,
    /// `1/2 + (1/2 + sin(2πy1)/4)(1/2 + sin(2πy2)/4) + cos(2π(y1-y2))/4 + sin(2πy1)/4`.
    Paper2d,
    /// User expression in the variables `y` (alias of `y1`), `y1`, `y2`, `y3`.
    Expression {
        source: String,
        tree: Node,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Paper1d => write!(f, "Paper1d"),
            Profile::Paper2d => write!(f, "Paper2d"),
            Profile::Expression { source, .. } => write!(f, "Expression({source:?})"),
        }
    }
}

/// A smooth, positive, 1-periodic coefficient `a: [0,1)^d -> R` together with
/// sampled bounds `a_min <= a <= a_max`.
#[derive(Debug, Clone)]
pub struct CellCoefficient {
    dim: usize,
    profile: Profile,
    a_min: f64,
    a_max: f64,
}

impl CellCoefficient {
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constant coefficient {value} must be positive"
            )));
        }
        Ok(Self {
            dim,
            profile: Profile::Constant(value),
            a_min: value,
            a_max: value,
        })
    }

    /// The one-dimensional coefficient of the 1D experiments.
    pub fn paper_1d() -> Self {
        Self::with_profile(1, Profile::Paper1d).expect("paper coefficient is positive")
    }

    /// The two-dimensional coefficient of the 2D experiments.
    pub fn paper_2d() -> Self {
        Self::with_profile(2, Profile::Paper2d).expect("paper coefficient is positive")
    }

    /// Parse a user expression such as `1 + 0.5*sin(2*pi*y)`.
    ///
    /// Available: `sin cos exp sqrt abs`, the constant `pi` and the variables
    /// `y`/`y1`, `y2`, `y3`. Integer literals use integer arithmetic, so write
    /// `0.5` rather than `1/2`.
    pub fn expression(dim: usize, source: &str) -> Result<Self> {
        let tree = evalexpr::build_operator_tree(source).map_err(|e| {
            Error::InvalidArgument(format!("coefficient expression {source:?}: {e}"))
        })?;
        Self::with_profile(
            dim,
            Profile::Expression {
                source: source.to_string(),
                tree,
            },
        )
    }

    /// Preset lookup by name: `paper_1d`, `paper_2d`, `const:<value>`, or `expr:<expression>`.
    pub fn from_name(dim: usize, name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "paper_1d" => {
                if dim != 1 {
                    return Err(Error::InvalidArgument(
                        "paper_1d is a 1D coefficient".into(),
                    ));
                }
                Ok(Self::paper_1d())
            }
            "paper_2d" => {
                if dim != 2 {
                    return Err(Error::InvalidArgument(
                        "paper_2d is a 2D coefficient".into(),
                    ));
                }
                Ok(Self::paper_2d())
            }
            _ => {
                if let Some(v) = name.strip_prefix("const:") {
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad constant in {name:?}")))?;
                    Self::constant(dim, v)
                } else if let Some(src) = name.strip_prefix("expr:") {
                    Self::expression(dim, src.trim())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "unknown coefficient preset {name:?}"
                    )))
                }
            }
        }
    }

    fn with_profile(dim: usize, profile: Profile) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} not in 1..=3"
            )));
        }
        let mut c = Self {
            dim,
            profile,
            a_min: f64::INFINITY,
            a_max: f64::NEG_INFINITY,
        };
        // Sampled bounds on a fine lattice.
        let samples: usize = match dim {
            1 => 4096,
            2 => 256,
            _ => 48,
        };
        let total = samples.pow(dim as u32);
        for idx in 0..total {
            let mut y = [0.0; 3];
            let mut rest = idx;
            for slot in y.iter_mut().take(dim) {
                *slot = (rest % samples) as f64 / samples as f64;
                rest /= samples;
            }
            let v = c.try_eval(&y[..dim])?;
            c.a_min = c.a_min.min(v);
            c.a_max = c.a_max.max(v);
        }
        if !(c.a_min > 0.0) || !c.a_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coefficient must be positive and finite, sampled range [{}, {}]",
                c.a_min, c.a_max
            )));
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.profile, Profile::Constant(_))
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match &self.profile {
            Profile::Constant(c) => format!("const:{c}"),
            Profile::Paper1d => "paper_1d".into(),
            Profile::Paper2d => "paper_2d".into(),
            Profile::Expression { source, .. } => format!("expr:{source}"),
        }
    }

    /// `a(y)`, periodic in every coordinate.
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.try_eval(y)
            .expect("coefficient expression validated at construction")
    }

    fn try_eval(&self, y: &[f64]) -> Result<f64> {
        let mut r = [0.0; 3];
        for (k, v) in y.iter().take(self.dim).enumerate() {
            r[k] = v.rem_euclid(1.0);
        }
        let tp = 2.0 * PI;
        Ok(match &self.profile {
            Profile::Constant(c) => *c,
            Profile::Paper1d => 1.0 + 0.5 * (tp * r[0]).sin() + 0.5 * (2.0 * tp * r[0]).sin(),
            Profile::Paper2d => {
                let s1 = (tp * r[0]).sin();
                let s2 = (tp * r[1]).sin();
                0.5 + (0.5 + 0.25 * s1) * (0.5 + 0.25 * s2)
                    + 0.25 * (tp * (r[0] - r[1])).cos()
                    + 0.25 * s1
            }
            Profile::Expression { source, tree } => {
                let ctx = expression_context(&r)?;
                tree.eval_number_with_context(&ctx)
                    .map_err(|e| Error::InvalidArgument(format!("evaluating {source:?}: {e}")))?
            }
        })
    }

    /// Harmonic mean `(∫ 1/a)^{-1}` by the midpoint rule with `n` points per axis.
    pub fn harmonic_mean(&self, n: usize) -> f64 {
        1.0 / self.cell_mean(n, |a| 1.0 / a)
    }

    /// Arithmetic mean `∫ a` by the midpoint rule with `n` points per axis.
    pub fn arithmetic_mean(&self, n: usize) -> f64 {
        self.cell_mean(n, |a| a)
    }

    fn cell_mean(&self, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let total = n.pow(self.dim as u32);
        let mut s = 0.0;
        for idx in 0..total {
            let mut y = [0.0; 3];
            let mut rest = idx;
            for slot in y.iter_mut().take(self.dim) {
                *slot = ((rest % n) as f64 + 0.5) / n as f64;
                rest /= n;
            }
            s += f(self.eval(&y[..self.dim]));
        }
        s / total as f64
    }
}

fn expression_context(y: &[f64; 3]) -> Result<HashMapContext> {
    let mut ctx = HashMapContext::new();
    let wrap = |e: evalexpr::EvalexprError| Error::InvalidArgument(e.to_string());
    for (name, f) in [
        ("sin", f64::sin as fn(f64) -> f64),
        ("cos", f64::cos),
        ("exp", f64::exp),
        ("sqrt", f64::sqrt),
        ("abs", f64::abs),
    ] {
        ctx.set_function(
            name.into(),
            Function::new(move |arg| Ok(Value::Float(f(arg.as_number()?)))),
        )
        .map_err(wrap)?;
    }
    ctx.set_value("pi".into(), Value::Float(PI)).map_err(wrap)?;
    ctx.set_value("y".into(), Value::Float(y[0]))
        .map_err(wrap)?;
    ctx.set_value("y1".into(), Value::Float(y[0]))
        .map_err(wrap)?;
    ctx.set_value("y2".into(), Value::Float(y[1]))
        .map_err(wrap)?;
    ctx.set_value("y3".into(), Value::Float(y[2]))
        .map_err(wrap)?;
    Ok(ctx)
}

/// The oscillatory coefficient `a^ε(x) = a(x/ε)`.
#[derive(Debug, Clone)]
pub struct Coefficient {
    cell: Arc<CellCoefficient>,
    eps: f64,
}

impl Coefficient {
    pub fn new(cell: CellCoefficient, eps: f64) -> Result<Self> {
        Self::shared(Arc::new(cell), eps)
    }

    pub fn shared(cell: Arc<CellCoefficient>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon {eps} must be positive"
            )));
        }
        Ok(Self { cell, eps })
    }

    /// Constant coefficient `a ≡ value` (ε is irrelevant and set to 1).
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::new(CellCoefficient::constant(dim, value)?, 1.0)
    }

    pub fn cell(&self) -> &CellCoefficient {
        &self.cell
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.cell.dim
    }

    pub fn a_min(&self) -> f64 {
        self.cell.a_min
    }

    pub fn a_max(&self) -> f64 {
        self.cell.a_max
    }

    /// `a(x/ε)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut y = [0.0; 3];
        for (k, v) in x.iter().take(self.cell.dim).enumerate() {
            y[k] = v / self.eps;
        }
        self.cell.eval(&y[..self.cell.dim])
    }
}
