//! Flat `key = value` sweep configuration. List keys may repeat or hold
//! comma-separated values; `#` starts a comment.

use std::fmt;
use std::path::PathBuf;

use crate::coefficient::CellCoefficient;
use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::macro_field::MacroField;
use crate::micro::{Restriction, Scheme, DEFAULT_CFL};
use crate::upscaling::{AveragingWindow, Model, ReferenceTensor, WindowCheck, WindowSpec};

/// Kernel orders `(p_x, q_x, p_t, q_t)`.
pub type KernelOrders = [usize; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dimension: usize,
    pub coefficient: String,
    pub m_init: String,
    pub epsilons: Vec<f64>,
    pub mus: Vec<f64>,
    pub etas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub kernels: Vec<KernelOrders>,
    pub models: Vec<Model>,
    pub ell: f64,
    pub points_per_period: usize,
    pub cfl: f64,
    pub scheme: Scheme,
    pub restriction: Restriction,
    pub reference: ReferenceTensor,
    pub window_check: WindowCheck,
    pub output: Option<PathBuf>,
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            coefficient: "paper_1d".into(),
            m_init: "helix".into(),
            epsilons: vec![],
            mus: vec![],
            etas: vec![],
            alphas: vec![],
            kernels: vec![],
            models: Model::ALL.to_vec(),
            ell: 1.0,
            points_per_period: 8,
            cfl: DEFAULT_CFL,
            scheme: Scheme::Rk4Project,
            restriction: Restriction::Exact,
            reference: ReferenceTensor::Commensurate,
            window_check: WindowCheck::Strict,
            output: None,
            jobs: 1,
        }
    }
}

const LIST_KEYS: [&str; 6] = ["epsilon", "mu", "eta", "alpha", "kernel", "model"];
const SCALAR_KEYS: [&str; 12] = [
    "dimension",
    "coefficient",
    "m_init",
    "ell",
    "points_per_period",
    "cfl",
    "scheme",
    "restriction",
    "reference",
    "window_check",
    "output",
    "jobs",
];

/// Parse `1/140`, `0.05` or `5e-2`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
        if b == 0.0 {
            return Err(format!("division by zero in '{s}'"));
        }
        return Ok(a / b);
    }
    s.parse().map_err(|_| format!("bad number '{s}'"))
}

fn parse_reference(s: &str) -> std::result::Result<ReferenceTensor, String> {
    let s = s.trim();
    if s == "commensurate" {
        return Ok(ReferenceTensor::Commensurate);
    }
    if let Some(n) = s.strip_prefix("cell:") {
        return n
            .trim()
            .parse()
            .map(ReferenceTensor::Cell)
            .map_err(|_| format!("bad cell size in '{s}'"));
    }
    Err(format!("unknown reference '{s}' (commensurate | cell:<N>)"))
}

fn fmt_reference(r: ReferenceTensor) -> String {
    match r {
        ReferenceTensor::Commensurate => "commensurate".into(),
        ReferenceTensor::Cell(n) => format!("cell:{n}"),
    }
}

impl SweepConfig {
    /// Parse and validate; all problems are reported together as `ConfigInvalid`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig {
            models: vec![],
            ..Default::default()
        };
        let mut diags = vec![];
        let mut seen: Vec<&str> = vec![];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| format!("line {}: {msg}", lineno + 1);
            let Some((key, value)) = line.split_once('=') else {
                diags.push(at(format!("expected 'key = value', got '{line}'")));
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            if let Some(k) = SCALAR_KEYS.iter().find(|k| **k == key) {
                if seen.contains(k) {
                    diags.push(at(format!("'{key}' given more than once")));
                    continue;
                }
                seen.push(k);
            } else if !LIST_KEYS.contains(&key) {
                diags.push(at(format!("unknown key '{key}'")));
                continue;
            }
            if let Err(msg) = cfg.set(key, value) {
                diags.push(at(format!("{key}: {msg}")));
            }
        }
        if cfg.models.is_empty() {
            cfg.models = Model::ALL.to_vec();
        }
        if let Err(Error::ConfigInvalid(more)) = cfg.validate() {
            diags.extend(more);
        }
        if diags.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::ConfigInvalid(diags))
        }
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn list<T>(
            value: &str,
            f: impl Fn(&str) -> std::result::Result<T, String>,
        ) -> std::result::Result<Vec<T>, String> {
            value
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| f(s.trim()))
                .collect()
        }
        fn int(s: &str) -> std::result::Result<usize, String> {
            s.trim()
                .parse()
                .map_err(|_| format!("bad integer '{}'", s.trim()))
        }
        match key {
            "epsilon" => self.epsilons.extend(list(value, parse_number)?),
            "mu" => self.mus.extend(list(value, parse_number)?),
            "eta" => self.etas.extend(list(value, parse_number)?),
            "alpha" => self.alphas.extend(list(value, parse_number)?),
            "model" => self.models.extend(list(value, |s| {
                s.parse::<Model>().map_err(|e| e.to_string())
            })?),
            "kernel" => {
                let v = list(value, int)?;
                let k: KernelOrders = v
                    .try_into()
                    .map_err(|_| "expected four orders px,qx,pt,qt".to_string())?;
                self.kernels.push(k);
            }
            "dimension" => self.dimension = int(value)?,
            "coefficient" => self.coefficient = value.to_string(),
            "m_init" => self.m_init = value.to_string(),
            "ell" => self.ell = parse_number(value)?,
            "points_per_period" => self.points_per_period = int(value)?,
            "cfl" => self.cfl = parse_number(value)?,
            "scheme" => self.scheme = value.parse().map_err(|e: Error| e.to_string())?,
            "restriction" => self.restriction = value.parse().map_err(|e: Error| e.to_string())?,
            "reference" => self.reference = parse_reference(value)?,
            "window_check" => {
                self.window_check = value.parse().map_err(|e: Error| e.to_string())?
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "jobs" => self.jobs = int(value)?,
            _ => unreachable!("key filtered by caller"),
        }
        Ok(())
    }

    /// Field-level checks on a fully populated config.
    pub fn validate(&self) -> Result<()> {
        let mut d = vec![];
        if !(1..=3).contains(&self.dimension) {
            d.push(format!(
                "dimension: must be 1, 2 or 3, got {}",
                self.dimension
            ));
        }
        for (name, v) in [
            ("epsilon", &self.epsilons),
            ("mu", &self.mus),
            ("eta", &self.etas),
            ("alpha", &self.alphas),
        ] {
            if v.is_empty() {
                d.push(format!("{name}: at least one value required"));
            }
        }
        if self.kernels.is_empty() {
            d.push("kernel: at least one 'px,qx,pt,qt' entry required".into());
        }
        if let Err(e) = CellCoefficient::from_name(self.dimension, &self.coefficient) {
            d.push(format!("coefficient: {e}"));
        }
        match MacroField::from_name(&self.m_init) {
            Ok(f) if f.min_dim() > self.dimension => d.push(format!(
                "m_init: '{}' needs dimension >= {}",
                self.m_init,
                f.min_dim()
            )),
            Ok(_) => {}
            Err(e) => d.push(format!("m_init: {e}")),
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            d.push(format!("ell: must be positive, got {}", self.ell));
        }
        if self.points_per_period < 4 {
            d.push(format!(
                "points_per_period: need at least 4, got {}",
                self.points_per_period
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            d.push(format!("cfl: must lie in (0, 1], got {}", self.cfl));
        }
        if self.jobs == 0 {
            d.push("jobs: must be at least 1".into());
        }
        for a in &self.alphas {
            if !(0.0..=1.0).contains(a) {
                d.push(format!("alpha: {a} outside [0, 1]"));
            }
        }
        let mut periods_ok = vec![];
        for &eps in &self.epsilons {
            let n = self.ell / eps;
            if !(eps > 0.0) || n.round() < 1.0 || (n - n.round()).abs() > 1e-9 * n {
                d.push(format!(
                    "epsilon: {eps} does not divide ell = {} into an integer number of periods",
                    self.ell
                ));
            } else {
                periods_ok.push((eps, n.round() as usize));
            }
        }
        for k in &self.kernels {
            for (p, q, family) in [
                (k[0], k[1], KernelFamily::Symmetric),
                (k[2], k[3], KernelFamily::OneSided),
            ] {
                if let Err(e) = Kernel::build(KernelSpec { p, q, family }) {
                    d.push(format!("kernel {},{},{},{}: {e}", k[0], k[1], k[2], k[3]));
                }
            }
        }
        if d.is_empty() {
            // window checks need a valid grid and kernels
            let k = self.kernels[0];
            for &(eps, periods) in &periods_ok {
                let Ok(grid) =
                    PeriodicGrid::new(self.dimension, periods * self.points_per_period, self.ell)
                else {
                    d.push(format!("epsilon: {eps} gives an invalid grid"));
                    continue;
                };
                for &mu in &self.mus {
                    for &eta in &self.etas {
                        let spec = WindowSpec {
                            mu,
                            eta,
                            px: k[0],
                            qx: k[1],
                            pt: k[2],
                            qt: k[3],
                        };
                        if let Err(e) =
                            AveragingWindow::with_check(spec, eps, &grid, self.window_check)
                        {
                            d.push(format!(
                                "window (epsilon = {eps}, mu = {mu}, eta = {eta}): {e}"
                            ));
                        }
                    }
                }
            }
        }
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(d))
        }
    }

    /// Number of (point, model) rows the sweep will produce.
    pub fn row_count(&self) -> usize {
        self.epsilons.len()
            * self.mus.len()
            * self.etas.len()
            * self.alphas.len()
            * self.kernels.len()
            * self.models.len()
    }
}

/// Serialises to the same text format `parse` reads; numbers keep full precision.
impl fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dimension = {}", self.dimension)?;
        writeln!(f, "coefficient = {}", self.coefficient)?;
        writeln!(f, "m_init = {}", self.m_init)?;
        for e in &self.epsilons {
            let n = self.ell / e;
            if (n - n.round()).abs() <= 1e-12 * n && self.ell == 1.0 {
                writeln!(f, "epsilon = 1/{}", n.round())?;
            } else {
                writeln!(f, "epsilon = {e:?}")?;
            }
        }
        for m in &self.mus {
            writeln!(f, "mu = {m:?}")?;
        }
        for e in &self.etas {
            writeln!(f, "eta = {e:?}")?;
        }
        for a in &self.alphas {
            writeln!(f, "alpha = {a:?}")?;
        }
        for k in &self.kernels {
            writeln!(f, "kernel = {},{},{},{}", k[0], k[1], k[2], k[3])?;
        }
        for m in &self.models {
            writeln!(f, "model = {m}")?;
        }
        writeln!(f, "ell = {:?}", self.ell)?;
        writeln!(f, "points_per_period = {}", self.points_per_period)?;
        writeln!(f, "cfl = {:?}", self.cfl)?;
        writeln!(f, "scheme = {}", self.scheme)?;
        writeln!(f, "restriction = {}", self.restriction)?;
        writeln!(f, "reference = {}", fmt_reference(self.reference))?;
        writeln!(f, "window_check = {}", self.window_check)?;
        if let Some(p) = &self.output {
            writeln!(f, "output = {}", p.display())?;
        }
        writeln!(f, "jobs = {}", self.jobs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# one-dimensional ladder
dimension = 1
coefficient = paper_1d
m_init = helix
epsilon = 1/100
epsilon = 1/120, 1/140
mu = 0.03
eta = 1.5e-4
alpha = 0.1
kernel = 5,7,5,7
";

    #[test]
    fn parses_repeated_and_comma_lists() {
        let c = SweepConfig::parse(BASIC).unwrap();
        assert_eq!(c.epsilons, vec![0.01, 1.0 / 120.0, 1.0 / 140.0]);
        assert_eq!(c.kernels, vec![[5, 7, 5, 7]]);
        assert_eq!(c.models, Model::ALL.to_vec());
        assert_eq!(c.row_count(), 9);
        assert_eq!(c.jobs, 1);
    }

    #[test]
    fn display_round_trips() {
        let c = SweepConfig::parse(BASIC).unwrap();
        let again = SweepConfig::parse(&c.to_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn empty_epsilon_list_is_rejected() {
        let text = BASIC
            .lines()
            .filter(|l| !l.starts_with("epsilon"))
            .collect::<Vec<_>>()
            .join("\n");
        match SweepConfig::parse(&text) {
            Err(Error::ConfigInvalid(d)) => assert!(d.iter().any(|m| m.starts_with("epsilon"))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collects_every_diagnostic() {
        let text = format!("{BASIC}\ndimension = 2\nbogus = 1\nepsilon = 0.03\nkernel = 1,2\n");
        match SweepConfig::parse(&text) {
            Err(Error::ConfigInvalid(d)) => {
                assert_eq!(d.len(), 4, "{d:?}");
                assert!(d[0].contains("line 12") && d[0].contains("more than once"));
                assert!(d[1].contains("unknown key"));
                assert!(d[2].contains("four orders"));
                assert!(d[3].contains("integer number of periods"));
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{BASIC}epsilon = 0.03\n");
        match SweepConfig::parse(&text) {
            Err(Error::ConfigInvalid(d)) => {
                assert!(d[0].contains("integer number of periods"), "{d:?}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn window_policy_is_checked() {
        let text = format!("{BASIC}epsilon = 1/20\n");
        match SweepConfig::parse(&text) {
            Err(Error::ConfigInvalid(d)) => assert!(d[0].contains("window"), "{d:?}"),
            other => panic!("{other:?}"),
        }
        let text = format!("{BASIC}epsilon = 1/20\nwindow_check = warn\n");
        assert!(SweepConfig::parse(&text).is_ok());
    }

    #[test]
    fn parse_number_forms() {
        assert_eq!(parse_number("1/4").unwrap(), 0.25);
        assert_eq!(parse_number(" 2e-3 ").unwrap(), 2e-3);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
    }
}
