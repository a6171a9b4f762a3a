use std::fmt;

use super::csv::Record;
use crate::error::{Error, Result};
use crate::upscaling::Model;

/// Which sweep parameter serves as the abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    Epsilon,
    Mu,
    Eta,
}

impl Abscissa {
    pub fn of(&self, r: &Record) -> f64 {
        match self {
            Abscissa::Epsilon => r.epsilon,
            Abscissa::Mu => r.mu,
            Abscissa::Eta => r.eta,
        }
    }
}

impl fmt::Display for Abscissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Abscissa::Epsilon => "epsilon",
            Abscissa::Mu => "mu",
            Abscissa::Eta => "eta",
        })
    }
}

impl std::str::FromStr for Abscissa {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "epsilon" | "eps" => Ok(Abscissa::Epsilon),
            "mu" => Ok(Abscissa::Mu),
            "eta" => Ok(Abscissa::Eta),
            other => Err(Error::InvalidArgument(format!(
                "unknown abscissa '{other}' (epsilon | mu | eta)"
            ))),
        }
    }
}

/// Least-squares line through `(ln x, ln E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub abscissa: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl fmt::Display for RateFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "abscissa={} slope={:.6} intercept={:.6} r2={:.6} points={}",
            self.abscissa, self.slope, self.intercept, self.r_squared, self.points
        )
    }
}

/// Fit `E ≈ C x^slope` on the points whose `x` lies in the closed `range`.
pub fn fit_rate(
    points: &[(f64, f64)],
    range: Option<(f64, f64)>,
    abscissa: &str,
) -> Result<RateFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, _)| range.map_or(true, |(lo, hi)| *x >= lo && *x <= hi))
        .collect();
    if used.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 3 points, got {}",
            used.len()
        )));
    }
    if let Some((x, e)) = used
        .iter()
        .find(|(x, e)| !(*e > 0.0) || !(*x > 0.0) || !e.is_finite())
    {
        return Err(Error::Degenerate(format!(
            "non-positive value at x = {x}: E = {e}"
        )));
    }
    let n = used.len() as f64;
    let lx: Vec<f64> = used.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = used.iter().map(|(_, e)| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        abscissa: abscissa.to_string(),
        slope,
        intercept,
        r_squared,
        points: used.len(),
    })
}

/// `(x, error)` pairs of one model, optionally restricted to one `alpha`, sorted by `x`.
/// Failed rows are skipped.
pub fn series(rows: &[Record], model: Model, x: Abscissa, alpha: Option<f64>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.model == model && r.is_ok())
        .filter(|r| alpha.map_or(true, |a| (r.alpha - a).abs() <= 1e-12 * a.abs().max(1.0)))
        .map(|r| (x.of(r), r.error))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
