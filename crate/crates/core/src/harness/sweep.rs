use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{KernelOrders, SweepConfig};
use super::csv::Record;
use crate::coefficient::CellCoefficient;
use crate::error::{Error, Result};
use crate::macro_field::MacroField;
use crate::upscaling::{upscale_all, MicroRunSpec, Model, WindowSpec};

/// One parameter tuple of the Cartesian product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    pub mu: f64,
    pub eta: f64,
    pub alpha: f64,
    pub kernel: KernelOrders,
}

impl SweepPoint {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.eps
            .total_cmp(&other.eps)
            .then(self.mu.total_cmp(&other.mu))
            .then(self.eta.total_cmp(&other.eta))
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.kernel.cmp(&other.kernel))
    }
}

pub fn points(cfg: &SweepConfig) -> Vec<SweepPoint> {
    let mut out = vec![];
    for &eps in &cfg.epsilons {
        for &mu in &cfg.mus {
            for &eta in &cfg.etas {
                for &alpha in &cfg.alphas {
                    for &kernel in &cfg.kernels {
                        out.push(SweepPoint {
                            eps,
                            mu,
                            eta,
                            alpha,
                            kernel,
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.cmp_key(b));
    out
}

/// The micro run behind one sweep point.
pub fn run_spec(
    cfg: &SweepConfig,
    cell: &Arc<CellCoefficient>,
    p: &SweepPoint,
) -> Result<MicroRunSpec> {
    let [px, qx, pt, qt] = p.kernel;
    Ok(MicroRunSpec {
        cell: cell.clone(),
        m_init: MacroField::from_name(&cfg.m_init)?,
        eps: p.eps,
        ell: cfg.ell,
        points_per_period: cfg.points_per_period,
        alpha: p.alpha,
        window: WindowSpec {
            mu: p.mu,
            eta: p.eta,
            px,
            qx,
            pt,
            qt,
        },
        cfl: cfg.cfl,
        scheme: cfg.scheme,
        restriction: cfg.restriction,
        reference: cfg.reference,
        window_check: cfg.window_check,
    })
}

fn run_point(cfg: &SweepConfig, cell: &Arc<CellCoefficient>, p: &SweepPoint) -> Vec<Record> {
    let result = run_spec(cfg, cell, p).and_then(|spec| upscale_all(&spec));
    match result {
        Ok((reports, _)) => reports
            .iter()
            .filter(|r| cfg.models.contains(&r.model))
            .map(Record::from_report)
            .collect(),
        Err(e) => {
            log::warn!(
                "sweep point eps = {}, mu = {}, eta = {}, alpha = {} failed: {e}",
                p.eps,
                p.mu,
                p.eta,
                p.alpha
            );
            let n = (cfg.ell / p.eps).round() as usize * cfg.points_per_period;
            let mut models = cfg.models.clone();
            models.sort();
            models
                .into_iter()
                .map(|m| Record::failed(m, p, n, &e))
                .collect()
        }
    }
}

/// Run every point of the Cartesian product on `cfg.jobs` threads. Rows are sorted
/// by parameter tuple then model, so the output does not depend on `jobs`.
/// A failing point yields rows with a `failed:` status instead of aborting.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let cell = Arc::new(CellCoefficient::from_name(cfg.dimension, &cfg.coefficient)?);
    let pts = points(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let rows: Vec<Vec<Record>> =
        pool.install(|| pts.par_iter().map(|p| run_point(cfg, &cell, p)).collect());
    let mut rows: Vec<Record> = rows.into_iter().flatten().collect();
    sort_records(&mut rows);
    Ok(rows)
}

pub fn sort_records(rows: &mut [Record]) {
    rows.sort_by(|a, b| {
        a.epsilon
            .total_cmp(&b.epsilon)
            .then(a.mu.total_cmp(&b.mu))
            .then(a.eta.total_cmp(&b.eta))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.kernel().cmp(&b.kernel()))
            .then(a.model.cmp(&b.model))
    });
}

/// Rows of `model` only.
pub fn by_model(rows: &[Record], model: Model) -> Vec<&Record> {
    rows.iter().filter(|r| r.model == model).collect()
}
