//! Built-in parameter studies `fig2` … `fig9`.
//!
//! 2D presets use reduced ε ladders (ε ≥ 1/70, at most 1120 nodes per axis); `large`
//! restores the full ladders down to ε = 1/140.

use std::fmt;

use super::config::SweepConfig;
use super::csv::Record;
use super::sweep::run_sweep;
use crate::error::{Error, Result};
use crate::upscaling::{Model, WindowCheck};

/// The qualitative feature a preset is meant to exhibit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    /// A log-log slope of the error.
    Slope,
    /// An error level that stops improving.
    Plateau,
    /// A consistent ordering between models.
    Ordering,
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feature::Slope => "slope",
            Feature::Plateau => "plateau",
            Feature::Ordering => "ordering",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub feature: Feature,
    pub description: &'static str,
    /// Run in order; the CSV is their concatenation.
    pub configs: Vec<SweepConfig>,
}

pub const PRESET_NAMES: [&str; 8] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9",
];

fn inv(ns: impl IntoIterator<Item = usize>) -> Vec<f64> {
    ns.into_iter().map(|n| 1.0 / n as f64).collect()
}

fn one_d() -> SweepConfig {
    SweepConfig {
        dimension: 1,
        coefficient: "paper_1d".into(),
        m_init: "helix".into(),
        epsilons: inv((20..=140).step_by(20)),
        mus: vec![0.03],
        etas: vec![1.5e-4],
        alphas: vec![0.1],
        kernels: vec![[5, 7, 5, 7]],
        window_check: WindowCheck::Warn,
        ..Default::default()
    }
}

fn two_d(large: bool) -> SweepConfig {
    let eps = if large {
        inv((20..=140).step_by(10))
    } else {
        inv((20..=70).step_by(10))
    };
    SweepConfig {
        dimension: 2,
        coefficient: "paper_2d".into(),
        m_init: "wave2d".into(),
        epsilons: eps,
        mus: vec![0.06],
        etas: vec![3e-4],
        alphas: vec![0.1],
        kernels: vec![[5, 7, 3, 7]],
        window_check: WindowCheck::Warn,
        ..Default::default()
    }
}

pub fn preset(name: &str, large: bool) -> Result<Preset> {
    let p = match name {
        "fig2" => Preset {
            name: "fig2",
            feature: Feature::Slope,
            description: "1D eps ladder at alpha 0.01 and 0.1: small-eps slope of E1 near 2; E1 below E2, E2 close to E3",
            configs: vec![SweepConfig { alphas: vec![0.01, 0.1], ..one_d() }],
        },
        "fig3" => Preset {
            name: "fig3",
            feature: Feature::Slope,
            description: "1D M1 while varying q_x and q_t: the initial decay steepens with q_t and ignores q_x",
            configs: vec![SweepConfig {
                kernels: vec![[5, 7, 5, 7], [5, 3, 5, 7], [5, 11, 5, 7], [5, 7, 5, 3], [5, 7, 5, 5]],
                models: vec![Model::M1],
                ..one_d()
            }],
        },
        "fig4" => Preset {
            name: "fig4",
            feature: Feature::Plateau,
            description: "1D M2 while varying p_x and p_t: low orders freeze the error at a constant level for small eps",
            configs: vec![SweepConfig {
                kernels: vec![[5, 7, 5, 7], [1, 7, 5, 7], [3, 7, 5, 7], [5, 7, 1, 7], [5, 7, 3, 7]],
                models: vec![Model::M2],
                ..one_d()
            }],
        },
        "fig5" => {
            let base = SweepConfig {
                epsilons: vec![1.0 / 140.0],
                alphas: vec![0.01],
                models: vec![Model::M1],
                ..one_d()
            };
            let etas = vec![6e-5, 8e-5, 1e-4, 1.5e-4, 2e-4, 3e-4, 4.5e-4, 6e-4, 9e-4, 1.2e-3];
            let mut long = etas.clone();
            long.extend([1.8e-3, 2.4e-3, 3.6e-3]);
            Preset {
                name: "fig5",
                feature: Feature::Plateau,
                description: "1D M1 at eps = 1/140: E1 falls with eta then levels off (rising again for p_t = 1); \
                              the mu ladder falls then levels",
                configs: vec![
                    SweepConfig { etas, ..base.clone() },
                    SweepConfig { etas: long, kernels: vec![[5, 7, 1, 7]], ..base.clone() },
                    SweepConfig {
                        mus: vec![0.01, 0.015, 0.02, 0.03, 0.05, 0.08, 0.12],
                        kernels: vec![[5, 7, 5, 7], [3, 7, 5, 7]],
                        ..base
                    },
                ],
            }
        }
        "fig6" => Preset {
            name: "fig6",
            feature: Feature::Ordering,
            description: "2D eps ladder at alpha 0.01 and 0.1: E1 considerably below E2 and E3",
            configs: vec![SweepConfig { alphas: vec![0.01, 0.1], ..two_d(large) }],
        },
        "fig7" => Preset {
            name: "fig7",
            feature: Feature::Plateau,
            description: "2D M1 and M2 while varying kernel orders: low p_x or p_t flattens the error",
            configs: vec![SweepConfig {
                kernels: vec![[5, 7, 3, 7], [1, 7, 3, 7], [5, 7, 1, 7], [5, 7, 3, 3]],
                models: vec![Model::M1, Model::M2],
                ..two_d(large)
            }],
        },
        "fig8" => {
            let eps: Vec<usize> = if large { vec![70, 140] } else { vec![40, 70] };
            let configs = eps
                .into_iter()
                .map(|n| {
                    let e2 = 1.0 / (n * n) as f64;
                    SweepConfig {
                        epsilons: vec![1.0 / n as f64],
                        etas: [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0].iter().map(|s| s * e2).collect(),
                        alphas: vec![0.01],
                        models: vec![Model::M1, Model::M2],
                        ..two_d(large)
                    }
                })
                .collect();
            Preset {
                name: "fig8",
                feature: Feature::Plateau,
                description: "2D M1 and M2 along an eta ladder: errors fall rapidly, then stay level from eta near 2 eps^2",
                configs,
            }
        }
        "fig9" => {
            let mut runs = vec![(70usize, 4.5e-4)];
            if large {
                runs.push((120, 2e-4));
            }
            let configs = runs
                .into_iter()
                .map(|(n, eta)| {
                    let e = 1.0 / n as f64;
                    SweepConfig {
                        epsilons: vec![e],
                        etas: vec![eta],
                        mus: [1.5, 2.0, 3.0, 4.0, 6.0, 8.0].iter().map(|s| s * e).collect(),
                        alphas: vec![0.01],
                        models: vec![Model::M1, Model::M2],
                        ..two_d(large)
                    }
                })
                .collect();
            Preset {
                name: "fig9",
                feature: Feature::Plateau,
                description: "2D M1 and M2 along a mu ladder: errors fall until mu near 3 eps, then stay level",
                configs,
            }
        }
        other => {
            return Err(Error::ConfigInvalid(vec![format!(
                "preset: unknown name '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            )]))
        }
    };
    Ok(p)
}

/// Run all configs of a preset with `jobs` threads each.
pub fn run_preset(p: &Preset, jobs: usize) -> Result<Vec<Record>> {
    let mut rows = vec![];
    for cfg in &p.configs {
        let cfg = SweepConfig {
            jobs,
            ..cfg.clone()
        };
        rows.extend(run_sweep(&cfg)?);
    }
    Ok(rows)
}
