use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use llhmm::cell::{compute_ah, solve_cell, solve_cell_commensurate};
use llhmm::corrector::{eigendecompose, CorrectorField};
use llhmm::harness::{self, config::parse_number, fit_rate, series, Abscissa, SweepConfig};
use llhmm::micro::{
    max_stable_dt, restrict_initial_data, solve_window, EnergyObserver, SphereObserver,
};
use llhmm::snapshot::write_snapshot;
use llhmm::upscaling::upscale_all;
use llhmm::{
    CellCoefficient, Coefficient, DiffusionOperator, Error, Kernel, KernelFamily, KernelSpec,
    LLState, MacroField, Model, PeriodicGrid, Restriction, Result, Scheme, StepControl,
};

#[derive(Debug, Parser)]
#[command(
    name = "llhmm",
    version,
    about = "Multiscale upscaling for Landau-Lifshitz dynamics"
)]
struct Cli {
    /// Sweep configuration file (key = value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; most commands default to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Built-in study (fig2 … fig9)
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Use the full 2D ladders of the presets
    #[arg(long, global = true)]
    large: bool,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an averaging kernel and print its coefficients and moment residual
    Kernel {
        #[arg(long, default_value = "one_sided")]
        family: KernelFamily,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Samples written to --out as t,K(t)
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Solve the cell problem and print the homogenized tensor
    Cell {
        #[arg(long, default_value = "paper_1d")]
        coefficient: String,
        /// Defaults to 2 for paper_2d, else 1
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Solve on the micro lattice with this many points per period instead
        #[arg(long)]
        commensurate: Option<usize>,
    },
    /// Eigen-expansion of the cell corrector; writes omega,abs_chi
    Corrector {
        #[arg(long, default_value = "paper_1d")]
        coefficient: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Retained modes; default (n/2)^d
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Run the micro problem and write the final state as a snapshot
    Micro {
        #[arg(long, default_value = "paper_1d")]
        coefficient: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "1/40")]
        eps: String,
        #[arg(long, default_value_t = 8)]
        points_per_period: usize,
        #[arg(long, default_value = "helix")]
        m_init: String,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value = "1.5e-4")]
        t_end: String,
        #[arg(long, default_value = "rk4_project")]
        scheme: Scheme,
        #[arg(long, default_value = "exact")]
        restriction: Restriction,
        #[arg(long, default_value_t = llhmm::micro::DEFAULT_CFL)]
        cfl: f64,
    },
    /// Run the single point of --config and print its M1-M3 rows
    Upscale,
    /// Run every point of --config or --preset and write CSV
    Sweep,
    /// Fit a log-log rate to a sweep CSV
    Fit {
        input: PathBuf,
        #[arg(long, default_value = "M1")]
        model: Model,
        #[arg(long, default_value = "epsilon")]
        x: Abscissa,
        /// Only rows with this damping
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
    },
}

fn default_dim(coefficient: &str, dim: Option<usize>) -> usize {
    dim.unwrap_or(if coefficient.trim() == "paper_2d" {
        2
    } else {
        1
    })
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_config(path: &Path) -> Result<SweepConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    SweepConfig::parse(&text)
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs == Some(0) {
        return Err(Error::ConfigInvalid(vec![
            "--jobs: must be at least 1".into()
        ]));
    }
    match cli.command {
        Command::Kernel {
            family,
            p,
            q,
            samples,
        } => {
            let k = Kernel::build(KernelSpec { p, q, family })?;
            eprintln!(
                "kernel {family} p={p} q={q} max moment residual {:.3e}",
                k.max_moment_residual()
            );
            println!(
                "coefficients: {}",
                k.coefficients()
                    .iter()
                    .map(|c| format!("{c:.16e}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            if cli.out.is_some() {
                let mut w = sink(&cli.out)?;
                writeln!(w, "t,K")?;
                let (lo, hi) = k.support();
                let n = samples.max(2);
                for i in 0..n {
                    let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                    writeln!(w, "{t:.16e},{:.16e}", k.eval(t))?;
                }
                w.flush()?;
            }
        }
        Command::Cell {
            coefficient,
            dim,
            n,
            commensurate,
        } => {
            let a = CellCoefficient::from_name(default_dim(&coefficient, dim), &coefficient)?;
            let sol = match commensurate {
                Some(ppp) => solve_cell_commensurate(&a, ppp)?,
                None => solve_cell(&a, n)?,
            };
            let est = compute_ah(&sol)?;
            let mut w = sink(&cli.out)?;
            for row in est.tensor.rows() {
                writeln!(
                    w,
                    "{}",
                    row.iter()
                        .map(|v| format!("{v:.16e}"))
                        .collect::<Vec<_>>()
                        .join(",")
                )?;
            }
            w.flush()?;
            eprintln!(
                "grid {}^{} asymmetry {:.3e} cg iterations {:?} residuals {:?}",
                sol.grid().n(),
                sol.grid().dim(),
                est.asymmetry,
                sol.iterations,
                sol.residuals
            );
        }
        Command::Corrector {
            coefficient,
            dim,
            n,
            alpha,
            modes,
        } => {
            let d = default_dim(&coefficient, dim);
            let a = CellCoefficient::from_name(d, &coefficient)?;
            let modes = modes.unwrap_or((n / 2).pow(d as u32));
            let basis = eigendecompose(&a, n, modes)?;
            let cell = solve_cell(&a, n)?;
            let corr = CorrectorField::new(&cell, &basis, alpha)?;
            let mut w = sink(&cli.out)?;
            writeln!(w, "omega,abs_chi")?;
            for (om, c) in corr.spectrum(&basis) {
                writeln!(w, "{om:.16e},{c:.16e}")?;
            }
            w.flush()?;
            eprintln!(
                "modes {} omega_1 {:.6e} truncation error {:.3e}",
                basis.len(),
                basis.omega1(),
                corr.truncation_error
            );
        }
        Command::Micro {
            coefficient,
            dim,
            eps,
            points_per_period,
            m_init,
            alpha,
            t_end,
            scheme,
            restriction,
            cfl,
        } => {
            let bad = |k: &str, m: String| Error::InvalidArgument(format!("--{k}: {m}"));
            let eps = parse_number(&eps).map_err(|m| bad("eps", m))?;
            let t_end = parse_number(&t_end).map_err(|m| bad("t-end", m))?;
            let d = default_dim(&coefficient, dim);
            let cell = Arc::new(CellCoefficient::from_name(d, &coefficient)?);
            let periods = (1.0 / eps).round();
            if !(eps > 0.0) || ((1.0 / eps) - periods).abs() > 1e-9 * periods {
                return Err(bad("eps", format!("{eps} is not of the form 1/n")));
            }
            let grid = PeriodicGrid::new(d, periods as usize * points_per_period, 1.0)?;
            let op = DiffusionOperator::new(grid, &Coefficient::shared(cell, eps)?)?;
            let steps = (t_end / max_stable_dt(&op, cfl)).ceil().max(1.0);
            let ctl = StepControl {
                dt: t_end / steps,
                cfl,
                scheme,
            };
            let m0 = restrict_initial_data(&MacroField::from_name(&m_init)?, grid, restriction)?;
            let state = LLState::new(m0, alpha)?;
            let mut sphere = SphereObserver::default();
            let mut energy = EnergyObserver::new(&op);
            let out = solve_window(&op, &state, t_end, &ctl, &mut [&mut sphere, &mut energy])?;
            let (e0, e1) = (
                energy.samples[0].1,
                energy.samples.last().map_or(0.0, |s| s.1),
            );
            eprintln!(
                "N {} steps {} dt {:.6e} max | |m|-1 | {:.3e} energy {:.10e} -> {:.10e}",
                grid.n(),
                out.steps,
                ctl.dt,
                sphere.max_deviation,
                e0,
                e1
            );
            if cli.out.is_some() {
                let mut w = sink(&cli.out)?;
                write_snapshot(&mut w, &out.state.m, out.state.t, &[])?;
                w.flush()?;
            }
        }
        Command::Upscale => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| Error::ConfigInvalid(vec!["upscale needs --config".into()]))?;
            let cfg = read_config(path)?;
            let pts = harness::sweep::points(&cfg);
            if pts.len() != 1 {
                return Err(Error::ConfigInvalid(vec![format!(
                    "upscale runs one point but the config expands to {}; use sweep",
                    pts.len()
                )]));
            }
            let cell = Arc::new(CellCoefficient::from_name(cfg.dimension, &cfg.coefficient)?);
            let spec = harness::sweep::run_spec(&cfg, &cell, &pts[0])?;
            let (reports, diag) = upscale_all(&spec)?;
            let rows: Vec<_> = reports
                .iter()
                .filter(|r| cfg.models.contains(&r.model))
                .map(harness::Record::from_report)
                .collect();
            harness::emit(sink(&cli.out.clone().or(cfg.output.clone()))?, &rows)?;
            eprintln!(
                "steps {} max | |m|-1 | {:.3e} kernel mass {:.12} tensor {:?}",
                diag.steps,
                diag.max_norm_deviation,
                diag.kernel_mass,
                diag.tensor.rows()
            );
        }
        Command::Sweep => {
            let (rows, default_out) = match (&cli.config, &cli.preset) {
                (Some(_), Some(_)) => {
                    return Err(Error::ConfigInvalid(vec![
                        "give either --config or --preset, not both".into(),
                    ]))
                }
                (None, None) => {
                    return Err(Error::ConfigInvalid(vec![
                        "sweep needs --config or --preset".into(),
                    ]))
                }
                (Some(path), None) => {
                    let mut cfg = read_config(path)?;
                    if let Some(j) = cli.jobs {
                        cfg.jobs = j;
                    }
                    (harness::run_sweep(&cfg)?, cfg.output.clone())
                }
                (None, Some(name)) => {
                    let p = harness::preset(name, cli.large)?;
                    eprintln!("{} ({}): {}", p.name, p.feature, p.description);
                    (harness::run_preset(&p, cli.jobs.unwrap_or(1))?, None)
                }
            };
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            harness::emit(sink(&cli.out.clone().or(default_out))?, &rows)?;
            if failed > 0 {
                log::warn!("{failed} of {} rows failed", rows.len());
            }
        }
        Command::Fit {
            input,
            model,
            x,
            alpha,
            min,
            max,
        } => {
            let rows = harness::csv::load_from_path(&input)?;
            let pts = series(&rows, model, x, alpha);
            let range = (min.is_some() || max.is_some()).then(|| {
                (
                    min.unwrap_or(f64::NEG_INFINITY),
                    max.unwrap_or(f64::INFINITY),
                )
            });
            let fit = fit_rate(&pts, range, &x.to_string())?;
            let mut w = sink(&cli.out)?;
            writeln!(w, "{model} {fit}")?;
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Error::ConfigInvalid(diags) => {
                    eprintln!("error: invalid configuration");
                    for d in diags {
                        eprintln!("  {d}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("llhmm").chain(args.iter().copied())).unwrap()
    }

    fn tmp(dir: &tempfile::TempDir, name: &str) -> String {
        dir.path().join(name).to_string_lossy().into_owned()
    }

    const SMALL: &str = "\
dimension = 1
coefficient = paper_1d
m_init = helix
epsilon = 1/10, 1/20
mu = 0.15
eta = 1.2e-2
alpha = 0.1
kernel = 3,3,1,3
";

    #[test]
    fn kernel_writes_samples() {
        let dir = tempfile::tempdir().unwrap();
        let out = tmp(&dir, "k.csv");
        run(cli(&[
            "kernel",
            "--p",
            "1",
            "--q",
            "0",
            "--samples",
            "11",
            "--out",
            &out,
        ]))
        .unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert_eq!(text.lines().next(), Some("t,K"));
        let e = run(cli(&["kernel", "--p", "13", "--q", "0"])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn cell_prints_tensor() {
        let dir = tempfile::tempdir().unwrap();
        let out = tmp(&dir, "ah.csv");
        run(cli(&["cell", "--n", "64", "--out", &out])).unwrap();
        let v: f64 = std::fs::read_to_string(&out)
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        assert!(v > 0.5 && v < 1.0);
        run(cli(&[
            "cell",
            "--coefficient",
            "paper_2d",
            "--commensurate",
            "8",
            "--out",
            &out,
        ]))
        .unwrap();
        assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
    }

    #[test]
    fn corrector_writes_spectrum() {
        let dir = tempfile::tempdir().unwrap();
        let out = tmp(&dir, "spec.csv");
        run(cli(&["corrector", "--n", "32", "--out", &out])).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 17);
    }

    #[test]
    fn micro_writes_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let out = tmp(&dir, "m.bin");
        run(cli(&[
            "micro", "--eps", "1/10", "--t-end", "1e-4", "--out", &out,
        ]))
        .unwrap();
        let snap = llhmm::snapshot::read_snapshot(File::open(&out).unwrap()).unwrap();
        assert_eq!(snap.field.grid.n(), 80);
        assert!((snap.t - 1e-4).abs() < 1e-18);
        let e = run(cli(&["micro", "--eps", "0.03"])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn sweep_upscale_and_fit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tmp(&dir, "sweep.cfg");
        std::fs::write(&cfg, SMALL).unwrap();
        let a = tmp(&dir, "a.csv");
        let b = tmp(&dir, "b.csv");
        run(cli(&[
            "sweep", "--config", &cfg, "--out", &a, "--jobs", "1",
        ]))
        .unwrap();
        run(cli(&[
            "--jobs", "2", "sweep", "--config", &cfg, "--out", &b,
        ]))
        .unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let rows = harness::csv::load_from_path(Path::new(&a)).unwrap();
        assert_eq!(rows.len(), 6);

        let e = run(cli(&["upscale", "--config", &cfg])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let one = tmp(&dir, "one.cfg");
        std::fs::write(
            &one,
            SMALL.replace("epsilon = 1/10, 1/20", "epsilon = 1/20"),
        )
        .unwrap();
        let u = tmp(&dir, "u.csv");
        run(cli(&["upscale", "--config", &one, "--out", &u])).unwrap();
        let single = harness::csv::load_from_path(Path::new(&u)).unwrap();
        assert_eq!(&single[..], &rows[..3]);

        // two points are too few for a fit
        let e = run(cli(&["fit", &a, "--model", "M2"])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn config_errors_map_to_exit_code_two() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tmp(&dir, "bad.cfg");
        std::fs::write(&cfg, "dimension = 1\nfoo = 3\n").unwrap();
        let e = run(cli(&["sweep", "--config", &cfg])).unwrap_err();
        assert!(matches!(&e, Error::ConfigInvalid(d) if d.len() >= 2));
        assert_eq!(exit_code(&e), 2);
        let e = run(cli(&["sweep", "--config", &tmp(&dir, "missing.cfg")])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let e = run(cli(&["sweep", "--preset", "fig42"])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let e = run(cli(&["sweep"])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(Cli::try_parse_from(["llhmm", "bogus"]).is_err());
    }

    #[test]
    fn numerical_errors_map_to_exit_code_three() {
        assert_eq!(
            exit_code(&Error::NoConvergence {
                iterations: 10,
                residual: 1.0
            }),
            3
        );
        assert_eq!(
            exit_code(&Error::IllConditioned {
                p: 7,
                q: 7,
                residual: 1e-6
            }),
            3
        );
        let e = run(cli(&["kernel", "--p", "7", "--q", "7"])).unwrap_err();
        assert_eq!(exit_code(&e), 3);
    }
}
