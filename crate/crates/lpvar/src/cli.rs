//! Command-line interface.
//!
//! Subcommands: `generate` (emit builtin truth signals), `measure` (apply the
//! partial Fourier operator plus noise), `reconstruct` (homogeneous solve),
//! `design` (emit exponent and class maps), `run` (full experiment from a
//! config file), `report` (recompute metrics from stored arrays). Exit code 0
//! on success, 1 on validation or runtime failure, 2 on usage errors.

use crate::admm::{admm_solve, ExponentField, SolverConfig};
use crate::config::{load_config, parse_mask_rule};
use crate::error::{Error, Result};
use crate::exponent::{DesignHyper, NghdMode, PatchLayout};
use crate::io;
use crate::operators::{make_partial_fourier, Shape, Signal};
use crate::pipeline::{design_exponents, expand_mask, run_experiment, MaskRule};
use crate::synth::{error_metrics, make_signal_1d, make_signal_2d, add_noise, NoiseSpec};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lpvar",
    about = "Signal and image recovery from partial Fourier data with spatially varying lp gradient regularization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a builtin ground-truth signal as CSV.
    Generate {
        /// Signal kind: 1d (plateau + modulated sine) or 2d (ring image).
        #[arg(long)]
        kind: String,
        /// Grid size (per axis in 2D).
        #[arg(long)]
        n: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Optional PGM rendering (2D only, min-max scaled).
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Apply the partial Fourier operator and additive Gaussian noise.
    Measure {
        /// Ground-truth CSV (shape is inferred from the file).
        #[arg(long)]
        truth: PathBuf,
        /// Mask rule: lowest:<count> | lowest-x:<count> | stride-x:<step> | file:<path>.
        #[arg(long)]
        mask: String,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output measurement CSV (one value per line).
        #[arg(long)]
        out: PathBuf,
        /// Where to record the expanded frequency mask.
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Homogeneous reconstruction at a fixed exponent and lambda.
    Reconstruct {
        #[arg(long)]
        meas: PathBuf,
        /// Mask rule or file; must match the mask used for measuring.
        #[arg(long)]
        mask: String,
        /// Signal shape: "200" (1D) or "128x128" (2D).
        #[arg(long)]
        shape: String,
        /// Homogeneous exponent p in [1, 2].
        #[arg(long)]
        p: f64,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the exponent-design stage and emit exponent and class maps.
    Design {
        #[arg(long)]
        meas: PathBuf,
        #[arg(long)]
        mask: String,
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 5)]
        patch_size: usize,
        #[arg(long, default_value_t = 1e-2)]
        eps_var: f64,
        #[arg(long, default_value_t = 3)]
        nghd_size: usize,
        #[arg(long, default_value_t = 27.0)]
        curve_c: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a full experiment from a key=value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute error metrics from stored truth/reconstruction arrays.
    Report {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        recon: PathBuf,
        /// Write the metrics JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol_primal: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_dual: f64,
}

impl SolverArgs {
    fn to_config(&self, lambda: f64) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            lambda,
            max_iter: self.max_iter,
            tol_primal: self.tol_primal,
            tol_dual: self.tol_dual,
        }
    }
}

fn parse_shape(s: &str) -> Result<Shape> {
    if let Some((r, c)) = s.split_once('x') {
        let rows = r
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad shape {s:?}")))?;
        let cols = c
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad shape {s:?}")))?;
        Ok(Shape::TwoD { rows, cols })
    } else {
        Ok(Shape::OneD(s.trim().parse().map_err(|_| {
            Error::Config(format!("bad shape {s:?}"))
        })?))
    }
}

fn load_measurement(path: &PathBuf) -> Result<Vec<f64>> {
    Ok(io::load_csv(path)?.into_values())
}

fn mask_for(mask: &str, shape: Shape) -> Result<crate::operators::Selection> {
    let rule: MaskRule = parse_mask_rule(mask)?;
    expand_mask(&rule, shape)
}

#[derive(Serialize)]
struct ReportJson {
    l1: f64,
    l2: f64,
    l1_rel: f64,
    l2_rel: f64,
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { kind, n, out, pgm } => {
            let truth = match kind.as_str() {
                "1d" => make_signal_1d(n)?,
                "2d" => make_signal_2d(n)?,
                other => {
                    return Err(Error::Config(format!(
                        "kind must be 1d or 2d, got {other:?}"
                    )))
                }
            };
            io::save_csv(&out, &truth)?;
            if let Some(p) = pgm {
                io::save_image_scaled(&p, &truth)?;
            }
            Ok(())
        }
        Command::Measure {
            truth,
            mask,
            sigma,
            seed,
            out,
            mask_out,
        } => {
            let truth = io::load_csv(&truth)?;
            let selection = mask_for(&mask, truth.shape())?;
            let op = make_partial_fourier(truth.shape(), selection.clone())?;
            let y = add_noise(&op.forward_apply(&truth)?, &NoiseSpec { sigma, seed })?;
            io::save_csv_vector(&out, &y)?;
            if let Some(p) = mask_out {
                io::save_mask(&p, &selection)?;
            }
            Ok(())
        }
        Command::Reconstruct {
            meas,
            mask,
            shape,
            p,
            lambda,
            solver,
            out,
        } => {
            let shape = parse_shape(&shape)?;
            let y = load_measurement(&meas)?;
            let op = make_partial_fourier(shape, mask_for(&mask, shape)?)?;
            let field = ExponentField::homogeneous(shape.len(), p)?;
            let cfg = solver.to_config(lambda);
            let res = admm_solve(&op, &y, &field, &cfg, None)?;
            io::save_csv(&out, &res.u_hat)?;
            eprintln!(
                "reconstructed in {} iterations (converged: {})",
                res.iterations, res.converged
            );
            Ok(())
        }
        Command::Design {
            meas,
            mask,
            shape,
            patch_size,
            eps_var,
            nghd_size,
            curve_c,
            samples,
            seed,
            solver,
            out_dir,
        } => {
            let shape = parse_shape(&shape)?;
            let y = load_measurement(&meas)?;
            let op = make_partial_fourier(shape, mask_for(&mask, shape)?)?;
            let hyper = DesignHyper {
                k: patch_size,
                eps_var,
                n_nghd: nghd_size,
                c: curve_c,
                n_samples: samples,
                seed,
                nghd_mode: NghdMode::MinOfSides,
                ..Default::default()
            };
            let cfg = solver.to_config(1.0);
            let design = design_exponents(&op, &y, &hyper, &cfg)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let exp = Signal::new(design.exponents.values().to_vec(), shape)?;
            io::save_csv(out_dir.join("exponents.csv"), &exp)?;
            let patch_shape = match design.grid.layout() {
                PatchLayout::OneD { n_patches } => Shape::OneD(n_patches),
                PatchLayout::TwoD { rows_p, cols_p } => Shape::TwoD {
                    rows: rows_p,
                    cols: cols_p,
                },
            };
            let classes = Signal::new(
                design.classes.labels.iter().map(|c| c.code() as f64).collect(),
                patch_shape,
            )?;
            io::save_csv(out_dir.join("classmap.csv"), &classes)?;
            Ok(())
        }
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let report = run_experiment(&cfg)?;
            println!(
                "proposed:  l1 = {:.6e}  l2 = {:.6e}  (lambda = {})",
                report.proposed.error.l1, report.proposed.error.l2, report.proposed.lambda
            );
            println!(
                "hom p = 1: l1 = {:.6e}  l2 = {:.6e}  (lambda = {})",
                report.homogeneous_p1.error.l1,
                report.homogeneous_p1.error.l2,
                report.homogeneous_p1.lambda
            );
            println!(
                "hom p = 2: l1 = {:.6e}  l2 = {:.6e}  (lambda = {})",
                report.homogeneous_p2.error.l1,
                report.homogeneous_p2.error.l2,
                report.homogeneous_p2.lambda
            );
            println!(
                "improvement vs p = 1: l1 {:+.2}%  l2 {:+.2}%",
                report.improvement_vs_p1.l1_pct, report.improvement_vs_p1.l2_pct
            );
            println!(
                "improvement vs p = 2: l1 {:+.2}%  l2 {:+.2}%",
                report.improvement_vs_p2.l1_pct, report.improvement_vs_p2.l2_pct
            );
            if let Some(snr) = report.snr_db {
                println!("reported SNR: {snr:.2} dB");
            }
            println!("artifacts in {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Report { truth, recon, out } => {
            let truth = io::load_csv(&truth)?;
            let recon = io::load_csv(&recon)?;
            let report = error_metrics(&recon, &truth)?;
            let json = serde_json::to_string_pretty(&ReportJson {
                l1: report.l1,
                l2: report.l2,
                l1_rel: report.l1_rel,
                l2_rel: report.l2_rel,
            })
            .map_err(|e| Error::Parse(format!("metrics serialization: {e}")))?;
            match out {
                Some(p) => std::fs::write(&p, json + "\n").map_err(|e| Error::io(&p, e))?,
                None => println!("{json}"),
            }
            Ok(())
        }
    }
}

/// Parses and runs a CLI invocation, returning the process exit status:
/// 0 on success, 1 on validation/runtime failure, 2 on usage errors.
pub fn execute_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
