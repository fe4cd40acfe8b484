//! End-to-end experiment orchestration: sample reconstruction across a lambda
//! schedule (in parallel), exponent design, the final inhomogeneous solve,
//! homogeneous baselines, metrics, and artifact output.

use crate::admm::{
    AdmmWorkspace, ExponentField, ReconstructionResult, SolverConfig,
};
use crate::error::{Error, Result};
use crate::exponent::{
    assign_exponents, average_pool, build_patch_grid, classify_patches, gradient_stats,
    lambda_schedule, minmax_normalize, nghd_filter, patch_exponents, variance_pool, ClassMap,
    DesignHyper, GradientStats, PatchGrid, PoolingMap,
};
use crate::io;
use crate::operators::{make_partial_fourier, MeasurementOperator, Selection, Shape, Signal};
use crate::synth::{
    add_noise, error_metrics, improvement_pct, make_signal_1d, make_signal_2d, snr_db,
    ErrorReport, NoiseSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Where the ground truth comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignalSource {
    Builtin1d,
    Builtin2d,
    Image(PathBuf),
}

/// Frequency-mask specification, either a named rule or an explicit file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskRule {
    /// 1D: wavenumbers `0..count`.
    Lowest(usize),
    /// 2D: `k_x` in `0..count`, all `k_y`.
    LowestX(usize),
    /// 2D: every `step`-th `k_x` starting at 0, all `k_y`.
    StrideX(usize),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSpec {
    pub mask: MaskRule,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SignalSource,
    /// Grid size (per axis in 2D). Ignored for image sources, which keep
    /// their native resolution.
    pub grid_n: usize,
    pub measurement: MeasurementSpec,
    pub hyper: DesignHyper,
    /// Shared solver settings; `lambda` is overridden per solve.
    pub solver: SolverConfig,
    /// Grid evaluated for the final inhomogeneous solve (best l2 reported).
    pub final_lambdas: Vec<f64>,
    /// Grid swept for each homogeneous baseline.
    pub baseline_lambdas: Vec<f64>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 && !matches!(self.source, SignalSource::Image(_)) {
            return Err(Error::Config(format!("grid size {} < 2", self.grid_n)));
        }
        if let SignalSource::Image(p) = &self.source {
            if !p.exists() {
                return Err(Error::Config(format!(
                    "image file {} does not exist",
                    p.display()
                )));
            }
        }
        if let MaskRule::File(p) = &self.measurement.mask {
            if !p.exists() {
                return Err(Error::Config(format!(
                    "mask file {} does not exist",
                    p.display()
                )));
            }
        }
        if !(self.measurement.sigma >= 0.0) {
            return Err(Error::Config("sigma must be >= 0".into()));
        }
        if self.final_lambdas.is_empty() || self.baseline_lambdas.is_empty() {
            return Err(Error::Config("lambda grids must be non-empty".into()));
        }
        self.hyper.validate()?;
        self.solver.validate()?;
        Ok(())
    }
}

/// Expands a mask rule into an explicit frequency selection for `shape`.
pub fn expand_mask(rule: &MaskRule, shape: Shape) -> Result<Selection> {
    match (rule, shape) {
        (MaskRule::Lowest(count), Shape::OneD(n)) => {
            if *count == 0 || *count > n {
                return Err(Error::Config(format!(
                    "lowest:{count} out of range for n = {n}"
                )));
            }
            Ok(Selection::OneD((0..*count).collect()))
        }
        (MaskRule::LowestX(count), Shape::TwoD { rows, cols }) => {
            if *count == 0 || *count > cols {
                return Err(Error::Config(format!(
                    "lowest-x:{count} out of range for {cols} columns"
                )));
            }
            Ok(Selection::TwoD(
                (0..*count)
                    .flat_map(|kx| (0..rows).map(move |ky| (kx, ky)))
                    .collect(),
            ))
        }
        (MaskRule::StrideX(step), Shape::TwoD { rows, cols }) => {
            if *step == 0 {
                return Err(Error::Config("stride-x step must be >= 1".into()));
            }
            Ok(Selection::TwoD(
                (0..cols)
                    .step_by(*step)
                    .flat_map(|kx| (0..rows).map(move |ky| (kx, ky)))
                    .collect(),
            ))
        }
        (MaskRule::File(path), shape) => io::load_mask(path, shape),
        (rule, shape) => Err(Error::Config(format!(
            "mask rule {rule:?} does not apply to shape {shape:?}"
        ))),
    }
}

/// Solves the homogeneous problem once per lambda of `schedule`, in parallel;
/// results are returned in schedule order and are bit-identical to a serial
/// run. A solver failure aborts with the offending lambda attached.
pub fn reconstruct_samples(
    op: &MeasurementOperator,
    y: &[f64],
    schedule: &[f64],
    p_hom: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Signal>> {
    Ok(reconstruct_sweep(op, y, schedule, p_hom, cfg)?
        .into_iter()
        .map(|r| r.u_hat)
        .collect())
}

fn reconstruct_sweep(
    op: &MeasurementOperator,
    y: &[f64],
    schedule: &[f64],
    p_hom: f64,
    cfg: &SolverConfig,
) -> Result<Vec<ReconstructionResult>> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("empty lambda schedule".into()));
    }
    let field = ExponentField::homogeneous(op.signal_shape().len(), p_hom)?;
    sweep_field(op, y, schedule, &field, cfg)
}

fn sweep_field(
    op: &MeasurementOperator,
    y: &[f64],
    schedule: &[f64],
    field: &ExponentField,
    cfg: &SolverConfig,
) -> Result<Vec<ReconstructionResult>> {
    let workspace = AdmmWorkspace::new(op, cfg.rho)?;
    schedule
        .par_iter()
        .map(|&lambda| {
            let solve_cfg = SolverConfig { lambda, ..*cfg };
            workspace
                .solve(y, field, &solve_cfg, None)
                .map_err(|e| Error::Solver {
                    lambda,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Everything produced by the exponent-design stage, including the
/// intermediate pooling maps (useful for reproducing the paper-style pooling
/// and classification figures).
#[derive(Debug, Clone)]
pub struct DesignOutput {
    pub exponents: ExponentField,
    pub classes: ClassMap,
    pub stats: GradientStats,
    pub grid: PatchGrid,
    pub schedule: Vec<f64>,
    pub var1n: PoolingMap,
    pub var2n: PoolingMap,
    pub filt1: PoolingMap,
    pub filt2: PoolingMap,
    pub avg1n: PoolingMap,
    pub avg2n: PoolingMap,
}

/// Runs the design pipeline: samples the lambda schedule, reconstructs TV and
/// Tikhonov sample sets, pools gradient statistics patchwise, classifies
/// patches, and assigns the exponent field.
pub fn design_exponents(
    op: &MeasurementOperator,
    y: &[f64],
    hyper: &DesignHyper,
    cfg: &SolverConfig,
) -> Result<DesignOutput> {
    hyper.validate()?;
    let shape = op.signal_shape();
    let grid = build_patch_grid(shape, hyper.k)?;

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let schedule = lambda_schedule(hyper, &mut rng);

    let samples_tv = reconstruct_samples(op, y, &schedule, 1.0, cfg)?;
    let samples_tik = reconstruct_samples(op, y, &schedule, 2.0, cfg)?;
    let stats = gradient_stats(&samples_tv, &samples_tik)?;

    let var1n = minmax_normalize(&variance_pool(stats.pooling_field_tv(), &grid));
    let var2n = minmax_normalize(&variance_pool(stats.pooling_field_tik(), &grid));
    let filt1 = nghd_filter(&var1n, &grid, hyper.n_nghd, hyper.nghd_mode);
    let filt2 = nghd_filter(&var2n, &grid, hyper.n_nghd, hyper.nghd_mode);
    let classes = classify_patches(&var1n, &var2n, &filt1, &filt2, hyper.eps_var)?;

    let avg1n = minmax_normalize(&average_pool(stats.pooling_field_tv(), &grid));
    let avg2n = minmax_normalize(&average_pool(stats.pooling_field_tik(), &grid));
    let exponents = assign_exponents(&classes, &avg1n, &avg2n, hyper.c, &grid, shape)?;

    Ok(DesignOutput {
        exponents,
        classes,
        stats,
        grid,
        schedule,
        var1n,
        var2n,
        filt1,
        filt2,
        avg1n,
        avg2n,
    })
}

/// Best-over-grid result of one method.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub recon: Signal,
    pub error: ErrorReport,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One row of a lambda sweep record.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub l1: f64,
    pub l2: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn best_over_grid(
    op: &MeasurementOperator,
    y: &[f64],
    schedule: &[f64],
    field: &ExponentField,
    cfg: &SolverConfig,
    truth: &Signal,
) -> Result<(MethodResult, Vec<SweepRow>, ReconstructionResult)> {
    let results = sweep_field(op, y, schedule, field, cfg)?;
    let mut rows = Vec::with_capacity(results.len());
    let mut best: Option<(usize, ErrorReport)> = None;
    for (i, res) in results.iter().enumerate() {
        let report = error_metrics(&res.u_hat, truth)?;
        rows.push(SweepRow {
            lambda: schedule[i],
            l1: report.l1,
            l2: report.l2,
            iterations: res.iterations,
            converged: res.converged,
        });
        let better = match &best {
            None => true,
            Some((_, b)) => report.l2 < b.l2,
        };
        if better {
            best = Some((i, report));
        }
    }
    let (idx, error) = best.expect("non-empty schedule");
    let chosen = results.into_iter().nth(idx).expect("index in range");
    Ok((
        MethodResult {
            recon: chosen.u_hat.clone(),
            error,
            lambda: schedule[idx],
            iterations: chosen.iterations,
            converged: chosen.converged,
        },
        rows,
        chosen,
    ))
}

/// Relative improvements of the proposed method over a baseline, in percent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ImprovementMetrics {
    pub l1_pct: f64,
    pub l2_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
struct MethodMetrics {
    l1: f64,
    l2: f64,
    l1_rel: f64,
    l2_rel: f64,
    lambda_used: f64,
    iterations: usize,
    converged: bool,
}

impl MethodMetrics {
    fn from_result(r: &MethodResult) -> Self {
        MethodMetrics {
            l1: r.error.l1,
            l2: r.error.l2,
            l1_rel: r.error.l1_rel,
            l2_rel: r.error.l2_rel,
            lambda_used: r.lambda,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ErrorsJson {
    proposed: MethodMetrics,
    homogeneous_p1: MethodMetrics,
    homogeneous_p2: MethodMetrics,
    improvement_vs_p1: ImprovementMetrics,
    improvement_vs_p2: ImprovementMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
}

/// Full experiment outcome with paths of every artifact written.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub proposed: MethodResult,
    pub homogeneous_p1: MethodResult,
    pub homogeneous_p2: MethodResult,
    pub improvement_vs_p1: ImprovementMetrics,
    pub improvement_vs_p2: ImprovementMetrics,
    pub snr_db: Option<f64>,
    pub classes: ClassMap,
    pub exponents: ExponentField,
    pub artifacts: Vec<PathBuf>,
}

fn load_truth(config: &ExperimentConfig) -> Result<Signal> {
    match &config.source {
        SignalSource::Builtin1d => make_signal_1d(config.grid_n),
        SignalSource::Builtin2d => make_signal_2d(config.grid_n),
        SignalSource::Image(path) => io::load_image(path),
    }
}

/// Runs the whole experiment: truth, noisy measurement, exponent design,
/// inhomogeneous solve, homogeneous baselines, metrics, and artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let truth = load_truth(config).map_err(|e| e.at_stage("truth"))?;
    let shape = truth.shape();

    let selection =
        expand_mask(&config.measurement.mask, shape).map_err(|e| e.at_stage("mask"))?;
    let op = make_partial_fourier(shape, selection.clone()).map_err(|e| e.at_stage("mask"))?;

    let y_clean = op.forward_apply(&truth).map_err(|e| e.at_stage("measure"))?;
    let y = add_noise(
        &y_clean,
        &NoiseSpec {
            sigma: config.measurement.sigma,
            seed: config.measurement.seed,
        },
    )
    .map_err(|e| e.at_stage("measure"))?;

    let design = design_exponents(&op, &y, &config.hyper, &config.solver)
        .map_err(|e| e.at_stage("design"))?;

    let (proposed, sweep_proposed, proposed_full) = best_over_grid(
        &op,
        &y,
        &config.final_lambdas,
        &design.exponents,
        &config.solver,
        &truth,
    )
    .map_err(|e| e.at_stage("proposed solve"))?;

    let n = shape.len();
    let p1_field = ExponentField::homogeneous(n, 1.0)?;
    let (hom_p1, sweep_p1, _) = best_over_grid(
        &op,
        &y,
        &config.baseline_lambdas,
        &p1_field,
        &config.solver,
        &truth,
    )
    .map_err(|e| e.at_stage("p1 baseline"))?;
    let p2_field = ExponentField::homogeneous(n, 2.0)?;
    let (hom_p2, sweep_p2, _) = best_over_grid(
        &op,
        &y,
        &config.baseline_lambdas,
        &p2_field,
        &config.solver,
        &truth,
    )
    .map_err(|e| e.at_stage("p2 baseline"))?;

    let improvement_vs_p1 = ImprovementMetrics {
        l1_pct: improvement_pct(hom_p1.error.l1, proposed.error.l1),
        l2_pct: improvement_pct(hom_p1.error.l2, proposed.error.l2),
    };
    let improvement_vs_p2 = ImprovementMetrics {
        l1_pct: improvement_pct(hom_p2.error.l1, proposed.error.l1),
        l2_pct: improvement_pct(hom_p2.error.l2, proposed.error.l2),
    };

    let snr = if config.measurement.sigma > 0.0 {
        Some(snr_db(&op, &truth, config.measurement.sigma).map_err(|e| e.at_stage("measure"))?)
    } else {
        None
    };

    let artifacts = write_artifacts(
        config,
        &truth,
        &selection,
        &y,
        &design,
        &proposed,
        &proposed_full,
        &hom_p1,
        &hom_p2,
        &sweep_proposed,
        &sweep_p1,
        &sweep_p2,
        &ErrorsJson {
            proposed: MethodMetrics::from_result(&proposed),
            homogeneous_p1: MethodMetrics::from_result(&hom_p1),
            homogeneous_p2: MethodMetrics::from_result(&hom_p2),
            improvement_vs_p1,
            improvement_vs_p2,
            snr_db: snr,
        },
    )
    .map_err(|e| e.at_stage("artifacts"))?;

    Ok(ExperimentReport {
        proposed,
        homogeneous_p1: hom_p1,
        homogeneous_p2: hom_p2,
        improvement_vs_p1,
        improvement_vs_p2,
        snr_db: snr,
        classes: design.classes,
        exponents: design.exponents,
        artifacts,
    })
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut text = String::from("lambda,l1,l2,iterations,converged\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.lambda, r.l1, r.l2, r.iterations, r.converged
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_diagnostics_csv(path: &Path, res: &ReconstructionResult) -> Result<()> {
    let mut text = String::from("iteration,objective,primal_residual,dual_residual\n");
    for i in 0..res.iterations {
        text.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            res.objective_history[i],
            res.primal_history[i],
            res.dual_history[i]
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[allow(clippy::too_many_arguments)]
fn write_artifacts(
    config: &ExperimentConfig,
    truth: &Signal,
    selection: &Selection,
    y: &[f64],
    design: &DesignOutput,
    proposed: &MethodResult,
    proposed_full: &ReconstructionResult,
    hom_p1: &MethodResult,
    hom_p2: &MethodResult,
    sweep_proposed: &[SweepRow],
    sweep_p1: &[SweepRow],
    sweep_p2: &[SweepRow],
    errors: &ErrorsJson,
) -> Result<Vec<PathBuf>> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut artifacts = Vec::new();
    let mut record = |p: PathBuf| -> PathBuf {
        artifacts.push(p.clone());
        p
    };

    std::fs::write(
        record(dir.join("config.echo")),
        crate::config::echo_config(config),
    )
    .map_err(|e| Error::io(dir.join("config.echo"), e))?;
    io::save_mask(record(dir.join("mask.txt")), selection)?;
    io::save_csv(record(dir.join("truth.csv")), truth)?;
    io::save_csv_vector(record(dir.join("measurement.csv")), y)?;

    let shape = truth.shape();
    let is_2d = matches!(shape, Shape::TwoD { .. });
    if is_2d {
        io::save_image_scaled(record(dir.join("truth.pgm")), truth)?;
    }

    // Class map and per-patch exponents in patch-grid layout.
    let class_vals: Vec<f64> = design
        .classes
        .labels
        .iter()
        .map(|c| c.code() as f64)
        .collect();
    let patch_shape = match design.grid.layout() {
        crate::exponent::PatchLayout::OneD { n_patches } => Shape::OneD(n_patches),
        crate::exponent::PatchLayout::TwoD { rows_p, cols_p } => Shape::TwoD {
            rows: rows_p,
            cols: cols_p,
        },
    };
    let class_signal = Signal::new(class_vals, patch_shape)?;
    io::save_csv(record(dir.join("classmap.csv")), &class_signal)?;
    let patch_exp = Signal::new(patch_exponents(&design.exponents, &design.grid), patch_shape)?;
    io::save_csv(record(dir.join("exponents_patch.csv")), &patch_exp)?;
    for (name, pool) in [
        ("pool_var1n", &design.var1n),
        ("pool_var2n", &design.var2n),
        ("pool_filt1", &design.filt1),
        ("pool_filt2", &design.filt2),
        ("pool_avg1n", &design.avg1n),
        ("pool_avg2n", &design.avg2n),
    ] {
        io::save_csv(
            record(dir.join(format!("{name}.csv"))),
            &Signal::new(pool.values.clone(), patch_shape)?,
        )?;
    }
    let exp_signal = Signal::new(design.exponents.values().to_vec(), shape)?;
    io::save_csv(record(dir.join("exponents.csv")), &exp_signal)?;
    if is_2d {
        // Fixed class shading: smooth black, oscillation gray, discontinuity white.
        let class_img: Vec<f64> = design
            .classes
            .labels
            .iter()
            .map(|c| match c {
                crate::exponent::PatchClass::Smooth => 0.0,
                crate::exponent::PatchClass::Oscillation => 128.0,
                crate::exponent::PatchClass::Discontinuity => 255.0,
            })
            .collect();
        io::save_image(
            record(dir.join("classmap.pgm")),
            &Signal::new(class_img, patch_shape)?,
        )?;
        io::save_image_scaled(record(dir.join("exponents.pgm")), &exp_signal)?;
    }

    for (name, method) in [("proposed", proposed), ("p1", hom_p1), ("p2", hom_p2)] {
        io::save_csv(record(dir.join(format!("recon_{name}.csv"))), &method.recon)?;
        let err_signal = Signal::new(method.error.pointwise.clone(), shape)?;
        io::save_csv(record(dir.join(format!("err_{name}.csv"))), &err_signal)?;
        if is_2d {
            io::save_image_scaled(
                record(dir.join(format!("recon_{name}.pgm"))),
                &method.recon,
            )?;
            io::save_image_scaled(record(dir.join(format!("err_{name}.pgm"))), &err_signal)?;
        }
    }

    write_sweep_csv(&record(dir.join("sweep_proposed.csv")), sweep_proposed)?;
    write_sweep_csv(&record(dir.join("sweep_p1.csv")), sweep_p1)?;
    write_sweep_csv(&record(dir.join("sweep_p2.csv")), sweep_p2)?;
    write_diagnostics_csv(&record(dir.join("diag_proposed.csv")), proposed_full)?;

    let json = serde_json::to_string_pretty(errors)
        .map_err(|e| Error::Parse(format!("metrics serialization: {e}")))?;
    std::fs::write(record(dir.join("errors.json")), json + "\n")
        .map_err(|e| Error::io(dir.join("errors.json"), e))?;

    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::admm_solve;

    fn tiny_op() -> (MeasurementOperator, Vec<f64>, Signal) {
        let truth = make_signal_1d(32).unwrap();
        let shape = truth.shape();
        let op = make_partial_fourier(shape, Selection::OneD((0..7).collect())).unwrap();
        let y = op.forward_apply(&truth).unwrap();
        (op, y, truth)
    }

    #[test]
    fn single_sample_equals_direct_solve() {
        let (op, y, _) = tiny_op();
        let cfg = SolverConfig::default();
        let samples = reconstruct_samples(&op, &y, &[0.5], 1.0, &cfg).unwrap();
        assert_eq!(samples.len(), 1);
        let direct_cfg = SolverConfig { lambda: 0.5, ..cfg };
        let p = ExponentField::homogeneous(32, 1.0).unwrap();
        let direct = admm_solve(&op, &y, &p, &direct_cfg, None).unwrap();
        assert_eq!(samples[0].values(), direct.u_hat.values());
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let (op, y, _) = tiny_op();
        let cfg = SolverConfig::default();
        let schedule = [0.1, 0.5, 2.0, 10.0];
        let parallel = reconstruct_samples(&op, &y, &schedule, 1.0, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| reconstruct_samples(&op, &y, &schedule, 1.0, &cfg).unwrap());
        for (a, b) in parallel.iter().zip(&serial) {
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let (op, y, _) = tiny_op();
        let hyper = DesignHyper {
            k: 4,
            n_samples: 3,
            c: 5.0,
            seed: 7,
            ..Default::default()
        };
        let cfg = SolverConfig::default();
        let a = design_exponents(&op, &y, &hyper, &cfg).unwrap();
        let b = design_exponents(&op, &y, &hyper, &cfg).unwrap();
        assert_eq!(a.exponents.values(), b.exponents.values());
        assert_eq!(a.classes.labels, b.classes.labels);
        assert_eq!(a.schedule, b.schedule);
    }

    #[test]
    fn exponents_stay_in_range() {
        let (op, y, _) = tiny_op();
        let hyper = DesignHyper {
            k: 4,
            n_samples: 2,
            c: 3.5,
            ..Default::default()
        };
        let out = design_exponents(&op, &y, &hyper, &SolverConfig::default()).unwrap();
        let hi = 2.0 - (-hyper.c).exp();
        for &p in out.exponents.values() {
            assert!((1.0..=hi + 1e-15).contains(&p), "exponent {p} out of range");
        }
    }

    #[test]
    fn mask_expansion_rules() {
        let sel = expand_mask(&MaskRule::Lowest(4), Shape::OneD(10)).unwrap();
        assert_eq!(sel, Selection::OneD(vec![0, 1, 2, 3]));

        let sel = expand_mask(&MaskRule::LowestX(2), Shape::TwoD { rows: 3, cols: 4 }).unwrap();
        match &sel {
            Selection::TwoD(ks) => {
                assert_eq!(ks.len(), 6);
                assert!(ks.iter().all(|&(kx, _)| kx < 2));
            }
            _ => panic!(),
        }

        let sel = expand_mask(&MaskRule::StrideX(3), Shape::TwoD { rows: 2, cols: 7 }).unwrap();
        match &sel {
            Selection::TwoD(ks) => {
                let kxs: Vec<usize> = ks.iter().map(|&(kx, _)| kx).collect();
                assert!(kxs.iter().all(|k| k % 3 == 0));
                assert_eq!(ks.len(), 3 * 2);
            }
            _ => panic!(),
        }

        assert!(expand_mask(&MaskRule::Lowest(4), Shape::TwoD { rows: 2, cols: 2 }).is_err());
        assert!(expand_mask(&MaskRule::LowestX(4), Shape::OneD(8)).is_err());
    }

    #[test]
    fn degenerate_config_reduces_to_tv() {
        // Identity operator on a constant signal: every patch pools to zero,
        // classifies smooth, and gets exponent Phi(0) = 1, so the designed
        // field reproduces the homogeneous p = 1 solve exactly.
        let shape = Shape::OneD(24);
        let op = crate::operators::make_identity(shape);
        let truth = Signal::new(vec![0.75; 24], shape).unwrap();
        let y = op.forward_apply(&truth).unwrap();
        let hyper = DesignHyper {
            k: 4,
            n_samples: 2,
            c: 9.0,
            ..Default::default()
        };
        let cfg = SolverConfig::default();
        let design = design_exponents(&op, &y, &hyper, &cfg).unwrap();
        assert!(design
            .classes
            .labels
            .iter()
            .all(|&l| l == crate::exponent::PatchClass::Smooth));
        assert!(design.exponents.values().iter().all(|&p| p == 1.0));

        let lambda_cfg = SolverConfig {
            lambda: 0.7,
            ..cfg
        };
        let proposed = admm_solve(&op, &y, &design.exponents, &lambda_cfg, None).unwrap();
        let p1 = ExponentField::homogeneous(24, 1.0).unwrap();
        let tv = admm_solve(&op, &y, &p1, &lambda_cfg, None).unwrap();
        assert_eq!(proposed.u_hat.values(), tv.u_hat.values());
    }

    #[test]
    fn singular_mask_aborts_sweep() {
        // A mask without DC makes the shared normal system singular; the
        // sweep aborts during factorization, before any lambda is solved.
        let shape = Shape::OneD(16);
        let op = make_partial_fourier(shape, Selection::OneD(vec![1, 2, 3])).unwrap();
        let y = vec![0.0; 6];
        let cfg = SolverConfig::default();
        match reconstruct_samples(&op, &y, &[0.25], 1.0, &cfg) {
            Err(Error::SingularSystem(_)) => {}
            other => panic!("expected singular-system error, got {:?}", other.map(|v| v.len())),
        }
    }
}
