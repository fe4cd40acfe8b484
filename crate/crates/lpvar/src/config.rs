//! Flat `key = value` experiment configuration files.
//!
//! Lines are `key = value` pairs; blank lines and `#` comments are ignored.
//! Lambda grids accept either a comma list (`0.1,1,10`) or the log-grid
//! shorthand `count@lo:hi`. See the README for the full key reference.

use crate::admm::SolverConfig;
use crate::error::{Error, Result};
use crate::exponent::{log_spaced, DesignHyper, NghdMode};
use crate::pipeline::{ExperimentConfig, MaskRule, MeasurementSpec, SignalSource};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn parse_mask_rule(s: &str) -> Result<MaskRule> {
    let bad = || Error::Config(format!("unrecognized mask rule {s:?}"));
    let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "lowest" => Ok(MaskRule::Lowest(
            arg.trim().parse().map_err(|_| bad())?,
        )),
        "lowest-x" => Ok(MaskRule::LowestX(
            arg.trim().parse().map_err(|_| bad())?,
        )),
        "stride-x" => Ok(MaskRule::StrideX(
            arg.trim().parse().map_err(|_| bad())?,
        )),
        "file" => Ok(MaskRule::File(PathBuf::from(arg.trim()))),
        _ => Err(bad()),
    }
}

fn mask_rule_to_string(rule: &MaskRule) -> String {
    match rule {
        MaskRule::Lowest(n) => format!("lowest:{n}"),
        MaskRule::LowestX(n) => format!("lowest-x:{n}"),
        MaskRule::StrideX(n) => format!("stride-x:{n}"),
        MaskRule::File(p) => format!("file:{}", p.display()),
    }
}

/// Parses a lambda grid: `count@lo:hi` (log-spaced) or a comma list.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some((count, range)) = s.split_once('@') {
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("lambda grid {s:?}: expected count@lo:hi")))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("lambda grid {s:?}: bad count")))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("lambda grid {s:?}: bad lower bound")))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("lambda grid {s:?}: bad upper bound")))?;
        if count == 0 || !(lo > 0.0) || !(hi >= lo) {
            return Err(Error::Config(format!("lambda grid {s:?} out of range")));
        }
        Ok(log_spaced(lo, hi, count))
    } else {
        s.split(',')
            .map(|tok| {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad lambda value {tok:?}")))?;
                if !(v > 0.0) {
                    return Err(Error::Config(format!("lambda {v} must be > 0")));
                }
                Ok(v)
            })
            .collect()
    }
}

fn parse_nghd_mode(s: &str) -> Result<NghdMode> {
    match s {
        "single-max" => Ok(NghdMode::SingleMax),
        "min-of-sides" => Ok(NghdMode::MinOfSides),
        _ => Err(Error::Config(format!(
            "nghd_mode must be single-max or min-of-sides, got {s:?}"
        ))),
    }
}

/// Parses an experiment configuration from `key = value` text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut keys: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let k = k.trim().to_string();
        if keys.contains_key(&k) {
            return Err(Error::Config(format!("duplicate key {k:?}")));
        }
        keys.insert(k, v.trim().to_string());
    }

    let mut take = |k: &str| keys.remove(k);
    let required = |v: Option<String>, k: &str| {
        v.ok_or_else(|| Error::Config(format!("missing required key {k:?}")))
    };
    fn num<T: std::str::FromStr>(v: Option<String>, k: &str, default: T) -> Result<T> {
        match v {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("bad value for {k:?}: {s:?}"))),
        }
    }
    fn num_req<T: std::str::FromStr>(v: Option<String>, k: &str) -> Result<T> {
        let s = v.ok_or_else(|| Error::Config(format!("missing required key {k:?}")))?;
        s.parse()
            .map_err(|_| Error::Config(format!("bad value for {k:?}: {s:?}")))
    }

    let source = match required(take("source"), "source")?.as_str() {
        "builtin-1d" => SignalSource::Builtin1d,
        "builtin-2d" => SignalSource::Builtin2d,
        s if s.starts_with("image:") => {
            SignalSource::Image(PathBuf::from(s.trim_start_matches("image:").trim()))
        }
        other => {
            return Err(Error::Config(format!(
                "source must be builtin-1d, builtin-2d, or image:<path>, got {other:?}"
            )))
        }
    };
    let grid_n: usize = num_req(take("n"), "n")?;
    let mask = parse_mask_rule(&required(take("mask"), "mask")?)?;
    let measurement = MeasurementSpec {
        mask,
        sigma: num(take("sigma"), "sigma", 0.0)?,
        seed: num(take("noise_seed"), "noise_seed", 0)?,
    };

    let defaults = DesignHyper::default();
    let hyper = DesignHyper {
        k: num_req(take("patch_size"), "patch_size")?,
        eps_var: num(take("eps_var"), "eps_var", defaults.eps_var)?,
        n_nghd: num(take("nghd_size"), "nghd_size", defaults.n_nghd)?,
        c: num_req(take("curve_c"), "curve_c")?,
        n_samples: num(take("samples"), "samples", defaults.n_samples)?,
        lambda_lo: num(take("lambda_lo"), "lambda_lo", defaults.lambda_lo)?,
        lambda_hi: num(take("lambda_hi"), "lambda_hi", defaults.lambda_hi)?,
        ratio_lo: num(take("ratio_lo"), "ratio_lo", defaults.ratio_lo)?,
        ratio_hi: num(take("ratio_hi"), "ratio_hi", defaults.ratio_hi)?,
        seed: num(take("design_seed"), "design_seed", 0)?,
        nghd_mode: match take("nghd_mode") {
            Some(s) => parse_nghd_mode(&s)?,
            None => NghdMode::MinOfSides,
        },
    };

    let solver_defaults = SolverConfig::default();
    let solver = SolverConfig {
        rho: num(take("rho"), "rho", solver_defaults.rho)?,
        lambda: 1.0, // overridden per solve by the pipeline sweeps
        max_iter: num(take("max_iter"), "max_iter", solver_defaults.max_iter)?,
        tol_primal: num(take("tol_primal"), "tol_primal", solver_defaults.tol_primal)?,
        tol_dual: num(take("tol_dual"), "tol_dual", solver_defaults.tol_dual)?,
    };

    // The final grid spans the same range as the baselines so the
    // best-over-grid comparison does not handicap either side.
    let final_lambdas = match take("final_lambdas") {
        Some(s) => parse_lambda_grid(&s)?,
        None => log_spaced(1e-4, 1e4, 20),
    };
    let baseline_lambdas = match take("baseline_lambdas") {
        Some(s) => parse_lambda_grid(&s)?,
        None => log_spaced(1e-4, 1e4, 20),
    };
    let out_dir = PathBuf::from(required(take("out_dir"), "out_dir")?);

    if let Some(k) = keys.keys().next() {
        return Err(Error::Config(format!("unknown key {k:?}")));
    }

    let config = ExperimentConfig {
        source,
        grid_n,
        measurement,
        hyper,
        solver,
        final_lambdas,
        baseline_lambdas,
        out_dir,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Serializes a configuration back to `key = value` text (the `config.echo`
/// artifact). Lambda grids are echoed as explicit comma lists.
pub fn echo_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let src = match &cfg.source {
        SignalSource::Builtin1d => "builtin-1d".to_string(),
        SignalSource::Builtin2d => "builtin-2d".to_string(),
        SignalSource::Image(p) => format!("image:{}", p.display()),
    };
    let _ = writeln!(s, "source = {src}");
    let _ = writeln!(s, "n = {}", cfg.grid_n);
    let _ = writeln!(s, "mask = {}", mask_rule_to_string(&cfg.measurement.mask));
    let _ = writeln!(s, "sigma = {}", cfg.measurement.sigma);
    let _ = writeln!(s, "noise_seed = {}", cfg.measurement.seed);
    let _ = writeln!(s, "patch_size = {}", cfg.hyper.k);
    let _ = writeln!(s, "eps_var = {}", cfg.hyper.eps_var);
    let _ = writeln!(s, "nghd_size = {}", cfg.hyper.n_nghd);
    let _ = writeln!(s, "curve_c = {}", cfg.hyper.c);
    let _ = writeln!(s, "samples = {}", cfg.hyper.n_samples);
    let _ = writeln!(s, "lambda_lo = {}", cfg.hyper.lambda_lo);
    let _ = writeln!(s, "lambda_hi = {}", cfg.hyper.lambda_hi);
    let _ = writeln!(s, "ratio_lo = {}", cfg.hyper.ratio_lo);
    let _ = writeln!(s, "ratio_hi = {}", cfg.hyper.ratio_hi);
    let _ = writeln!(s, "design_seed = {}", cfg.hyper.seed);
    let mode = match cfg.hyper.nghd_mode {
        NghdMode::SingleMax => "single-max",
        NghdMode::MinOfSides => "min-of-sides",
    };
    let _ = writeln!(s, "nghd_mode = {mode}");
    let _ = writeln!(s, "rho = {}", cfg.solver.rho);
    let _ = writeln!(s, "max_iter = {}", cfg.solver.max_iter);
    let _ = writeln!(s, "tol_primal = {}", cfg.solver.tol_primal);
    let _ = writeln!(s, "tol_dual = {}", cfg.solver.tol_dual);
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let _ = writeln!(s, "final_lambdas = {}", join(&cfg.final_lambdas));
    let _ = writeln!(s, "baseline_lambdas = {}", join(&cfg.baseline_lambdas));
    let _ = writeln!(s, "out_dir = {}", cfg.out_dir.display());
    s
}
