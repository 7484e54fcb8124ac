use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use stiefel_polar::solver::{default_shift, solve_symmetric, solve_tuple, Algorithm, ResultJson, SolverConfig};
use stiefel_polar::stiefel::random_stiefel;
use stiefel_polar::StiefelTuple;

use crate::error::{with_path, CliError, CliResult};
use crate::files::{read_json, read_point, read_spec, write_json};

/// Everything a solve needs. Relative paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub spec: PathBuf,
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_grad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Starting point (result or truth file); random from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<PathBuf>,
    pub trace: PathBuf,
    pub result: PathBuf,
    /// Zero the wall-clock column so traces are byte-reproducible.
    #[serde(default)]
    pub no_timing: bool,
}

impl RunManifest {
    fn resolve(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.spec);
        fix(&mut self.trace);
        fix(&mut self.result);
        if let Some(p) = self.init.as_mut() {
            fix(p);
        }
        self
    }

    /// Same manifest with absolute paths, so it can be replayed from anywhere.
    fn absolute(&self) -> CliResult<Self> {
        let abs = |p: &PathBuf| with_path(std::path::absolute(p), p);
        Ok(Self {
            spec: abs(&self.spec)?,
            trace: abs(&self.trace)?,
            result: abs(&self.result)?,
            init: self.init.as_ref().map(abs).transpose()?,
            ..self.clone()
        })
    }

    fn check_inputs(&self) -> CliResult<()> {
        for p in std::iter::once(&self.spec).chain(self.init.as_ref()) {
            if !p.is_file() {
                return Err(CliError::Validation(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }

    fn config(&self, shift: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.algorithm).with_shift(shift);
        cfg.seed = self.seed;
        cfg.timing = !self.no_timing;
        if let Some(t) = self.tol_step {
            cfg.tol_step = t;
        }
        if let Some(t) = self.tol_grad {
            cfg.tol_grad = t;
        }
        if let Some(m) = self.max_sweeps {
            cfg.max_sweeps = m;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Run manifest (JSON); excludes the individual flags.
    #[arg(long, conflicts_with_all = ["spec", "algo", "out"])]
    pub manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    pub spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    pub algo: Option<Algorithm>,
    /// Shift γ; defaults per algorithm.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tol_step: Option<f64>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Output directory; receives trace.csv, result.json and manifest.json.
    #[arg(long, required_unless_present = "manifest")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

fn manifest_of(a: &SolveArgs) -> CliResult<RunManifest> {
    if let Some(path) = &a.manifest {
        let m: RunManifest = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        return Ok(m.resolve(base));
    }
    let (Some(spec), Some(algorithm), Some(out)) = (&a.spec, a.algo, &a.out) else {
        return Err(CliError::Validation("--spec, --algo and --out are required without --manifest".into()));
    };
    Ok(RunManifest {
        spec: spec.clone(),
        algorithm,
        gamma: a.gamma,
        tol_step: a.tol_step,
        tol_grad: a.tol_grad,
        max_sweeps: a.max_sweeps,
        seed: a.seed,
        init: a.init.clone(),
        trace: out.join("trace.csv"),
        result: out.join("result.json"),
        no_timing: a.no_timing,
    })
}

pub fn run(a: &SolveArgs) -> CliResult<ResultJson> {
    let m = manifest_of(a)?;
    if let Some(g) = m.gamma {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(CliError::Validation(format!("gamma must be finite and nonnegative, got {g}")));
        }
    }
    m.check_inputs()?;
    let spec = read_spec(&m.spec)?;
    let shift = match m.gamma {
        Some(g) => g,
        None => default_shift(&spec, m.algorithm, m.seed)?,
    };
    let cfg = m.config(shift);
    cfg.validate()?;
    let init = match &m.init {
        Some(p) => read_point(p)?,
        None if m.algorithm.is_symmetric() => StiefelTuple::new(vec![random_stiefel(spec.dims()[0], spec.ranks()[0], m.seed)?])?,
        None => StiefelTuple::random(spec.dims(), spec.ranks(), m.seed)?,
    };
    log::info!("{} on {} (γ = {shift})", m.algorithm, m.spec.display());

    let (result, trace) = if m.algorithm.is_symmetric() {
        if init.len() != 1 {
            return Err(CliError::Validation(format!("{} needs a single-block starting point, got {} blocks", m.algorithm, init.len())));
        }
        let r = solve_symmetric(&spec, init.block(0), &cfg)?;
        (ResultJson::from_point(m.algorithm, &r), r.trace)
    } else {
        let r = solve_tuple(&spec, &init, &cfg)?;
        (ResultJson::from_tuple(m.algorithm, &r), r.trace)
    };

    for p in [&m.trace, &m.result] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            with_path(std::fs::create_dir_all(dir), dir)?;
        }
    }
    with_path(trace.save(&m.trace), &m.trace)?;
    write_json(&m.result, &result)?;
    if a.manifest.is_none() {
        if let Some(dir) = m.result.parent() {
            write_json(&dir.join("manifest.json"), &m.absolute()?)?;
        }
    }
    if !(result.objective.is_finite() && result.grad_norm.is_finite()) {
        return Err(CliError::Numeric(format!("final objective {} / gradient norm {}", result.objective, result.grad_norm)));
    }
    Ok(result)
}
