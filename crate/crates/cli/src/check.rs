use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};
use stiefel_polar::diagnostics::{
    assert_monotone, fd_gradient_check, fd_symmetric_gradient_check, fit_rate, seminondegeneracy_report,
    symmetric_seminondegeneracy_report, sufficient_increase_report, RateClass, RateFitOptions, Verdict,
};
use stiefel_polar::stiefel::random_stiefel;
use stiefel_polar::trace::Trace;
use stiefel_polar::{Error, Family, ObjectiveSpec, StiefelTuple};

use crate::error::{with_path, CliError, CliResult};
use crate::files::{read_point, read_spec, write_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// Finite-difference check of the Euclidean gradients.
    Grad,
    /// Riemannian Hessian rank against the family maximum.
    Hessrank,
    /// Objective never decreases along a trace.
    Monotone,
    /// Convergence-rate class of a trace.
    Rate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpectRate {
    Linear,
    Sublinear,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Result or truth file holding the point to examine.
    #[arg(long)]
    pub point: Option<PathBuf>,
    /// Trace CSV, for monotone and rate.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Pass threshold: relative gradient error for grad, relative drop for monotone.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random points for grad when no --point is given.
    #[arg(long, default_value_t = 5)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Required class for rate; any conclusive class passes otherwise.
    #[arg(long, value_enum)]
    pub expect: Option<ExpectRate>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str, which: Which) -> CliResult<&'a PathBuf> {
    p.as_ref().ok_or_else(|| CliError::Validation(format!("--{flag} is required for {which:?}")))
}

fn is_symmetric(spec: &ObjectiveSpec) -> bool {
    spec.family() == Family::SymmetricDiagonalization
}

fn grad(a: &CheckArgs) -> CliResult<(bool, Value)> {
    let spec = read_spec(required(&a.spec, "spec", a.which)?)?;
    let tol = a.tol.unwrap_or(1e-6);
    let points = match &a.point {
        Some(p) => vec![read_point(p)?],
        None => (0..a.samples)
            .map(|s| {
                let seed = a.seed.wrapping_add(s);
                if is_symmetric(&spec) {
                    StiefelTuple::new(vec![random_stiefel(spec.dims()[0], spec.ranks()[0], seed)?])
                } else {
                    StiefelTuple::random(spec.dims(), spec.ranks(), seed)
                }
            })
            .collect::<stiefel_polar::Result<Vec<_>>>()?,
    };
    let mut worst: f64 = 0.0;
    for p in &points {
        if is_symmetric(&spec) {
            worst = worst.max(fd_symmetric_gradient_check(&spec, p.block(0), None)?);
        } else {
            for i in 0..p.len() {
                worst = worst.max(fd_gradient_check(&spec, p, i, None)?);
            }
        }
    }
    if !worst.is_finite() {
        return Err(CliError::Numeric(format!("gradient error {worst}")));
    }
    let passed = worst <= tol;
    Ok((passed, json!({ "points": points.len(), "max_relative_error": worst, "tol": tol })))
}

fn hessrank(a: &CheckArgs) -> CliResult<(bool, Value)> {
    let spec = read_spec(required(&a.spec, "spec", a.which)?)?;
    let point = read_point(required(&a.point, "point", a.which)?)?;
    let reports = if is_symmetric(&spec) {
        symmetric_seminondegeneracy_report(&spec, point.block(0), a.tol).map(|r| vec![r])
    } else {
        seminondegeneracy_report(&spec, &point, a.tol)
    };
    match reports {
        Ok(blocks) => {
            let passed = blocks.iter().all(|b| b.verdict == Verdict::SemiNondegenerate);
            Ok((passed, json!({ "blocks": blocks })))
        }
        Err(Error::NotStationary(g)) => Ok((false, json!({ "not_stationary": true, "riemannian_grad_norm": g }))),
        Err(e) => Err(e.into()),
    }
}

fn load_trace(a: &CheckArgs) -> CliResult<Trace> {
    let path = required(&a.trace, "trace", a.which)?;
    with_path(Trace::load(path), path)
}

fn monotone(a: &CheckArgs) -> CliResult<(bool, Value)> {
    let trace = load_trace(a)?;
    let tol = a.tol.unwrap_or(1e-12);
    let v = assert_monotone(&trace, tol);
    let increase = sufficient_increase_report(&trace, None);
    Ok((
        v.passed,
        json!({
            "records": trace.len(),
            "tol": tol,
            "first_violation": v.first_violation,
            "worst_drop": v.worst_drop,
            "sufficient_increase_violations": increase.len(),
        }),
    ))
}

fn rate(a: &CheckArgs) -> CliResult<(bool, Value)> {
    let trace = load_trace(a)?;
    let fit = fit_rate(&trace, &RateFitOptions::default());
    let passed = match a.expect {
        Some(ExpectRate::Linear) => fit.classification == RateClass::Linear,
        Some(ExpectRate::Sublinear) => fit.classification == RateClass::Sublinear,
        None => fit.classification != RateClass::Inconclusive,
    };
    Ok((passed, json!({ "fit": fit })))
}

pub fn run(a: &CheckArgs) -> CliResult<Value> {
    let (passed, details) = match a.which {
        Which::Grad => grad(a)?,
        Which::Hessrank => hessrank(a)?,
        Which::Monotone => monotone(a)?,
        Which::Rate => rate(a)?,
    };
    let name = format!("{:?}", a.which).to_lowercase();
    let report = json!({ "check": name, "passed": passed, "details": details });
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    // A closed pipe on stdout is not a check failure.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    if passed {
        Ok(report)
    } else {
        Err(CliError::CheckFailed(name))
    }
}
