//! Desk-scale reruns of the two low-multilinear-rank comparisons.
//!
//! `ex711`: random complex 5×5×5, ranks (1,1,2) and (3,3,3), up to 1000 sweeps.
//! `ex712`: random complex 10×10×10, ranks (1,1,2), 500 sweeps.
//! Each cell runs one algorithm (LMPD, LMPD-S with γ = 0.01, HOOI) on one seed;
//! the tensor and the starting point depend only on the seed, so the three
//! algorithms of a seed start from the same place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_rate, RateClass, RateFitOptions};
use crate::error::{Error, Result};
use crate::objective::{DaggerMode, ObjectiveSpec};
use crate::solver::{solve_tuple, Algorithm, SolverConfig, Status, LMPD_S_DEFAULT_SHIFT};
use crate::stiefel::StiefelTuple;
use crate::tensor::random_tensor;
use crate::trace::{fmt_f64, Trace};

/// Step-norm threshold that counts as convergence.
pub const CONVERGED_STEP: f64 = 1e-8;
/// Relative spread of final objectives within which a seed's algorithms agree.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// Step norm at the last sweep above which an ex712 cell counts as stalled.
pub const STALL_STEP: f64 = 1e-4;

pub const ALGORITHMS: [Algorithm; 3] = [Algorithm::Lmpd, Algorithm::LmpdS, Algorithm::Hooi];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Ex711,
    Ex712,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Ex711 => "ex711",
            Example::Ex712 => "ex712",
        }
    }

    pub fn dims(self) -> Vec<usize> {
        match self {
            Example::Ex711 => vec![5, 5, 5],
            Example::Ex712 => vec![10, 10, 10],
        }
    }

    pub fn rank_sets(self) -> Vec<Vec<usize>> {
        match self {
            Example::Ex711 => vec![vec![1, 1, 2], vec![3, 3, 3]],
            Example::Ex712 => vec![vec![1, 1, 2]],
        }
    }

    pub fn max_sweeps(self) -> usize {
        match self {
            Example::Ex711 => 1000,
            Example::Ex712 => 500,
        }
    }

    /// Every (ranks, seed, algorithm) cell, in output order.
    pub fn cells(self, seeds: &[u64]) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for ranks in self.rank_sets() {
            for &seed in seeds {
                for algorithm in ALGORITHMS {
                    out.push(CellSpec { example: self, ranks: ranks.clone(), seed, algorithm });
                }
            }
        }
        out
    }
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex711" => Ok(Example::Ex711),
            "ex712" => Ok(Example::Ex712),
            _ => Err(Error::Invalid(format!("unknown example {s:?}; expected ex711 or ex712"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSpec {
    pub example: Example,
    pub ranks: Vec<usize>,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl CellSpec {
    pub fn ranks_label(&self) -> String {
        self.ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("x")
    }

    /// File stem of the cell's trace, unique within one bench run.
    pub fn stem(&self) -> String {
        format!("{}_r{}_s{}_{}", self.example.name(), self.ranks_label(), self.seed, self.algorithm)
    }

    pub fn spec(&self) -> Result<ObjectiveSpec> {
        let a = random_tensor(&self.example.dims(), self.seed)?;
        ObjectiveSpec::compression(vec![a], vec![1.0], self.ranks.clone(), DaggerMode::ConjugateTranspose)
    }

    pub fn init(&self) -> Result<StiefelTuple> {
        StiefelTuple::random(&self.example.dims(), &self.ranks, self.seed)
    }

    /// Stops only on the step threshold or the sweep budget.
    pub fn config(&self, timing: bool) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.algorithm);
        if self.algorithm == Algorithm::LmpdS {
            cfg = cfg.with_shift(LMPD_S_DEFAULT_SHIFT);
        }
        cfg.max_sweeps = self.example.max_sweeps();
        cfg.tol_step = CONVERGED_STEP;
        cfg.tol_grad = f64::MIN_POSITIVE;
        cfg.seed = self.seed;
        cfg.timing = timing;
        cfg
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: CellSpec,
    pub status: Status,
    pub sweeps: usize,
    pub final_objective: f64,
    pub final_step: f64,
    pub rate: RateClass,
    pub rate_slope: f64,
    pub trace: Trace,
}

impl CellResult {
    pub fn converged(&self) -> bool {
        self.status == Status::ConvergedStep
    }
}

pub fn run_cell(cell: &CellSpec, timing: bool) -> Result<CellResult> {
    let spec = cell.spec()?;
    let res = solve_tuple(&spec, &cell.init()?, &cell.config(timing))?;
    let final_step = res.trace.sweeps().last().map_or(f64::NAN, |s| s.step_norm);
    let fit = fit_rate(&res.trace, &RateFitOptions::default());
    Ok(CellResult {
        cell: cell.clone(),
        status: res.status,
        sweeps: res.sweeps,
        final_objective: res.objective,
        final_step,
        rate: fit.classification,
        rate_slope: fit.slope,
        trace: res.trace,
    })
}

/// Per (ranks, seed) comparison of the three algorithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedAgreement {
    pub ranks: String,
    pub seed: u64,
    pub all_converged: bool,
    /// `(max f − min f) / max |f|` over the algorithms.
    pub relative_spread: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub example: Example,
    pub cells: usize,
    pub agreements: Vec<SeedAgreement>,
    /// Seeds whose every rank set converged and agreed.
    pub seeds_agreeing: usize,
    pub seeds_total: usize,
    /// LMPD-S cells that reached the step threshold.
    pub lmpd_s_converged: usize,
    pub lmpd_s_total: usize,
    /// LMPD and HOOI cells whose last step norm is above [`STALL_STEP`].
    pub stalled_lmpd: usize,
    pub stalled_hooi: usize,
}

/// Single-threaded reduce over finished cells.
pub fn summarize(example: Example, results: &[CellResult]) -> BenchSummary {
    let mut groups: Vec<(String, u64, Vec<&CellResult>)> = Vec::new();
    for r in results {
        let key = (r.cell.ranks_label(), r.cell.seed);
        match groups.iter_mut().find(|g| g.0 == key.0 && g.1 == key.1) {
            Some(g) => g.2.push(r),
            None => groups.push((key.0, key.1, vec![r])),
        }
    }
    let agreements: Vec<SeedAgreement> = groups
        .into_iter()
        .map(|(ranks, seed, rs)| {
            let fs: Vec<f64> = rs.iter().map(|r| r.final_objective).collect();
            let hi = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = fs.iter().copied().fold(f64::INFINITY, f64::min);
            let scale = fs.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
            let relative_spread = if scale > 0.0 { (hi - lo) / scale } else { 0.0 };
            let all_converged = rs.iter().all(|r| r.converged());
            SeedAgreement { ranks, seed, all_converged, relative_spread, agree: all_converged && relative_spread <= AGREEMENT_TOL }
        })
        .collect();
    let mut seeds: Vec<u64> = agreements.iter().map(|a| a.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let seeds_agreeing = seeds.iter().filter(|&&s| agreements.iter().filter(|a| a.seed == s).all(|a| a.agree)).count();
    let count = |alg: Algorithm, pred: &dyn Fn(&CellResult) -> bool| {
        results.iter().filter(|r| r.cell.algorithm == alg && pred(r)).count()
    };
    BenchSummary {
        example,
        cells: results.len(),
        seeds_agreeing,
        seeds_total: seeds.len(),
        lmpd_s_converged: count(Algorithm::LmpdS, &|r| r.converged()),
        lmpd_s_total: count(Algorithm::LmpdS, &|_| true),
        stalled_lmpd: count(Algorithm::Lmpd, &|r| r.final_step > STALL_STEP),
        stalled_hooi: count(Algorithm::Hooi, &|r| r.final_step > STALL_STEP),
        agreements,
    }
}

pub const SUMMARY_HEADER: [&str; 11] =
    ["example", "ranks", "seed", "algorithm", "status", "sweeps", "final_objective", "final_step_norm", "converged", "rate", "rate_slope"];

pub const LONG_HEADER: [&str; 7] = ["example", "ranks", "seed", "algorithm", "sweep", "objective", "step_norm"];

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("bench CSV: {e}"))
}

pub fn write_summary<W: Write>(results: &[CellResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in results {
        wr.write_record([
            r.cell.example.name().to_string(),
            r.cell.ranks_label(),
            r.cell.seed.to_string(),
            r.cell.algorithm.to_string(),
            format!("{:?}", r.status),
            r.sweeps.to_string(),
            fmt_f64(r.final_objective),
            fmt_f64(r.final_step),
            r.converged().to_string(),
            format!("{:?}", r.rate),
            fmt_f64(r.rate_slope),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// One row per sweep per cell; sweep 0 is the start with an empty step.
pub fn write_long<W: Write>(results: &[CellResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(LONG_HEADER).map_err(csv_err)?;
    for r in results {
        let head = [r.cell.example.name().to_string(), r.cell.ranks_label(), r.cell.seed.to_string(), r.cell.algorithm.to_string()];
        if let Some(first) = r.trace.records.first() {
            wr.write_record(head.iter().cloned().chain(["0".into(), fmt_f64(first.objective), String::new()])).map_err(csv_err)?;
        }
        for s in r.trace.sweeps() {
            wr.write_record(head.iter().cloned().chain([s.sweep.to_string(), fmt_f64(s.objective_end), fmt_f64(s.step_norm)]))
                .map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn trace_path(out_dir: &Path, cell: &CellSpec) -> PathBuf {
    out_dir.join("traces").join(format!("{}.csv", cell.stem()))
}

/// Writes `summary.csv`, `long.csv` and `summary.json` into `out_dir`.
/// Per-cell traces are written by the caller, one file per cell.
pub fn write_reports(out_dir: &Path, summary: &BenchSummary, results: &[CellResult]) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    write_summary(results, std::fs::File::create(out_dir.join("summary.csv"))?)?;
    write_long(results, std::fs::File::create(out_dir.join("long.csv"))?)?;
    let mut f = std::fs::File::create(out_dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    writeln!(f)?;
    Ok(())
}
