use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use stiefel_polar::bench::{run_cell, summarize, trace_path, write_reports, BenchSummary, Example};

use crate::error::{with_path, CliError, CliResult};
use crate::files::{parse_seeds, SeedList};

pub const THREADS_VAR: &str = "STIEFEL_POLAR_THREADS";

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub example: Example,
    /// Seeds, e.g. `0..20` or `1,4,9..=12`; empty runs nothing.
    #[arg(long, value_parser = parse_seeds, default_value = "0..20")]
    pub seeds: SeedList,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_timing: bool,
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(a: &BenchArgs) -> CliResult<BenchSummary> {
    let cells = a.example.cells(&a.seeds);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let traces = a.out.join("traces");
    with_path(std::fs::create_dir_all(&traces), &traces)?;

    let timing = !a.no_timing;
    let results = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let r = run_cell(cell, timing)?;
                let path = trace_path(&a.out, cell);
                with_path(r.trace.save(&path), &path)?;
                log::info!("{}: {:?} after {} sweeps", cell.stem(), r.status, r.sweeps);
                Ok(r)
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let summary = summarize(a.example, &results);
    with_path(write_reports(&a.out, &summary, &results), &a.out)?;
    println!(
        "{}: {} cells, {}/{} seeds agreeing, lmpd-s converged {}/{}, stalled lmpd {} hooi {}",
        a.example.name(),
        summary.cells,
        summary.seeds_agreeing,
        summary.seeds_total,
        summary.lmpd_s_converged,
        summary.lmpd_s_total,
        summary.stalled_lmpd,
        summary.stalled_hooi,
    );
    Ok(summary)
}
