//! Per-block iteration records and their CSV form.
//!
//! Columns: `sweep,block,objective,step_norm,grad_norm,sigma_min,wall_ns`.
//! Row 0 is the starting point (sweep 0, step 0, `sigma_min` NaN); every later
//! row is written after one block update. Floats carry 17 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["sweep", "block", "objective", "step_norm", "grad_norm", "sigma_min", "wall_ns"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub sweep: usize,
    pub block: usize,
    /// Objective after the update.
    pub objective: f64,
    /// `‖U_new − U_old‖` of the updated block.
    pub step_norm: f64,
    /// Riemannian gradient norm of the updated block, taken before the update.
    pub grad_norm: f64,
    /// Smallest singular value of the (shifted) gradient the update was built from.
    pub sigma_min: f64,
    pub wall_ns: u64,
}

/// Records aggregated over one sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub sweep: usize,
    pub objective_start: f64,
    pub objective_end: f64,
    /// `‖ω^(k) − ω^(k−1)‖`, the root of the summed squared block steps.
    pub step_norm: f64,
    pub min_sigma: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn last_sweep(&self) -> usize {
        self.records.last().map_or(0, |r| r.sweep)
    }

    pub fn sweeps(&self) -> Vec<SweepSummary> {
        let mut out: Vec<SweepSummary> = Vec::new();
        let mut prev = self.records.first().map_or(0.0, |r| r.objective);
        for r in self.records.iter().filter(|r| r.sweep > 0) {
            match out.last_mut() {
                Some(s) if s.sweep == r.sweep => {
                    s.objective_end = r.objective;
                    s.step_norm = s.step_norm.hypot(r.step_norm);
                    s.min_sigma = s.min_sigma.min(r.sigma_min);
                }
                _ => out.push(SweepSummary {
                    sweep: r.sweep,
                    objective_start: prev,
                    objective_end: r.objective,
                    step_norm: r.step_norm,
                    min_sigma: r.sigma_min,
                }),
            }
            prev = r.objective;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.records {
            wr.write_record([
                r.sweep.to_string(),
                r.block.to_string(),
                fmt_f64(r.objective),
                fmt_f64(r.step_norm),
                fmt_f64(r.grad_norm),
                fmt_f64(r.sigma_min),
                r.wall_ns.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(csv_err)?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Format(format!("unexpected trace header {header:?}")));
        }
        let records = rd.deserialize().collect::<std::result::Result<Vec<TraceRecord>, _>>().map_err(csv_err)?;
        Ok(Self { records })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("trace CSV: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(sweep: usize, block: usize, objective: f64, step_norm: f64, sigma_min: f64) -> TraceRecord {
        TraceRecord { sweep, block, objective, step_norm, grad_norm: 0.5, sigma_min, wall_ns: 7 }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = Trace {
            records: vec![
                rec(0, 0, 0.1, 0.0, f64::NAN),
                rec(1, 0, 1.0 / 3.0, 0.2, 1e-300),
                rec(1, 1, std::f64::consts::PI, 0.3, 2.5),
            ],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sweep,block,objective,step_norm,grad_norm,sigma_min,wall_ns\n"));
        let back = Trace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        assert!(back.records[0].sigma_min.is_nan());
        assert_eq!(back.records[1..], t.records[1..]);
    }

    #[test]
    fn sweep_aggregation() {
        let t = Trace {
            records: vec![rec(0, 0, 1.0, 0.0, f64::NAN), rec(1, 0, 2.0, 3.0, 5.0), rec(1, 1, 2.5, 4.0, 4.0), rec(2, 0, 2.6, 0.0, 6.0)],
        };
        let s = t.sweeps();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].objective_start, 1.0);
        assert_eq!(s[0].objective_end, 2.5);
        assert_eq!(s[0].step_norm, 5.0);
        assert_eq!(s[0].min_sigma, 4.0);
        assert_eq!(s[1].objective_start, 2.5);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(Trace::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
