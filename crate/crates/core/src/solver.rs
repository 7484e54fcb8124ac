//! Block polar-decomposition orthogonal iteration and its specializations.
//!
//! Tuple solvers sweep the blocks in the fixed cyclic order 0..d, each update
//! seeing the blocks already refreshed in the current sweep. The polar rule sets
//! `U_new = polar(∇h_i + γ·U_old).orthogonal`; `γ = 0` is the unshifted method.
//!
//! Stopping: sweep step `‖ω^(k) − ω^(k−1)‖ < tol_step`, else full Riemannian
//! gradient norm `< tol_grad`, else `max_sweeps`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{BlockObjective, Family, ObjectiveSpec, SymmetricObjective};
use crate::stiefel::{
    orthonormality_defect, polar_decompose, random_point, thin_svd, riemannian_gradient, singular_values, StiefelPoint,
    StiefelTuple, DRIFT_TOL,
};
use crate::tensor::{ComplexDenseTensor, ComplexMatrix, C64};
use crate::trace::{Trace, TraceRecord};

pub const DEFAULT_MAX_SWEEPS: usize = 1000;
pub const DEFAULT_TOL_STEP: f64 = 1e-10;
pub const DEFAULT_TOL_GRAD: f64 = 1e-8;
/// Default shift of LMPD-S.
pub const LMPD_S_DEFAULT_SHIFT: f64 = 0.01;
/// APDOI-S / PDOI-S default shift is this factor times the sampled bound.
pub const SHIFT_SAFETY: f64 = 1.1;
pub const SHIFT_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Apdoi,
    ApdoiS,
    Pdoi,
    PdoiS,
    Lroat,
    Hopm,
    SLroat,
    SHopm,
    Lmpd,
    LmpdS,
    Hooi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Algorithm::Apdoi,
        Algorithm::ApdoiS,
        Algorithm::Pdoi,
        Algorithm::PdoiS,
        Algorithm::Lroat,
        Algorithm::Hopm,
        Algorithm::SLroat,
        Algorithm::SHopm,
        Algorithm::Lmpd,
        Algorithm::LmpdS,
        Algorithm::Hooi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Apdoi => "apdoi",
            Algorithm::ApdoiS => "apdoi-s",
            Algorithm::Pdoi => "pdoi",
            Algorithm::PdoiS => "pdoi-s",
            Algorithm::Lroat => "lroat",
            Algorithm::Hopm => "hopm",
            Algorithm::SLroat => "s-lroat",
            Algorithm::SHopm => "s-hopm",
            Algorithm::Lmpd => "lmpd",
            Algorithm::LmpdS => "lmpd-s",
            Algorithm::Hooi => "hooi",
        }
    }

    /// Runs on a single symmetric block rather than a tuple.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Algorithm::Pdoi | Algorithm::PdoiS | Algorithm::SLroat | Algorithm::SHopm)
    }

    pub fn is_shifted(self) -> bool {
        matches!(self, Algorithm::ApdoiS | Algorithm::PdoiS | Algorithm::LmpdS)
    }

    fn accepts(self, family: Family) -> bool {
        match self {
            Algorithm::Apdoi | Algorithm::ApdoiS => true,
            Algorithm::Lroat | Algorithm::Hopm => family == Family::Diagonalization,
            Algorithm::Lmpd | Algorithm::LmpdS | Algorithm::Hooi => family == Family::Compression,
            Algorithm::Pdoi | Algorithm::PdoiS | Algorithm::SLroat | Algorithm::SHopm => {
                family == Family::SymmetricDiagonalization
            }
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Invalid(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub shift: f64,
    pub max_sweeps: usize,
    pub tol_step: f64,
    pub tol_grad: f64,
    pub seed: u64,
    /// Keep every sweep's point in [`SolveResult::iterates`].
    pub record_iterates: bool,
    /// Record wall-clock time per block; off gives byte-identical traces.
    pub timing: bool,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            shift: 0.0,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            tol_step: DEFAULT_TOL_STEP,
            tol_grad: DEFAULT_TOL_GRAD,
            seed: 0,
            record_iterates: false,
            timing: true,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::Invalid(format!("shift must be finite and nonnegative, got {}", self.shift)));
        }
        if self.algorithm.is_shifted() && self.shift == 0.0 {
            return Err(Error::Invalid(format!("{} needs a positive shift", self.algorithm)));
        }
        if !self.algorithm.is_shifted() && self.shift != 0.0 {
            return Err(Error::Invalid(format!("{} is unshifted; use its -s variant for γ > 0", self.algorithm)));
        }
        if !(self.tol_step > 0.0 && self.tol_grad > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Invalid("max_sweeps must be positive".into()));
        }
        Ok(())
    }

    fn check_for(&self, spec_family: Option<Family>, symmetric: bool) -> Result<()> {
        self.validate()?;
        if self.algorithm.is_symmetric() != symmetric {
            return Err(Error::Invalid(format!(
                "{} expects a {} starting point",
                self.algorithm,
                if self.algorithm.is_symmetric() { "single" } else { "tuple" }
            )));
        }
        if let Some(f) = spec_family {
            if !self.algorithm.accepts(f) {
                return Err(Error::Invalid(format!("{} does not apply to {f:?} objectives", self.algorithm)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    ConvergedStep,
    ConvergedGrad,
    MaxSweeps,
}

#[derive(Clone, Debug)]
pub struct SolveResult<P> {
    pub point: P,
    pub status: Status,
    pub sweeps: usize,
    pub objective: f64,
    /// Full Riemannian gradient norm at the final point.
    pub grad_norm: f64,
    pub shift: f64,
    pub trace: Trace,
    /// Updates whose drift exceeded the guard and were re-orthonormalized.
    pub reorthonormalizations: usize,
    /// Point after each sweep when `record_iterates` is set.
    pub iterates: Vec<P>,
}

/// Result file: status, sweep count, final objective and one tensor-JSON
/// matrix per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub algorithm: Algorithm,
    pub status: Status,
    pub sweeps: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub shift: f64,
    pub factors: Vec<ComplexDenseTensor>,
}

impl ResultJson {
    pub fn from_tuple(algorithm: Algorithm, r: &SolveResult<StiefelTuple>) -> Self {
        Self::build(algorithm, r, r.point.blocks().iter().map(|b| ComplexDenseTensor::from_matrix(b.matrix())).collect())
    }

    pub fn from_point(algorithm: Algorithm, r: &SolveResult<StiefelPoint>) -> Self {
        Self::build(algorithm, r, vec![ComplexDenseTensor::from_matrix(r.point.matrix())])
    }

    fn build<P>(algorithm: Algorithm, r: &SolveResult<P>, factors: Vec<ComplexDenseTensor>) -> Self {
        Self { algorithm, status: r.status, sweeps: r.sweeps, objective: r.objective, grad_norm: r.grad_norm, shift: r.shift, factors }
    }

    /// Factors as a Stiefel tuple; a symmetric result gives a single block.
    pub fn point(&self) -> Result<StiefelTuple> {
        StiefelTuple::from_matrices(self.factors.iter().map(|f| f.to_matrix()).collect::<Result<Vec<_>>>()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMethod {
    UserProvided,
    SampledMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftEstimate {
    pub bound: f64,
    pub method: ShiftMethod,
}

impl ShiftEstimate {
    pub fn user(bound: f64) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::Invalid(format!("gradient bound must be nonnegative, got {bound}")));
        }
        Ok(Self { bound, method: ShiftMethod::UserProvided })
    }
}

/// `2 × max` of the full Euclidean gradient norm over `n_samples` random points
/// (tuples, or single points for symmetric specs). Sample `s` uses seed `seed`
/// and stream block `s`. A heuristic, not a certified bound.
pub fn estimate_shift(spec: &ObjectiveSpec, n_samples: usize, seed: u64) -> Result<ShiftEstimate> {
    if n_samples == 0 {
        return Err(Error::Invalid("n_samples must be at least 1".into()));
    }
    let dims = spec.dims();
    let ranks = spec.ranks();
    let mut best: f64 = 0.0;
    for s in 0..n_samples as u64 {
        let norm = if spec.family() == Family::SymmetricDiagonalization {
            let u = random_point(dims[0], ranks[0], seed, s, false)?;
            spec.symmetric_gradient_at(u.matrix())?.norm()
        } else {
            let blocks = (0..dims.len())
                .map(|i| Ok(random_point(dims[i], ranks[i], seed, s * dims.len() as u64 + i as u64, false)?.into_matrix()))
                .collect::<Result<Vec<_>>>()?;
            (0..blocks.len())
                .map(|i| Ok(spec.block_gradient_at(&blocks, i)?.norm_squared()))
                .sum::<Result<f64>>()?
                .sqrt()
        };
        best = best.max(norm);
    }
    Ok(ShiftEstimate { bound: 2.0 * best, method: ShiftMethod::SampledMax })
}

/// Shift used when the user gives none: LMPD-S 0.01, APDOI-S and PDOI-S
/// `1.1·Δ̂` from [`estimate_shift`], 0 for unshifted algorithms.
pub fn default_shift(spec: &ObjectiveSpec, algorithm: Algorithm, seed: u64) -> Result<f64> {
    Ok(match algorithm {
        Algorithm::LmpdS => LMPD_S_DEFAULT_SHIFT,
        Algorithm::ApdoiS | Algorithm::PdoiS => {
            let est = estimate_shift(spec, SHIFT_SAMPLES, seed)?;
            let g = SHIFT_SAFETY * est.bound;
            // Zero tensors give a zero bound; any positive shift is then valid.
            if g > 0.0 { g } else { 1.0 }
        }
        _ => 0.0,
    })
}

enum Rule<'a> {
    Polar,
    Normalized(&'a ObjectiveSpec),
    Dominant(&'a ObjectiveSpec),
}

fn check_value(f: f64, sweep: usize, block: usize) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::Numeric(format!("objective became {f} at sweep {sweep}, block {block}")));
    }
    Ok(f)
}

fn normalize(v: Vec<C64>, conj: bool) -> Result<ComplexMatrix> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Numeric(format!("cannot normalize a contraction of norm {norm}")));
    }
    let v: Vec<C64> = v.into_iter().map(|z| if conj { z.conj() } else { z } / norm).collect();
    Ok(ComplexMatrix::from_column_slice(v.len(), 1, &v))
}

/// First `r` dominant left singular vectors of `m`, each with its largest
/// entry rotated to be real positive so that the representative is canonical.
fn dominant_subspace(m: &ComplexMatrix, r: usize) -> Result<ComplexMatrix> {
    let n = m.nrows();
    let mut padded = ComplexMatrix::zeros(n, m.ncols().max(r));
    padded.columns_mut(0, m.ncols()).copy_from(m);
    let u = thin_svd(&padded)?.w;
    let mut out = ComplexMatrix::zeros(n, r);
    for k in 0..r {
        let col = u.column(k);
        let pivot = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("n >= 1");
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        out.set_column(k, &(col * phase));
    }
    Ok(out)
}

struct Update {
    u: ComplexMatrix,
    sigma_min: f64,
}

fn polar_update(grad: &ComplexMatrix, u_old: &ComplexMatrix, shift: f64) -> Result<Update> {
    let m = if shift > 0.0 { grad + u_old * C64::new(shift, 0.0) } else { grad.clone() };
    let pf = polar_decompose(&m)?;
    Ok(Update { sigma_min: pf.sigma_min(), u: pf.orthogonal.into_matrix() })
}

fn sigma_min_of(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

/// Re-orthonormalize when drift exceeds the guard; returns whether it did.
fn guard(u: &mut ComplexMatrix) -> Result<bool> {
    if orthonormality_defect(u) > DRIFT_TOL {
        *u = polar_decompose(u)?.orthogonal.into_matrix();
        return Ok(true);
    }
    Ok(false)
}

fn elapsed(start: Option<Instant>) -> u64 {
    start.map_or(0, |s| s.elapsed().as_nanos() as u64)
}

fn warn_if_zero(f: f64) {
    if f == 0.0 {
        log::warn!("objective is zero at the starting point; the first update relies on a nonzero gradient");
    }
}

fn block_rgrad_norm<O: BlockObjective + ?Sized>(obj: &O, blocks: &[ComplexMatrix], i: usize) -> Result<(ComplexMatrix, f64)> {
    let g = obj.block_gradient(blocks, i)?;
    let rg = riemannian_gradient(&StiefelPoint::new_unchecked(blocks[i].clone()), &g)?.norm();
    Ok((g, rg))
}

fn full_rgrad_norm<O: BlockObjective + ?Sized>(obj: &O, blocks: &[ComplexMatrix]) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..blocks.len() {
        s += block_rgrad_norm(obj, blocks, i)?.1.powi(2);
    }
    Ok(s.sqrt())
}

fn check_tuple_shape<O: BlockObjective + ?Sized>(obj: &O, init: &StiefelTuple) -> Result<Vec<ComplexMatrix>> {
    if init.len() != obj.num_blocks() {
        return Err(Error::Shape(format!("{} starting blocks for {} objective blocks", init.len(), obj.num_blocks())));
    }
    let blocks = init.matrices();
    obj.value(&blocks)?;
    Ok(blocks)
}

fn run_tuple_engine<O: BlockObjective + ?Sized>(
    obj: &O,
    init: &StiefelTuple,
    config: &SolverConfig,
    rule: Rule<'_>,
) -> Result<SolveResult<StiefelTuple>> {
    let mut blocks = check_tuple_shape(obj, init)?;
    let d = blocks.len();
    let shift = config.shift;
    let f0 = check_value(obj.value(&blocks)?, 0, 0)?;
    warn_if_zero(f0);
    let mut trace = Trace::new();
    let mut grad_norm = full_rgrad_norm(obj, &blocks)?;
    trace.push(TraceRecord { sweep: 0, block: 0, objective: f0, step_norm: 0.0, grad_norm, sigma_min: f64::NAN, wall_ns: 0 });
    let mut iterates = Vec::new();
    let mut reorth = 0;
    let mut status = Status::MaxSweeps;
    let mut sweeps = 0;
    let mut objective = f0;
    for k in 1..=config.max_sweeps {
        sweeps = k;
        let mut step_sq = 0.0;
        for i in 0..d {
            let start = config.timing.then(Instant::now);
            let (g, rg) = block_rgrad_norm(obj, &blocks, i)?;
            let mut up = match rule {
                Rule::Polar => polar_update(&g, &blocks[i], shift)?,
                Rule::Normalized(spec) => {
                    let v = spec.diag_fiber(&blocks, 0, i, 0);
                    let conj = spec.dagger() == crate::objective::DaggerMode::Transpose;
                    Update { u: normalize(v, conj)?, sigma_min: sigma_min_of(&g)? }
                }
                Rule::Dominant(spec) => {
                    let m = spec.stacked_unfolding(&blocks, i)?;
                    Update { u: dominant_subspace(&m, blocks[i].ncols())?, sigma_min: sigma_min_of(&g)? }
                }
            };
            if guard(&mut up.u)? {
                reorth += 1;
            }
            let step = (&up.u - &blocks[i]).norm();
            step_sq += step * step;
            blocks[i] = up.u;
            objective = check_value(obj.value(&blocks)?, k, i)?;
            trace.push(TraceRecord {
                sweep: k,
                block: i,
                objective,
                step_norm: step,
                grad_norm: rg,
                sigma_min: up.sigma_min,
                wall_ns: elapsed(start),
            });
        }
        grad_norm = full_rgrad_norm(obj, &blocks)?;
        if config.record_iterates {
            iterates.push(tuple_from(&blocks));
        }
        if step_sq.sqrt() < config.tol_step {
            status = Status::ConvergedStep;
            break;
        }
        if grad_norm < config.tol_grad {
            status = Status::ConvergedGrad;
            break;
        }
    }
    Ok(SolveResult { point: tuple_from(&blocks), status, sweeps, objective, grad_norm, shift, trace, reorthonormalizations: reorth, iterates })
}

fn tuple_from(blocks: &[ComplexMatrix]) -> StiefelTuple {
    StiefelTuple::new(blocks.iter().cloned().map(StiefelPoint::new_unchecked).collect()).expect("nonempty")
}

fn run_single_engine<O: SymmetricObjective + ?Sized>(
    obj: &O,
    init: &StiefelPoint,
    config: &SolverConfig,
    normalized: Option<&ObjectiveSpec>,
) -> Result<SolveResult<StiefelPoint>> {
    let mut u = init.matrix().clone();
    let shift = config.shift;
    let rgrad = |u: &ComplexMatrix| -> Result<(ComplexMatrix, f64)> {
        let g = obj.gradient(u)?;
        let rg = riemannian_gradient(&StiefelPoint::new_unchecked(u.clone()), &g)?.norm();
        Ok((g, rg))
    };
    let f0 = check_value(obj.value(&u)?, 0, 0)?;
    warn_if_zero(f0);
    let mut trace = Trace::new();
    let (_, mut grad_norm) = rgrad(&u)?;
    trace.push(TraceRecord { sweep: 0, block: 0, objective: f0, step_norm: 0.0, grad_norm, sigma_min: f64::NAN, wall_ns: 0 });
    let mut iterates = Vec::new();
    let mut reorth = 0;
    let mut status = Status::MaxSweeps;
    let mut sweeps = 0;
    let mut objective = f0;
    for k in 1..=config.max_sweeps {
        sweeps = k;
        let start = config.timing.then(Instant::now);
        let (g, rg) = rgrad(&u)?;
        let mut up = match normalized {
            None => polar_update(&g, &u, shift)?,
            Some(spec) => {
                let v = spec.symmetric_fiber(&u, 0, 0);
                let conj = spec.dagger() == crate::objective::DaggerMode::Transpose;
                Update { u: normalize(v, conj)?, sigma_min: sigma_min_of(&g)? }
            }
        };
        if guard(&mut up.u)? {
            reorth += 1;
        }
        let step = (&up.u - &u).norm();
        u = up.u;
        objective = check_value(obj.value(&u)?, k, 0)?;
        trace.push(TraceRecord { sweep: k, block: 0, objective, step_norm: step, grad_norm: rg, sigma_min: up.sigma_min, wall_ns: elapsed(start) });
        grad_norm = rgrad(&u)?.1;
        if config.record_iterates {
            iterates.push(StiefelPoint::new_unchecked(u.clone()));
        }
        if step < config.tol_step {
            status = Status::ConvergedStep;
            break;
        }
        if grad_norm < config.tol_grad {
            status = Status::ConvergedGrad;
            break;
        }
    }
    Ok(SolveResult { point: StiefelPoint::new_unchecked(u), status, sweeps, objective, grad_norm, shift, trace, reorthonormalizations: reorth, iterates })
}

/// Block polar iteration (shifted when `config.shift > 0`) on any block
/// objective. Accepts the tuple algorithms that use the polar rule.
pub fn apdoi_run<O: BlockObjective + ?Sized>(obj: &O, init: &StiefelTuple, config: &SolverConfig) -> Result<SolveResult<StiefelTuple>> {
    config.check_for(None, false)?;
    if matches!(config.algorithm, Algorithm::Hopm | Algorithm::Hooi) {
        return Err(Error::Invalid(format!("{} does not use the polar update", config.algorithm)));
    }
    run_tuple_engine(obj, init, config, Rule::Polar)
}

/// Single-block polar iteration for symmetric objectives.
pub fn pdoi_run<O: SymmetricObjective + ?Sized>(obj: &O, init: &StiefelPoint, config: &SolverConfig) -> Result<SolveResult<StiefelPoint>> {
    config.check_for(None, true)?;
    if config.algorithm == Algorithm::SHopm {
        return Err(Error::Invalid("s-hopm does not use the polar update".into()));
    }
    run_single_engine(obj, init, config, None)
}

/// Alternating rank-one power method: `u_i ← v/‖v‖` (conjugated in T mode).
pub fn hopm_run(spec: &ObjectiveSpec, init: &StiefelTuple, config: &SolverConfig) -> Result<SolveResult<StiefelTuple>> {
    config.check_for(Some(spec.family()), false)?;
    if config.algorithm != Algorithm::Hopm || spec.ranks()[0] != 1 || spec.tensors().len() != 1 {
        return Err(Error::Invalid("hopm needs a single-tensor rank-one diagonalization spec".into()));
    }
    run_tuple_engine(spec, init, config, Rule::Normalized(spec))
}

/// Symmetric power method on a single block.
pub fn s_hopm_run(spec: &ObjectiveSpec, init: &StiefelPoint, config: &SolverConfig) -> Result<SolveResult<StiefelPoint>> {
    config.check_for(Some(spec.family()), true)?;
    if config.algorithm != Algorithm::SHopm || spec.ranks()[0] != 1 || spec.tensors().len() != 1 {
        return Err(Error::Invalid("s-hopm needs a single-tensor rank-one symmetric spec".into()));
    }
    run_single_engine(spec, init, config, Some(spec))
}

/// HOOI baseline: block `i` becomes the `r_i` dominant left singular vectors
/// of the axis-`i` unfolding of the partial contraction.
pub fn hooi_run(spec: &ObjectiveSpec, init: &StiefelTuple, config: &SolverConfig) -> Result<SolveResult<StiefelTuple>> {
    config.check_for(Some(spec.family()), false)?;
    if config.algorithm != Algorithm::Hooi {
        return Err(Error::Invalid(format!("hooi_run called with {}", config.algorithm)));
    }
    run_tuple_engine(spec, init, config, Rule::Dominant(spec))
}

/// Dispatch a tuple algorithm.
pub fn solve_tuple(spec: &ObjectiveSpec, init: &StiefelTuple, config: &SolverConfig) -> Result<SolveResult<StiefelTuple>> {
    config.check_for(Some(spec.family()), false)?;
    match config.algorithm {
        Algorithm::Hopm => hopm_run(spec, init, config),
        Algorithm::Hooi => hooi_run(spec, init, config),
        _ => apdoi_run(spec, init, config),
    }
}

/// Dispatch a symmetric algorithm.
pub fn solve_symmetric(spec: &ObjectiveSpec, init: &StiefelPoint, config: &SolverConfig) -> Result<SolveResult<StiefelPoint>> {
    config.check_for(Some(spec.family()), true)?;
    match config.algorithm {
        Algorithm::SHopm => s_hopm_run(spec, init, config),
        _ => pdoi_run(spec, init, config),
    }
}

fn single(tensor: ComplexDenseTensor) -> (Vec<ComplexDenseTensor>, Vec<f64>) {
    (vec![tensor], vec![1.0])
}

use crate::objective::DaggerMode::ConjugateTranspose as H;

pub fn lroat(a: ComplexDenseTensor, r: usize) -> Result<(ObjectiveSpec, SolverConfig)> {
    let (t, w) = single(a);
    Ok((ObjectiveSpec::diagonalization(t, w, r, H)?, SolverConfig::new(Algorithm::Lroat)))
}

pub fn hopm(a: ComplexDenseTensor) -> Result<(ObjectiveSpec, SolverConfig)> {
    let (t, w) = single(a);
    Ok((ObjectiveSpec::diagonalization(t, w, 1, H)?, SolverConfig::new(Algorithm::Hopm)))
}

pub fn s_lroat(s: ComplexDenseTensor, r: usize) -> Result<(ObjectiveSpec, SolverConfig)> {
    let (t, w) = single(s);
    Ok((ObjectiveSpec::symmetric_diagonalization(t, w, r, H)?, SolverConfig::new(Algorithm::SLroat)))
}

pub fn s_hopm(s: ComplexDenseTensor) -> Result<(ObjectiveSpec, SolverConfig)> {
    let (t, w) = single(s);
    Ok((ObjectiveSpec::symmetric_diagonalization(t, w, 1, H)?, SolverConfig::new(Algorithm::SHopm)))
}

pub fn lmpd(a: ComplexDenseTensor, ranks: Vec<usize>) -> Result<(ObjectiveSpec, SolverConfig)> {
    let (t, w) = single(a);
    Ok((ObjectiveSpec::compression(t, w, ranks, H)?, SolverConfig::new(Algorithm::Lmpd)))
}

pub fn lmpd_s(a: ComplexDenseTensor, ranks: Vec<usize>, shift: f64) -> Result<(ObjectiveSpec, SolverConfig)> {
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::Invalid(format!("lmpd-s needs γ > 0, got {shift}")));
    }
    let (t, w) = single(a);
    Ok((ObjectiveSpec::compression(t, w, ranks, H)?, SolverConfig::new(Algorithm::LmpdS).with_shift(shift)))
}

pub fn hooi(a: ComplexDenseTensor, ranks: Vec<usize>) -> Result<(ObjectiveSpec, SolverConfig)> {
    let (t, w) = single(a);
    Ok((ObjectiveSpec::compression(t, w, ranks, H)?, SolverConfig::new(Algorithm::Hooi)))
}
