//! Checks of solver traces and of objective derivatives: monotonicity,
//! sufficient increase, empirical convergence rate, finite-difference gradient
//! errors, Hessian-rank verdicts and a sampled convexity certificate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{Family, ObjectiveSpec, DEFAULT_RANK_TOL};
use rand::Rng;

use crate::stiefel::{polar_decompose, random_point, StiefelPoint, StiefelTuple};
use crate::tensor::{gaussian_matrix, inner_re, seeded_rng, ComplexMatrix, C64};
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotoneVerdict {
    pub passed: bool,
    /// Index into `trace.records` of the first record whose objective dropped.
    pub first_violation: Option<usize>,
    /// Largest drop `f_prev − f_next` seen, 0 if none.
    pub worst_drop: f64,
}

/// Checks `f_next ≥ f_prev − tol·(1 + |f_prev|)` over consecutive records.
pub fn assert_monotone(trace: &Trace, tol: f64) -> MonotoneVerdict {
    let mut first = None;
    let mut worst: f64 = 0.0;
    for (k, w) in trace.records.windows(2).enumerate() {
        let (prev, next) = (w[0].objective, w[1].objective);
        worst = worst.max(prev - next);
        if next < prev - tol * (1.0 + prev.abs()) && first.is_none() {
            first = Some(k + 1);
        }
    }
    MonotoneVerdict { passed: first.is_none(), first_violation: first, worst_drop: worst }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IncreaseViolation {
    pub sweep: usize,
    /// `f(ω^(k)) − f(ω^(k−1))`.
    pub lhs: f64,
    /// `δ/2·‖ω^(k) − ω^(k−1)‖²`.
    pub rhs: f64,
}

/// Sweeps where every block's recorded σ_min exceeded `δ` yet the increase fell
/// short of `δ/2·‖Δω‖² − 1e-10`. `δ` defaults to 0.99 × the smallest recorded σ_min.
pub fn sufficient_increase_report(trace: &Trace, delta: Option<f64>) -> Vec<IncreaseViolation> {
    let delta = delta.unwrap_or_else(|| {
        0.99 * trace.records.iter().filter(|r| r.sweep > 0).map(|r| r.sigma_min).fold(f64::INFINITY, f64::min)
    });
    let mut out = Vec::new();
    for s in trace.sweeps() {
        if !(s.min_sigma > delta) {
            continue;
        }
        let lhs = s.objective_end - s.objective_start;
        let rhs = 0.5 * delta * s.step_norm * s.step_norm;
        if lhs < rhs - 1e-10 {
            out.push(IncreaseViolation { sweep: s.sweep, lhs, rhs });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RateClass {
    Linear,
    Sublinear,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ErrorProxy {
    StepNorm,
    DistanceToReference,
    Supplied,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    /// Half-open range of sweep indices used in the fit.
    pub window: (usize, usize),
    /// Fitted `d log(error) / dk`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub classification: RateClass,
    pub proxy: ErrorProxy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFitOptions {
    pub tail_fraction: f64,
    pub max_window: usize,
    pub min_records: usize,
    pub r2_threshold: f64,
}

impl Default for RateFitOptions {
    fn default() -> Self {
        Self { tail_fraction: 0.5, max_window: 200, min_records: 10, r2_threshold: 0.98 }
    }
}

/// Least squares `y ≈ a + b·x`; returns (b, a, r²) with r² clamped to [0, 1]
/// and defined as 0 for a constant `y`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 0.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (b, a, r2)
}

/// Fit `log e_k` against `k` over the tail of a per-sweep error sequence
/// (`errors[k−1]` is the error after sweep k). Linear when the slope is
/// negative with r² above the threshold; Sublinear when instead `log e_k`
/// against `log k` fits with a negative slope; otherwise Inconclusive.
pub fn fit_rate_errors(errors: &[f64], proxy: ErrorProxy, opts: &RateFitOptions) -> RateFit {
    let n = errors.len();
    let len = ((n as f64 * opts.tail_fraction).ceil() as usize).min(opts.max_window).min(n);
    let start = n - len;
    let inconclusive = |slope, intercept, r2| RateFit {
        window: (start + 1, n + 1),
        slope,
        intercept,
        r_squared: r2,
        classification: RateClass::Inconclusive,
        proxy,
    };
    let pts: Vec<(f64, f64)> = (start..n)
        .filter(|&k| errors[k] > 0.0 && errors[k].is_finite())
        .map(|k| ((k + 1) as f64, errors[k].ln()))
        .collect();
    if len < opts.min_records || pts.len() < 3 {
        return inconclusive(0.0, 0.0, 0.0);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let (slope, intercept, r2) = linear_fit(&x, &y);
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let (ls, _, lr2) = linear_fit(&lx, &y);
    // Over a short window log-log data is also nearly straight in k; the better fit decides.
    let classification = if slope < 0.0 && r2 >= opts.r2_threshold && r2 >= lr2 {
        RateClass::Linear
    } else if ls < 0.0 && lr2 >= opts.r2_threshold {
        RateClass::Sublinear
    } else {
        RateClass::Inconclusive
    };
    if classification != RateClass::Inconclusive {
        return RateFit { window: (start + 1, n + 1), slope, intercept, r_squared: r2, classification, proxy };
    }
    inconclusive(slope, intercept, r2)
}

/// Rate fit using the per-sweep step norms as the error proxy.
pub fn fit_rate(trace: &Trace, opts: &RateFitOptions) -> RateFit {
    let steps: Vec<f64> = trace.sweeps().iter().map(|s| s.step_norm).collect();
    fit_rate_errors(&steps, ErrorProxy::StepNorm, opts)
}

/// Rate fit using distances of recorded iterates to a reference point.
pub fn fit_rate_to_reference(iterates: &[StiefelTuple], reference: &StiefelTuple, opts: &RateFitOptions) -> Result<RateFit> {
    let errors = iterates.iter().map(|p| p.distance(reference)).collect::<Result<Vec<_>>>()?;
    Ok(fit_rate_errors(&errors, ErrorProxy::DistanceToReference, opts))
}

pub fn default_fd_step(u: &ComplexMatrix) -> f64 {
    1e-5 * (1.0 + u.norm())
}

/// Max entrywise gap between a closed-form gradient and central differences
/// of `f` over every real coordinate, relative to the largest gradient entry.
fn fd_error(f: impl Fn(&ComplexMatrix) -> Result<f64>, x: &ComplexMatrix, grad: &ComplexMatrix, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::Invalid(format!("finite-difference step must be positive, got {step}")));
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..x.nrows() {
        for b in 0..x.ncols() {
            for (unit, exact) in [(C64::new(1.0, 0.0), grad[(a, b)].re), (C64::new(0.0, 1.0), grad[(a, b)].im)] {
                let mut xp = x.clone();
                xp[(a, b)] += unit * step;
                let mut xm = x.clone();
                xm[(a, b)] -= unit * step;
                let fd = (f(&xp)? - f(&xm)?) / (2.0 * step);
                worst = worst.max((fd - exact).abs());
                scale = scale.max(exact.abs());
            }
        }
    }
    if worst == 0.0 {
        return Ok(0.0);
    }
    Ok(worst / scale.max(1e-12))
}

/// Finite-difference check of the block-`i` Euclidean gradient.
pub fn fd_gradient_check(spec: &ObjectiveSpec, point: &StiefelTuple, block: usize, step: Option<f64>) -> Result<f64> {
    let blocks = point.matrices();
    let grad = spec.block_gradient_at(&blocks, block)?;
    let step = step.unwrap_or_else(|| default_fd_step(&blocks[block]));
    fd_error(
        |x| {
            let mut b = blocks.clone();
            b[block] = x.clone();
            spec.value_at(&b)
        },
        &blocks[block],
        &grad,
        step,
    )
}

/// Finite-difference check of the symmetric gradient `∇g`.
pub fn fd_symmetric_gradient_check(spec: &ObjectiveSpec, u: &StiefelPoint, step: Option<f64>) -> Result<f64> {
    let grad = spec.symmetric_gradient_at(u.matrix())?;
    let step = step.unwrap_or_else(|| default_fd_step(u.matrix()));
    fd_error(|x| spec.symmetric_value_at(x), u.matrix(), &grad, step)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    SemiNondegenerate,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub block: usize,
    pub rank: usize,
    pub expected_rank: usize,
    pub verdict: Verdict,
}

fn report(block: usize, rank: usize, expected_rank: usize) -> BlockReport {
    let verdict = if rank == expected_rank { Verdict::SemiNondegenerate } else { Verdict::Degenerate };
    BlockReport { block, rank, expected_rank, verdict }
}

/// Hessian rank of every block against the family's maximal rank.
pub fn seminondegeneracy_report(spec: &ObjectiveSpec, point: &StiefelTuple, rank_tol: Option<f64>) -> Result<Vec<BlockReport>> {
    let tol = rank_tol.unwrap_or(DEFAULT_RANK_TOL);
    (0..spec.order())
        .map(|i| Ok(report(i, spec.hessian_rank(point, i, tol)?, spec.expected_hessian_rank(i))))
        .collect()
}

pub fn symmetric_seminondegeneracy_report(spec: &ObjectiveSpec, u: &StiefelPoint, rank_tol: Option<f64>) -> Result<BlockReport> {
    let tol = rank_tol.unwrap_or(DEFAULT_RANK_TOL);
    Ok(report(0, spec.symmetric_hessian_rank(u, tol)?, spec.expected_hessian_rank(0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` observed; negative when every sample had slack.
    pub worst_gap: f64,
}

impl ConvexityCertificate {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Sampled gradient-inequality test of convexity. For a `1/c`-homogeneous
/// function `h` (so `h(U) = c·⟨U, ∇h(U)⟩`), convexity reads
/// `⟨U', ∇h(U)⟩ ≤ (1 − c)·⟨U, ∇h(U)⟩ + c·⟨U', ∇h(U')⟩`.
/// Symmetric specs test `g` with `c = β`; other specs test every block
/// restriction with `c = 1/2`, the other blocks held at a random point.
///
/// `U` is random; sample `s` pairs it by `s mod 3` with an independent random
/// point, a perturbation `polar(U + εZ)` with `ε` log-uniform in [1e-3, 1],
/// or the polar step `polar(∇h(U))`. Far pairs alone rarely see concavity
/// that is local to high-objective regions.
pub fn convexity_certificate(spec: &ObjectiveSpec, n_samples: usize, seed: u64, tol: f64) -> Result<ConvexityCertificate> {
    let dims = spec.dims().to_vec();
    let ranks = spec.ranks().to_vec();
    let d = dims.len() as u64;
    let mut rng = seeded_rng(seed, 3);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut samples = 0;
    let mut check = |lhs: f64, rhs: f64| {
        samples += 1;
        worst = worst.max(lhs - rhs);
        if lhs > rhs + tol {
            violations += 1;
        }
    };
    let mut partner = |s: u64, u: &ComplexMatrix, grad: &ComplexMatrix, i: usize, stream: u64| -> Result<ComplexMatrix> {
        Ok(match s % 3 {
            0 => random_point(dims[i], ranks[i], seed, stream, false)?.into_matrix(),
            1 => {
                let eps = 10f64.powf(rng.random_range(-3.0..=0.0));
                let z = gaussian_matrix(u.nrows(), u.ncols(), false, &mut rng);
                let z = &z * C64::new(eps / z.norm(), 0.0);
                polar_decompose(&(u + z))?.orthogonal.into_matrix()
            }
            _ if grad.norm() > 0.0 => polar_decompose(grad)?.orthogonal.into_matrix(),
            _ => random_point(dims[i], ranks[i], seed, stream, false)?.into_matrix(),
        })
    };
    for s in 0..n_samples as u64 {
        if spec.family() == Family::SymmetricDiagonalization {
            let c = spec.beta();
            let u = random_point(dims[0], ranks[0], seed, 2 * s, false)?.into_matrix();
            let gu = spec.symmetric_gradient_at(&u)?;
            let v = partner(s, &u, &gu, 0, 2 * s + 1)?;
            let gv = spec.symmetric_gradient_at(&v)?;
            check(inner_re(&v, &gu)?, (1.0 - c) * inner_re(&u, &gu)? + c * inner_re(&v, &gv)?);
        } else {
            let blocks = (0..dims.len())
                .map(|i| Ok(random_point(dims[i], ranks[i], seed, s * (d + 1) + i as u64, false)?.into_matrix()))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..dims.len() {
                let gu = spec.block_gradient_at(&blocks, i)?;
                let other = partner(s, &blocks[i], &gu, i, s * (d + 1) + d)?;
                let mut b2 = blocks.clone();
                b2[i] = other.clone();
                let gv = spec.block_gradient_at(&b2, i)?;
                check(inner_re(&other, &gu)?, 0.5 * inner_re(&blocks[i], &gu)? + 0.5 * inner_re(&other, &gv)?);
            }
        }
    }
    Ok(ConvexityCertificate { samples, violations, worst_gap: worst })
}
