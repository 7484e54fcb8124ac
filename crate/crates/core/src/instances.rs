//! Structured test instances with known optima or known stationary points.
//!
//! The rotated-diagonal constructions build `A_ℓ = D_ℓ ×_1 Q_1 ⋯ ×_d Q_d`
//! (with `conj(Q_i)` in T mode), for which `(Q_1 I_{n×r}, …, Q_d I_{n×r})` is
//! stationary and, when the diagonal entries satisfy the usual nonvanishing
//! conditions, has maximal Hessian rank.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{DaggerMode, ObjectiveSpec};
use crate::stiefel::{random_point, truncated_identity, StiefelPoint, StiefelTuple};
use crate::tensor::{random_real_tensor, random_tensor, seeded_rng, ComplexDenseTensor, ComplexMatrix, C64};

/// Known parameters of a generated instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub kind: String,
    pub seed: u64,
    /// Objective value at the known point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_norm_sqr: Option<f64>,
    /// Diagonal entries `D_ℓ` as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagonals: Vec<Vec<[f64; 2]>>,
    /// Rotations `Q_i`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rotations: Vec<ComplexDenseTensor>,
    /// Known point, one n_i×r_i matrix per block.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<ComplexDenseTensor>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: ObjectiveSpec,
    /// Known optimum or stationary point; a single block for symmetric specs.
    pub point: StiefelTuple,
    pub truth: GroundTruth,
}

fn factors_of(point: &StiefelTuple) -> Vec<ComplexDenseTensor> {
    point.blocks().iter().map(|b| ComplexDenseTensor::from_matrix(b.matrix())).collect()
}

fn twist(q: &ComplexMatrix, dagger: DaggerMode) -> ComplexMatrix {
    match dagger {
        DaggerMode::ConjugateTranspose => q.clone(),
        DaggerMode::Transpose => q.map(|z| z.conj()),
    }
}

/// Unit vector per axis, from stream `i` of `seed`.
fn unit_vectors(dims: &[usize], seed: u64, real: bool) -> Result<Vec<StiefelPoint>> {
    dims.iter().enumerate().map(|(i, &n)| random_point(n, 1, seed, i as u64, real)).collect()
}

/// `λ·u_1 ⊗ ⋯ ⊗ u_d` with random unit `u_i`; the rank-one diagonalization
/// spec (H mode) has maximum `λ²` at `(u_1, …, u_d)`.
pub fn rank_one(dims: &[usize], lambda: f64, seed: u64, real: bool) -> Result<Instance> {
    if !(lambda > 0.0) {
        return Err(Error::Invalid("λ must be positive".into()));
    }
    let us = unit_vectors(dims, seed, real)?;
    let vecs: Vec<Vec<C64>> = us.iter().map(|u| u.matrix().iter().copied().collect()).collect();
    let a = ComplexDenseTensor::outer(C64::new(lambda, 0.0), &vecs)?;
    let spec = ObjectiveSpec::diagonalization(vec![a], vec![1.0], 1, DaggerMode::ConjugateTranspose)?;
    let point = StiefelTuple::new(us)?;
    let truth = GroundTruth {
        kind: "rank1".into(),
        seed,
        target_objective: Some(lambda * lambda),
        lambda: Some(lambda),
        factors: factors_of(&point),
        ..Default::default()
    };
    Ok(Instance { spec, point, truth })
}

/// `λ·u ⊗ ⋯ ⊗ u` (order `d`); the rank-one symmetric spec has maximum `λ²` at `u`.
pub fn symmetric_rank_one(n: usize, d: usize, lambda: f64, seed: u64, real: bool) -> Result<Instance> {
    if !(lambda > 0.0) {
        return Err(Error::Invalid("λ must be positive".into()));
    }
    let u = random_point(n, 1, seed, 0, real)?;
    let v: Vec<C64> = u.matrix().iter().copied().collect();
    let s = ComplexDenseTensor::outer(C64::new(lambda, 0.0), &vec![v; d])?;
    let spec = ObjectiveSpec::symmetric_diagonalization(vec![s], vec![1.0], 1, DaggerMode::ConjugateTranspose)?;
    let point = StiefelTuple::new(vec![u])?;
    let truth = GroundTruth {
        kind: "symrank1".into(),
        seed,
        target_objective: Some(lambda * lambda),
        lambda: Some(lambda),
        factors: factors_of(&point),
        ..Default::default()
    };
    Ok(Instance { spec, point, truth })
}

/// `C ×_1 U_1 ⋯ ×_d U_d` with a random core `C` of shape `ranks` and random
/// orthonormal `U_i`; compression with these ranks has maximum `‖C‖²`.
pub fn tucker(dims: &[usize], ranks: &[usize], seed: u64, real: bool) -> Result<Instance> {
    let core = if real { random_real_tensor(ranks, seed)? } else { random_tensor(ranks, seed)? };
    let point = if real {
        StiefelTuple::random_real(dims, ranks, seed)?
    } else {
        StiefelTuple::random(dims, ranks, seed)?
    };
    let mut a = core.clone();
    for (i, b) in point.blocks().iter().enumerate() {
        a = a.mode_product(b.matrix(), i)?;
    }
    let spec = ObjectiveSpec::compression(vec![a], vec![1.0], ranks.to_vec(), DaggerMode::ConjugateTranspose)?;
    let truth = GroundTruth {
        kind: "tucker".into(),
        seed,
        target_objective: Some(core.norm_sqr()),
        core_norm_sqr: Some(core.norm_sqr()),
        factors: factors_of(&point),
        ..Default::default()
    };
    Ok(Instance { spec, point, truth })
}

/// Diagonal entries with moduli drawn from [0.5, 2.0], sorted descending,
/// and uniform phases (zero phase when `real`, with random sign).
fn diagonal_entries<R: Rng>(n: usize, rng: &mut R, real: bool) -> Vec<C64> {
    let mut mods: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    mods.into_iter()
        .map(|m| {
            if real {
                C64::new(if rng.random::<bool>() { m } else { -m }, 0.0)
            } else {
                C64::from_polar(m, rng.random_range(0.0..std::f64::consts::TAU))
            }
        })
        .collect()
}

struct Rotated {
    tensors: Vec<ComplexDenseTensor>,
    diagonals: Vec<Vec<C64>>,
    rotations: Vec<ComplexMatrix>,
}

/// `D_ℓ ×_i Q_i†'` for `l` random diagonals; `shared` uses one rotation for every axis.
#[allow(clippy::too_many_arguments)]
fn rotated_diagonals(
    n: usize,
    d: usize,
    l: usize,
    seed: u64,
    zero_entries: &[usize],
    dagger: DaggerMode,
    real_rotations: bool,
    shared: bool,
) -> Result<Rotated> {
    if let Some(&p) = zero_entries.iter().find(|&&p| p >= n) {
        return Err(Error::Invalid(format!("zero entry {p} is outside 0..{n}")));
    }
    let mut rng = seeded_rng(seed, 0);
    let diagonals: Vec<Vec<C64>> = (0..l)
        .map(|_| {
            let mut e = diagonal_entries(n, &mut rng, false);
            for &p in zero_entries {
                e[p] = C64::new(0.0, 0.0);
            }
            e
        })
        .collect();
    let rotations = (0..d)
        .map(|i| {
            let stream = if shared { 0 } else { i as u64 };
            Ok(random_point(n, n, seed, stream, real_rotations)?.into_matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    let dims = vec![n; d];
    let tensors = diagonals
        .iter()
        .map(|e| {
            let mut t = ComplexDenseTensor::diagonal(&dims, e)?;
            for (i, q) in rotations.iter().enumerate() {
                t = t.mode_product(&twist(q, dagger), i)?;
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Rotated { tensors, diagonals, rotations })
}

fn rotated_point(rotations: &[ComplexMatrix], r: usize) -> Result<StiefelTuple> {
    StiefelTuple::from_matrices(rotations.iter().map(|q| q * truncated_identity(q.nrows(), r).unwrap().matrix()).collect())
}

fn truth_of(kind: &str, seed: u64, rot: &Rotated, point: &StiefelTuple, target: f64) -> GroundTruth {
    GroundTruth {
        kind: kind.into(),
        seed,
        target_objective: Some(target),
        diagonals: rot.diagonals.iter().map(|e| e.iter().map(|z| [z.re, z.im]).collect()).collect(),
        rotations: rot.rotations.iter().map(ComplexDenseTensor::from_matrix).collect(),
        factors: factors_of(point),
        ..Default::default()
    }
}

fn leading_energy(diagonals: &[Vec<C64>], weights: &[f64], r: usize) -> f64 {
    diagonals.iter().zip(weights).map(|(e, w)| w * e[..r].iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
}

/// Rotated diagonal tensors for the weighted diagonalization objective, unit
/// weights, unitary `Q_i`. Entries listed in `zero_entries` are zeroed in every
/// `D_ℓ`, which breaks the nonvanishing condition when they fall below `r`.
pub fn rotated_diagonalization(n: usize, r: usize, l: usize, d: usize, seed: u64, zero_entries: &[usize], dagger: DaggerMode) -> Result<Instance> {
    let rot = rotated_diagonals(n, d, l, seed, zero_entries, dagger, false, false)?;
    let weights = vec![1.0; l];
    let spec = ObjectiveSpec::diagonalization(rot.tensors.clone(), weights.clone(), r, dagger)?;
    let point = rotated_point(&rot.rotations, r)?;
    let target = leading_energy(&rot.diagonals, &weights, r);
    Ok(Instance { truth: truth_of("prop59", seed, &rot, &point, target), spec, point })
}

/// Symmetric counterpart: one unitary `Q` on every axis; the known point is `Q·I_{n×r}`.
pub fn rotated_symmetric(n: usize, r: usize, l: usize, d: usize, seed: u64, zero_entries: &[usize], dagger: DaggerMode) -> Result<Instance> {
    let rot = rotated_diagonals(n, d, l, seed, zero_entries, dagger, false, true)?;
    let weights = vec![1.0; l];
    // Rounding in the successive mode products leaves a tiny asymmetry.
    let tensors = rot.tensors.iter().map(|t| t.symmetrize()).collect::<Result<Vec<_>>>()?;
    let spec = ObjectiveSpec::symmetric_diagonalization(tensors, weights.clone(), r, dagger)?;
    let point = rotated_point(&rot.rotations[..1], r)?;
    let target = leading_energy(&rot.diagonals, &weights, r);
    Ok(Instance { truth: truth_of("prop65", seed, &rot, &point, target), spec, point })
}

/// Rotated diagonal tensors for compression with real orthogonal `Q_i` and
/// every rank equal to `r`. Diagonal moduli are descending, so the known point
/// carries the `r` largest entries and is the global maximum.
pub fn rotated_compression(n: usize, r: usize, l: usize, d: usize, seed: u64, dagger: DaggerMode) -> Result<Instance> {
    let rot = rotated_diagonals(n, d, l, seed, &[], dagger, true, false)?;
    let weights = vec![1.0; l];
    let spec = ObjectiveSpec::compression(rot.tensors.clone(), weights.clone(), vec![r; d], dagger)?;
    let point = rotated_point(&rot.rotations, r)?;
    let target = leading_energy(&rot.diagonals, &weights, r);
    Ok(Instance { truth: truth_of("prop710", seed, &rot, &point, target), spec, point })
}

/// Point `polar(U_i + ε·Z_i)` with `Z_i` a random unit tangent direction at each block.
pub fn perturb(point: &StiefelTuple, eps: f64, seed: u64) -> Result<StiefelTuple> {
    use crate::stiefel::{polar_decompose, tangent_project};
    use crate::tensor::gaussian_matrix;
    let mut rng = seeded_rng(seed, 7);
    let blocks = point
        .blocks()
        .iter()
        .map(|b| {
            let z = tangent_project(b, &gaussian_matrix(b.n(), b.r(), false, &mut rng))?.into_matrix();
            let z = &z / C64::new(z.norm(), 0.0);
            Ok(polar_decompose(&(b.matrix() + z * C64::new(eps, 0.0)))?.orthogonal)
        })
        .collect::<Result<Vec<_>>>()?;
    StiefelTuple::new(blocks)
}
