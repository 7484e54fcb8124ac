//! The three objective families: weighted diagonalization, symmetric
//! diagonalization and multilinear compression.
//!
//! Every objective is a real function of complex factor matrices. Gradients are
//! Wirtinger gradients `∇h = 2·∂h/∂U*`, paired with the real inner product
//! `Re tr(XᴴY)`. The raw `*_at` methods evaluate the natural extension of each
//! objective to arbitrary matrices of the right shape; the remaining methods
//! take manifold points.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stiefel::{
    normal_project, real_singular_values, riemannian_gradient, tangent_project, weingarten_apply,
    StiefelPoint, StiefelTuple, TangentVector,
};
use crate::tensor::{inner_re, ComplexDenseTensor, ComplexMatrix, C64, I, ONE};

/// Homogeneity constant of the block restrictions: `h(U) = α·⟨U, ∇h(U)⟩`.
pub const HOMOGENEITY_ALPHA: f64 = 0.5;
/// Riemannian gradient norm a point must reach before a Hessian rank is reported.
pub const STATIONARITY_GATE: f64 = 1e-8;
/// Default rank cut-off, relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Symmetric specs reject tensors whose permutation defect exceeds this times `max(1, ‖S‖)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Which transpose `(·)†` is used in `W = A ×_1 U_1† ⋯ ×_d U_d†`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DaggerMode {
    #[serde(rename = "H")]
    ConjugateTranspose,
    #[serde(rename = "T")]
    Transpose,
}

impl DaggerMode {
    pub fn apply(self, u: &ComplexMatrix) -> ComplexMatrix {
        match self {
            DaggerMode::ConjugateTranspose => u.adjoint(),
            DaggerMode::Transpose => u.transpose(),
        }
    }

    /// Row vector `u†` for a column `u`, as a coefficient list.
    fn row(self, u: &[C64]) -> Vec<C64> {
        match self {
            DaggerMode::ConjugateTranspose => u.iter().map(|z| z.conj()).collect(),
            DaggerMode::Transpose => u.to_vec(),
        }
    }

    /// Identity in H mode, conjugation in T mode.
    fn twist(self, z: C64) -> C64 {
        match self {
            DaggerMode::ConjugateTranspose => z,
            DaggerMode::Transpose => z.conj(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "diag")]
    Diagonalization,
    #[serde(rename = "symdiag")]
    SymmetricDiagonalization,
    #[serde(rename = "compress")]
    Compression,
}

impl Family {
    /// True when the objective is invariant under diagonal unimodular scaling
    /// only, false when it is invariant under the full unitary group.
    pub fn is_scale_invariant(self) -> bool {
        !matches!(self, Family::Compression)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveSpec {
    family: Family,
    tensors: Vec<ComplexDenseTensor>,
    weights: Vec<f64>,
    ranks: Vec<usize>,
    dagger: DaggerMode,
}

fn column(m: &ComplexMatrix, p: usize) -> Vec<C64> {
    m.column(p).iter().copied().collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ObjectiveSpec {
    fn validate_common(tensors: &[ComplexDenseTensor], weights: &[f64]) -> Result<()> {
        if tensors.is_empty() {
            return Err(Error::Invalid("at least one tensor is required".into()));
        }
        if tensors.len() != weights.len() {
            return Err(Error::Invalid(format!("{} tensors but {} weights", tensors.len(), weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Invalid(format!("weights must be positive and finite, got {w}")));
        }
        let dims = tensors[0].dims();
        if let Some(k) = tensors.iter().position(|t| t.dims() != dims) {
            return Err(Error::Shape(format!(
                "tensor {k} has dims {:?}, expected {dims:?}",
                tensors[k].dims()
            )));
        }
        if tensors.iter().any(|t| t.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::Invalid("tensor entries must be finite".into()));
        }
        Ok(())
    }

    /// `Σ_ℓ α_ℓ ‖diag(A_ℓ ×_1 U_1† ⋯ ×_d U_d†)‖²` with every `U_i` of width `r`.
    pub fn diagonalization(
        tensors: Vec<ComplexDenseTensor>,
        weights: Vec<f64>,
        r: usize,
        dagger: DaggerMode,
    ) -> Result<Self> {
        Self::validate_common(&tensors, &weights)?;
        let dims = tensors[0].dims();
        let min = *dims.iter().min().expect("order >= 1");
        if r == 0 || r > min {
            return Err(Error::Invalid(format!("rank r={r} must satisfy 1 <= r <= min(dims) = {min}")));
        }
        let ranks = vec![r; dims.len()];
        Ok(Self { family: Family::Diagonalization, tensors, weights, ranks, dagger })
    }

    /// `Σ_ℓ α_ℓ ‖diag(S_ℓ ×_1 U† ⋯ ×_d U†)‖²` for symmetric `S_ℓ` of order at least 2.
    pub fn symmetric_diagonalization(
        tensors: Vec<ComplexDenseTensor>,
        weights: Vec<f64>,
        r: usize,
        dagger: DaggerMode,
    ) -> Result<Self> {
        Self::validate_common(&tensors, &weights)?;
        let dims = tensors[0].dims();
        if dims.len() < 2 {
            return Err(Error::Invalid("symmetric objectives need order >= 2".into()));
        }
        for (k, t) in tensors.iter().enumerate() {
            let defect = t.symmetry_defect();
            if !(defect <= SYMMETRY_TOL * t.norm().max(1.0)) {
                return Err(Error::Invalid(format!("tensor {k} is not symmetric (defect {defect:.3e})")));
            }
        }
        if r == 0 || r > dims[0] {
            return Err(Error::Invalid(format!("rank r={r} must satisfy 1 <= r <= n = {}", dims[0])));
        }
        let ranks = vec![r; dims.len()];
        Ok(Self { family: Family::SymmetricDiagonalization, tensors, weights, ranks, dagger })
    }

    /// `Σ_ℓ α_ℓ ‖A_ℓ ×_1 U_1† ⋯ ×_d U_d†‖²` with `U_i` of width `r_i`.
    pub fn compression(
        tensors: Vec<ComplexDenseTensor>,
        weights: Vec<f64>,
        ranks: Vec<usize>,
        dagger: DaggerMode,
    ) -> Result<Self> {
        Self::validate_common(&tensors, &weights)?;
        let dims = tensors[0].dims();
        if ranks.len() != dims.len() {
            return Err(Error::Invalid(format!("{} ranks for an order-{} tensor", ranks.len(), dims.len())));
        }
        if let Some(i) = (0..dims.len()).find(|&i| ranks[i] == 0 || ranks[i] > dims[i]) {
            return Err(Error::Invalid(format!("rank r_{i}={} must satisfy 1 <= r <= {}", ranks[i], dims[i])));
        }
        Ok(Self { family: Family::Compression, tensors, weights, ranks, dagger })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn tensors(&self) -> &[ComplexDenseTensor] {
        &self.tensors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dagger(&self) -> DaggerMode {
        self.dagger
    }

    pub fn dims(&self) -> &[usize] {
        self.tensors[0].dims()
    }

    pub fn order(&self) -> usize {
        self.dims().len()
    }

    /// Column count of every block.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `β = 1/(2d)` of the symmetric objective.
    pub fn beta(&self) -> f64 {
        1.0 / (2.0 * self.order() as f64)
    }

    /// Expected Riemannian Hessian rank of block `i` at a semi-nondegenerate point:
    /// `2nr − r² − r` for the scale-invariant families, `2r(n − r)` for compression.
    pub fn expected_hessian_rank(&self, i: usize) -> usize {
        let (n, r) = (self.dims()[i], self.ranks[i]);
        if self.family.is_scale_invariant() {
            2 * n * r - r * r - r
        } else {
            2 * r * (n - r)
        }
    }

    /// Same objective family and settings over different tensors.
    pub fn with_tensors(&self, tensors: Vec<ComplexDenseTensor>) -> Result<Self> {
        let r = self.ranks[0];
        match self.family {
            Family::Diagonalization => Self::diagonalization(tensors, self.weights.clone(), r, self.dagger),
            Family::SymmetricDiagonalization => {
                Self::symmetric_diagonalization(tensors, self.weights.clone(), r, self.dagger)
            }
            Family::Compression => Self::compression(tensors, self.weights.clone(), self.ranks.clone(), self.dagger),
        }
    }

    fn require_symmetric(&self) -> Result<()> {
        if self.family != Family::SymmetricDiagonalization {
            return Err(Error::Invalid("operation requires a symmetric diagonalization spec".into()));
        }
        Ok(())
    }

    fn check_blocks(&self, blocks: &[ComplexMatrix]) -> Result<()> {
        if blocks.len() != self.order() {
            return Err(Error::Shape(format!("{} blocks for an order-{} objective", blocks.len(), self.order())));
        }
        for (i, b) in blocks.iter().enumerate() {
            let want = (self.dims()[i], self.ranks[i]);
            if b.shape() != want {
                return Err(Error::Shape(format!("block {i} is {:?}, expected {want:?}", b.shape())));
            }
        }
        Ok(())
    }

    fn check_single(&self, u: &ComplexMatrix) -> Result<()> {
        self.require_symmetric()?;
        let want = (self.dims()[0], self.ranks[0]);
        if u.shape() != want {
            return Err(Error::Shape(format!("point is {:?}, expected {want:?}", u.shape())));
        }
        Ok(())
    }

    fn check_axis(&self, i: usize) -> Result<()> {
        if i >= self.order() {
            return Err(Error::Axis { axis: i, order: self.order() });
        }
        Ok(())
    }

    // Diagonalization kernels.

    /// `v_p = A_ℓ ×_{j≠i} (u_p^{(j)})†`, the axis-`i` fiber through column `p`.
    pub fn diag_fiber(&self, blocks: &[ComplexMatrix], ell: usize, i: usize, p: usize) -> Vec<C64> {
        let mut t = self.tensors[ell].clone();
        for (j, b) in blocks.iter().enumerate() {
            if j != i {
                let row = self.dagger.row(&column(b, p));
                t = t.contract_vector(&row, j).expect("shapes validated");
            }
        }
        t.into_data()
    }

    fn diag_value(&self, blocks: &[ComplexMatrix]) -> f64 {
        let mut f = 0.0;
        for (ell, &alpha) in self.weights.iter().enumerate() {
            for p in 0..self.ranks[0] {
                let v = self.diag_fiber(blocks, ell, 0, p);
                let w = dot(&self.dagger.row(&column(&blocks[0], p)), &v);
                f += alpha * w.norm_sqr();
            }
        }
        f
    }

    fn diag_gradient(&self, blocks: &[ComplexMatrix], i: usize) -> ComplexMatrix {
        let (n, r) = blocks[i].shape();
        let mut g = ComplexMatrix::zeros(n, r);
        for (ell, &alpha) in self.weights.iter().enumerate() {
            for p in 0..r {
                let v = self.diag_fiber(blocks, ell, i, p);
                let w = dot(&self.dagger.row(&column(&blocks[i], p)), &v);
                // H: 2α v conj(w); T: 2α conj(v) w.
                let c = self.dagger.twist(w.conj()) * (2.0 * alpha);
                for (a, va) in v.iter().enumerate() {
                    g[(a, p)] += c * self.dagger.twist(*va);
                }
            }
        }
        g
    }

    fn diag_hessian(&self, blocks: &[ComplexMatrix], i: usize, z: &ComplexMatrix) -> ComplexMatrix {
        let (n, r) = blocks[i].shape();
        let mut h = ComplexMatrix::zeros(n, r);
        for (ell, &alpha) in self.weights.iter().enumerate() {
            for p in 0..r {
                let v = self.diag_fiber(blocks, ell, i, p);
                // H: 2α v (vᴴ z); T: 2α conj(v) (vᵀ z).
                let s = dot(&self.dagger.row(&v), &column(z, p));
                let c = s * (2.0 * alpha);
                for (a, va) in v.iter().enumerate() {
                    h[(a, p)] += c * self.dagger.twist(*va);
                }
            }
        }
        h
    }

    // Compression kernels.

    /// `A_ℓ ×_{j≠i} U_j†`.
    pub fn partial_contraction(&self, blocks: &[ComplexMatrix], ell: usize, i: usize) -> ComplexDenseTensor {
        let mut t = self.tensors[ell].clone();
        for (j, b) in blocks.iter().enumerate() {
            if j != i {
                t = t.mode_product(&self.dagger.apply(b), j).expect("shapes validated");
            }
        }
        t
    }

    /// `Σ_ℓ α_ℓ M_ℓ M_ℓᴴ` (conjugated in T mode) with `M_ℓ` the axis-`i` unfolding
    /// of the partial contraction, so that `∇h = 2·Gram·U`.
    pub fn compression_gram(&self, blocks: &[ComplexMatrix], i: usize) -> Result<ComplexMatrix> {
        self.check_blocks(blocks)?;
        self.check_axis(i)?;
        let n = self.dims()[i];
        let mut gram = ComplexMatrix::zeros(n, n);
        for (ell, &alpha) in self.weights.iter().enumerate() {
            let m = self.partial_contraction(blocks, ell, i).unfold(i)?;
            gram += (&m * m.adjoint()) * C64::new(alpha, 0.0);
        }
        if self.dagger == DaggerMode::Transpose {
            gram = gram.map(|z| z.conj());
        }
        Ok(gram)
    }

    /// `[√α_1 M_1, √α_2 M_2, ...]` (conjugated in T mode), whose dominant left
    /// singular vectors give the HOOI update of block `i`.
    pub fn stacked_unfolding(&self, blocks: &[ComplexMatrix], i: usize) -> Result<ComplexMatrix> {
        self.check_blocks(blocks)?;
        self.check_axis(i)?;
        let parts = self
            .weights
            .iter()
            .enumerate()
            .map(|(ell, &alpha)| {
                Ok(self.partial_contraction(blocks, ell, i).unfold(i)? * C64::new(alpha.sqrt(), 0.0))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = self.dims()[i];
        let cols: usize = parts.iter().map(|m| m.ncols()).sum();
        let mut out = ComplexMatrix::zeros(n, cols);
        let mut c0 = 0;
        for m in &parts {
            out.columns_mut(c0, m.ncols()).copy_from(m);
            c0 += m.ncols();
        }
        if self.dagger == DaggerMode::Transpose {
            out = out.map(|z| z.conj());
        }
        Ok(out)
    }

    fn compression_value(&self, blocks: &[ComplexMatrix]) -> f64 {
        let mut f = 0.0;
        for (ell, &alpha) in self.weights.iter().enumerate() {
            let mut t = self.tensors[ell].clone();
            for (j, b) in blocks.iter().enumerate() {
                t = t.mode_product(&self.dagger.apply(b), j).expect("shapes validated");
            }
            f += alpha * t.norm_sqr();
        }
        f
    }

    // Symmetric kernels.

    /// `v_p = S_ℓ ×_2 u_p† ⋯ ×_d u_p†` (axis 0 free).
    pub fn symmetric_fiber(&self, u: &ComplexMatrix, ell: usize, p: usize) -> Vec<C64> {
        let row = self.dagger.row(&column(u, p));
        let mut t = self.tensors[ell].clone();
        for j in 1..self.order() {
            t = t.contract_vector(&row, j).expect("shapes validated");
        }
        t.into_data()
    }

    /// `C_p = S_ℓ ×_3 u_p† ⋯ ×_d u_p†` (axes 0 and 1 free).
    fn symmetric_slice(&self, u: &ComplexMatrix, ell: usize, p: usize) -> ComplexMatrix {
        let row = self.dagger.row(&column(u, p));
        let mut t = self.tensors[ell].clone();
        for j in 2..self.order() {
            t = t.contract_vector(&row, j).expect("shapes validated");
        }
        let n = self.dims()[0];
        ComplexMatrix::from_row_slice(n, n, t.data())
    }

    // Raw evaluation on arbitrary matrices.

    /// Objective at arbitrary matrices of the block shapes. Symmetric specs are
    /// evaluated as the underlying d-block diagonalization.
    pub fn value_at(&self, blocks: &[ComplexMatrix]) -> Result<f64> {
        self.check_blocks(blocks)?;
        Ok(match self.family {
            Family::Compression => self.compression_value(blocks),
            _ => self.diag_value(blocks),
        })
    }

    /// Euclidean gradient of the block-`i` restriction.
    pub fn block_gradient_at(&self, blocks: &[ComplexMatrix], i: usize) -> Result<ComplexMatrix> {
        self.check_blocks(blocks)?;
        self.check_axis(i)?;
        Ok(match self.family {
            Family::Compression => self.compression_gram(blocks, i)? * &blocks[i] * C64::new(2.0, 0.0),
            _ => self.diag_gradient(blocks, i),
        })
    }

    /// Euclidean Hessian of the block-`i` restriction applied to `z`.
    pub fn block_hessian_at(&self, blocks: &[ComplexMatrix], i: usize, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_blocks(blocks)?;
        self.check_axis(i)?;
        if z.shape() != blocks[i].shape() {
            return Err(Error::Shape(format!("direction is {:?}, block {i} is {:?}", z.shape(), blocks[i].shape())));
        }
        Ok(match self.family {
            Family::Compression => self.compression_gram(blocks, i)? * z * C64::new(2.0, 0.0),
            _ => self.diag_hessian(blocks, i, z),
        })
    }

    /// `g(U)` of a symmetric spec at an arbitrary n×r matrix.
    pub fn symmetric_value_at(&self, u: &ComplexMatrix) -> Result<f64> {
        self.check_single(u)?;
        let mut g = 0.0;
        for (ell, &alpha) in self.weights.iter().enumerate() {
            for p in 0..u.ncols() {
                let v = self.symmetric_fiber(u, ell, p);
                let w = dot(&self.dagger.row(&column(u, p)), &v);
                g += alpha * w.norm_sqr();
            }
        }
        Ok(g)
    }

    /// `∇g(U)`; column p is `2d Σ_ℓ α_ℓ v_p conj(w_p)` (H) or `2d Σ_ℓ α_ℓ conj(v_p) w_p` (T).
    pub fn symmetric_gradient_at(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_single(u)?;
        let d = self.order() as f64;
        let mut g = ComplexMatrix::zeros(u.nrows(), u.ncols());
        for (ell, &alpha) in self.weights.iter().enumerate() {
            for p in 0..u.ncols() {
                let v = self.symmetric_fiber(u, ell, p);
                let w = dot(&self.dagger.row(&column(u, p)), &v);
                let c = self.dagger.twist(w.conj()) * (2.0 * d * alpha);
                for (a, va) in v.iter().enumerate() {
                    g[(a, p)] += c * self.dagger.twist(*va);
                }
            }
        }
        Ok(g)
    }

    /// Euclidean Hessian of `g` applied to `z`. Column p:
    /// H: `Σ α [2d² v_p (v_pᴴ z_p) + 2d(d−1) conj(w_p) C_p conj(z_p)]`,
    /// T: `Σ α [2d² conj(v_p) (v_pᵀ z_p) + 2d(d−1) w_p conj(C_p) conj(z_p)]`.
    pub fn symmetric_hessian_at(&self, u: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_single(u)?;
        if z.shape() != u.shape() {
            return Err(Error::Shape(format!("direction is {:?}, point is {:?}", z.shape(), u.shape())));
        }
        let d = self.order() as f64;
        let mut h = ComplexMatrix::zeros(u.nrows(), u.ncols());
        for (ell, &alpha) in self.weights.iter().enumerate() {
            for p in 0..u.ncols() {
                let v = self.symmetric_fiber(u, ell, p);
                let up = column(u, p);
                let zp = column(z, p);
                let w = dot(&self.dagger.row(&up), &v);
                let s = dot(&self.dagger.row(&v), &zp) * (2.0 * d * d * alpha);
                let cmat = self.dagger.twist_matrix(&self.symmetric_slice(u, ell, p));
                let zc: Vec<C64> = zp.iter().map(|x| x.conj()).collect();
                let cw = self.dagger.twist(w.conj()) * (2.0 * d * (d - 1.0) * alpha);
                for a in 0..u.nrows() {
                    let cz: C64 = (0..u.nrows()).map(|b| cmat[(a, b)] * zc[b]).sum();
                    h[(a, p)] += s * self.dagger.twist(v[a]) + cw * cz;
                }
            }
        }
        Ok(h)
    }

    // Manifold-level operations.

    fn tuple_blocks(&self, point: &StiefelTuple) -> Result<Vec<ComplexMatrix>> {
        let blocks = point.matrices();
        self.check_blocks(&blocks)?;
        Ok(blocks)
    }

    pub fn evaluate(&self, point: &StiefelTuple) -> Result<f64> {
        self.value_at(&self.tuple_blocks(point)?)
    }

    pub fn evaluate_symmetric(&self, u: &StiefelPoint) -> Result<f64> {
        self.symmetric_value_at(u.matrix())
    }

    pub fn block_euclidean_gradient(&self, point: &StiefelTuple, i: usize) -> Result<ComplexMatrix> {
        self.block_gradient_at(&self.tuple_blocks(point)?, i)
    }

    pub fn symmetric_euclidean_gradient(&self, u: &StiefelPoint) -> Result<ComplexMatrix> {
        self.symmetric_gradient_at(u.matrix())
    }

    /// `sqrt(Σ_i ‖grad_i f‖²)` over the blocks of a tuple.
    pub fn riemannian_gradient_norm(&self, point: &StiefelTuple) -> Result<f64> {
        let blocks = self.tuple_blocks(point)?;
        let mut s = 0.0;
        for i in 0..blocks.len() {
            let g = self.block_gradient_at(&blocks, i)?;
            s += riemannian_gradient(point.block(i), &g)?.norm().powi(2);
        }
        Ok(s.sqrt())
    }

    pub fn symmetric_riemannian_gradient_norm(&self, u: &StiefelPoint) -> Result<f64> {
        Ok(riemannian_gradient(u, &self.symmetric_euclidean_gradient(u)?)?.norm())
    }

    fn check_base(z: &TangentVector, u: &StiefelPoint) -> Result<()> {
        let gap = (z.base().matrix() - u.matrix()).norm();
        if z.base().matrix().shape() != u.matrix().shape() || gap > 1e-12 {
            return Err(Error::Invalid("tangent vector is based at a different point".into()));
        }
        Ok(())
    }

    /// `Proj_U(∇²h[Z]) + 𝔄_U(Z, U·herm(Uᴴ∇h))` for block `i`.
    pub fn riemannian_hessian_apply(&self, point: &StiefelTuple, i: usize, z: &TangentVector) -> Result<TangentVector> {
        let blocks = self.tuple_blocks(point)?;
        self.check_axis(i)?;
        let u = point.block(i);
        Self::check_base(z, u)?;
        let g = self.block_gradient_at(&blocks, i)?;
        let e = self.block_hessian_at(&blocks, i, z.matrix())?;
        assemble_hessian(u, z, &g, &e)
    }

    pub fn symmetric_riemannian_hessian_apply(&self, u: &StiefelPoint, z: &TangentVector) -> Result<TangentVector> {
        Self::check_base(z, u)?;
        let g = self.symmetric_gradient_at(u.matrix())?;
        let e = self.symmetric_hessian_at(u.matrix(), z.matrix())?;
        assemble_hessian(u, z, &g, &e)
    }

    /// Numerical rank of the Riemannian Hessian of block `i`.
    pub fn hessian_rank(&self, point: &StiefelTuple, i: usize, rank_tol: f64) -> Result<usize> {
        let blocks = self.tuple_blocks(point)?;
        self.check_axis(i)?;
        let u = point.block(i);
        let grad = riemannian_gradient(u, &self.block_gradient_at(&blocks, i)?)?.norm();
        if grad > STATIONARITY_GATE {
            return Err(Error::NotStationary(grad));
        }
        let h = hessian_matrix(u, |z| self.riemannian_hessian_apply(point, i, z))?;
        numerical_rank(&h, rank_tol)
    }

    pub fn symmetric_hessian_rank(&self, u: &StiefelPoint, rank_tol: f64) -> Result<usize> {
        let grad = self.symmetric_riemannian_gradient_norm(u)?;
        if grad > STATIONARITY_GATE {
            return Err(Error::NotStationary(grad));
        }
        let h = hessian_matrix(u, |z| self.symmetric_riemannian_hessian_apply(u, z))?;
        numerical_rank(&h, rank_tol)
    }

    /// `max_i |h_i(U) − α·⟨U_i, ∇h_i⟩|` with `α = 1/2`.
    pub fn homogeneity_residual(&self, point: &StiefelTuple) -> Result<f64> {
        let blocks = self.tuple_blocks(point)?;
        let f = self.value_at(&blocks)?;
        let mut worst: f64 = 0.0;
        for (i, b) in blocks.iter().enumerate() {
            let g = self.block_gradient_at(&blocks, i)?;
            worst = worst.max((f - HOMOGENEITY_ALPHA * inner_re(b, &g)?).abs());
        }
        Ok(worst)
    }

    /// `|g(U) − β·⟨U, ∇g⟩|` with `β = 1/(2d)`.
    pub fn symmetric_homogeneity_residual(&self, u: &StiefelPoint) -> Result<f64> {
        let g = self.symmetric_value_at(u.matrix())?;
        let grad = self.symmetric_gradient_at(u.matrix())?;
        Ok((g - self.beta() * inner_re(u.matrix(), &grad)?).abs())
    }
}

impl DaggerMode {
    fn twist_matrix(self, m: &ComplexMatrix) -> ComplexMatrix {
        match self {
            DaggerMode::ConjugateTranspose => m.clone(),
            DaggerMode::Transpose => m.map(|z| z.conj()),
        }
    }
}

fn assemble_hessian(u: &StiefelPoint, z: &TangentVector, grad: &ComplexMatrix, ehess: &ComplexMatrix) -> Result<TangentVector> {
    let proj = tangent_project(u, ehess)?.into_matrix();
    let curv = weingarten_apply(u, z, &normal_project(u, grad)?)?;
    tangent_project(u, &(proj + curv))
}

/// Real orthonormal basis of the tangent space at `u` (real dimension
/// `2nr − r²`): the elementary perturbations `e_a e_bᵀ` and `i·e_a e_bᵀ`, in
/// column-major order of (a, b) with the real one first, are projected to the
/// tangent space and passed through modified Gram-Schmidt (two sweeps);
/// candidates whose residual norm drops below 1e-8 are skipped.
pub fn tangent_basis(u: &StiefelPoint) -> Result<Vec<TangentVector>> {
    let (n, r) = (u.n(), u.r());
    let dim = 2 * n * r - r * r;
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(dim);
    'outer: for b in 0..r {
        for a in 0..n {
            for unit in [ONE, I] {
                if basis.len() == dim {
                    break 'outer;
                }
                let mut e = ComplexMatrix::zeros(n, r);
                e[(a, b)] = unit;
                let mut v = tangent_project(u, &e)?.into_matrix();
                for _ in 0..2 {
                    for q in &basis {
                        let c = inner_re(q, &v)?;
                        v -= q * C64::new(c, 0.0);
                    }
                }
                let norm = v.norm();
                if norm > 1e-8 {
                    basis.push(v / C64::new(norm, 0.0));
                }
            }
        }
    }
    if basis.len() != dim {
        return Err(Error::Numeric(format!("tangent basis has {} vectors, expected {dim}", basis.len())));
    }
    basis.into_iter().map(|z| TangentVector::new(u, z)).collect()
}

/// Matrix of a tangent-space operator in the basis of [`tangent_basis`],
/// `H[a][b] = ⟨B_a, Op(B_b)⟩`.
pub fn hessian_matrix(u: &StiefelPoint, op: impl Fn(&TangentVector) -> Result<TangentVector>) -> Result<DMatrix<f64>> {
    let basis = tangent_basis(u)?;
    let images = basis.iter().map(&op).collect::<Result<Vec<_>>>()?;
    let k = basis.len();
    let mut h = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            h[(a, b)] = inner_re(basis[a].matrix(), images[b].matrix())?;
        }
    }
    Ok(h)
}

/// Count of singular values above `rank_tol · σ_max`.
pub fn numerical_rank(h: &DMatrix<f64>, rank_tol: f64) -> Result<usize> {
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("Hessian matrix has non-finite entries".into()));
    }
    let s = real_singular_values(h)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rank_tol * smax).count())
}

/// Objective interface driven by the block solvers.
pub trait BlockObjective {
    fn num_blocks(&self) -> usize;
    fn value(&self, blocks: &[ComplexMatrix]) -> Result<f64>;
    fn block_gradient(&self, blocks: &[ComplexMatrix], i: usize) -> Result<ComplexMatrix>;
}

/// Objective interface driven by the single-block symmetric solvers.
pub trait SymmetricObjective {
    fn value(&self, u: &ComplexMatrix) -> Result<f64>;
    fn gradient(&self, u: &ComplexMatrix) -> Result<ComplexMatrix>;
}

impl BlockObjective for ObjectiveSpec {
    fn num_blocks(&self) -> usize {
        self.order()
    }

    fn value(&self, blocks: &[ComplexMatrix]) -> Result<f64> {
        self.value_at(blocks)
    }

    fn block_gradient(&self, blocks: &[ComplexMatrix], i: usize) -> Result<ComplexMatrix> {
        self.block_gradient_at(blocks, i)
    }
}

impl SymmetricObjective for ObjectiveSpec {
    fn value(&self, u: &ComplexMatrix) -> Result<f64> {
        self.symmetric_value_at(u)
    }

    fn gradient(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.symmetric_gradient_at(u)
    }
}

/// JSON form: `{"family", "dagger", "weights", "rank" | "ranks", "tensors"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecJson {
    pub family: Family,
    pub dagger: DaggerMode,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    pub tensors: Vec<ComplexDenseTensor>,
}

impl From<&ObjectiveSpec> for SpecJson {
    fn from(s: &ObjectiveSpec) -> Self {
        let (rank, ranks) = match s.family {
            Family::Compression => (None, Some(s.ranks.clone())),
            _ => (Some(s.ranks[0]), None),
        };
        Self { family: s.family, dagger: s.dagger, weights: s.weights.clone(), rank, ranks, tensors: s.tensors.clone() }
    }
}

impl TryFrom<SpecJson> for ObjectiveSpec {
    type Error = Error;

    fn try_from(j: SpecJson) -> Result<Self> {
        match j.family {
            Family::Compression => {
                let ranks = j.ranks.ok_or_else(|| Error::Format("compression spec needs \"ranks\"".into()))?;
                Self::compression(j.tensors, j.weights, ranks, j.dagger)
            }
            fam => {
                let r = j.rank.ok_or_else(|| Error::Format("diagonalization spec needs \"rank\"".into()))?;
                if fam == Family::Diagonalization {
                    Self::diagonalization(j.tensors, j.weights, r, j.dagger)
                } else {
                    Self::symmetric_diagonalization(j.tensors, j.weights, r, j.dagger)
                }
            }
        }
    }
}

impl Serialize for ObjectiveSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ObjectiveSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ObjectiveSpec::try_from(SpecJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
