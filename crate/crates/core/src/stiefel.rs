//! Points and tangent vectors of the complex Stiefel manifold, the polar
//! decomposition, tangent projection and the Weingarten map.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{gaussian_matrix, herm, seeded_rng, ComplexMatrix, C64};

/// Orthonormality tolerance `‖UᴴU − I‖` checked when a point is constructed.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;
/// Iterates drifting past this are re-orthonormalized by the solvers.
pub const DRIFT_TOL: f64 = 1e-10;
/// Tangency tolerance on `‖herm(UᴴZ)‖`, relative to `max(1, ‖Z‖)`.
pub const TANGENT_TOL: f64 = 1e-10;

const SVD_MAX_ITER: usize = 10_000;

/// Thin SVD `X = W·diag(σ)·Vᴴ` with `σ` descending.
pub struct ThinSvd {
    pub w: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Complex thin SVD through faer; nalgebra's complex SVD mis-factors some
/// rank-deficient inputs.
pub fn thin_svd(x: &ComplexMatrix) -> Result<ThinSvd> {
    let (n, r) = x.shape();
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(format!("SVD of a non-finite {n}x{r} matrix")));
    }
    let m = faer::Mat::<C64>::from_fn(n, r, |i, j| x[(i, j)]);
    let svd = m.thin_svd().map_err(|e| Error::Numeric(format!("SVD of a {n}x{r} matrix failed: {e:?}")))?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = s.nrows();
    Ok(ThinSvd {
        w: ComplexMatrix::from_fn(n, k, |i, j| u[(i, j)]),
        sigma: (0..k).map(|j| s[j].re).collect(),
        v: ComplexMatrix::from_fn(r, k, |i, j| v[(i, j)]),
    })
}

pub fn orthonormality_defect(u: &ComplexMatrix) -> f64 {
    let r = u.ncols();
    (u.adjoint() * u - ComplexMatrix::identity(r, r)).norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint {
    u: ComplexMatrix,
}

impl StiefelPoint {
    pub fn new(u: ComplexMatrix) -> Result<Self> {
        let (n, r) = u.shape();
        if r == 0 || r > n {
            return Err(Error::Shape(format!("Stiefel point needs 1 <= r <= n, got {n}x{r}")));
        }
        let defect = orthonormality_defect(&u);
        if !(defect <= ORTHONORMALITY_TOL) {
            return Err(Error::Invalid(format!(
                "columns are not orthonormal: ‖UᴴU − I‖ = {defect:.3e}"
            )));
        }
        Ok(Self { u })
    }

    /// Skip the orthonormality check; callers guarantee it up to [`DRIFT_TOL`].
    pub(crate) fn new_unchecked(u: ComplexMatrix) -> Self {
        Self { u }
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn r(&self) -> usize {
        self.u.ncols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.u
    }

    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.u)
    }

    /// `U·R`, which stays on the manifold for unitary `R`.
    pub fn right_multiply(&self, rmat: &ComplexMatrix) -> Result<Self> {
        if rmat.shape() != (self.r(), self.r()) {
            return Err(Error::Shape(format!("right factor must be {}x{}", self.r(), self.r())));
        }
        Self::new(&self.u * rmat)
    }
}

/// Ordered tuple of Stiefel points, one per tensor axis.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelTuple {
    blocks: Vec<StiefelPoint>,
}

impl StiefelTuple {
    pub fn new(blocks: Vec<StiefelPoint>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Shape("a tuple needs at least one block".into()));
        }
        Ok(Self { blocks })
    }

    pub fn from_matrices(ms: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(ms.into_iter().map(StiefelPoint::new).collect::<Result<_>>()?)
    }

    /// `(U, U, ..., U)` with `d` copies.
    pub fn repeated(u: &StiefelPoint, d: usize) -> Result<Self> {
        Self::new(vec![u.clone(); d])
    }

    /// Independent random blocks; block `i` uses stream `i` of `seed`.
    pub fn random(dims: &[usize], ranks: &[usize], seed: u64) -> Result<Self> {
        Self::random_impl(dims, ranks, seed, false)
    }

    pub fn random_real(dims: &[usize], ranks: &[usize], seed: u64) -> Result<Self> {
        Self::random_impl(dims, ranks, seed, true)
    }

    fn random_impl(dims: &[usize], ranks: &[usize], seed: u64, real: bool) -> Result<Self> {
        if dims.len() != ranks.len() {
            return Err(Error::Shape(format!("{} dims but {} ranks", dims.len(), ranks.len())));
        }
        let blocks = dims
            .iter()
            .zip(ranks)
            .enumerate()
            .map(|(i, (&n, &r))| random_point(n, r, seed, i as u64, real))
            .collect::<Result<_>>()?;
        Self::new(blocks)
    }

    pub fn truncated_identities(dims: &[usize], ranks: &[usize]) -> Result<Self> {
        if dims.len() != ranks.len() {
            return Err(Error::Shape(format!("{} dims but {} ranks", dims.len(), ranks.len())));
        }
        Self::new(dims.iter().zip(ranks).map(|(&n, &r)| truncated_identity(n, r)).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[StiefelPoint] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &StiefelPoint {
        &self.blocks[i]
    }

    pub fn set_block(&mut self, i: usize, u: StiefelPoint) {
        self.blocks[i] = u;
    }

    pub fn matrices(&self) -> Vec<ComplexMatrix> {
        self.blocks.iter().map(|b| b.u.clone()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(StiefelPoint::n).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(StiefelPoint::r).collect()
    }

    /// `sqrt(Σ_i ‖U_i − V_i‖²)`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dims() != other.dims() || self.ranks() != other.ranks() {
            return Err(Error::Shape("tuples have different shapes".into()));
        }
        Ok(self.blocks.iter().zip(&other.blocks).map(|(a, b)| (&a.u - &b.u).norm_squared()).sum::<f64>().sqrt())
    }
}

/// A matrix `Z` at a base point with `herm(UᴴZ) = 0`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    base: StiefelPoint,
    z: ComplexMatrix,
}

pub fn tangent_defect(u: &ComplexMatrix, z: &ComplexMatrix) -> f64 {
    herm(&(u.adjoint() * z)).norm()
}

impl TangentVector {
    pub fn new(base: &StiefelPoint, z: ComplexMatrix) -> Result<Self> {
        if z.shape() != base.u.shape() {
            return Err(Error::Shape(format!(
                "tangent vector is {:?} but the base point is {:?}",
                z.shape(),
                base.u.shape()
            )));
        }
        let defect = tangent_defect(&base.u, &z);
        if !(defect <= TANGENT_TOL * z.norm().max(1.0)) {
            return Err(Error::Invalid(format!("not tangent: ‖herm(UᴴZ)‖ = {defect:.3e}")));
        }
        Ok(Self { base: base.clone(), z })
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.z
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.z
    }

    pub fn norm(&self) -> f64 {
        self.z.norm()
    }
}

#[derive(Clone, Debug)]
pub struct PolarFactors {
    pub orthogonal: StiefelPoint,
    pub hermitian: ComplexMatrix,
    /// Singular values of the input, descending.
    pub singular_values: Vec<f64>,
}

impl PolarFactors {
    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Polar decomposition `X = U·P` through the thin SVD `X = WΣVᴴ`:
/// `U = WVᴴ`, `P = VΣVᴴ` (symmetrized).
pub fn polar_decompose(x: &ComplexMatrix) -> Result<PolarFactors> {
    let (n, r) = x.shape();
    if r == 0 || r > n {
        return Err(Error::Shape(format!("polar decomposition needs n >= r >= 1, got {n}x{r}")));
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("polar decomposition of a non-finite matrix".into()));
    }
    let svd = thin_svd(x)?;
    let u = &svd.w * svd.v.adjoint();
    let sigma = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(svd.sigma.len(), svd.sigma.iter().map(|&s| C64::new(s, 0.0))));
    let p = herm(&(&svd.v * sigma * svd.v.adjoint()));
    let singular_values = svd.sigma;
    let defect = orthonormality_defect(&u);
    if !(defect <= ORTHONORMALITY_TOL) {
        return Err(Error::Numeric(format!("polar factor lost orthonormality ({defect:.3e})")));
    }
    Ok(PolarFactors { orthogonal: StiefelPoint::new_unchecked(u), hermitian: p, singular_values })
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(thin_svd(x)?.sigma)
}

fn check_shape(u: &StiefelPoint, m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.shape() != u.u.shape() {
        return Err(Error::Shape(format!(
            "{what} is {:?} but the base point is {:?}",
            m.shape(),
            u.u.shape()
        )));
    }
    Ok(())
}

/// `U·herm(Uᴴξ)`, the normal component of `ξ`.
pub fn normal_project(u: &StiefelPoint, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_shape(u, xi, "ξ")?;
    Ok(&u.u * herm(&(u.u.adjoint() * xi)))
}

/// `ξ − U·herm(Uᴴξ)`.
pub fn tangent_project(u: &StiefelPoint, xi: &ComplexMatrix) -> Result<TangentVector> {
    let z = xi - normal_project(u, xi)?;
    TangentVector::new(u, z)
}

/// Riemannian gradient from a Euclidean (Wirtinger) gradient.
pub fn riemannian_gradient(u: &StiefelPoint, eucl_grad: &ComplexMatrix) -> Result<TangentVector> {
    tangent_project(u, eucl_grad)
}

/// Weingarten map `𝔄_U(Z, V) = −Z·UᴴV − U·herm(ZᴴV)`.
pub fn weingarten_apply(u: &StiefelPoint, z: &TangentVector, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_shape(u, v, "V")?;
    check_shape(u, &z.z, "Z")?;
    let zm = &z.z;
    Ok(-(zm * (u.u.adjoint() * v)) - &u.u * herm(&(zm.adjoint() * v)))
}

pub fn truncated_identity(n: usize, r: usize) -> Result<StiefelPoint> {
    if r == 0 || r > n {
        return Err(Error::Shape(format!("truncated identity needs 1 <= r <= n, got n={n}, r={r}")));
    }
    Ok(StiefelPoint::new_unchecked(ComplexMatrix::identity(n, r)))
}

/// Last `n − r` columns of `I_n`.
pub fn truncated_identity_complement(n: usize, r: usize) -> Result<ComplexMatrix> {
    if r > n {
        return Err(Error::Shape(format!("complement needs r <= n, got n={n}, r={r}")));
    }
    Ok(ComplexMatrix::from_fn(n, n - r, |i, j| if i == j + r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
}

/// Stream offset that keeps point draws apart from tensor draws of the same seed.
const POINT_STREAMS: u64 = 1 << 32;

/// Orthogonal polar factor of a Gaussian matrix drawn from
/// `seeded_rng(seed, 2³² + 1024·stream + attempt)`; redrawn on near rank deficiency.
pub(crate) fn random_point(n: usize, r: usize, seed: u64, stream: u64, real: bool) -> Result<StiefelPoint> {
    if r == 0 || r > n {
        return Err(Error::Shape(format!("random Stiefel point needs 1 <= r <= n, got n={n}, r={r}")));
    }
    for attempt in 0..1024 {
        let mut rng = seeded_rng(seed, POINT_STREAMS + stream * 1024 + attempt);
        let x = gaussian_matrix(n, r, real, &mut rng);
        let pf = polar_decompose(&x)?;
        if pf.sigma_min() > 1e-8 * pf.singular_values[0] {
            return Ok(pf.orthogonal);
        }
    }
    Err(Error::Numeric("could not draw a full-rank Gaussian matrix".into()))
}

pub fn random_stiefel(n: usize, r: usize, seed: u64) -> Result<StiefelPoint> {
    random_point(n, r, seed, 0, false)
}

/// Real-valued random point (imaginary parts exactly zero).
pub fn random_real_stiefel(n: usize, r: usize, seed: u64) -> Result<StiefelPoint> {
    random_point(n, r, seed, 0, true)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = herm(h).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Real symmetric matrix singular values, descending.
pub fn real_singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sv = m
        .clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?
        .singular_values;
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}
