//! Dense complex tensors and the multilinear primitives built on them.
//!
//! Storage is row-major (last index fastest). Axes are 0-based.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Complex matrix used for factors, gradients and unfoldings.
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexDenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Shape("tensor order must be at least 1".into()));
    }
    if let Some(k) = dims.iter().position(|&n| n == 0) {
        return Err(Error::Shape(format!("dimension {k} is zero in {dims:?}")));
    }
    Ok(())
}

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// Advance a row-major multi-index; returns false after the last one.
fn next_index(idx: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

impl ComplexDenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        check_dims(&dims)?;
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::Shape(format!(
                "data length {} does not match dims {:?} (expected {len})",
                data.len(),
                dims
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        let len = dims.iter().product();
        Ok(Self { dims: dims.to_vec(), data: vec![ZERO; len] })
    }

    /// Build a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        check_dims(dims)?;
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; dims.len()];
        loop {
            data.push(f(&idx));
            if !next_index(&mut idx, dims) {
                break;
            }
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    /// Rank-one tensor `scale * v_1 ⊗ v_2 ⊗ ... ⊗ v_d`.
    pub fn outer(scale: C64, vectors: &[Vec<C64>]) -> Result<Self> {
        let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
        Self::from_fn(&dims, |idx| {
            idx.iter().zip(vectors).fold(scale, |acc, (&p, v)| acc * v[p])
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.dims)
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(&i, s)| i * s).sum()
    }

    /// Entry at a multi-index. Panics when the index is out of bounds.
    pub fn get(&self, idx: &[usize]) -> C64 {
        assert_eq!(idx.len(), self.order(), "index order mismatch");
        assert!(idx.iter().zip(&self.dims).all(|(&i, &n)| i < n), "index out of bounds");
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        assert_eq!(idx.len(), self.order(), "index order mismatch");
        assert!(idx.iter().zip(&self.dims).all(|(&i, &n)| i < n), "index out of bounds");
        let off = self.offset(idx);
        self.data[off] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!("cannot add {:?} and {:?}", self.dims, other.dims)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    /// Largest imaginary magnitude over all entries.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.order() {
            return Err(Error::Axis { axis, order: self.order() });
        }
        Ok(())
    }

    /// Mode product `T ×_axis M` with `M` of shape m × n_axis:
    /// `out[.., q, ..] = Σ_p T[.., p, ..] · M[q, p]`.
    pub fn mode_product(&self, m: &ComplexMatrix, axis: usize) -> Result<Self> {
        self.check_axis(axis)?;
        let n = self.dims[axis];
        if m.ncols() != n {
            return Err(Error::Shape(format!(
                "mode-{axis} product: matrix is {}x{} but axis {axis} has length {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let rows = m.nrows();
        let pre: usize = self.dims[..axis].iter().product();
        let post: usize = self.dims[axis + 1..].iter().product();
        let mut out = vec![ZERO; pre * rows * post];
        for a in 0..pre {
            let src = &self.data[a * n * post..(a + 1) * n * post];
            let dst = &mut out[a * rows * post..(a + 1) * rows * post];
            for q in 0..rows {
                let drow = &mut dst[q * post..(q + 1) * post];
                for p in 0..n {
                    let c = m[(q, p)];
                    if c == ZERO {
                        continue;
                    }
                    let srow = &src[p * post..(p + 1) * post];
                    for (d, s) in drow.iter_mut().zip(srow) {
                        *d += c * s;
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims[axis] = rows;
        Ok(Self { dims, data: out })
    }

    /// Contract `axis` against a vector: `out[..] = Σ_p T[.., p, ..] · v[p]`.
    /// The axis is kept with length 1.
    pub fn contract_vector(&self, v: &[C64], axis: usize) -> Result<Self> {
        let row = ComplexMatrix::from_row_slice(1, v.len(), v);
        self.mode_product(&row, axis)
    }

    /// Column index of the unfolding for a multi-index: the remaining axes in
    /// increasing order, the first remaining axis varying fastest.
    fn unfold_column(dims: &[usize], idx: &[usize], axis: usize) -> usize {
        let mut col = 0;
        let mut stride = 1;
        for (k, (&i, &n)) in idx.iter().zip(dims).enumerate() {
            if k != axis {
                col += i * stride;
                stride *= n;
            }
        }
        col
    }

    /// Mode-`axis` unfolding, an n_axis × ∏_{j≠axis} n_j matrix whose columns are
    /// the axis fibers. Column order: remaining axes in increasing order with the
    /// first remaining axis fastest.
    pub fn unfold(&self, axis: usize) -> Result<ComplexMatrix> {
        self.check_axis(axis)?;
        let rows = self.dims[axis];
        let cols = self.len() / rows;
        let mut m = ComplexMatrix::zeros(rows, cols);
        let mut idx = vec![0; self.order()];
        for z in &self.data {
            m[(idx[axis], Self::unfold_column(&self.dims, &idx, axis))] = *z;
            next_index(&mut idx, &self.dims);
        }
        Ok(m)
    }

    /// Inverse of [`unfold`](Self::unfold).
    pub fn fold(m: &ComplexMatrix, axis: usize, dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        if axis >= dims.len() {
            return Err(Error::Axis { axis, order: dims.len() });
        }
        let len: usize = dims.iter().product();
        if m.nrows() != dims[axis] || m.nrows() * m.ncols() != len {
            return Err(Error::Shape(format!(
                "cannot fold a {}x{} matrix along axis {axis} into {dims:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        Self::from_fn(dims, |idx| m[(idx[axis], Self::unfold_column(dims, idx, axis))])
    }

    /// Entries `T[k, k, ..., k]` for k < min(dims).
    pub fn diag(&self) -> Vec<C64> {
        let n = *self.dims.iter().min().expect("order >= 1");
        let step: usize = self.strides().iter().sum();
        (0..n).map(|k| self.data[k * step]).collect()
    }

    /// Tensor whose only nonzero entries are `T[k, ..., k] = entries[k]`.
    pub fn diagonal(dims: &[usize], entries: &[C64]) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let n = *dims.iter().min().expect("checked nonempty");
        if entries.len() > n {
            return Err(Error::Shape(format!(
                "{} diagonal entries do not fit in dims {dims:?}",
                entries.len()
            )));
        }
        let step: usize = t.strides().iter().sum();
        for (k, &e) in entries.iter().enumerate() {
            t.data[k * step] = e;
        }
        Ok(t)
    }

    /// Reorder axes: axis k of the result is axis `perm[k]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let d = self.order();
        if perm.len() != d || !perm.iter().all(|&p| p < d) || perm.iter().unique().count() != d {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation of 0..{d}")));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let strides = self.strides();
        Self::from_fn(&dims, |idx| {
            let off: usize = idx.iter().zip(perm).map(|(&i, &p)| i * strides[p]).sum();
            self.data[off]
        })
    }

    fn check_cubical(&self) -> Result<()> {
        if self.dims.iter().any(|&n| n != self.dims[0]) {
            return Err(Error::Shape(format!("tensor with dims {:?} is not cubical", self.dims)));
        }
        Ok(())
    }

    /// Average over all d! axis permutations.
    pub fn symmetrize(&self) -> Result<Self> {
        self.check_cubical()?;
        let d = self.order();
        let mut acc = vec![ZERO; self.len()];
        let mut count = 0usize;
        for perm in (0..d).permutations(d) {
            let p = self.permute_axes(&perm)?;
            for (a, z) in acc.iter_mut().zip(&p.data) {
                *a += z;
            }
            count += 1;
        }
        let w = 1.0 / count as f64;
        Ok(Self { dims: self.dims.clone(), data: acc.into_iter().map(|z| z * w).collect() })
    }

    /// Largest deviation from invariance under the adjacent transpositions,
    /// which generate every permutation. Infinite for non-cubical tensors.
    pub fn symmetry_defect(&self) -> f64 {
        if self.check_cubical().is_err() {
            return f64::INFINITY;
        }
        let d = self.order();
        let mut worst: f64 = 0.0;
        for k in 0..d.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..d).collect();
            perm.swap(k, k + 1);
            let p = self.permute_axes(&perm).expect("valid permutation");
            for (a, b) in self.data.iter().zip(&p.data) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Order-2 tensor as a matrix.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.order() != 2 {
            return Err(Error::Shape(format!("order-{} tensor is not a matrix", self.order())));
        }
        Ok(ComplexMatrix::from_row_slice(self.dims[0], self.dims[1], &self.data))
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let data = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        Self { dims: vec![m.nrows(), m.ncols()], data }
    }
}

/// Seeded generator behind every random constructor in the crate: ChaCha20
/// seeded with `seed_from_u64(seed)`; `stream` selects an independent stream.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One complex normal sample: real then imaginary part, each N(0, 1).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn real_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), 0.0)
}

/// Gaussian matrix filled column by column.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, real: bool, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| if real { real_normal(rng) } else { complex_normal(rng) })
}

/// Tensor of independent complex normals drawn in row-major order from
/// [`seeded_rng`]`(seed, 0)`.
pub fn random_tensor(dims: &[usize], seed: u64) -> Result<ComplexDenseTensor> {
    let mut rng = seeded_rng(seed, 0);
    ComplexDenseTensor::from_fn(dims, |_| complex_normal(&mut rng))
}

/// Real-valued counterpart of [`random_tensor`] (imaginary parts exactly zero).
pub fn random_real_tensor(dims: &[usize], seed: u64) -> Result<ComplexDenseTensor> {
    let mut rng = seeded_rng(seed, 0);
    ComplexDenseTensor::from_fn(dims, |_| real_normal(&mut rng))
}

/// `Re tr(Xᴴ Y)`.
pub fn inner_re(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::Shape(format!("inner product of {:?} and {:?}", x.shape(), y.shape())));
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum())
}

/// `(X + Xᴴ) / 2`.
pub fn herm(x: &ComplexMatrix) -> ComplexMatrix {
    (x + x.adjoint()) * C64::new(0.5, 0.0)
}

pub fn max_imag(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

/// JSON form: `{"dims":[..], "layout":"row-major", "data":[[re,im], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorJson {
    pub dims: Vec<usize>,
    pub layout: String,
    pub data: Vec<[f64; 2]>,
}

pub const ROW_MAJOR: &str = "row-major";

impl From<&ComplexDenseTensor> for TensorJson {
    fn from(t: &ComplexDenseTensor) -> Self {
        Self {
            dims: t.dims.clone(),
            layout: ROW_MAJOR.into(),
            data: t.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<TensorJson> for ComplexDenseTensor {
    type Error = Error;

    fn try_from(j: TensorJson) -> Result<Self> {
        if j.layout != ROW_MAJOR {
            return Err(Error::Format(format!("unsupported layout {:?}", j.layout)));
        }
        let data = j.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexDenseTensor::new(j.dims, data)
    }
}

impl Serialize for ComplexDenseTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexDenseTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TensorJson::deserialize(d)?;
        ComplexDenseTensor::try_from(j).map_err(serde::de::Error::custom)
    }
}
