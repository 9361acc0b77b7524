//! Dense complex tensors, small complex matrices and a Hermitian eigensolver.
//!
//! Tensors are stored row-major over an ordered list of labeled axes. Every
//! other module builds on the two contraction primitives here:
//! [`ComplexTensor::contract`] for a single pairwise contraction and
//! [`contract_network`] for closing a whole network down to a scalar.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Axis label. Edge identifiers are used directly; callers that need extra
/// axes pick labels outside the edge range.
pub type Label = usize;

pub const TOL_HERM: f64 = 1e-9;
pub const TOL_PSD: f64 = 1e-9;
pub const TOL_EIG: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("data length {got} does not match the product of axis sizes {expected}")]
    Shape { expected: usize, got: usize },
    #[error("axis label {0} appears more than once")]
    DuplicateLabel(Label),
    #[error("axis label {0} not present")]
    MissingLabel(Label),
    #[error("axis {label} has size {left} on one side and {right} on the other")]
    Dimension { label: Label, left: usize, right: usize },
    #[error("axis size must be positive (label {0})")]
    ZeroSize(Label),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |C(a,b) - conj(C(b,a))| = {0:e}")]
    NotHermitian(f64),
    #[error("intermediate tensor with {size} entries exceeds the cap of {cap}")]
    Capacity { size: usize, cap: usize },
    #[error("network is not closed: label {0} has no partner")]
    OpenNetwork(Label),
}

pub type Result<T> = std::result::Result<T, TensorError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Axis {
    pub label: Label,
    pub size: usize,
}

impl Axis {
    pub fn new(label: Label, size: usize) -> Self {
        Self { label, size }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    axes: Vec<Axis>,
    data: Vec<C64>,
}

fn checked_volume(axes: &[Axis]) -> Result<usize> {
    let mut n = 1usize;
    for (k, a) in axes.iter().enumerate() {
        if a.size == 0 {
            return Err(TensorError::ZeroSize(a.label));
        }
        if axes[..k].iter().any(|b| b.label == a.label) {
            return Err(TensorError::DuplicateLabel(a.label));
        }
        n = n.checked_mul(a.size).ok_or(TensorError::Capacity {
            size: usize::MAX,
            cap: usize::MAX,
        })?;
    }
    Ok(n)
}

/// Row-major strides for the given sizes.
pub fn strides_of(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for k in (0..sizes.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * sizes[k + 1];
    }
    strides
}

/// Advance a mixed-radix counter; returns false after the last index.
pub fn next_index(idx: &mut [usize], sizes: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < sizes[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

impl ComplexTensor {
    pub fn new(axes: Vec<Axis>, data: Vec<C64>) -> Result<Self> {
        let expected = checked_volume(&axes)?;
        if expected != data.len() {
            return Err(TensorError::Shape {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { axes, data })
    }

    pub fn zeros(axes: Vec<Axis>) -> Result<Self> {
        let n = checked_volume(&axes)?;
        Ok(Self {
            axes,
            data: vec![C64::new(0.0, 0.0); n],
        })
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            axes: Vec::new(),
            data: vec![value],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        let n = checked_volume(&axes)?;
        let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let mut idx = vec![0; axes.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            next_index(&mut idx, &sizes);
        }
        Ok(Self { axes, data })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn labels(&self) -> Vec<Label> {
        self.axes.iter().map(|a| a.label).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.size).collect()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.sizes())
    }

    pub fn axis_position(&self, label: Label) -> Option<usize> {
        self.axes.iter().position(|a| a.label == label)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.axes.len());
        let mut off = 0;
        for (a, &i) in self.axes.iter().zip(idx) {
            debug_assert!(i < a.size);
            off = off * a.size + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn sum(&self) -> C64 {
        self.data.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            axes: self.axes.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn with_labels(&self, labels: &[Label]) -> Result<Self> {
        let axes: Vec<Axis> = self
            .axes
            .iter()
            .zip(labels)
            .map(|(a, &l)| Axis::new(l, a.size))
            .collect();
        if axes.len() != self.axes.len() {
            return Err(TensorError::Shape {
                expected: self.axes.len(),
                got: labels.len(),
            });
        }
        checked_volume(&axes)?;
        Ok(Self {
            axes,
            data: self.data.clone(),
        })
    }

    /// Reorders axes so that they follow `order`.
    pub fn permuted(&self, order: &[Label]) -> Result<Self> {
        if order.len() != self.axes.len() {
            return Err(TensorError::Shape {
                expected: self.axes.len(),
                got: order.len(),
            });
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|&l| self.axis_position(l).ok_or(TensorError::MissingLabel(l)))
            .collect::<Result<_>>()?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let old_strides = self.strides();
        let new_axes: Vec<Axis> = perm.iter().map(|&p| self.axes[p]).collect();
        checked_volume(&new_axes)?;
        let new_sizes: Vec<usize> = new_axes.iter().map(|a| a.size).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0; new_axes.len()];
        for _ in 0..self.data.len() {
            let off: usize = idx.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
            data.push(self.data[off]);
            next_index(&mut idx, &new_sizes);
        }
        Ok(Self {
            axes: new_axes,
            data,
        })
    }

    /// Sums the product of `self` and `other` over the `shared` labels.
    ///
    /// The result carries the free axes of `self` (in order) followed by the
    /// free axes of `other`.
    pub fn contract(&self, other: &ComplexTensor, shared: &[Label]) -> Result<Self> {
        for &l in shared {
            let pa = self.axis_position(l).ok_or(TensorError::MissingLabel(l))?;
            let pb = other.axis_position(l).ok_or(TensorError::MissingLabel(l))?;
            let (left, right) = (self.axes[pa].size, other.axes[pb].size);
            if left != right {
                return Err(TensorError::Dimension { label: l, left, right });
            }
        }
        let free_a: Vec<Axis> = self
            .axes
            .iter()
            .filter(|a| !shared.contains(&a.label))
            .copied()
            .collect();
        let free_b: Vec<Axis> = other
            .axes
            .iter()
            .filter(|a| !shared.contains(&a.label))
            .copied()
            .collect();
        let mut out_axes = free_a.clone();
        out_axes.extend(free_b.iter().copied());
        checked_volume(&out_axes)?;

        let order_a: Vec<Label> = free_a
            .iter()
            .map(|a| a.label)
            .chain(shared.iter().copied())
            .collect();
        let order_b: Vec<Label> = shared
            .iter()
            .copied()
            .chain(free_b.iter().map(|a| a.label))
            .collect();
        let a = self.permuted(&order_a)?;
        let b = other.permuted(&order_b)?;
        let rows: usize = free_a.iter().map(|a| a.size).product();
        let inner: usize = shared
            .iter()
            .map(|&l| self.axes[self.axis_position(l).unwrap()].size)
            .product();
        let cols: usize = free_b.iter().map(|a| a.size).product();
        let data = matmul(&a.data, &b.data, rows, inner, cols);
        Ok(Self {
            axes: out_axes,
            data,
        })
    }

    /// Contracts over every label the two tensors have in common.
    pub fn contract_common(&self, other: &ComplexTensor) -> Result<Self> {
        let shared: Vec<Label> = self
            .axes
            .iter()
            .filter(|a| other.axis_position(a.label).is_some())
            .map(|a| a.label)
            .collect();
        self.contract(other, &shared)
    }

    /// Replaces axis `label` by `new_label`, mapping values through a matrix:
    /// `out[.., y, ..] = sum_x self[.., x, ..] * m[x, y]`.
    pub fn mode_product(&self, label: Label, m: &CMatrix, new_label: Label) -> Result<Self> {
        let pos = self
            .axis_position(label)
            .ok_or(TensorError::MissingLabel(label))?;
        let size = self.axes[pos].size;
        if m.rows() != size {
            return Err(TensorError::Dimension {
                label,
                left: size,
                right: m.rows(),
            });
        }
        if new_label != label && self.axis_position(new_label).is_some() {
            return Err(TensorError::DuplicateLabel(new_label));
        }
        let mut axes = self.axes.clone();
        axes[pos] = Axis::new(new_label, m.cols());
        let outer: usize = self.axes[..pos].iter().map(|a| a.size).product();
        let inner: usize = self.axes[pos + 1..].iter().map(|a| a.size).product();
        let n_out = outer * m.cols() * inner;
        let mut data = vec![C64::new(0.0, 0.0); n_out];
        for o in 0..outer {
            for x in 0..size {
                let src = &self.data[(o * size + x) * inner..(o * size + x + 1) * inner];
                for y in 0..m.cols() {
                    let w = m.get(x, y);
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = &mut data[(o * m.cols() + y) * inner..(o * m.cols() + y + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * w;
                    }
                }
            }
        }
        Ok(Self { axes, data })
    }
}

fn matmul(a: &[C64], b: &[C64], rows: usize, inner: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for i in 0..rows {
        let out_row = &mut out[i * cols..(i + 1) * cols];
        for k in 0..inner {
            let aik = a[i * inner + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let b_row = &b[k * cols..(k + 1) * cols];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// Contracts a closed tensor network to a scalar by greedy pairwise
/// elimination: at each step the pair of tensors sharing at least one label
/// whose contraction yields the smallest tensor is merged.
pub fn contract_network(mut tensors: Vec<ComplexTensor>, cap: usize) -> Result<C64> {
    let mut scalar = C64::new(1.0, 0.0);
    loop {
        // Fold finished scalars immediately.
        tensors.retain(|t| {
            if t.rank() == 0 {
                scalar *= t.data[0];
                false
            } else {
                true
            }
        });
        if tensors.is_empty() {
            return Ok(scalar);
        }
        let mut best: Option<(usize, usize, usize, usize)> = None;
        for i in 0..tensors.len() {
            for j in (i + 1)..tensors.len() {
                let (a, b) = (&tensors[i], &tensors[j]);
                let mut shares = false;
                let mut size = 1usize;
                for ax in a.axes() {
                    if b.axis_position(ax.label).is_some() {
                        shares = true;
                    } else {
                        size = size.saturating_mul(ax.size);
                    }
                }
                if !shares {
                    continue;
                }
                for ax in b.axes() {
                    if a.axis_position(ax.label).is_none() {
                        size = size.saturating_mul(ax.size);
                    }
                }
                let work = a.len().saturating_add(b.len());
                let better = match best {
                    None => true,
                    Some((_, _, s, w)) => size < s || (size == s && work < w),
                };
                if better {
                    best = Some((i, j, size, work));
                }
            }
        }
        let Some((i, j, size, _)) = best else {
            let label = tensors[0].axes()[0].label;
            return Err(TensorError::OpenNetwork(label));
        };
        if size > cap {
            return Err(TensorError::Capacity { size, cap });
        }
        let b = tensors.swap_remove(j);
        let a = tensors.swap_remove(i);
        tensors.push(a.contract_common(&b)?);
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TensorError::Shape {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector.
    pub fn column(values: &[C64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        Self {
            rows: self.rows,
            cols: other.cols,
            data: matmul(&self.data, &other.data, self.rows, self.cols, other.cols),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |C(a,b) - conj(C(b,a))|; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for a in 0..self.rows {
            for b in a..self.cols {
                dev = dev.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        dev
    }

    pub fn kron(&self, other: &CMatrix) -> Self {
        kron(self, other)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows(), b.cols());
    CMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a.get(r / br, c / bc) * b.get(r % br, c % bc)
    })
}

/// A square matrix validated to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(CMatrix);

impl ChoiMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, TOL_HERM)
    }

    pub fn with_tolerance(m: CMatrix, tol_herm: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(TensorError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let dev = m.hermitian_deviation();
        if !(dev <= tol_herm) {
            return Err(TensorError::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn side(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let u = &self.eigenvectors;
        CMatrix::from_fn(n, n, |a, b| {
            (0..n)
                .map(|l| u.get(a, l) * u.get(b, l).conj() * self.eigenvalues[l])
                .sum()
        })
    }

    pub fn reconstruction_error(&self, original: &CMatrix) -> f64 {
        self.reconstruct().max_abs_diff(original)
    }

    pub fn orthonormality_error(&self) -> f64 {
        let u = &self.eigenvectors;
        u.adjoint().mul(u).max_abs_diff(&CMatrix::identity(u.cols()))
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigendecompose(c: &ChoiMatrix) -> EigenDecomposition {
    jacobi_eigh(c.matrix())
}

fn jacobi_eigh(input: &CMatrix) -> EigenDecomposition {
    let n = input.rows();
    // Work on the exactly Hermitian part.
    let mut a = CMatrix::from_fn(n, n, |i, j| (input.get(i, j) + input.get(j, i).conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let scale = a.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a.get(p, q).norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-16 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let pc = phase.conj();
                // A <- A J with J = diag(1, conj(phase)) * Givens(c, s) on (p, q).
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * c - akq * pc * s);
                    a.set(k, q, akp * s + akq * pc * c);
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c - vkq * pc * s);
                    v.set(k, q, vkp * s + vkq * pc * c);
                }
                // A <- J^H A
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * c - aqk * phase * s);
                    a.set(q, k, apk * s + aqk * phase * c);
                }
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                a.set(p, p, C64::new(a.get(p, p).re, 0.0));
                a.set(q, q, C64::new(a.get(q, q).re, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).re.total_cmp(&a.get(i, i).re));
    let eigenvalues = order.iter().map(|&i| a.get(i, i).re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// True iff the minimum eigenvalue is at least `-tol`.
pub fn is_psd(c: &ChoiMatrix, tol: f64) -> bool {
    min_eigenvalue(c) >= -tol
}

pub fn min_eigenvalue(c: &ChoiMatrix) -> f64 {
    if c.side() == 0 {
        return 0.0;
    }
    hermitian_eigendecompose(c).min_eigenvalue()
}

/// Nearest PSD matrix in Frobenius norm: Hermitian part with negative
/// eigenvalues clipped to zero.
pub fn project_psd(m: &CMatrix) -> CMatrix {
    let eig = jacobi_eigh(m);
    let clipped = EigenDecomposition {
        eigenvalues: eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
        eigenvectors: eig.eigenvectors,
    };
    clipped.reconstruct()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_tensor(rng: &mut ChaCha8Rng, axes: Vec<Axis>) -> ComplexTensor {
        ComplexTensor::from_fn(axes, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn identity_times_vector() {
        let id = ComplexTensor::new(
            vec![Axis::new(0, 2), Axis::new(1, 2)],
            vec![c(1.0), c(0.0), c(0.0), c(1.0)],
        )
        .unwrap();
        let v = ComplexTensor::new(vec![Axis::new(1, 2)], vec![c(3.0), C64::new(-1.0, 2.0)]).unwrap();
        let out = id.contract(&v, &[1]).unwrap();
        assert_eq!(out.labels(), vec![0]);
        assert_eq!(out.data(), v.data());
    }

    #[test]
    fn small_matrix_product() {
        // [[1,1],[0,1]] times the identity over the column axis.
        let f1 = ComplexTensor::new(
            vec![Axis::new(0, 2), Axis::new(1, 2)],
            vec![c(1.0), c(1.0), c(0.0), c(1.0)],
        )
        .unwrap();
        let f2 = ComplexTensor::new(
            vec![Axis::new(1, 2), Axis::new(2, 2)],
            vec![c(1.0), c(0.0), c(0.0), c(1.0)],
        )
        .unwrap();
        let out = f1.contract(&f2, &[1]).unwrap();
        assert_eq!(out.data(), &[c(1.0), c(1.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn contract_matches_loops_on_random_cubes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_tensor(&mut rng, vec![Axis::new(0, 2), Axis::new(1, 2), Axis::new(2, 2)]);
        let b = random_tensor(&mut rng, vec![Axis::new(3, 2), Axis::new(1, 2), Axis::new(4, 2)]);
        let out = a.contract(&b, &[1]).unwrap();
        assert_eq!(out.labels(), vec![0, 2, 3, 4]);
        for i in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    for m in 0..2 {
                        let mut expect = C64::new(0.0, 0.0);
                        for j in 0..2 {
                            expect += a.get(&[i, j, k]) * b.get(&[l, j, m]);
                        }
                        assert!((out.get(&[i, k, l, m]) - expect).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn size_mismatch_is_reported() {
        let a = ComplexTensor::zeros(vec![Axis::new(0, 2)]).unwrap();
        let b = ComplexTensor::zeros(vec![Axis::new(0, 3)]).unwrap();
        assert!(matches!(
            a.contract(&b, &[0]),
            Err(TensorError::Dimension { label: 0, left: 2, right: 3 })
        ));
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(matches!(
            ComplexTensor::new(vec![Axis::new(0, 2)], vec![c(1.0)]),
            Err(TensorError::Shape { .. })
        ));
        assert!(matches!(
            ComplexTensor::zeros(vec![Axis::new(0, 2), Axis::new(0, 2)]),
            Err(TensorError::DuplicateLabel(0))
        ));
    }

    #[test]
    fn network_of_two_identities_is_trace() {
        let id = |a, b| {
            ComplexTensor::new(
                vec![Axis::new(a, 2), Axis::new(b, 2)],
                vec![c(1.0), c(0.0), c(0.0), c(1.0)],
            )
            .unwrap()
        };
        let z = contract_network(vec![id(0, 1), id(0, 1)], 1 << 20).unwrap();
        assert_eq!(z, c(2.0));
    }

    #[test]
    fn open_network_is_an_error() {
        let t = ComplexTensor::zeros(vec![Axis::new(5, 2)]).unwrap();
        assert!(matches!(
            contract_network(vec![t], 100),
            Err(TensorError::OpenNetwork(5))
        ));
    }

    #[test]
    fn eigen_trivial_cases() {
        let e = hermitian_eigendecompose(&ChoiMatrix::new(CMatrix::identity(2)).unwrap());
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        let m = CMatrix::from_real(2, 2, &[2.0, 0.0, 0.0, 0.0]).unwrap();
        let e = hermitian_eigendecompose(&ChoiMatrix::new(m).unwrap());
        assert_eq!(e.eigenvalues, vec![2.0, 0.0]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(ChoiMatrix::new(m), Err(TensorError::NotHermitian(_))));
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&ChoiMatrix::new(CMatrix::identity(3)).unwrap(), TOL_PSD));
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        let ch = ChoiMatrix::new(m).unwrap();
        assert!(!is_psd(&ch, TOL_PSD));
        assert!((min_eigenvalue(&ch) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn kron_small_cases() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
        let a = CMatrix::column(&[c(1.0), c(0.0)]);
        let b = CMatrix::column(&[c(0.0), c(1.0)]);
        assert_eq!(kron(&a, &b).data(), &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn kron_matches_index_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CMatrix::from_fn(2, 2, |_, _| C64::new(rng.random(), rng.random()));
        let b = CMatrix::from_fn(2, 2, |_, _| C64::new(rng.random(), rng.random()));
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k.get(2 * i + p, 2 * j + q), a.get(i, j) * b.get(p, q));
                    }
                }
            }
        }
    }

    #[test]
    fn project_psd_clips_negative_part() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        let p = project_psd(&m);
        // eigenpairs 3 (1,1)/sqrt2 and -1 (1,-1)/sqrt2
        let expect = CMatrix::from_real(2, 2, &[1.5, 1.5, 1.5, 1.5]).unwrap();
        assert!(p.max_abs_diff(&expect) < 1e-12);
    }
}
