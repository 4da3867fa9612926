//! Dense complex-matrix kernel.
//!
//! Everything here is sized for desk-scale problems (dimension ≤ 32). Matrices
//! are stored row-major; the Hermitian eigensolver is backed by `nalgebra`.
//! All entropies are in bits.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Symmetry tolerance accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Tolerances of the [`DensityMatrix`] invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below this are rejected by [`mat_sqrt_psd`].
pub const PSD_TOL: f64 = 1e-8;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `-x log2 x` with `0 log 0 = 0`.
#[inline]
pub fn xlog2x_neg(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.log2()
    } else if x.is_nan() {
        x
    } else {
        0.0
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

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
            m[(i, i)] = c(1.0, 0.0);
        }
        m
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

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entry-wise deviation `|M - M†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Real part of `Tr(self · other)`.
    pub fn trace_product_re(&self, other: &Self) -> f64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let b = other[(k, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `⟨v|M|v⟩` (real part).
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                row += self[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in add"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in sub"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

/// Full spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Real eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the same order.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                if fl[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fl[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|l| l)
    }
}

/// Eigendecomposition without the symmetry check; the input is symmetrized.
pub(crate) fn eigh(m: &ComplexMatrix) -> Spectrum {
    let n = m.rows();
    if n == 1 {
        return Spectrum {
            eigenvalues: vec![m[(0, 0)].re],
            eigenvectors: ComplexMatrix::identity(1),
        };
    }
    // scaled to unit magnitude so tiny conditional states do not underflow
    let scale = (0..n * n)
        .map(|i| m[(i / n, i % n)].norm())
        .fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        let eigenvalues = if scale == 0.0 {
            vec![0.0; n]
        } else {
            vec![f64::NAN; n]
        };
        return Spectrum {
            eigenvalues,
            eigenvectors: ComplexMatrix::identity(n),
        };
    }
    let unit = ComplexMatrix::from_fn(n, n, |i, j| m[(i, j)] / scale);
    if n == 2 {
        let mut sp = eigh2(&unit);
        sp.eigenvalues.iter_mut().for_each(|l| *l *= scale);
        return sp;
    }
    let eig = nalgebra::SymmetricEigen::new(unit.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k] * scale).collect();
    let vecs = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Closed-form 2x2 Hermitian eigensystem.
fn eigh2(m: &ComplexMatrix) -> Spectrum {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let r = (half_diff * half_diff + b.norm_sqr()).sqrt();
    let (l1, l2) = (half_tr + r, half_tr - r);
    let eigenvectors = if b.norm() <= 1e-300 {
        if a >= d {
            ComplexMatrix::identity(2)
        } else {
            ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
        }
    } else {
        // (b, l - a) is an eigenvector for eigenvalue l; pick the better-conditioned form.
        let v1 = if half_diff >= 0.0 {
            [c(l1 - d, 0.0), b.conj()]
        } else {
            [b, c(l1 - a, 0.0)]
        };
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let v1 = [v1[0] / n1, v1[1] / n1];
        // orthogonal complement
        let v2 = [-v1[1].conj(), v1[0].conj()];
        ComplexMatrix::from_fn(2, 2, |i, j| if j == 0 { v1[i] } else { v2[i] })
    };
    Spectrum {
        eigenvalues: vec![l1, l2],
        eigenvectors,
    }
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(eigh(m))
}

/// Shannon entropy (bits) of a spectrum after clamping tiny negatives and renormalizing.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let clamped: Vec<f64> = eigenvalues.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    clamped.iter().map(|&l| xlog2x_neg(l / total)).sum()
}

/// `-Tr σ log2 σ` for an unnormalized PSD operator, negative eigenvalues clamped to zero.
pub(crate) fn entropy_unnormalized(m: &ComplexMatrix) -> f64 {
    if m.rows() == 1 {
        return xlog2x_neg(m[(0, 0)].re.max(0.0));
    }
    if m.rows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let h = 0.5 * (a - d);
        let r = (h * h + b.norm_sqr()).sqrt();
        let t = 0.5 * (a + d);
        return xlog2x_neg((t + r).max(0.0)) + xlog2x_neg((t - r).max(0.0));
    }
    eigh(m)
        .eigenvalues
        .iter()
        .map(|&l| xlog2x_neg(l.max(0.0)))
        .sum()
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s.re == 0.0 && s.im == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two kets.
pub fn tensor_ket(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Which factor of a bipartite operator to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `C^{dim_a} ⊗ C^{dim_b}`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on {dim_a}x{dim_b} system",
            m.rows(),
            m.cols()
        )));
    }
    Ok(match keep {
        Keep::A => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Keep::B => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    })
}

/// Partial trace over a multipartite register list; `keep` lists the retained
/// factors in ascending order.
pub fn partial_trace_multi(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let n: usize = dims.iter().product();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on registers {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "bad register selection {keep:?}"
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();
    // index of a full multi-index
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut r = kept_idx;
        for &k in keep.iter().rev() {
            digits[k] = r % dims[k];
            r /= dims[k];
        }
        let mut r = traced_idx;
        for &k in traced.iter().rev() {
            digits[k] = r % dims[k];
            r /= dims[k];
        }
        digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
    };
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for t in 0..traced_dim {
        let idx: Vec<usize> = (0..kept_dim).map(|i| compose(i, t)).collect();
        for i in 0..kept_dim {
            for j in 0..kept_dim {
                out[(i, j)] += m[(idx[i], idx[j])];
            }
        }
    }
    Ok(out)
}

/// Hermitian PSD square root.
pub fn mat_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(m)?;
    if let Some(&min) = spec.eigenvalues.last() {
        if min < -PSD_TOL {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(spec.apply(|l| l.max(0.0).sqrt()))
}

/// Complex Hermitian positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the state invariants and stores the exact Hermitian part.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "{}x{} is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "Hermitian deviation {dev:.3e}"
            )));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let matrix = matrix.hermitian_part();
        let min = eigh(&matrix).eigenvalues.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Rescales a PSD operator to unit trace before validating.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("non-positive trace {tr}")));
        }
        Self::new(matrix.scale(1.0 / tr))
    }

    /// `|ψ⟩⟨ψ|` for a ket, normalized here.
    pub fn from_ket(ket: &[C64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if ket.is_empty() || !(norm > 0.0) {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let v: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: ComplexMatrix::outer(&v).hermitian_part(),
        })
    }

    pub fn from_real_ket(ket: &[f64]) -> Result<Self> {
        let v: Vec<C64> = ket.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_ket(&v)
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(i, i)] = c(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(probs))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.purity() >= 1.0 - tol
    }

    pub fn spectrum(&self) -> Spectrum {
        eigh(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        vn_entropy(self)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }

    /// Trusted constructor for operators already known to be states.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.spectrum().eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h2(p: f64) -> f64 {
        xlog2x_neg(p) + xlog2x_neg(1.0 - p)
    }

    fn plus() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(s, 0.0), c(s, 0.0)]
    }

    #[test]
    fn eig_identity_and_projector() {
        let s = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15 && (s.eigenvalues[1] - 1.0).abs() < 1e-15);
        let s = eig_hermitian(DensityMatrix::basis(2, 0).matrix()).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15 && s.eigenvalues[1].abs() < 1e-15);
    }

    #[test]
    fn eig_two_state_average() {
        let mut avg = DensityMatrix::basis(2, 0).into_matrix().scale(0.5);
        avg.add_scaled(&ComplexMatrix::outer(&plus()), 0.5);
        let s = eig_hermitian(&avg).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.eigenvalues[0] - (1.0 + r) / 2.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - (1.0 - r) / 2.0).abs() < 1e-12);
        assert!((s.eigenvalues[0] - 0.85355).abs() < 1e-5);
    }

    #[test]
    fn eig_tiny_magnitudes() {
        for n in [2, 3] {
            let tiny = ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    c(3e-175, 0.0)
                } else {
                    c(1e-175, 0.5e-175)
                }
            });
            let sp = eigh(&tiny);
            assert!(
                sp.eigenvalues.iter().all(|l| l.is_finite() && *l > 0.0),
                "{:?}",
                sp.eigenvalues
            );
            assert!((sp.eigenvalues.iter().sum::<f64>() - 3e-175 * n as f64).abs() < 1e-188);
            assert!((0..n * n).all(|i| sp.eigenvectors[(i / n, i % n)].norm().is_finite()));
        }
        assert_eq!(eigh(&ComplexMatrix::zeros(3, 3)).eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            eig_hermitian(&m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert!((vn_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-12);
        assert!(vn_entropy(&DensityMatrix::basis(2, 0)).abs() < 1e-12);
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert!((vn_entropy(&rho) - 0.811278).abs() < 1e-6);
        assert!((vn_entropy(&rho) - h2(0.25)).abs() < 1e-12);
    }

    #[test]
    fn entropy_clamps_tiny_negatives() {
        assert!((spectrum_entropy(&[1.0 + 1e-11, -1e-11]) - 0.0).abs() < 1e-9);
    }

    #[test]
    fn tensor_examples() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
        let t = tensor(
            DensityMatrix::basis(2, 0).matrix(),
            DensityMatrix::basis(2, 1).matrix(),
        );
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(t[(i, j)], c(expect, 0.0));
            }
        }
        let t = tensor(
            &ComplexMatrix::from_real_diag(&[2.0, 3.0]),
            &ComplexMatrix::from_real_diag(&[5.0, 7.0]),
        );
        let d: Vec<f64> = (0..4).map(|i| t[(i, i)].re).collect();
        assert_eq!(d, vec![10.0, 14.0, 15.0, 21.0]);
    }

    #[test]
    fn partial_trace_bell_and_product() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::outer(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let red = partial_trace(&bell, 2, 2, Keep::A).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);

        let rho = ComplexMatrix::from_real_diag(&[0.3, 0.7]);
        let sigma = ComplexMatrix::outer(&plus()).scale(2.0);
        let prod = tensor(&rho, &sigma);
        let ra = partial_trace(&prod, 2, 2, Keep::A).unwrap();
        assert!(ra.max_abs_diff(&rho.scale(2.0)) < 1e-14);
        let rb = partial_trace(&prod, 2, 2, Keep::B).unwrap();
        assert!(rb.max_abs_diff(&sigma) < 1e-14);
        assert!(matches!(
            partial_trace(&prod, 3, 2, Keep::A),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_trace_cq_state() {
        // Σ_x p(x)|x⟩⟨x| ⊗ ρ_x for {|0⟩, |+⟩}
        let mut m = tensor(
            DensityMatrix::basis(2, 0).matrix(),
            DensityMatrix::basis(2, 0).matrix(),
        )
        .scale(0.5);
        m.add_scaled(
            &tensor(
                DensityMatrix::basis(2, 1).matrix(),
                &ComplexMatrix::outer(&plus()),
            ),
            0.5,
        );
        let avg = partial_trace(&m, 2, 2, Keep::B).unwrap();
        let s = eig_hermitian(&avg).unwrap();
        assert!((s.eigenvalues[0] - 0.853553).abs() < 1e-6);
        assert!((s.eigenvalues[1] - 0.146447).abs() < 1e-6);
    }

    #[test]
    fn partial_trace_multi_matches_bipartite() {
        let a = ComplexMatrix::from_real_diag(&[0.2, 0.8]);
        let b = ComplexMatrix::outer(&plus());
        let cc = ComplexMatrix::from_real_diag(&[0.1, 0.3, 0.6]);
        let abc = tensor(&tensor(&a, &b), &cc);
        let kept = partial_trace_multi(&abc, &[2, 2, 3], &[0, 2]).unwrap();
        assert!(kept.max_abs_diff(&tensor(&a, &cc)) < 1e-14);
        let kept = partial_trace_multi(&abc, &[2, 2, 3], &[1]).unwrap();
        assert!(kept.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn sqrt_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert!(mat_sqrt_psd(&i2).unwrap().max_abs_diff(&i2) < 1e-14);
        let r = mat_sqrt_psd(&ComplexMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diag(&[2.0, 3.0])) < 1e-14);
        let p = ComplexMatrix::outer(&plus());
        assert!(mat_sqrt_psd(&p).unwrap().max_abs_diff(&p) < 1e-12);
        assert!(matches!(
            mat_sqrt_psd(&ComplexMatrix::from_real_diag(&[1.0, -0.1])),
            Err(Error::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.4, 0.6])).is_ok());
    }

    fn arb_hermitian(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        (1..=max_dim).prop_flat_map(|n| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
                let raw = ComplexMatrix::new(n, n, v.into_iter().map(|(a, b)| c(a, b)).collect())
                    .unwrap();
                raw.hermitian_part()
            })
        })
    }

    fn arb_state(max_dim: usize) -> impl Strategy<Value = DensityMatrix> {
        arb_hermitian(max_dim).prop_map(|h| {
            let g = &h * &h.adjoint();
            DensityMatrix::from_unnormalized(&g + &ComplexMatrix::identity(g.rows()).scale(1e-3))
                .unwrap()
        })
    }

    fn unitary_from(h: &ComplexMatrix) -> ComplexMatrix {
        // exp(iH) via the spectral decomposition
        let s = eigh(h);
        let n = h.rows();
        let v = &s.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * C64::from_polar(1.0, s.eigenvalues[k]))
                .sum()
        })
    }

    proptest! {
        #[test]
        fn eig_reconstructs(h in arb_hermitian(8)) {
            let s = eig_hermitian(&h).unwrap();
            prop_assert!((&s.reconstruct() - &h).frobenius_norm() <= 1e-9);
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let v = &s.eigenvectors;
            let gram = &v.adjoint() * v;
            prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(h.rows())) < 1e-9);
        }

        #[test]
        fn entropy_additive_on_products(a in arb_state(3), b in arb_state(3)) {
            let lhs = vn_entropy(&a.tensor(&b));
            prop_assert!((lhs - vn_entropy(&a) - vn_entropy(&b)).abs() <= 1e-9);
        }

        #[test]
        fn entropy_unitarily_invariant(rho in arb_state(4), seed in arb_hermitian(4)) {
            prop_assume!(seed.rows() == rho.dim());
            let u = unitary_from(&seed);
            let rotated = DensityMatrix::new(&(&u * rho.matrix()) * &u.adjoint()).unwrap();
            prop_assert!((vn_entropy(&rotated) - vn_entropy(&rho)).abs() <= 1e-9);
        }

        #[test]
        fn partial_trace_of_products(a in arb_hermitian(3), b in arb_hermitian(3)) {
            let prod = tensor(&a, &b);
            let (da, db) = (a.rows(), b.rows());
            let ra = partial_trace(&prod, da, db, Keep::A).unwrap();
            prop_assert!(ra.max_abs_diff(&a.scale_c(b.trace())) <= 1e-10);
            let rb = partial_trace(&prod, da, db, Keep::B).unwrap();
            prop_assert!(rb.max_abs_diff(&b.scale_c(a.trace())) <= 1e-10);
        }

        #[test]
        fn sqrt_squares_back(rho in arb_state(5)) {
            let r = mat_sqrt_psd(rho.matrix()).unwrap();
            prop_assert!((&(&r * &r) - rho.matrix()).frobenius_norm() <= 1e-8);
        }
    }
}
