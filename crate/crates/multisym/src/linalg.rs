//! Dense complex matrix utilities shared by every other module.
//!
//! Everything here is dimension-generic and pure: vectorization and its
//! inverse, Kronecker and Hadamard products, the symmetric Fourier matrix,
//! the swap permutation, an SVD-based pseudoinverse and condition number,
//! and projection onto the PSD cone. Decompositions (SVD, Hermitian
//! eigensolve) are delegated to `nalgebra`; the matrix type itself and all
//! structural operations are local so the storage layout stays private.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::{Error, Result};

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Relative cutoff for treating singular values as zero:
/// `max(rows, cols) · ε · σ_max`, the conventional SVD threshold.
pub fn default_svd_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// A dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn from_vec(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![C64::ZERO; len],
        }
    }

    /// Computational basis vector |k⟩.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.data[k] = C64::ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, value: C64) {
        self.data[i] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.data.iter()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "hadamard product of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    pub fn conj(&self) -> Self {
        Self::from_vec(self.data.iter().map(|c| c.conj()).collect())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_vec(self.data.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "sum of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Outer product |self⟩⟨other|.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.len(), other.len(), |i, j| {
            self.data[i] * other.data[j].conj()
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// A dense complex matrix. Storage order is private; use `get`/`set`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    // Row-major.
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::ONE);
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

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    /// Pure-state density matrix |k⟩⟨k|.
    pub fn pure_state_density(dim: usize, k: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.set(k, k, C64::ONE);
        m
    }

    /// Maximally mixed state I/D.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Conjugate transpose A†.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sum")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "difference")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{what} of {}×{} and {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}×{} and {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == C64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "product of {}×{} matrix and length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let out = self
            .data
            .chunks_exact(self.cols)
            .map(|row| {
                let mut acc = C64::ZERO;
                for (a, b) in row.iter().zip(v.as_slice()) {
                    acc += a * b;
                }
                acc
            })
            .collect();
        Ok(ComplexVector::from_vec(out))
    }

    /// A† v without forming the adjoint.
    pub fn adjoint_matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.rows != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "adjoint product of {}×{} matrix and length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![C64::ZERO; self.cols];
        for i in 0..self.rows {
            let vi = v.get(i);
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (j, a) in row.iter().enumerate() {
                out[j] += a.conj() * vi;
            }
        }
        Ok(ComplexVector::from_vec(out))
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "trace of {}×{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "hermitian part of {}×{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        }))
    }

    /// Max deviation from Hermiticity, ‖A − A†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Kronecker product self ⊗ other.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a == C64::ZERO {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a * other.get(i2, j2),
                        );
                    }
                }
            }
        }
        out
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "hadamard product")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Column-stacking vectorization: vec(A) = Σ_j |j⟩ ⊗ A|j⟩.
///
/// Column j of A occupies the j-th contiguous block of the result.
pub fn vec_mat(a: &ComplexMatrix) -> Result<ComplexVector> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Empty("vec of an empty matrix".into()));
    }
    let mut out = Vec::with_capacity(a.rows() * a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            out.push(a.get(i, j));
        }
    }
    Ok(ComplexVector::from_vec(out))
}

/// Inverse of [`vec_mat`]: rebuild the matrix whose j-th column is the
/// j-th block of `v`.
pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "unvec of length-{} vector into {}×{}",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        v.get(j * rows + i)
    }))
}

/// Symmetric unitary Fourier matrix F[l][m] = e^{2πi·l·m/D}/√D.
///
/// The phase is computed from (l·m) mod D so the matrix is exactly
/// symmetric and the entries are as accurate as `sin`/`cos` allow.
pub fn fourier(dim: usize) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::DimensionTooSmall(0));
    }
    let norm = 1.0 / (dim as f64).sqrt();
    Ok(ComplexMatrix::from_fn(dim, dim, |l, m| {
        let phase = 2.0 * std::f64::consts::PI * ((l * m) % dim) as f64 / dim as f64;
        C64::from_polar(norm, phase)
    }))
}

/// D²×D² permutation matrix with S(|j⟩⊗|k⟩) = |k⟩⊗|j⟩.
pub fn swap_matrix(dim: usize) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::DimensionTooSmall(0));
    }
    let d2 = dim * dim;
    let mut s = ComplexMatrix::zeros(d2, d2);
    for j in 0..dim {
        for k in 0..dim {
            s.set(k * dim + j, j * dim + k, C64::ONE);
        }
    }
    Ok(s)
}

/// Singular values of A in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.all_finite() {
        return Err(Error::NonFinite("singular value input".into()));
    }
    let svd = nalgebra::linalg::SVD::try_new(a.to_nalgebra(), false, false, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Moore–Penrose pseudoinverse via SVD.
///
/// Singular values below `tol · σ_max` are treated as zero. Pass
/// `None` for the conventional cutoff `max(rows, cols) · ε`.
pub fn pinv(a: &ComplexMatrix, tol: Option<f64>) -> Result<ComplexMatrix> {
    if !a.all_finite() {
        return Err(Error::NonFinite("pseudoinverse input".into()));
    }
    let svd = nalgebra::linalg::SVD::try_new(a.to_nalgebra(), true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure)?;
    let u = svd.u.as_ref().ok_or(Error::SvdFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdFailure)?;
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = match tol {
        Some(t) => t * sigma_max,
        None => default_svd_cutoff(a.rows(), a.cols(), sigma_max),
    };
    // A⁺ = V Σ⁺ U† assembled column by column.
    let k = svd.singular_values.len();
    let mut inv_sigma = DVector::<C64>::zeros(k);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > cutoff && s > 0.0 {
            inv_sigma[i] = C64::new(1.0 / s, 0.0);
        }
    }
    let mut out = DMatrix::<C64>::zeros(a.cols(), a.rows());
    for i in 0..k {
        if inv_sigma[i] == C64::ZERO {
            continue;
        }
        // out += (1/σ_i) v_i u_i†
        for r in 0..a.cols() {
            let vri = v_t[(i, r)].conj();
            for c in 0..a.rows() {
                out[(r, c)] += inv_sigma[i] * vri * u[(c, i)].conj();
            }
        }
    }
    Ok(ComplexMatrix::from_nalgebra(&out))
}

/// Condition number σ_max/σ_min over all singular values.
///
/// Returns `f64::INFINITY` when σ_min falls below the default SVD cutoff,
/// so rank deficiency is distinguishable from merely large values.
pub fn cond(a: &ComplexMatrix) -> Result<f64> {
    let sv = singular_values(a)?;
    let sigma_max = sv[0];
    if sigma_max == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let sigma_min = *sv.last().unwrap();
    let cutoff = default_svd_cutoff(a.rows(), a.cols(), sigma_max);
    if sigma_min <= cutoff {
        return Ok(f64::INFINITY);
    }
    Ok(sigma_max / sigma_min)
}

/// Eigenvalues of the Hermitian part of A, ascending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = a.hermitian_part()?;
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.to_nalgebra(), f64::EPSILON, 0)
        .ok_or(Error::EigenFailure)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals)
}

/// A stack of Hermitian operators kept in vectorized form: the matrix Π̂
/// whose μ-th column is vec(Π_μ).
///
/// Expectation values against a state then collapse to one matrix-vector
/// product, tr(Π_μ ρ) = ⟨vec(Π_μ)|vec(ρ)⟩ — the fast path used wherever
/// the same operators are evaluated many times (forward probabilities,
/// likelihood and gradient evaluations).
#[derive(Debug, Clone)]
pub struct OperatorStack {
    dim: usize,
    // (D² × M), column μ = vec(Π_μ), stored row-major like ComplexMatrix.
    stacked: ComplexMatrix,
}

impl OperatorStack {
    pub fn new(operators: &[&ComplexMatrix]) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Empty("operator stack".into()));
        }
        let dim = operators[0].rows();
        for (i, op) in operators.iter().enumerate() {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "operator {i} is {}×{}, expected {dim}×{dim}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        let mut stacked = ComplexMatrix::zeros(dim * dim, operators.len());
        for (mu, op) in operators.iter().enumerate() {
            let v = vec_mat(op)?;
            for r in 0..dim * dim {
                stacked.set(r, mu, v.get(r));
            }
        }
        Ok(Self { dim, stacked })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.stacked.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.stacked.cols() == 0
    }

    /// Real parts of tr(Π_μ ρ) for every μ, via Π̂† vec(ρ). Exact for
    /// Hermitian Π_μ and ρ, where the traces are real.
    pub fn expectations(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "state is {}×{}, stack dimension is {}",
                rho.rows(),
                rho.cols(),
                self.dim
            )));
        }
        let rho_vec = vec_mat(rho)?;
        let prods = self.stacked.adjoint_matvec(&rho_vec)?;
        Ok(prods.iter().map(|c| c.re).collect())
    }

    /// Real-weighted operator sum Σ_μ w_μ Π_μ, via unvec(Π̂·w).
    pub fn weighted_sum(&self, weights: &[f64]) -> Result<ComplexMatrix> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} operators",
                weights.len(),
                self.len()
            )));
        }
        let w = ComplexVector::from_vec(weights.iter().map(|w| C64::new(*w, 0.0)).collect());
        let summed = self.stacked.matvec(&w)?;
        unvec(&summed, self.dim, self.dim)
    }
}

/// Nearest (Frobenius) positive semidefinite matrix to the Hermitian part
/// of A: eigendecompose, clip negative eigenvalues to zero, reassemble.
pub fn psd_project(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = a.hermitian_part()?;
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.to_nalgebra(), f64::EPSILON, 0)
        .ok_or(Error::EigenFailure)?;
    let n = h.rows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if lambda <= 0.0 {
            continue;
        }
        let col = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += C64::new(lambda, 0.0) * col[i] * col[j].conj();
            }
        }
    }
    Ok(ComplexMatrix::from_nalgebra(&out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn seeded_rng(seed: u64) -> impl FnMut() -> C64 {
        // Tiny deterministic generator for test matrices; avoids pulling
        // rand into every unit test.
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).max(1);
        move || {
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            C64::new(next(), next())
        }
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut gen = seeded_rng(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| gen())
    }

    #[test]
    fn vec_stacks_columns() {
        // [[1, 2], [3, 4]] column-stacked reads (1, 3, 2, 4).
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((1 + 2 * i + j) as f64, 0.0));
        let v = vec_mat(&a).unwrap();
        let expected = [1.0, 3.0, 2.0, 4.0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(v.get(i), c(*e, 0.0));
        }
    }

    #[test]
    fn vec_of_identity() {
        let v = vec_mat(&ComplexMatrix::identity(3)).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(v.get(i), c(*e, 0.0));
        }
    }

    #[test]
    fn vec_inner_product_is_trace() {
        // ⟨vec(A)|vec(B)⟩ = tr(A†B)
        let a = random_matrix(4, 4, 7);
        let b = random_matrix(4, 4, 8);
        let lhs = vec_mat(&a).unwrap().inner(&vec_mat(&b).unwrap()).unwrap();
        let rhs = a.adjoint().matmul(&b).unwrap().trace().unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn unvec_inverts_vec() {
        let v = ComplexVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let a = unvec(&v, 2, 2).unwrap();
        assert_eq!(a.get(0, 0), c(1.0, 0.0));
        assert_eq!(a.get(0, 1), c(2.0, 0.0));
        assert_eq!(a.get(1, 0), c(3.0, 0.0));
        assert_eq!(a.get(1, 1), c(4.0, 0.0));

        let m = random_matrix(5, 5, 3);
        let round = unvec(&vec_mat(&m).unwrap(), 5, 5).unwrap();
        assert_eq!(m, round);

        assert!(unvec(&v, 3, 2).is_err());
    }

    #[test]
    fn unvec_zero() {
        let z = unvec(&ComplexVector::zeros(9), 3, 3).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn vec_product_identities() {
        // vec(AB) = (I⊗A)vec(B) = (Bᵀ⊗I)vec(A)
        for (m, k, n, seed) in [(3, 3, 3, 1u64), (4, 2, 3, 2)] {
            let a = random_matrix(m, k, seed);
            let b = random_matrix(k, n, seed + 100);
            let ab = a.matmul(&b).unwrap();
            let lhs = vec_mat(&ab).unwrap();

            let i_n = ComplexMatrix::identity(n);
            let via_b = i_n.kron(&a).matvec(&vec_mat(&b).unwrap()).unwrap();
            let i_m = ComplexMatrix::identity(m);
            let via_a = b.transpose().kron(&i_m).matvec(&vec_mat(&a).unwrap()).unwrap();

            for i in 0..lhs.len() {
                assert!((lhs.get(i) - via_b.get(i)).norm() < 1e-12);
                assert!((lhs.get(i) - via_a.get(i)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_matches_hand_value_d2() {
        let f = fourier(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((f.get(0, 0) - c(s, 0.0)).norm() < 1e-15);
        assert!((f.get(0, 1) - c(s, 0.0)).norm() < 1e-15);
        assert!((f.get(1, 0) - c(s, 0.0)).norm() < 1e-15);
        assert!((f.get(1, 1) - c(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_unitary_and_symmetric() {
        for d in 2..=16 {
            let f = fourier(d).unwrap();
            let prod = f.matmul(&f.adjoint()).unwrap();
            assert!(
                prod.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-14,
                "D={d}"
            );
            // Exact symmetry, not approximate: entries are computed from
            // the same reduced phase for (l,m) and (m,l).
            assert_eq!(f, f.transpose(), "D={d}");
        }
        assert!(fourier(0).is_err());
    }

    #[test]
    fn swap_permutes_tensor_factors() {
        let s = swap_matrix(2).unwrap();
        let rows: [[f64; 4]; 4] = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for (i, row) in rows.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(s.get(i, j), c(*want, 0.0));
            }
        }

        for d in 2..=5 {
            let s = swap_matrix(d).unwrap();
            let sq = s.matmul(&s).unwrap();
            assert_eq!(sq, ComplexMatrix::identity(d * d), "S² = I for D={d}");
        }
    }

    #[test]
    fn swap_against_index_oracle() {
        // S vec-index oracle: S(e_j⊗e_k) = e_k⊗e_j elementwise for D=3.
        let d = 3;
        let s = swap_matrix(d).unwrap();
        for j in 0..d {
            for k in 0..d {
                let mut input = ComplexVector::zeros(d * d);
                input.set(j * d + k, C64::ONE);
                let out = s.matvec(&input).unwrap();
                for q in 0..d * d {
                    let expected = if q == k * d + j { C64::ONE } else { C64::ZERO };
                    assert_eq!(out.get(q), expected);
                }
            }
        }
    }

    #[test]
    fn pinv_diagonal_and_unitary() {
        let a = ComplexMatrix::diagonal(&[c(2.0, 0.0), c(0.0, 0.0)]);
        let p = pinv(&a, None).unwrap();
        assert!((p.get(0, 0) - c(0.5, 0.0)).norm() < 1e-14);
        assert!(p.get(1, 1).norm() < 1e-14);

        let f = fourier(4).unwrap();
        let p = pinv(&f, None).unwrap();
        assert!(p.max_abs_diff(&f.adjoint()) < 1e-13);
    }

    #[test]
    fn pinv_full_column_rank_left_inverse() {
        // Oracle: (A†A)⁻¹A† via explicit normal equations. For a random
        // 9×4 matrix both must act as a left inverse.
        let a = random_matrix(9, 4, 11);
        let p = pinv(&a, None).unwrap();
        let prod = p.matmul(&a).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-10);
    }

    #[test]
    fn pinv_penrose_identities() {
        for seed in 0..5u64 {
            let a = random_matrix(6, 4, 20 + seed);
            let p = pinv(&a, None).unwrap();
            let apa = a.matmul(&p).unwrap().matmul(&a).unwrap();
            assert!(apa.max_abs_diff(&a) < 1e-12);
            let ap = a.matmul(&p).unwrap();
            assert!(ap.max_abs_diff(&ap.adjoint()) < 1e-12);
            let pa = p.matmul(&a).unwrap();
            assert!(pa.max_abs_diff(&pa.adjoint()) < 1e-12);
        }
    }

    #[test]
    fn cond_basics() {
        let a = ComplexMatrix::diagonal(&[c(3.0, 0.0), c(1.0, 0.0)]);
        assert!((cond(&a).unwrap() - 3.0).abs() < 1e-12);

        let f = fourier(5).unwrap();
        assert!((cond(&f).unwrap() - 1.0).abs() < 1e-10);

        // Rank-deficient 4×4 → +∞ sentinel.
        let mut r = ComplexMatrix::zeros(4, 4);
        for i in 0..3 {
            r.set(i, i, C64::ONE);
        }
        assert!(cond(&r).unwrap().is_infinite());

        assert!(matches!(
            cond(&ComplexMatrix::zeros(3, 3)),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn psd_project_clips_negative_eigenvalues() {
        let a = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-0.5, 0.0)]);
        let p = psd_project(&a).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::diagonal(&[c(1.0, 0.0), C64::ZERO])) < 1e-14);
    }

    #[test]
    fn psd_project_fixed_point_and_distance() {
        // A PSD input maps to itself; for a general Hermitian input the
        // Frobenius distance equals the independently computed clipped tail.
        let g = random_matrix(5, 5, 31);
        let psd = g.matmul(&g.adjoint()).unwrap();
        let p = psd_project(&psd).unwrap();
        assert!(p.max_abs_diff(&psd) < 1e-12);

        let h = random_matrix(5, 5, 37).hermitian_part().unwrap();
        let proj = psd_project(&h).unwrap();
        let eigs = hermitian_eigenvalues(&proj).unwrap();
        assert!(eigs[0] >= -1e-12, "projection is PSD");
        let expected_dist_sq: f64 = hermitian_eigenvalues(&h)
            .unwrap()
            .iter()
            .filter(|l| **l < 0.0)
            .map(|l| l * l)
            .sum();
        let diff = proj.sub(&h).unwrap().frobenius_norm();
        assert!((diff * diff - expected_dist_sq).abs() < 1e-10);
    }

    #[test]
    fn vec_linearity() {
        let a = random_matrix(3, 4, 41);
        let b = random_matrix(3, 4, 43);
        let alpha = c(0.7, -0.2);
        let beta = c(-1.3, 0.4);
        let lhs = vec_mat(&a.scale(alpha).add(&b.scale(beta)).unwrap()).unwrap();
        let rhs = vec_mat(&a)
            .unwrap()
            .scale(alpha)
            .add(&vec_mat(&b).unwrap().scale(beta))
            .unwrap();
        for i in 0..lhs.len() {
            assert!((lhs.get(i) - rhs.get(i)).norm() < 1e-12);
        }
    }
}
