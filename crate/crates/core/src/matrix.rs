//! Dense complex matrices and row vectors.
//!
//! Matrices are stored row-major; module elements of (C^N)^m are row vectors
//! acted on by Mat(N) from the right. JSON serialization renders a matrix as
//! a nested array of rows and every complex scalar as a `[re, im]` pair.

use crate::error::{CalcError, Result};
use crate::tol::Tolerance;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Creates a matrix from row-major data; `data.len()` must be `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CalcError::Shape("matrix dimensions must be nonzero".into()));
        }
        if data.len() != rows * cols {
            return Err(CalcError::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Square diagonal matrix with the given diagonal entries.
    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds a matrix from rows, which must be nonempty and of equal length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(CalcError::Shape("matrix rows must be nonempty".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CalcError::Shape("matrix rows have unequal lengths".into()));
        }
        let nrows = rows.len();
        Ok(Self {
            rows: nrows,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
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
    pub fn get(&self, r: usize, c: usize) -> C64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    /// Row `r` as a vector.
    pub fn row(&self, r: usize) -> CVector {
        CVector(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CalcError::Shape(format!(
                "cannot {what} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(CalcError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(CalcError::Shape("trace requires a square matrix".into()));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise comparison at the threshold `tol.threshold(scale)` where
    /// `scale` is the larger `max_abs` of the two operands.
    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let thr = tol.threshold(self.max_abs().max(other.max_abs()));
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a - b).norm() <= thr)
    }

    /// Entrywise zero test at the threshold `tol.threshold(1)`.
    pub fn approx_zero(&self, tol: &Tolerance) -> bool {
        self.max_abs() <= tol.threshold(0.0)
    }

    /// `max |(A - A†)_{rc}|`; zero for hermitian matrices.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `max |(A + A†)_{rc}|`; zero for anti-hermitian matrices.
    pub fn anti_hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                worst = worst.max((self.get(r, c) + self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.is_square() && self.hermitian_residual() <= tol.threshold(self.max_abs())
    }

    pub fn is_anti_hermitian(&self, tol: &Tolerance) -> bool {
        self.is_square() && self.anti_hermitian_residual() <= tol.threshold(self.max_abs())
    }

    /// `max |(A†A - 1)_{rc}|`; zero for unitary matrices.
    pub fn unitary_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.adjoint().matmul(self).expect("square product");
        gram.sub(&Self::identity(self.rows)).expect("same shape").max_abs()
    }

    pub fn is_unitary(&self, tol: &Tolerance) -> bool {
        self.is_square() && self.unitary_residual() <= tol.threshold(1.0)
    }

    /// Copy of the submatrix starting at `(r0, c0)` with shape `nr x nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Result<Self> {
        if r0 + nr > self.rows || c0 + nc > self.cols {
            return Err(CalcError::Shape("block exceeds matrix bounds".into()));
        }
        let mut out = Self::zeros(nr, nc);
        for r in 0..nr {
            for c in 0..nc {
                out.set(r, c, self.get(r0 + r, c0 + c));
            }
        }
        Ok(out)
    }

    /// Writes `m` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Self) -> Result<()> {
        if r0 + m.rows > self.rows || c0 + m.cols > self.cols {
            return Err(CalcError::Shape("block exceeds matrix bounds".into()));
        }
        for r in 0..m.rows {
            for c in 0..m.cols {
                self.set(r0 + r, c0 + c, m.get(r, c));
            }
        }
        Ok(())
    }

    /// Inverse via LU decomposition; `None` for singular or non-square input.
    pub fn try_inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        self.to_na().try_inverse().map(Self::from_na)
    }

    pub(crate) fn to_na(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().copied())
    }

    pub(crate) fn from_na(m: nalgebra::DMatrix<C64>) -> Self {
        let (rows, cols) = m.shape();
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, m[(r, c)]);
            }
        }
        out
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[C64]> = self.data.chunks(self.cols).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(deserializer)?;
        ComplexMatrix::from_rows(rows).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Commutator `[A, B] = AB - BA` of square matrices of equal size.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(CalcError::Shape(format!(
            "commutator requires equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// Kronecker product; block `(i, j)` of the result is `a[i][j] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let s = a.get(i, j);
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    out.set(i * b.rows() + r, j * b.cols() + c, s * b.get(r, c));
                }
            }
        }
    }
    out
}

/// Block-diagonal direct sum of a nonempty list of square matrices.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if blocks.is_empty() {
        return Err(CalcError::Shape("direct sum of an empty list".into()));
    }
    if blocks.iter().any(|b| !b.is_square()) {
        return Err(CalcError::Shape("direct sum requires square blocks".into()));
    }
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.set_block(off, off, b)?;
        off += b.rows();
    }
    Ok(out)
}

/// Complex row vector; module elements of (C^N)^m are stored this way with
/// length N*m and act from slot blocks of length N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector(pub Vec<C64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        Self(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(CalcError::Shape("vector length mismatch in add".into()));
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(CalcError::Shape("vector length mismatch in sub".into()));
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// Row-vector times matrix, `v * M`.
    pub fn mat_mul(&self, m: &ComplexMatrix) -> Result<Self> {
        if self.len() != m.rows() {
            return Err(CalcError::Shape(format!(
                "cannot multiply length-{} row vector by {}x{} matrix",
                self.len(),
                m.rows(),
                m.cols()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); m.cols()];
        for (k, &vk) in self.0.iter().enumerate() {
            if vk == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += vk * m.get(k, j);
            }
        }
        Ok(Self(out))
    }

    /// Scalar `u * v†` (conjugates the right factor); `u.dot_dagger(u)` is `||u||^2`.
    pub fn dot_dagger(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Matrix `u† * v`: column `u†` times row `v`, entry `(i, j) = conj(u_i) v_j`.
    pub fn dagger_dot(&self, other: &Self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.len(), other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                out.set(i, j, self.0[i].conj() * other.0[j]);
            }
        }
        out
    }

    /// Copy of block `idx` when the vector is split into blocks of `block_len`.
    pub fn block(&self, idx: usize, block_len: usize) -> Result<Self> {
        let start = idx * block_len;
        if start + block_len > self.len() {
            return Err(CalcError::Shape("vector block out of range".into()));
        }
        Ok(Self(self.0[start..start + block_len].to_vec()))
    }

    /// Writes `v` into block `idx` of blocks of length `v.len()`.
    pub fn set_block(&mut self, idx: usize, v: &Self) -> Result<()> {
        let start = idx * v.len();
        if start + v.len() > self.len() {
            return Err(CalcError::Shape("vector block out of range".into()));
        }
        self.0[start..start + v.len()].copy_from_slice(&v.0);
        Ok(())
    }

    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let thr = tol.threshold(self.max_abs().max(other.max_abs()));
        self.0.iter().zip(&other.0).all(|(a, b)| (a - b).norm() <= thr)
    }

    /// Zero test at the threshold `tol.threshold(1)`.
    pub fn approx_zero(&self, tol: &Tolerance) -> bool {
        self.norm() <= tol.threshold(0.0)
    }

    /// Unit vector in the same direction; `None` when the norm is below `tol`.
    pub fn normalized(&self, tol: &Tolerance) -> Option<Self> {
        let n = self.norm();
        if n <= tol.threshold(0.0) {
            return None;
        }
        Some(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// The 1 x len matrix with this vector as its only row.
    pub fn as_row_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(1, self.len(), self.0.clone()).expect("nonempty row")
    }
}

/// Completes a nonzero vector to a unitary matrix whose first row is
/// `v / ||v||`. Remaining rows are chosen from the standard basis by largest
/// residual and re-orthonormalized, so the result is well conditioned.
pub fn unitary_with_first_row(v: &CVector, tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = v.len();
    let Some(first) = v.normalized(tol) else {
        return Err(CalcError::Degenerate("cannot extend the zero vector to a unitary".into()));
    };
    let mut rows: Vec<CVector> = vec![first];
    while rows.len() < n {
        // Pick the standard basis vector with the largest component outside
        // the span of the rows chosen so far.
        let mut best: Option<(f64, CVector)> = None;
        for j in 0..n {
            let mut e = CVector::zeros(n);
            e.0[j] = C64::new(1.0, 0.0);
            let mut r = e;
            for row in &rows {
                let c = r.dot_dagger(row);
                r = r.sub(&row.scale(c))?;
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("n > 0");
        if norm <= tol.threshold(0.0) {
            return Err(CalcError::Degenerate("unitary completion lost rank".into()));
        }
        // Second orthogonalization pass for numerical orthogonality.
        let mut r2 = r;
        for row in &rows {
            let c = r2.dot_dagger(row);
            r2 = r2.sub(&row.scale(c))?;
        }
        rows.push(r2.normalized(tol).expect("nonzero residual"));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for j in 0..n {
            out.set(i, j, row.0[j]);
        }
    }
    Ok(out)
}
