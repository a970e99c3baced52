//! Dense complex matrices stored as paired real parts.
//!
//! Every matrix-valued quantity in the system (channels, precoders, pilots,
//! receive filters, weights, codewords) lives in a [`ComplexMatrix`]: a
//! row-major pair of real buffers, one for the real and one for the
//! imaginary part. Matrices here are small (tens of rows at most), so all
//! kernels are straightforward dense loops; there is no blocking, no BLAS,
//! and no sparse storage.
//!
//! [`RealMatrix`] is the plain real counterpart used by the neural layers
//! and the autodiff tape.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Relative pivot threshold below which LU factorization reports singularity.
const SINGULAR_PIVOT_RTOL: f64 = 1e-13;

/// Errors from dense linear algebra kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Operand shapes do not chain for the requested operation.
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// LU pivot fell below the singularity threshold; carries the offending
    /// pivot magnitude.
    Singular { pivot: f64 },
    /// Cholesky found a non-positive (or non-real) diagonal; carries the
    /// offending value.
    NotPositiveDefinite { diag: f64 },
    /// A result contained NaN or infinity.
    NonFinite { op: &'static str },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::ShapeMismatch { op, lhs, rhs } => write!(
                f,
                "{op}: shape mismatch {}x{} vs {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "square matrix required, got {rows}x{cols}")
            }
            LinalgError::Singular { pivot } => {
                write!(f, "matrix singular to working precision (pivot {pivot:.3e})")
            }
            LinalgError::NotPositiveDefinite { diag } => {
                write!(f, "matrix not Hermitian positive definite (diag {diag:.3e})")
            }
            LinalgError::NonFinite { op } => write!(f, "{op}: non-finite result"),
        }
    }
}

impl core::error::Error for LinalgError {}

pub type Result<T> = core::result::Result<T, LinalgError>;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn scalar(v: f64) -> Self {
        Self::from_vec(1, 1, vec![v])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// `out += a * b` (no transpose). Shapes must already agree.
pub(crate) fn real_matmul_nn(a: &RealMatrix, b: &RealMatrix, out: &mut RealMatrix) {
    debug_assert_eq!(a.cols, b.rows);
    debug_assert_eq!(out.rows, a.rows);
    debug_assert_eq!(out.cols, b.cols);
    let n = b.cols;
    for i in 0..a.rows {
        let arow = &a.data[i * a.cols..(i + 1) * a.cols];
        let orow = &mut out.data[i * n..(i + 1) * n];
        for (k, &aik) in arow.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let brow = &b.data[k * n..(k + 1) * n];
            for j in 0..n {
                orow[j] += aik * brow[j];
            }
        }
    }
}

/// `out += a^T * b`.
pub(crate) fn real_matmul_tn(a: &RealMatrix, b: &RealMatrix, out: &mut RealMatrix) {
    debug_assert_eq!(a.rows, b.rows);
    debug_assert_eq!(out.rows, a.cols);
    debug_assert_eq!(out.cols, b.cols);
    let n = b.cols;
    for k in 0..a.rows {
        let arow = &a.data[k * a.cols..(k + 1) * a.cols];
        let brow = &b.data[k * n..(k + 1) * n];
        for (i, &aki) in arow.iter().enumerate() {
            if aki == 0.0 {
                continue;
            }
            let orow = &mut out.data[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += aki * brow[j];
            }
        }
    }
}

/// `out += a * b^T`.
pub(crate) fn real_matmul_nt(a: &RealMatrix, b: &RealMatrix, out: &mut RealMatrix) {
    debug_assert_eq!(a.cols, b.cols);
    debug_assert_eq!(out.rows, a.rows);
    debug_assert_eq!(out.cols, b.rows);
    for i in 0..a.rows {
        let arow = &a.data[i * a.cols..(i + 1) * a.cols];
        let orow = &mut out.data[i * b.rows..(i + 1) * b.rows];
        for j in 0..b.rows {
            let brow = &b.data[j * b.cols..(j + 1) * b.cols];
            let mut acc = 0.0;
            for k in 0..a.cols {
                acc += arow[k] * brow[k];
            }
            orow[j] += acc;
        }
    }
}

/// Dense complex matrix as paired row-major real buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            re: vec![0.0; rows * cols],
            im: vec![0.0; rows * cols],
        }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_parts(rows: usize, cols: usize, re: Vec<f64>, im: Vec<f64>) -> Self {
        assert_eq!(re.len(), rows * cols);
        assert_eq!(im.len(), rows * cols);
        Self { rows, cols, re, im }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let z = f(r, c);
                m.re[r * cols + c] = z.re;
                m.im[r * cols + c] = z.im;
            }
        }
        m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let i = r * self.cols + c;
        Complex64::new(self.re[i], self.im[i])
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: Complex64) {
        let i = r * self.cols + c;
        self.re[i] = z.re;
        self.im[i] = z.im;
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(self.im.iter()).all(|v| v.is_finite())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.re.len() {
            let a = (self.re[i] * self.re[i] + self.im[i] * self.im[i]).sqrt();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Complex matrix product.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(LinalgError::ShapeMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        let n = rhs.cols;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let ar = self.re[i * self.cols + k];
                let ai = self.im[i * self.cols + k];
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let bre = &rhs.re[k * n..(k + 1) * n];
                let bim = &rhs.im[k * n..(k + 1) * n];
                let ore = &mut out.re[i * n..(i + 1) * n];
                let oim = &mut out.im[i * n..(i + 1) * n];
                for j in 0..n {
                    ore[j] += ar * bre[j] - ai * bim[j];
                    oim[j] += ar * bim[j] + ai * bre[j];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let j = c * self.rows + r;
                out.re[j] = self.re[i];
                out.im[j] = -self.im[i];
            }
        }
        out
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let j = c * self.rows + r;
                out.re[j] = self.re[i];
                out.im[j] = self.im[i];
            }
        }
        out
    }

    pub fn conj(&self) -> ComplexMatrix {
        let mut out = self.clone();
        for v in out.im.iter_mut() {
            *v = -*v;
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::ShapeMismatch {
                op: "add",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = self.clone();
        for i in 0..out.re.len() {
            out.re[i] += rhs.re[i];
            out.im[i] += rhs.im[i];
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::ShapeMismatch {
                op: "sub",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = self.clone();
        for i in 0..out.re.len() {
            out.re[i] -= rhs.re[i];
            out.im[i] -= rhs.im[i];
        }
        Ok(out)
    }

    /// Scale by a real factor.
    pub fn scale(&self, s: f64) -> ComplexMatrix {
        let mut out = self.clone();
        for v in out.re.iter_mut() {
            *v *= s;
        }
        for v in out.im.iter_mut() {
            *v *= s;
        }
        out
    }

    /// `self + s * I` for real `s`; requires square.
    pub fn add_scaled_eye(&self, s: f64) -> Result<ComplexMatrix> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            out.re[i * self.cols + i] += s;
        }
        Ok(out)
    }

    /// Real part of the trace.
    ///
    /// In debug builds, a numerically Hermitian argument must carry a
    /// negligible imaginary trace.
    pub fn trace_real(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut tr = 0.0;
        let mut ti = 0.0;
        for i in 0..self.rows {
            tr += self.re[i * self.cols + i];
            ti += self.im[i * self.cols + i];
        }
        #[cfg(debug_assertions)]
        if self.is_hermitian(1e-10) {
            debug_assert!(
                ti.abs() < 1e-12 * tr.abs().max(1.0),
                "Hermitian trace has imaginary part {ti:.3e}"
            );
        }
        let _ = ti;
        Ok(tr)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.max_abs().max(1.0);
        for r in 0..self.rows {
            for c in r..self.cols {
                let a = self.get(r, c);
                let b = self.get(c, r);
                if (a.re - b.re).abs() > tol * scale || (a.im + b.im).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn fro_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.re.len() {
            s += self.re[i] * self.re[i] + self.im[i] * self.im[i];
        }
        s
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    /// Inverse by complex LU with partial pivoting.
    ///
    /// The contract is the residual bound `|AX - I|_F <= 1e-10 |A|_F |X|_F`;
    /// a pivot below `1e-13 * max|A|` reports [`LinalgError::Singular`] with
    /// the pivot magnitude.
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let threshold = SINGULAR_PIVOT_RTOL * self.max_abs();

        // Working copy factored in place; perm records row exchanges.
        let mut lre = self.re.clone();
        let mut lim = self.im.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            // Partial pivot on |a|.
            let mut best = col;
            let mut best_mag = lre[col * n + col] * lre[col * n + col]
                + lim[col * n + col] * lim[col * n + col];
            for r in (col + 1)..n {
                let mag = lre[r * n + col] * lre[r * n + col] + lim[r * n + col] * lim[r * n + col];
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            let pivot_mag = best_mag.sqrt();
            if pivot_mag < threshold || pivot_mag == 0.0 {
                return Err(LinalgError::Singular { pivot: pivot_mag });
            }
            if best != col {
                for j in 0..n {
                    lre.swap(col * n + j, best * n + j);
                    lim.swap(col * n + j, best * n + j);
                }
                perm.swap(col, best);
            }
            // Eliminate below the pivot.
            let pr = lre[col * n + col];
            let pi = lim[col * n + col];
            let pmag2 = pr * pr + pi * pi;
            for r in (col + 1)..n {
                let ar = lre[r * n + col];
                let ai = lim[r * n + col];
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                // factor = a / pivot
                let fr = (ar * pr + ai * pi) / pmag2;
                let fi = (ai * pr - ar * pi) / pmag2;
                lre[r * n + col] = fr;
                lim[r * n + col] = fi;
                for j in (col + 1)..n {
                    let ur = lre[col * n + j];
                    let ui = lim[col * n + j];
                    lre[r * n + j] -= fr * ur - fi * ui;
                    lim[r * n + j] -= fr * ui + fi * ur;
                }
            }
        }

        // Solve A X = I column by column: P A = L U.
        let mut out = ComplexMatrix::zeros(n, n);
        let mut xr = vec![0.0; n];
        let mut xi = vec![0.0; n];
        for rhs_col in 0..n {
            // Forward substitution with unit-diagonal L on permuted e_{rhs_col}.
            for i in 0..n {
                let mut sr = if perm[i] == rhs_col { 1.0 } else { 0.0 };
                let mut si = 0.0;
                for k in 0..i {
                    let lr = lre[i * n + k];
                    let li = lim[i * n + k];
                    sr -= lr * xr[k] - li * xi[k];
                    si -= lr * xi[k] + li * xr[k];
                }
                xr[i] = sr;
                xi[i] = si;
            }
            // Back substitution with U.
            for i in (0..n).rev() {
                let mut sr = xr[i];
                let mut si = xi[i];
                for k in (i + 1)..n {
                    let ur = lre[i * n + k];
                    let ui = lim[i * n + k];
                    sr -= ur * xr[k] - ui * xi[k];
                    si -= ur * xi[k] + ui * xr[k];
                }
                let dr = lre[i * n + i];
                let di = lim[i * n + i];
                let dmag2 = dr * dr + di * di;
                xr[i] = (sr * dr + si * di) / dmag2;
                xi[i] = (si * dr - sr * di) / dmag2;
            }
            for r in 0..n {
                out.re[r * n + rhs_col] = xr[r];
                out.im[r * n + rhs_col] = xi[r];
            }
        }
        if !out.is_finite() {
            return Err(LinalgError::NonFinite { op: "inverse" });
        }
        Ok(out)
    }

    /// Natural-log determinant of a Hermitian positive definite matrix via
    /// complex Cholesky.
    pub fn logdet_hpd(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if !self.is_hermitian(1e-8) {
            return Err(LinalgError::NotPositiveDefinite { diag: f64::NAN });
        }
        let n = self.rows;
        let mut lre = vec![0.0; n * n];
        let mut lim = vec![0.0; n * n];
        let mut logdet = 0.0;
        for j in 0..n {
            let mut d = self.re[j * n + j];
            for k in 0..j {
                d -= lre[j * n + k] * lre[j * n + k] + lim[j * n + k] * lim[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { diag: d });
            }
            let djj = d.sqrt();
            lre[j * n + j] = djj;
            logdet += 2.0 * djj.ln();
            for i in (j + 1)..n {
                let mut sr = self.re[i * n + j];
                let mut si = self.im[i * n + j];
                for k in 0..j {
                    // L[i][k] * conj(L[j][k])
                    let ar = lre[i * n + k];
                    let ai = lim[i * n + k];
                    let br = lre[j * n + k];
                    let bi = -lim[j * n + k];
                    sr -= ar * br - ai * bi;
                    si -= ar * bi + ai * br;
                }
                lre[i * n + j] = sr / djj;
                lim[i * n + j] = si / djj;
            }
        }
        Ok(logdet)
    }

    /// Base-2 log determinant of an HPD matrix.
    pub fn logdet2_hpd(&self) -> Result<f64> {
        Ok(self.logdet_hpd()? / core::f64::consts::LN_2)
    }

    /// `ln |det(A)|` for a general square matrix via LU with partial
    /// pivoting. Used for log-det of matrices that are only Hermitian up to
    /// rounding, where the Cholesky route would be a circular check.
    pub fn logdet_abs(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let threshold = SINGULAR_PIVOT_RTOL * self.max_abs();
        let mut lre = self.re.clone();
        let mut lim = self.im.clone();
        let mut logdet = 0.0;
        for col in 0..n {
            let mut best = col;
            let mut best_mag = lre[col * n + col] * lre[col * n + col]
                + lim[col * n + col] * lim[col * n + col];
            for r in (col + 1)..n {
                let mag = lre[r * n + col] * lre[r * n + col] + lim[r * n + col] * lim[r * n + col];
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            let pivot_mag = best_mag.sqrt();
            if pivot_mag < threshold || pivot_mag == 0.0 {
                return Err(LinalgError::Singular { pivot: pivot_mag });
            }
            if best != col {
                for j in 0..n {
                    lre.swap(col * n + j, best * n + j);
                    lim.swap(col * n + j, best * n + j);
                }
            }
            logdet += pivot_mag.ln();
            let pr = lre[col * n + col];
            let pi = lim[col * n + col];
            let pmag2 = pr * pr + pi * pi;
            for r in (col + 1)..n {
                let ar = lre[r * n + col];
                let ai = lim[r * n + col];
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let fr = (ar * pr + ai * pi) / pmag2;
                let fi = (ai * pr - ar * pi) / pmag2;
                for j in (col + 1)..n {
                    let ur = lre[col * n + j];
                    let ui = lim[col * n + j];
                    lre[r * n + j] -= fr * ur - fi * ui;
                    lim[r * n + j] -= fr * ui + fi * ur;
                }
            }
        }
        Ok(logdet)
    }

    /// Columns `[start, start+len)` as a new matrix.
    pub fn slice_cols(&self, start: usize, len: usize) -> ComplexMatrix {
        assert!(start + len <= self.cols);
        let mut out = ComplexMatrix::zeros(self.rows, len);
        for r in 0..self.rows {
            for c in 0..len {
                let i = r * self.cols + start + c;
                out.re[r * len + c] = self.re[i];
                out.im[r * len + c] = self.im[i];
            }
        }
        out
    }

    /// Rows `[start, start+len)` as a new matrix.
    pub fn slice_rows(&self, start: usize, len: usize) -> ComplexMatrix {
        assert!(start + len <= self.rows);
        let n = self.cols;
        let mut out = ComplexMatrix::zeros(len, n);
        out.re.copy_from_slice(&self.re[start * n..(start + len) * n]);
        out.im.copy_from_slice(&self.im[start * n..(start + len) * n]);
        out
    }

    /// Horizontal concatenation `[a | b | ...]`.
    pub fn hstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = ComplexMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for r in 0..rows {
                for c in 0..b.cols {
                    out.re[r * cols + at + c] = b.re[r * b.cols + c];
                    out.im[r * cols + at + c] = b.im[r * b.cols + c];
                }
            }
            at += b.cols;
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
        assert!(!blocks.is_empty());
        let cols = blocks[0].cols;
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = ComplexMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            out.re[at * cols..(at + b.rows) * cols].copy_from_slice(&b.re);
            out.im[at * cols..(at + b.rows) * cols].copy_from_slice(&b.im);
            at += b.rows;
        }
        out
    }
}
