//! Dense complex linear algebra for the small (2-, 4-, 8-dimensional)
//! operators used throughout the crate: products, Kronecker products,
//! partial trace/transpose and Hermitian eigenvalues.
//!
//! Subsystem convention: `dims` are listed left-to-right in tensor-factor
//! order, i.e. `dims = [d0, d1, ...]` describes `H_0 ⊗ H_1 ⊗ ...` and
//! matches the factor order of [`ComplexMatrix::kron`].

use num_complex::Complex64;

use crate::error::TelecertError;

/// Entrywise tolerance for construction-time checks (Hermiticity, trace).
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Allowed negativity of density-matrix eigenvalues.
pub const PSD_TOL: f64 = 1e-9;
/// Off-diagonal Frobenius-norm target for the Jacobi eigensolver.
pub const JACOBI_TOL: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, TelecertError> {
        if entries.len() != rows * cols {
            return Err(TelecertError::Shape(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TelecertError::Shape("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from real entries (imaginary parts zero).
    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Result<Self, TelecertError> {
        Self::new(rows, cols, re.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// Outer product |v⟩⟨v| of a column vector given as a slice.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
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

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn conjugate_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Conjugation U·self·U†.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.conjugate_transpose())
    }

    /// Kronecker product self ⊗ other.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise |self - other|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// Cyclic Jacobi rotations on the complex Hermitian matrix; iterates
    /// until the off-diagonal Frobenius norm drops below
    /// [`JACOBI_TOL`] or 100 sweeps have run.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>, TelecertError> {
        if !self.is_hermitian(1e-8) {
            return Err(TelecertError::NotHermitian);
        }
        let n = self.rows;
        let mut a = self.clone();
        // force exact Hermitian symmetry so rotations stay stable
        for i in 0..n {
            a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            }
        }
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) < JACOBI_TOL {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, p, q);
                }
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(eigs)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Zeroes a[(p,q)] with a unitary similarity transform: a phase rotation
/// making the pivot real followed by a classical Jacobi rotation.
fn jacobi_rotate(a: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r; // e^{i phi}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // column rotation: V is identity except
    //   V[p][p]=c, V[p][q]=s, V[q][p]=-s*conj(phase), V[q][q]=c*conj(phase)
    let n = a.rows();
    let vpp = Complex64::new(c, 0.0);
    let vpq = Complex64::new(s, 0.0);
    let vqp = -s * phase.conj();
    let vqq = c * phase.conj();
    // A <- A V
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * vpp + aiq * vqp;
        a[(i, q)] = aip * vpq + aiq * vqq;
    }
    // A <- V† A
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = vpp.conj() * apj + vqp.conj() * aqj;
        a[(q, j)] = vpq.conj() * apj + vqq.conj() * aqj;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Trace-1 Hermitian PSD matrix with subsystem-dimension metadata.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10 entrywise), unit trace (1e-10) and
    /// positivity (min eigenvalue ≥ -1e-9).
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self, TelecertError> {
        if !matrix.is_square() {
            return Err(TelecertError::Shape("density matrix must be square".into()));
        }
        let side: usize = dims.iter().product();
        if side != matrix.rows() {
            return Err(TelecertError::Shape(format!(
                "dims {:?} do not multiply to side {}",
                dims,
                matrix.rows()
            )));
        }
        if !matrix.is_hermitian(CONSTRUCTION_TOL) {
            return Err(TelecertError::NotHermitian);
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > CONSTRUCTION_TOL || tr.im.abs() > CONSTRUCTION_TOL {
            return Err(TelecertError::NotNormalized(tr.re));
        }
        let min_eig = matrix.hermitian_eigenvalues()?[0];
        if min_eig < -PSD_TOL {
            return Err(TelecertError::NotPositive(min_eig));
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.matrix.rows()
    }

    /// Traces out the given subsystem, keeping the others in order.
    pub fn partial_trace(&self, subsystem: usize) -> Result<DensityMatrix, TelecertError> {
        let m = partial_trace_matrix(&self.matrix, &self.dims, subsystem)?;
        let mut dims = self.dims.clone();
        dims.remove(subsystem);
        DensityMatrix::new(m, dims)
    }

    /// Partial transpose on one qubit of a two-qubit state. Returns a plain
    /// matrix: the result is Hermitian but possibly non-positive.
    pub fn partial_transpose(&self, subsystem: usize) -> Result<ComplexMatrix, TelecertError> {
        if self.dims != [2, 2] {
            return Err(TelecertError::Shape(format!(
                "partial transpose expects dims [2, 2], got {:?}",
                self.dims
            )));
        }
        if subsystem > 1 {
            return Err(TelecertError::SubsystemOutOfRange(subsystem));
        }
        Ok(partial_transpose_matrix(&self.matrix, subsystem))
    }
}

/// Partial trace over `subsystem` of a square matrix with factor dims `dims`.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    subsystem: usize,
) -> Result<ComplexMatrix, TelecertError> {
    if subsystem >= dims.len() {
        return Err(TelecertError::SubsystemOutOfRange(subsystem));
    }
    let side: usize = dims.iter().product();
    assert_eq!(side, m.rows());
    let left: usize = dims[..subsystem].iter().product();
    let mid = dims[subsystem];
    let right: usize = dims[subsystem + 1..].iter().product();
    let out_side = left * right;
    let mut out = ComplexMatrix::zeros(out_side, out_side);
    for li in 0..left {
        for ri in 0..right {
            for lj in 0..left {
                for rj in 0..right {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..mid {
                        let row = (li * mid + k) * right + ri;
                        let col = (lj * mid + k) * right + rj;
                        acc += m[(row, col)];
                    }
                    out[(li * right + ri, lj * right + rj)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose of a 4x4 matrix viewed as two qubits.
pub fn partial_transpose_matrix(m: &ComplexMatrix, subsystem: usize) -> ComplexMatrix {
    assert_eq!(m.rows(), 4);
    assert!(subsystem < 2);
    let mut out = ComplexMatrix::zeros(4, 4);
    for i0 in 0..2 {
        for i1 in 0..2 {
            for j0 in 0..2 {
                for j1 in 0..2 {
                    let (si0, si1, sj0, sj1) = if subsystem == 0 {
                        (j0, i1, i0, j1)
                    } else {
                        (i0, j1, j0, i1)
                    };
                    out[(i0 * 2 + i1, j0 * 2 + j1)] = m[(si0 * 2 + si1, sj0 * 2 + sj1)];
                }
            }
        }
    }
    out
}
