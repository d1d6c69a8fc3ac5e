//! Dense complex matrices and the factorizations the transforms are built on.
//!
//! [`ComplexMatrix`] wraps an `nalgebra` matrix and guarantees finite entries.
//! The three factorizations are the Hermitian eigendecomposition
//! ([`hermitian_eig`]), the singular value decomposition ([`svd`]) and the
//! canonical polar decomposition ([`polar_decompose`]), whose isometric factor
//! is a partial isometry with initial space `range(|T|)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use openblas_src as _;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Floor used when a relative tolerance is taken against a zero norm.
pub const ABS_FLOOR: f64 = 1e-14;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

const MAX_SWEEPS: usize = 10_000;

/// Relative tolerance `rel * scale`, floored at [`ABS_FLOOR`].
pub fn rel_tol(rel: f64, scale: f64) -> f64 {
    (rel * scale).max(ABS_FLOOR)
}

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, found {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(
            rows,
            cols,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Wraps an `nalgebra` matrix, rejecting NaN and infinite entries.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(m: usize) -> Self {
        Self(DMatrix::identity(m, m))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Returns the order of a square matrix.
    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        gram.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    /// `‖A†A − AA†‖_F`; zero exactly for normal matrices.
    pub fn normality_defect(&self) -> f64 {
        let a = &self.0;
        let ah = a.adjoint();
        (&ah * a - a * &ah)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Relative Hermitian asymmetry `‖A − A†‖_F / ‖A‖_F` (0 for the zero matrix).
    pub fn hermitian_asymmetry(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Eigendecomposition `A = W·diag(s)·W†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Unitary matrix whose columns are eigenvectors.
    pub eigenvectors: ComplexMatrix,
    /// Eigenvalues in ascending order, matching the columns of `eigenvectors`.
    pub eigenvalues: Vec<f64>,
}

impl SpectralData {
    /// Functional calculus `W·diag(f(s))·W†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let w = self.eigenvectors.as_matrix();
        let mut scaled = w.clone();
        for (j, &s) in self.eigenvalues.iter().enumerate() {
            let fs = f(s);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fs);
        }
        ComplexMatrix::wrap(scaled * w.adjoint())
    }

    /// Rebuilds the matrix this decomposition came from.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|s| s)
    }

    /// `W†·X·W`: expresses `x` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &ComplexMatrix) -> DMatrix<C64> {
        let w = self.eigenvectors.as_matrix();
        w.adjoint() * x.as_matrix() * w
    }

    /// `W·Y·W†`: maps a matrix in the eigenbasis back to the standard basis.
    pub fn from_eigenbasis(&self, y: &DMatrix<C64>) -> ComplexMatrix {
        let w = self.eigenvectors.as_matrix();
        ComplexMatrix::wrap(w * y * w.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<SpectralData> {
    a.ensure_square()?;
    let asym = a.hermitian_asymmetry();
    if asym > 1e-10 {
        return Err(Error::NotHermitian(asym));
    }
    let sym = (a.as_matrix() + a.as_matrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("Hermitian eigensolver"))?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = eig.eigenvectors.select_columns(order.iter());
    Ok(SpectralData {
        eigenvectors: ComplexMatrix::from_matrix(eigenvectors)?,
        eigenvalues,
    })
}

/// Singular value decomposition `A = P·diag(σ)·Q†` with `σ` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub left: ComplexMatrix,
    pub singular_values: Vec<f64>,
    /// `Q`, not `Q†`.
    pub right: ComplexMatrix,
}

impl Svd {
    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Number of singular values above [`RANK_CUTOFF`] times the largest.
    pub fn numerical_rank(&self) -> usize {
        let cut = RANK_CUTOFF * self.max_singular_value();
        self.singular_values
            .iter()
            .filter(|&&s| s > cut && s > 0.0)
            .count()
    }
}

/// Singular value decomposition by LAPACK `zgesvd`.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let (rows, cols) = (a.rows(), a.cols());
    let k = rows.min(cols);
    let (m, n) = (rows as i32, cols as i32);
    let mut work_a: Vec<C64> = a.as_matrix().as_slice().to_vec();
    let mut s = vec![0.0; k];
    let mut u = vec![C64::new(0.0, 0.0); rows * rows];
    let mut vt = vec![C64::new(0.0, 0.0); cols * cols];
    let mut rwork = vec![0.0; 5 * k.max(1)];
    let mut info = 0;

    let mut query = [C64::new(0.0, 0.0)];
    // SAFETY: every buffer has the length LAPACK expects for column-major
    // rows×cols input with full U and Vᴴ; lwork = −1 only queries the workspace size.
    unsafe {
        lapack::zgesvd(
            b'A',
            b'A',
            m,
            n,
            &mut work_a,
            m,
            &mut s,
            &mut u,
            m,
            &mut vt,
            n,
            &mut query,
            -1,
            &mut rwork,
            &mut info,
        );
    }
    let lwork = (query[0].re as usize).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    // SAFETY: as above, with a workspace of the queried size.
    unsafe {
        lapack::zgesvd(
            b'A',
            b'A',
            m,
            n,
            &mut work_a,
            m,
            &mut s,
            &mut u,
            m,
            &mut vt,
            n,
            &mut work,
            lwork as i32,
            &mut rwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure("singular value decomposition"));
    }
    let left = DMatrix::from_column_slice(rows, rows, &u);
    let right = DMatrix::from_column_slice(cols, cols, &vt).adjoint();
    Ok(Svd {
        left: ComplexMatrix::from_matrix(left)?,
        singular_values: s,
        right: ComplexMatrix::from_matrix(right)?,
    })
}

/// Canonical polar decomposition `T = U·|T|`.
#[derive(Clone, Debug)]
pub struct PolarParts {
    /// Partial isometry `U` with initial space `range(|T|)`.
    pub isometry_part: ComplexMatrix,
    /// Positive semidefinite factor `|T| = (T†T)^{1/2}`.
    pub positive_part: ComplexMatrix,
    pub rank: usize,
    /// Spectral decomposition of `|T|`; eigenvalues under the rank cutoff are exactly zero.
    pub spectral: SpectralData,
    /// Largest singular value of `T`.
    pub norm: f64,
}

impl PolarParts {
    /// `U†U`, the orthogonal projection onto `range(|T|)`.
    pub fn support_projection(&self) -> ComplexMatrix {
        self.spectral.map(|s| if s > 0.0 { 1.0 } else { 0.0 })
    }

    pub fn is_invertible(&self) -> bool {
        self.rank == self.positive_part.rows()
    }

    /// Smallest eigenvalue of `|T|`.
    pub fn min_singular_value(&self) -> f64 {
        self.spectral.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Canonical polar decomposition via the SVD `T = P·Σ·Q†`.
///
/// `|T| = Q·Σ·Q†` and `U = P·Q†` restricted to singular values above
/// `1e-12·σ_max`; smaller singular values are treated as zero in both factors.
pub fn polar_decompose(t: &ComplexMatrix) -> Result<PolarParts> {
    let m = t.ensure_square()?;
    let dec = svd(t)?;
    let smax = dec.max_singular_value();
    let rank = dec.numerical_rank();

    let p = dec.left.as_matrix();
    let q = dec.right.as_matrix();
    let u = p.columns(0, rank) * q.columns(0, rank).adjoint();

    // Ascending order for the spectral data of |T|.
    let eigenvalues: Vec<f64> = (0..m)
        .rev()
        .map(|k| {
            if k < rank {
                dec.singular_values[k]
            } else {
                0.0
            }
        })
        .collect();
    let eigenvectors = q.select_columns((0..m).rev().collect::<Vec<_>>().iter());
    let spectral = SpectralData {
        eigenvectors: ComplexMatrix::wrap(eigenvectors),
        eigenvalues,
    };
    let positive_part = spectral.reconstruct();

    Ok(PolarParts {
        isometry_part: ComplexMatrix::wrap(u),
        positive_part,
        rank,
        spectral,
        norm: smax,
    })
}

/// Complex Schur decomposition `A = Q·R·Q†` with `Q` unitary and `R` upper triangular.
pub fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    a.ensure_square()?;
    let dec = nalgebra::Schur::try_new(a.as_matrix().clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure("Schur decomposition"))?;
    let (q, r) = dec.unpack();
    Ok((
        ComplexMatrix::from_matrix(q)?,
        ComplexMatrix::from_matrix(r)?,
    ))
}

/// Eigenvalues of a general square matrix (diagonal of its Schur form).
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let (_, r) = schur(a)?;
    Ok(r.as_matrix().diagonal().iter().copied().collect())
}
