//! Dense Hermitian eigendecomposition, thresholded pseudo-inverses and
//! least-squares solves.
//!
//! Factorizations are delegated to `faer`, always run sequentially so that
//! results do not depend on the host's thread count. Reductions written in
//! this crate go through [`pairwise_sum`].

use std::ops::Add;
use std::sync::Once;

use faer::{c64, Mat, MatRef, Side};

use crate::error::{FrameError, Result};

/// Relative cutoff used wherever a caller does not supply one.
pub const DEFAULT_REL_TOL: f64 = 1e-11;

/// Largest supported matrix dimension.
pub const MAX_DIMENSION: usize = 8192;

static SEQUENTIAL: Once = Once::new();

pub(crate) fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Pairwise (cascade) summation. Below eight terms it falls back to a plain loop.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if values.len() <= 8 {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(FrameError::InvalidParameter("matrix dimension must be at least 1".into()));
    }
    if n > MAX_DIMENSION {
        return Err(FrameError::InvalidParameter(format!(
            "matrix dimension {n} exceeds the supported maximum {MAX_DIMENSION}"
        )));
    }
    Ok(())
}

fn column(values: &[c64]) -> Mat<c64> {
    Mat::from_fn(values.len(), 1, |i, _| values[i])
}

fn column_to_vec(m: MatRef<'_, c64>) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Square complex matrix with `a[i][j] == conj(a[j][i])`.
///
/// Construction symmetrizes the input as `(A + A^H) / 2`.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    data: Mat<c64>,
}

impl HermitianMatrix {
    pub fn new(data: Mat<c64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(FrameError::DimensionMismatch { expected: data.nrows(), actual: data.ncols() });
        }
        check_dim(data.nrows())?;
        let n = data.nrows();
        let sym = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(data[(i, i)].re, 0.0)
            } else {
                (data[(i, j)] + data[(j, i)].conj()) * 0.5
            }
        });
        Ok(Self { data: sym })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        check_dim(dim)?;
        Self::new(Mat::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { c64::new(diag[i], 0.0) } else { c64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.data[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.data
    }

    /// Symmetric permutation `P A P^T` with `perm[k]` the source index of row/column `k`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim() {
            return Err(FrameError::DimensionMismatch { expected: self.dim(), actual: perm.len() });
        }
        Self::from_fn(self.dim(), |i, j| self.data[(perm[i], perm[j])])
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        ensure_sequential();
        let evd = self.data.self_adjoint_eigen(Side::Lower).map_err(|e| FrameError::NumericalFailure {
            routine: "self_adjoint_eigen",
            detail: format!("{e:?} (dimension {})", self.dim()),
        })?;
        let values = evd.S().column_vector().iter().map(|v| v.re).collect();
        Ok(HermitianEigen { values, vectors: evd.U().to_owned() })
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        ensure_sequential();
        self.data.self_adjoint_eigenvalues(Side::Lower).map_err(|e| FrameError::NumericalFailure {
            routine: "self_adjoint_eigenvalues",
            detail: format!("{e:?} (dimension {})", self.dim()),
        })
    }

    pub fn mul_vec(&self, x: &[c64]) -> Result<Vec<c64>> {
        if x.len() != self.dim() {
            return Err(FrameError::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        Ok(column_to_vec((&self.data * column(x)).as_ref()))
    }
}

/// Eigenpairs of a [`HermitianMatrix`], eigenvalues nondecreasing.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: Mat<c64>,
}

impl HermitianEigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    fn retained(&self, rel_tol: f64) -> Vec<bool> {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let cut = rel_tol * scale;
        self.values.iter().map(|v| scale > 0.0 && v.abs() > cut).collect()
    }

    /// Minimum-norm solve of `A X = B` with eigenvalues `|λ| <= rel_tol · max|λ|` dropped.
    pub fn solve_mat(&self, rhs: MatRef<'_, c64>, rel_tol: f64) -> Result<ThresholdedSolve<Mat<c64>>> {
        let n = self.values.len();
        if rhs.nrows() != n {
            return Err(FrameError::DimensionMismatch { expected: n, actual: rhs.nrows() });
        }
        let keep = self.retained(rel_tol);
        let rank = keep.iter().filter(|&&k| k).count();
        let mut proj = self.vectors.adjoint() * rhs;
        for (i, &k) in keep.iter().enumerate() {
            let inv = if k { 1.0 / self.values[i] } else { 0.0 };
            for c in 0..proj.ncols() {
                proj[(i, c)] *= inv;
            }
        }
        let x = &self.vectors * proj;
        let condition = retained_condition(
            self.values.iter().zip(&keep).filter(|(_, &k)| k).map(|(v, _)| v.abs()),
        );
        Ok(ThresholdedSolve { x, rank, dim: n, condition })
    }
}

/// Output of a thresholded solve together with its rank diagnostics.
#[derive(Debug, Clone)]
pub struct ThresholdedSolve<T> {
    pub x: T,
    /// Number of retained eigen/singular values.
    pub rank: usize,
    /// Full dimension of the solution space.
    pub dim: usize,
    /// Ratio of the largest to the smallest retained eigen/singular value.
    pub condition: f64,
}

impl<T> ThresholdedSolve<T> {
    pub fn was_singular(&self) -> bool {
        self.rank < self.dim
    }
}

fn retained_condition(iter: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = iter.fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Dense complex rectangular matrix.
#[derive(Debug, Clone)]
pub struct RectMatrix {
    data: Mat<c64>,
}

impl RectMatrix {
    pub fn new(data: Mat<c64>) -> Result<Self> {
        check_dim(data.nrows())?;
        check_dim(data.ncols())?;
        Ok(Self { data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        check_dim(rows)?;
        check_dim(cols)?;
        Ok(Self { data: Mat::from_fn(rows, cols, f) })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.data[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn mul_vec(&self, x: &[c64]) -> Result<Vec<c64>> {
        if x.len() != self.cols() {
            return Err(FrameError::DimensionMismatch { expected: self.cols(), actual: x.len() });
        }
        Ok(column_to_vec((&self.data * column(x)).as_ref()))
    }

    /// `A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[c64]) -> Result<Vec<c64>> {
        if x.len() != self.rows() {
            return Err(FrameError::DimensionMismatch { expected: self.rows(), actual: x.len() });
        }
        Ok(column_to_vec((self.data.adjoint() * column(x)).as_ref()))
    }

    /// The normal matrix `A^H A`.
    pub fn normal(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.data.adjoint() * &self.data)
    }

    pub fn svd(&self) -> Result<SvdFactor> {
        ensure_sequential();
        let svd = self.data.thin_svd().map_err(|e| FrameError::NumericalFailure {
            routine: "thin_svd",
            detail: format!("{e:?} ({}x{})", self.rows(), self.cols()),
        })?;
        Ok(SvdFactor {
            u: svd.U().to_owned(),
            s: svd.S().column_vector().iter().map(|v| v.re).collect(),
            v: svd.V().to_owned(),
        })
    }
}

/// Thin SVD `A = U diag(s) V^H`, singular values nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactor {
    u: Mat<c64>,
    s: Vec<f64>,
    v: Mat<c64>,
}

impl SvdFactor {
    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&v| v > cut && v > 0.0).count()
    }

    /// `A^+ B` with singular values below `rel_tol · σ_max` treated as zero.
    pub fn pinv_apply_mat(&self, rhs: MatRef<'_, c64>, rel_tol: f64) -> Result<ThresholdedSolve<Mat<c64>>> {
        if rhs.nrows() != self.u.nrows() {
            return Err(FrameError::DimensionMismatch { expected: self.u.nrows(), actual: rhs.nrows() });
        }
        let rank = self.rank(rel_tol);
        let u_r = self.u.as_ref().subcols(0, rank);
        let v_r = self.v.as_ref().subcols(0, rank);
        let mut proj = u_r.adjoint() * rhs;
        for i in 0..rank {
            let inv = 1.0 / self.s[i];
            for c in 0..proj.ncols() {
                proj[(i, c)] *= inv;
            }
        }
        let x = v_r * proj;
        let condition = if rank == 0 { f64::INFINITY } else { self.s[0] / self.s[rank - 1] };
        Ok(ThresholdedSolve { x, rank, dim: self.v.nrows(), condition })
    }

    pub fn pinv_apply(&self, rhs: &[c64], rel_tol: f64) -> Result<ThresholdedSolve<Vec<c64>>> {
        let sol = self.pinv_apply_mat(column(rhs).as_ref(), rel_tol)?;
        Ok(ThresholdedSolve { x: column_to_vec(sol.x.as_ref()), rank: sol.rank, dim: sol.dim, condition: sol.condition })
    }
}

/// Smallest eigenvalue of a Hermitian matrix. May be `<= 0` for singular Grams.
pub fn min_eigenvalue(m: &HermitianMatrix) -> Result<f64> {
    Ok(m.eigenvalues()?[0])
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &HermitianMatrix) -> Result<f64> {
    let ev = m.eigenvalues()?;
    Ok(ev[ev.len() - 1])
}

/// Moore-Penrose solve `m^+ rhs` through the SVD.
pub fn pseudo_inverse_apply(m: &RectMatrix, rhs: &[c64], rel_tol: f64) -> Result<ThresholdedSolve<Vec<c64>>> {
    if rel_tol < 0.0 || !rel_tol.is_finite() {
        return Err(FrameError::InvalidParameter(format!("rel_tol must be finite and >= 0, got {rel_tol}")));
    }
    if rhs.len() != m.rows() {
        return Err(FrameError::DimensionMismatch { expected: m.rows(), actual: rhs.len() });
    }
    m.svd()?.pinv_apply(rhs, rel_tol)
}

/// Least-squares / minimum-norm solve through the eigendecomposition.
/// `was_singular()` on the result reports whether any eigenvalue was cut.
pub fn solve_hermitian(m: &HermitianMatrix, rhs: &[c64], rel_tol: f64) -> Result<ThresholdedSolve<Vec<c64>>> {
    if rel_tol < 0.0 || !rel_tol.is_finite() {
        return Err(FrameError::InvalidParameter(format!("rel_tol must be finite and >= 0, got {rel_tol}")));
    }
    if rhs.len() != m.dim() {
        return Err(FrameError::DimensionMismatch { expected: m.dim(), actual: rhs.len() });
    }
    let sol = m.eigen()?.solve_mat(column(rhs).as_ref(), rel_tol)?;
    Ok(ThresholdedSolve { x: column_to_vec(sol.x.as_ref()), rank: sol.rank, dim: sol.dim, condition: sol.condition })
}

/// Euclidean norm of a complex vector.
pub fn norm(x: &[c64]) -> f64 {
    let sq: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
    pairwise_sum(&sq).sqrt()
}
