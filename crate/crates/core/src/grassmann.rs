//! Points on the complex Grassmannian and the encoder that maps data samples
//! onto it.
//!
//! A point of `G(T, m)` is stored as an `m x T` basis matrix with orthonormal
//! rows; the subspace is its row space and the projector is `G^H G`. Two
//! bases of the same row space are the same point, so every consumer compares
//! points through [`procrustes_distance_sq`] and never through the raw
//! entries.

use nalgebra::SymmetricEigen;
use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{frobenius_sq, CMatrix, Real};

/// Relative singular-value threshold below which a data matrix is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-12;
/// Smallest accepted gap between the m-th and (m+1)-th eigenvalue of an
/// averaged projector.
pub const EIGENGAP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrassmannError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("rank-deficient data matrix (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    DegenerateSample { sigma_min: f64, sigma_max: f64 },
    #[error("basis rows are not orthonormal (||G G^H - I||_F = {deviation:e})")]
    NotSemiUnitary { deviation: f64 },
    #[error("subspace mean is ambiguous (eigengap {gap:e})")]
    AmbiguousMean { gap: f64 },
    #[error("empty input")]
    Empty,
    #[error("cluster statistic needs {0}")]
    TooFewPoints(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint<T: Real> {
    basis: CMatrix<T>,
}

impl<T: Real> GrassmannPoint<T> {
    /// Wraps a basis with orthonormal rows, checking `||G G^H - I||_F`.
    pub fn from_basis(basis: CMatrix<T>) -> Result<Self, GrassmannError> {
        let (m, t) = basis.shape();
        if m == 0 || m > t {
            return Err(GrassmannError::Shape(format!("basis must satisfy 1 <= m <= T, got {m}x{t}")));
        }
        let deviation = orthonormality_defect(&basis);
        if deviation > T::ORTHO_TOL {
            return Err(GrassmannError::NotSemiUnitary { deviation });
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_basis_unchecked(basis: CMatrix<T>) -> Self {
        debug_assert!(orthonormality_defect(&basis) <= T::ORTHO_TOL * 1e3);
        Self { basis }
    }

    pub fn basis(&self) -> &CMatrix<T> {
        &self.basis
    }

    pub fn into_basis(self) -> CMatrix<T> {
        self.basis
    }

    /// `T`, the dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `m`, the dimension of the subspace.
    pub fn subspace_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthogonal projector `G^H G` onto the subspace (`T x T`).
    pub fn projector(&self) -> CMatrix<T> {
        self.basis.adjoint() * &self.basis
    }

    /// The same manifold point under another basis `O G`, `O` unitary.
    pub fn rotated(&self, o: &CMatrix<T>) -> Result<Self, GrassmannError> {
        Self::from_basis(o * &self.basis)
    }
}

/// `||G G^H - I||_F`.
pub fn orthonormality_defect<T: Real>(basis: &CMatrix<T>) -> f64 {
    let gram = basis * basis.adjoint();
    let eye = CMatrix::<T>::identity(basis.nrows(), basis.nrows());
    (gram - eye).norm().as_f64()
}

/// A fat `Nt x T` data matrix built from one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T: Real> {
    pub entries: CMatrix<T>,
}

impl<T: Real> DataMatrix<T> {
    pub fn new(entries: CMatrix<T>) -> Result<Self, GrassmannError> {
        let (r, c) = entries.shape();
        if r == 0 || r > c {
            return Err(GrassmannError::Shape(format!("data matrix must be fat, got {r}x{c}")));
        }
        Ok(Self { entries })
    }
}

/// Splits a length-`L` sample into `Nt` consecutive chunks of length
/// `T = ceil(L / Nt)` and stacks them as rows, zero-padding the tail.
pub fn vector_to_matrix<T: Real>(sample: &[Complex<T>], n_tx: usize) -> Result<DataMatrix<T>, GrassmannError> {
    let l = sample.len();
    if n_tx == 0 || n_tx > l {
        return Err(GrassmannError::Shape(format!("cannot split length {l} over {n_tx} antennas")));
    }
    let t = l.div_ceil(n_tx);
    let zero = Complex::new(T::zero(), T::zero());
    let entries = CMatrix::from_fn(n_tx, t, |r, c| sample.get(r * t + c).copied().unwrap_or(zero));
    DataMatrix::new(entries)
}

/// Number of columns `T` produced by [`vector_to_matrix`].
pub fn block_length(sample_dim: usize, n_tx: usize) -> usize {
    sample_dim.div_ceil(n_tx)
}

fn rank_check<T: Real>(singular_values: &[T]) -> Result<(), GrassmannError> {
    let max = singular_values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = singular_values.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    let tol = RANK_TOL.max(10.0 * T::default_epsilon().as_f64());
    if !(max > T::zero()) || min <= max * T::lit(tol) {
        return Err(GrassmannError::DegenerateSample {
            sigma_min: min.as_f64(),
            sigma_max: max.as_f64(),
        });
    }
    Ok(())
}

/// Orthonormal basis of the row space of `x` from its SVD `x = U S G`.
pub fn svd_project<T: Real>(x: &DataMatrix<T>) -> Result<GrassmannPoint<T>, GrassmannError> {
    dominant_row_space(&x.entries, x.entries.nrows())
}

/// Singular values (descending) and matching right singular vectors (as
/// rows) of `m`, `k = min(rows, cols)` of each.
///
/// nalgebra's complex bidiagonal SVD can return wrong vectors for
/// rank-deficient input, so this goes through a thin QR `m^H = Q R` and the
/// Hermitian eigenproblem of the small `R R^H`: with `R R^H = W L W^H` the
/// right singular vectors are the columns of `Q W`. Singular values are
/// measured as `||R^H w_k||` so that null directions come out at rounding
/// level rather than at the square root of it.
pub fn right_singular_pairs<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let qr = m.adjoint().qr();
    let (q, r) = (qr.q(), qr.r());
    let rrh = &r * r.adjoint();
    let eig = SymmetricEigen::new((&rrh + rrh.adjoint()).scale(T::lit(0.5)));
    let k = r.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).expect("finite eigenvalues"));
    let w = CMatrix::from_fn(k, k, |i, j| eig.eigenvectors[(i, order[j])]);
    let rh = r.adjoint();
    let sigmas = (0..k).map(|j| (&rh * w.column(j)).norm()).collect();
    (sigmas, (q * w).adjoint())
}

/// Span of the `dim` leading right singular vectors of any matrix. Fails if
/// the `dim`-th singular value is negligible relative to the largest.
pub fn dominant_row_space<T: Real>(m: &CMatrix<T>, dim: usize) -> Result<GrassmannPoint<T>, GrassmannError> {
    let (rows, cols) = m.shape();
    if dim == 0 || dim > rows.min(cols) {
        return Err(GrassmannError::Shape(format!("cannot extract a {dim}-dimensional row space from {rows}x{cols}")));
    }
    let (sigmas, v_t) = right_singular_pairs(m);
    rank_check(&sigmas[..dim])?;
    Ok(GrassmannPoint::from_basis_unchecked(v_t.rows(0, dim).into_owned()))
}

/// Factors of `x = L G` with `L` lower triangular and `G` row-orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct LqFactors<T: Real> {
    pub lower: CMatrix<T>,
    pub point: GrassmannPoint<T>,
}

/// LQ decomposition via the QR decomposition of `x^H`.
pub fn lq_decompose<T: Real>(x: &DataMatrix<T>) -> Result<LqFactors<T>, GrassmannError> {
    let m = x.entries.nrows();
    let (sigmas, _) = right_singular_pairs(&x.entries);
    rank_check(&sigmas[..m])?;
    let qr = x.entries.adjoint().qr();
    let q = qr.q(); // T x m
    let r = qr.r(); // m x m
    Ok(LqFactors {
        lower: r.adjoint(),
        point: GrassmannPoint::from_basis_unchecked(q.adjoint()),
    })
}

/// Row-space basis from the LQ decomposition; spans the same subspace as
/// [`svd_project`].
pub fn lq_project<T: Real>(x: &DataMatrix<T>) -> Result<GrassmannPoint<T>, GrassmannError> {
    lq_decompose(x).map(|f| f.point)
}

/// Encodes a sample: [`vector_to_matrix`] followed by [`svd_project`].
pub fn encode<T: Real>(sample: &[Complex<T>], n_tx: usize) -> Result<GrassmannPoint<T>, GrassmannError> {
    svd_project(&vector_to_matrix(sample, n_tx)?)
}

fn check_same_manifold<T: Real>(a: &GrassmannPoint<T>, b: &GrassmannPoint<T>) -> Result<(), GrassmannError> {
    if a.basis.shape() != b.basis.shape() {
        return Err(GrassmannError::Shape(format!(
            "points live on different manifolds: {:?} vs {:?}",
            a.basis.shape(),
            b.basis.shape()
        )));
    }
    Ok(())
}

/// Squared Procrustes distance `m - tr{P_a P_b} = m - ||A B^H||_F^2`, clamped
/// to `[0, m]`.
pub fn procrustes_distance_sq<T: Real>(a: &GrassmannPoint<T>, b: &GrassmannPoint<T>) -> Result<T, GrassmannError> {
    check_same_manifold(a, b)?;
    // m - ||A B^H||_F^2 written as the residual of projecting B onto span(A),
    // ||B - (B A^H) A||_F^2, which avoids cancellation for nearby subspaces.
    let m = T::lit(a.subspace_dim() as f64);
    let residual = &b.basis - (&b.basis * a.basis.adjoint()) * &a.basis;
    Ok(frobenius_sq(&residual).max(T::zero()).min(m))
}

pub fn procrustes_distance<T: Real>(a: &GrassmannPoint<T>, b: &GrassmannPoint<T>) -> Result<T, GrassmannError> {
    procrustes_distance_sq(a, b).map(|d| d.sqrt())
}

/// Extrinsic mean: the span of the top-`m` eigenvectors of the averaged
/// projector `(1/N) sum G_i^H G_i`. It is the global minimiser of the summed
/// squared Procrustes distances.
pub fn extrinsic_mean<T: Real>(points: &[GrassmannPoint<T>]) -> Result<GrassmannPoint<T>, GrassmannError> {
    let first = points.first().ok_or(GrassmannError::Empty)?;
    for p in &points[1..] {
        check_same_manifold(first, p)?;
    }
    let (m, t) = first.basis.shape();
    let mut avg = CMatrix::<T>::zeros(t, t);
    for p in points {
        avg += p.projector();
    }
    avg /= Complex::new(T::lit(points.len() as f64), T::zero());
    // Enforce exact Hermitian symmetry before the eigensolver.
    let avg = (&avg + avg.adjoint()).scale(T::lit(0.5));

    let eig = SymmetricEigen::new(avg);
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).expect("finite eigenvalues"));
    if m < t {
        let gap = eig.eigenvalues[order[m - 1]] - eig.eigenvalues[order[m]];
        if gap < T::lit(EIGENGAP_TOL) {
            return Err(GrassmannError::AmbiguousMean { gap: gap.as_f64() });
        }
    }
    let basis = CMatrix::from_fn(m, t, |r, c| eig.eigenvectors[(c, order[r])].conj());
    Ok(GrassmannPoint::from_basis_unchecked(basis))
}

/// Ratio of the mean between-class to the mean within-class pairwise squared
/// Procrustes distance. Values above 1 mean classes stay clustered. A zero
/// within-class mean yields `+inf`.
pub fn cluster_separation<T: Real>(dataset: &[(GrassmannPoint<T>, usize)]) -> Result<T, GrassmannError> {
    let mut counts = std::collections::BTreeMap::new();
    for (_, label) in dataset {
        *counts.entry(*label).or_insert(0usize) += 1;
    }
    if counts.len() < 2 {
        return Err(GrassmannError::TooFewPoints("at least two classes".into()));
    }
    if counts.values().any(|&c| c < 2) {
        return Err(GrassmannError::TooFewPoints("at least two points per class".into()));
    }
    let (mut within, mut n_within) = (T::zero(), 0usize);
    let (mut between, mut n_between) = (T::zero(), 0usize);
    for i in 0..dataset.len() {
        for j in i + 1..dataset.len() {
            let d = procrustes_distance_sq(&dataset[i].0, &dataset[j].0)?;
            if dataset[i].1 == dataset[j].1 {
                within += d;
                n_within += 1;
            } else {
                between += d;
                n_between += 1;
            }
        }
    }
    let within = within / T::lit(n_within as f64);
    let between = between / T::lit(n_between as f64);
    if within == T::zero() {
        return Ok(T::lit(f64::INFINITY));
    }
    Ok(between / within)
}
