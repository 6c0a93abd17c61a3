//! Scalar abstraction for the numerical core.
//!
//! Every numerical module is generic over [`Real`], which is implemented for
//! `f32` and `f64`. The experiment driver runs in `f64`; the aliases at the
//! crate root name the concrete instantiations.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real floating-point scalar usable throughout the crate.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Tolerance for semi-unitarity checks on basis matrices.
    const ORTHO_TOL: f64;

    /// Draws a standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite scalar")
    }
}

impl Real for f32 {
    const ORTHO_TOL: f64 = 1e-4;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f64 {
    const ORTHO_TOL: f64 = 1e-9;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVector<T> = DVector<Complex<T>>;

/// Draws one circularly-symmetric complex Gaussian CN(0, `variance`):
/// real and imaginary parts are independent with variance `variance / 2` each.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let s = (variance / T::lit(2.0)).sqrt();
    let re = T::standard_normal(rng);
    let im = T::standard_normal(rng);
    Complex::new(re * s, im * s)
}

/// `rows x cols` matrix of i.i.d. CN(0, `variance`) entries, filled column-major.
pub fn complex_normal_matrix<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: T,
) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng, variance))
}

/// Squared Frobenius norm of a complex matrix.
pub fn frobenius_sq<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
}

/// `10^(db / 10)`.
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}
