#![allow(dead_code)]

use grasslink::grassmann::{dominant_row_space, DataMatrix, GrassmannPoint};
use grasslink::scalar::complex_normal_matrix;
use grasslink::{CMatrix, C64};
use rand::Rng;

pub fn gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<f64> {
    complex_normal_matrix(rng, rows, cols, 1.0)
}

pub fn data_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DataMatrix<f64> {
    DataMatrix::new(gaussian(rng, rows, cols)).unwrap()
}

/// Uniformly distributed point of `G(n, m)` as an `m x n` basis.
pub fn random_point<R: Rng>(rng: &mut R, m: usize, n: usize) -> GrassmannPoint<f64> {
    dominant_row_space(&gaussian(rng, m, n), m).unwrap()
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix<f64> {
    gaussian(rng, n, n).qr().q()
}

/// Gaussian vector of length `len` around zero.
pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<C64> {
    gaussian(rng, len, 1).iter().copied().collect()
}

/// Prints the criterion line and fails the test if `pass` is false.
pub fn report(criterion: u32, pass: bool, detail: impl std::fmt::Display) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}
