//! Grassmann analog encoding and blind MIMO data acquisition for edge learning.
//!
//! The crate is organised bottom-up:
//!
//! - [`mog`]: labelled mixture-of-Gaussians source data.
//! - [`fading`]: Clarke-correlated MIMO Rayleigh traces and the per-slot
//!   transmission `y_t = sqrt(P) H_t g_t + w_t`.
//! - [`grassmann`]: vector-to-matrix conversion, subspace projection (SVD and
//!   LQ), Procrustes distance and extrinsic subspace means.
//! - [`links`]: the blind analog scheme and the pilot-trained coherent analog
//!   and digital baselines, plus the frame/overhead model.
//! - [`learn`]: nearest-mean classifiers on the Grassmannian and in Euclidean
//!   space, and evaluation.
//! - [`experiment`]: seeded Monte-Carlo sweeps, configuration and CSV output.
//!
//! All numerical code is generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the `f64` instantiation used by the experiment driver.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod csvfmt;
pub mod experiment;
pub mod fading;
pub mod grassmann;
pub mod learn;
pub mod links;
pub mod mog;
pub mod scalar;

pub use num_complex::Complex;
pub use scalar::{CMatrix, CVector, Real};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

pub type MoGConfig64 = mog::MoGConfig<f64>;
pub type DataSample64 = mog::DataSample<f64>;
pub type Dataset64 = mog::Dataset<f64>;

pub type ChannelConfig64 = fading::ChannelConfig<f64>;
pub type ChannelTrace64 = fading::ChannelTrace<f64>;
pub type ReceivedBlock64 = fading::ReceivedBlock<f64>;

pub type GrassmannPoint64 = grassmann::GrassmannPoint<f64>;
pub type DataMatrix64 = grassmann::DataMatrix<f64>;

pub type ReceivedGrassmannSample64 = links::ReceivedGrassmannSample<f64>;
pub type ReceivedEuclideanSample64 = links::ReceivedEuclideanSample<f64>;

pub type GrassmannClassifier64 = learn::GrassmannClassifier<f64>;
pub type EuclideanClassifier64 = learn::EuclideanClassifier<f64>;

/// Single-precision instantiations.
pub type GrassmannPoint32 = grassmann::GrassmannPoint<f32>;
pub type ChannelConfig32 = fading::ChannelConfig<f32>;
