//! Temporally correlated MIMO Rayleigh fading and the per-slot transmission
//! model.
//!
//! Each of the `Nr * Nt` channel coefficients is an independent stationary
//! CN(0, 1) process whose autocorrelation at a lag of `tau` slots is
//! `J0(2 pi f_D T_s tau)` (Clarke's model). Traces are synthesised by Cholesky
//! colouring of the Toeplitz autocorrelation matrix, which matches the second
//! order statistics exactly.

mod bessel;

pub use bessel::bessel_j0;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{complex_normal, complex_normal_matrix, CMatrix, Real};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const INITIAL_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid channel configuration: {0}")]
    Config(String),
    #[error("autocorrelation matrix not factorisable (doppler {doppler}, {n_slots} slots) even with jitter {jitter:e}")]
    Degenerate { doppler: f64, n_slots: usize, jitter: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig<T> {
    pub n_tx: usize,
    pub n_rx: usize,
    /// `f_D * T_s`, in cycles per slot.
    pub normalized_doppler: T,
    /// Per-complex-element AWGN variance.
    pub noise_variance: T,
    pub tx_power: T,
}

impl<T: Real> ChannelConfig<T> {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(ChannelError::Config("antenna counts must be positive".into()));
        }
        if self.n_rx < self.n_tx {
            return Err(ChannelError::Config(format!(
                "blind detection needs n_rx >= n_tx (got {} < {})",
                self.n_rx, self.n_tx
            )));
        }
        let fd = self.normalized_doppler;
        if !(fd >= T::zero() && fd < T::lit(0.5)) {
            return Err(ChannelError::Config(format!("normalized doppler {fd} outside [0, 0.5)")));
        }
        if !(self.noise_variance >= T::zero()) {
            return Err(ChannelError::Config("noise variance must be non-negative".into()));
        }
        if !(self.tx_power > T::zero()) {
            return Err(ChannelError::Config("transmit power must be positive".into()));
        }
        Ok(())
    }

    /// Average transmit SNR `P / sigma_w^2` in dB.
    pub fn snr_db(&self) -> T {
        T::lit(10.0) * (self.tx_power / self.noise_variance).log10()
    }

    /// Sets the noise variance so that `P / sigma_w^2` equals `snr_db`.
    pub fn with_snr_db(mut self, snr_db: T) -> Self {
        self.noise_variance = self.tx_power / crate::scalar::db_to_linear(snr_db);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace<T: Real> {
    /// One `Nr x Nt` matrix per slot.
    pub matrices: Vec<CMatrix<T>>,
    pub config: ChannelConfig<T>,
}

impl<T: Real> ChannelTrace<T> {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Left-multiplies every slot matrix by `q` (e.g. a receive-side rotation).
    pub fn left_multiplied(&self, q: &CMatrix<T>) -> Self {
        Self {
            matrices: self.matrices.iter().map(|h| q * h).collect(),
            config: self.config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock<T: Real> {
    /// `Nr x T` observations, one column per slot.
    pub observations: CMatrix<T>,
    pub slots_used: usize,
}

/// Clarke-model trace generator for a fixed configuration and length.
///
/// Holds the Cholesky factor of the `n_slots x n_slots` autocorrelation
/// matrix so repeated draws do not refactor it.
#[derive(Debug, Clone)]
pub struct ClarkeFading<T: Real> {
    config: ChannelConfig<T>,
    n_slots: usize,
    /// `None` for a static channel (zero Doppler).
    factor: Option<DMatrix<T>>,
    jitter: f64,
}

impl<T: Real> ClarkeFading<T> {
    pub fn new(config: ChannelConfig<T>, n_slots: usize) -> Result<Self, ChannelError> {
        config.validate()?;
        if n_slots == 0 {
            return Err(ChannelError::Config("trace length must be at least one slot".into()));
        }
        if config.normalized_doppler == T::zero() {
            return Ok(Self {
                config,
                n_slots,
                factor: None,
                jitter: 0.0,
            });
        }
        let corr: Vec<T> = (0..n_slots)
            .map(|tau| bessel_j0(T::two_pi() * config.normalized_doppler * T::lit(tau as f64)))
            .collect();
        let toeplitz = DMatrix::from_fn(n_slots, n_slots, |i, j| corr[i.abs_diff(j)]);
        let mut jitter = INITIAL_JITTER;
        loop {
            let mut m = toeplitz.clone();
            for i in 0..n_slots {
                m[(i, i)] += T::lit(jitter);
            }
            if let Some(ch) = Cholesky::new(m) {
                return Ok(Self {
                    config,
                    n_slots,
                    factor: Some(ch.unpack()),
                    jitter,
                });
            }
            if jitter >= MAX_JITTER {
                return Err(ChannelError::Degenerate {
                    doppler: config.normalized_doppler.as_f64(),
                    n_slots,
                    jitter,
                });
            }
            jitter = (jitter * 10.0).min(MAX_JITTER);
        }
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn config(&self) -> &ChannelConfig<T> {
        &self.config
    }

    /// Diagonal loading that was needed for the factorisation.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelTrace<T> {
        let (nr, nt, n) = (self.config.n_rx, self.config.n_tx, self.n_slots);
        let matrices = match &self.factor {
            None => {
                let h = complex_normal_matrix(rng, nr, nt, T::one());
                vec![h; n]
            }
            Some(l) => {
                // Column k of `white` drives coefficient k = row + nr * col.
                let white = complex_normal_matrix(rng, n, nr * nt, T::one());
                // `l` is real, so colour the real and imaginary parts with two
                // real products.
                let re = l * white.map(|z| z.re);
                let im = l * white.map(|z| z.im);
                (0..n)
                    .map(|t| {
                        CMatrix::from_fn(nr, nt, |r, c| {
                            let k = r + nr * c;
                            Complex::new(re[(t, k)], im[(t, k)])
                        })
                    })
                    .collect()
            }
        };
        ChannelTrace {
            matrices,
            config: self.config,
        }
    }
}

/// Generates one trace of `n_slots` channel matrices.
pub fn generate_trace<T: Real>(config: &ChannelConfig<T>, n_slots: usize, seed: u64) -> Result<ChannelTrace<T>, ChannelError> {
    let gen = ClarkeFading::new(*config, n_slots)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(gen.sample(&mut rng))
}

/// Sends the columns of `symbols` (`Nt x T`) over the first `T` slots of the
/// trace: column `t` of the result is `sqrt(P) H_t g_t + w_t`.
pub fn transmit<T: Real>(
    trace: &ChannelTrace<T>,
    symbols: &CMatrix<T>,
    config: &ChannelConfig<T>,
    seed: u64,
) -> Result<ReceivedBlock<T>, ChannelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    transmit_with_rng(trace, symbols, config, &mut rng)
}

pub fn transmit_with_rng<T: Real, R: Rng + ?Sized>(
    trace: &ChannelTrace<T>,
    symbols: &CMatrix<T>,
    config: &ChannelConfig<T>,
    rng: &mut R,
) -> Result<ReceivedBlock<T>, ChannelError> {
    let slots = symbols.ncols();
    if symbols.nrows() != config.n_tx {
        return Err(ChannelError::Shape(format!(
            "symbol matrix has {} rows, expected n_tx = {}",
            symbols.nrows(),
            config.n_tx
        )));
    }
    if trace.len() < slots {
        return Err(ChannelError::Shape(format!("trace has {} slots, need {slots}", trace.len())));
    }
    if let Some(h) = trace.matrices.first() {
        if h.shape() != (config.n_rx, config.n_tx) {
            return Err(ChannelError::Shape(format!("channel matrices are {:?}", h.shape())));
        }
    }
    let amp = config.tx_power.sqrt();
    let mut y = CMatrix::<T>::zeros(config.n_rx, slots);
    for t in 0..slots {
        let col = (&trace.matrices[t] * symbols.column(t)).scale(amp);
        for r in 0..config.n_rx {
            y[(r, t)] = col[r] + complex_normal(rng, config.noise_variance);
        }
    }
    Ok(ReceivedBlock {
        observations: y,
        slots_used: slots,
    })
}

/// Normalised Doppler `f_D T_s` with `f_D = f_c v / c`.
pub fn doppler_from_speed(speed: f64, carrier_hz: f64, slot_s: f64) -> f64 {
    carrier_hz * speed / SPEED_OF_LIGHT * slot_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::complex_normal_matrix;

    fn cfg(nt: usize, nr: usize, fd: f64, noise: f64, p: f64) -> ChannelConfig<f64> {
        ChannelConfig {
            n_tx: nt,
            n_rx: nr,
            normalized_doppler: fd,
            noise_variance: noise,
            tx_power: p,
        }
    }

    #[test]
    fn static_channel_is_constant() {
        let tr = generate_trace(&cfg(2, 4, 0.0, 0.0, 1.0), 30, 3).unwrap();
        assert!(tr.matrices.iter().all(|h| h == &tr.matrices[0]));
    }

    #[test]
    fn config_validation() {
        assert!(cfg(4, 2, 0.01, 0.0, 1.0).validate().is_err());
        assert!(cfg(2, 4, 0.5, 0.0, 1.0).validate().is_err());
        assert!(cfg(2, 4, -0.1, 0.0, 1.0).validate().is_err());
        assert!(cfg(2, 4, 0.01, 0.0, 0.0).validate().is_err());
        assert!(generate_trace(&cfg(2, 4, 0.01, 0.0, 1.0), 0, 0).is_err());
    }

    #[test]
    fn small_doppler_long_trace_factorises() {
        let g = ClarkeFading::new(cfg(1, 1, 0.001, 0.0, 1.0), 200).unwrap();
        assert!(g.jitter() <= MAX_JITTER);
    }

    #[test]
    fn unit_power_and_lag_ten_correlation() {
        let c = cfg(1, 1, 0.01, 0.0, 1.0);
        let g = ClarkeFading::new(c, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let (mut p0, mut r10) = (0.0, Complex::new(0.0, 0.0));
        for _ in 0..n {
            let tr = g.sample(&mut rng);
            let h0 = tr.matrices[0][(0, 0)];
            p0 += h0.norm_sqr();
            r10 += h0.conj() * tr.matrices[10][(0, 0)];
        }
        assert!((p0 / n as f64 - 1.0).abs() < 0.03);
        let want = bessel_j0(2.0 * std::f64::consts::PI * 0.1);
        assert!((r10.re / n as f64 - want).abs() < 0.02);
    }

    #[test]
    fn identity_channel_passes_symbols() {
        let c = cfg(2, 3, 0.0, 0.0, 1.0);
        let h = CMatrix::from_fn(3, 2, |r, col| if r == col { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) });
        let trace = ChannelTrace { matrices: vec![h; 5], config: c };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = complex_normal_matrix(&mut rng, 2, 5, 1.0);
        let y = transmit(&trace, &s, &c, 4).unwrap();
        assert_eq!(y.slots_used, 5);
        assert_eq!(y.observations.rows(0, 2).into_owned(), s);
        assert!(y.observations.row(2).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn power_scales_amplitude() {
        let c1 = cfg(2, 4, 0.02, 0.0, 1.0);
        let c4 = ChannelConfig { tx_power: 4.0, ..c1 };
        let trace = generate_trace(&c1, 6, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = complex_normal_matrix(&mut rng, 2, 6, 1.0);
        let y1 = transmit(&trace, &s, &c1, 3).unwrap().observations;
        let y4 = transmit(&trace, &s, &c4, 3).unwrap().observations;
        assert!((y4 - y1.scale(2.0)).norm() < 1e-12);
    }

    #[test]
    fn matches_slotwise_oracle() {
        let c = cfg(2, 2, 0.05, 0.3, 2.5);
        let trace = generate_trace(&c, 3, 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = complex_normal_matrix(&mut rng, 2, 3, 1.0);
        let y = transmit(&trace, &s, &c, 21).unwrap().observations;

        // Straight-line evaluation with the same noise stream.
        let mut noise_rng = ChaCha8Rng::seed_from_u64(21);
        for t in 0..3 {
            let h = &trace.matrices[t];
            for r in 0..2 {
                let mut v = Complex::new(0.0, 0.0);
                for k in 0..2 {
                    v += h[(r, k)] * s[(k, t)];
                }
                let w = complex_normal(&mut noise_rng, 0.3);
                let want = v * 2.5_f64.sqrt() + w;
                assert!((y[(r, t)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let c = cfg(2, 4, 0.0, 0.0, 1.0);
        let trace = generate_trace(&c, 3, 0).unwrap();
        let s3 = CMatrix::<f64>::zeros(3, 3);
        assert!(matches!(transmit(&trace, &s3, &c, 0), Err(ChannelError::Shape(_))));
        let long = CMatrix::<f64>::zeros(2, 4);
        assert!(matches!(transmit(&trace, &long, &c, 0), Err(ChannelError::Shape(_))));
    }

    #[test]
    fn doppler_conversion() {
        assert_eq!(doppler_from_speed(0.0, 3e9, 1e-3), 0.0);
        let fc = 2.4e9;
        let ts = 1e-4;
        let v = SPEED_OF_LIGHT / fc / ts * 0.01;
        assert!((doppler_from_speed(v, fc, ts) - 0.01).abs() < 1e-15);
        let want = 3e9 * 30.0 / 299_792_458.0 * 33.3e-6;
        assert_eq!(doppler_from_speed(30.0, 3e9, 33.3e-6), want);
        assert!((want - 0.009_996_915_933_088_619).abs() < 1e-15);
    }

    #[test]
    fn single_precision_trace() {
        let c = ChannelConfig::<f32> {
            n_tx: 2,
            n_rx: 4,
            normalized_doppler: 0.05,
            noise_variance: 0.1,
            tx_power: 1.0,
        };
        let tr = generate_trace(&c, 8, 1).unwrap();
        assert_eq!(tr.len(), 8);
    }
}
