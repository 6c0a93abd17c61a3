//! Transmission schemes: blind analog transmission of Grassmann-encoded
//! samples (FAT) and the pilot-trained coherent analog and digital baselines.
//!
//! Every scheme spends the same average energy per occupied slot,
//! `Nt / T * P`, where `T` is the FAT block length for the sample size. FAT
//! gets this automatically because `||G||_F^2 = Nt`. The baselines send each
//! stream at power `P / T` and their pilot slots carry the same total energy.

mod qpsk;
mod quantize;

use nalgebra::Cholesky;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fading::{transmit_with_rng, ChannelConfig, ChannelError, ChannelTrace, ClarkeFading};
use crate::grassmann::{block_length, dominant_row_space, encode, GrassmannError, GrassmannPoint};
use crate::mog::{DataSample, MoGConfig};
use crate::scalar::{CMatrix, CVector, Real};

pub use qpsk::{demodulate as qpsk_demodulate, modulate as qpsk_modulate, BITS_PER_SYMBOL};
pub use quantize::{bits_to_bytes, bytes_to_bits, Quantizer, BITS_PER_COEFF, BITS_PER_DIM};

/// QPSK symbols needed per quantised complex coefficient.
pub const SYMBOLS_PER_COEFF: usize = BITS_PER_COEFF / BITS_PER_SYMBOL;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("invalid link configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error("pilot matrix does not have full row rank")]
    RankDeficientPilots,
    #[error("target error {target} unreachable; best achieved {best_error} at one data slot per frame")]
    Unreachable { target: f64, best_error: f64 },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fat,
    CoherentAnalog,
    CoherentDigital,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Fat, Scheme::CoherentAnalog, Scheme::CoherentDigital];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Fat => "fat",
            Scheme::CoherentAnalog => "coherent_analog",
            Scheme::CoherentDigital => "coherent_digital",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }

    pub fn is_coherent(self) -> bool {
        self != Scheme::Fat
    }

    /// Data slots one sample of dimension `sample_dim` occupies.
    pub fn data_slots(self, sample_dim: usize, n_tx: usize) -> usize {
        let t = block_length(sample_dim, n_tx);
        match self {
            Scheme::Fat | Scheme::CoherentAnalog => t,
            Scheme::CoherentDigital => SYMBOLS_PER_COEFF * t,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Frame structure: `pilot_slots` training slots followed by up to
/// `data_slots_per_frame` data slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub pilot_slots: usize,
    pub data_slots_per_frame: usize,
    pub scheme: Scheme,
}

impl FrameConfig {
    pub fn fat() -> Self {
        Self {
            pilot_slots: 0,
            data_slots_per_frame: usize::MAX,
            scheme: Scheme::Fat,
        }
    }

    /// Coherent frame with the minimal pilot burst `Np = Nt`.
    pub fn coherent(scheme: Scheme, n_tx: usize, data_slots_per_frame: usize) -> Self {
        Self {
            pilot_slots: n_tx,
            data_slots_per_frame,
            scheme,
        }
    }

    pub fn validate(&self, n_tx: usize) -> Result<(), LinkError> {
        if self.scheme.is_coherent() {
            if self.pilot_slots < n_tx {
                return Err(LinkError::Config(format!(
                    "{} needs at least n_tx = {n_tx} pilot slots, got {}",
                    self.scheme, self.pilot_slots
                )));
            }
            if self.data_slots_per_frame == 0 {
                return Err(LinkError::Config("frames need at least one data slot".into()));
            }
        } else if self.pilot_slots != 0 {
            return Err(LinkError::Config("fat frames carry no pilots".into()));
        }
        Ok(())
    }

    /// Training overhead `Np / (Np + D)`.
    pub fn overhead(&self) -> f64 {
        if self.pilot_slots == 0 {
            return 0.0;
        }
        self.pilot_slots as f64 / (self.pilot_slots + self.data_slots_per_frame) as f64
    }

    /// Pilot and data slots used to carry `data_slots` slots of payload. The
    /// last frame is truncated to the data actually sent.
    pub fn slots_for(&self, data_slots: usize) -> SlotCount {
        let frames = if self.pilot_slots == 0 {
            0
        } else {
            data_slots.div_ceil(self.data_slots_per_frame)
        };
        SlotCount {
            pilot: frames * self.pilot_slots,
            data: data_slots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlotCount {
    pub pilot: usize,
    pub data: usize,
}

impl SlotCount {
    pub fn total(&self) -> usize {
        self.pilot + self.data
    }
}

#[derive(Debug, Clone)]
pub struct ReceivedGrassmannSample<T: Real> {
    pub point: GrassmannPoint<T>,
    pub label: usize,
    pub slots: SlotCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedEuclideanSample<T> {
    pub values: Vec<Complex<T>>,
    pub label: usize,
    pub slots: SlotCount,
}

/// Source statistics the coherent transmitters are designed for: average
/// power per complex coefficient, used both to normalise analog streams and
/// to set the quantiser clip level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceStats<T> {
    pub per_element_power: T,
}

impl<T: Real> SourceStats<T> {
    pub fn from_mog(config: &MoGConfig<T>) -> Self {
        Self {
            per_element_power: config.per_element_power(),
        }
    }

    pub fn per_dimension_std(&self) -> T {
        (self.per_element_power / T::lit(2.0)).sqrt()
    }
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Zero-pads `values` to `len`.
fn padded<T: Real>(values: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let mut v = values.to_vec();
    v.resize(len, zero());
    v
}

// ---------------------------------------------------------------------------
// Blind analog transmission

/// Row space of the received block: the top-`dim` right singular vectors of
/// `Y`. The detector sees nothing but `Y`.
pub fn detect_row_space<T: Real>(y: &CMatrix<T>, dim: usize) -> Result<GrassmannPoint<T>, LinkError> {
    Ok(dominant_row_space(y, dim)?)
}

/// FAT link for a fixed sample size; caches the fading generator.
#[derive(Debug, Clone)]
pub struct FatLink<T: Real> {
    channel: ChannelConfig<T>,
    fading: ClarkeFading<T>,
    sample_dim: usize,
}

impl<T: Real> FatLink<T> {
    pub fn new(channel: ChannelConfig<T>, sample_dim: usize) -> Result<Self, LinkError> {
        channel.validate()?;
        if sample_dim == 0 {
            return Err(LinkError::Config("sample dimension must be positive".into()));
        }
        let t = block_length(sample_dim, channel.n_tx);
        Ok(Self {
            fading: ClarkeFading::new(channel, t)?,
            channel,
            sample_dim,
        })
    }

    pub fn slots_per_sample(&self) -> SlotCount {
        SlotCount {
            pilot: 0,
            data: block_length(self.sample_dim, self.channel.n_tx),
        }
    }

    /// Encodes, transmits over a fresh trace and detects one sample.
    pub fn acquire<R: Rng + ?Sized>(
        &self,
        sample: &DataSample<T>,
        rng: &mut R,
    ) -> Result<ReceivedGrassmannSample<T>, LinkError> {
        self.check_len(sample)?;
        let g = encode(&sample.values, self.channel.n_tx)?;
        let trace = self.fading.sample(rng);
        let y = transmit_with_rng(&trace, g.basis(), &self.channel, rng)?;
        Ok(ReceivedGrassmannSample {
            point: detect_row_space(&y.observations, self.channel.n_tx)?,
            label: sample.label,
            slots: SlotCount {
                pilot: 0,
                data: y.slots_used,
            },
        })
    }

    /// Same as [`acquire`](Self::acquire) over a caller-supplied trace.
    pub fn acquire_over<R: Rng + ?Sized>(
        &self,
        sample: &DataSample<T>,
        trace: &ChannelTrace<T>,
        rng: &mut R,
    ) -> Result<ReceivedGrassmannSample<T>, LinkError> {
        self.check_len(sample)?;
        let g = encode(&sample.values, self.channel.n_tx)?;
        let y = transmit_with_rng(trace, g.basis(), &self.channel, rng)?;
        Ok(ReceivedGrassmannSample {
            point: detect_row_space(&y.observations, self.channel.n_tx)?,
            label: sample.label,
            slots: SlotCount {
                pilot: 0,
                data: y.slots_used,
            },
        })
    }

    fn check_len(&self, sample: &DataSample<T>) -> Result<(), LinkError> {
        if sample.values.len() != self.sample_dim {
            return Err(LinkError::Config(format!(
                "sample has {} values, link built for {}",
                sample.values.len(),
                self.sample_dim
            )));
        }
        Ok(())
    }
}

pub fn fat_transmit_detect<T: Real>(
    sample: &DataSample<T>,
    channel: &ChannelConfig<T>,
    seed: u64,
) -> Result<ReceivedGrassmannSample<T>, LinkError> {
    let link = FatLink::new(*channel, sample.values.len())?;
    link.acquire(sample, &mut ChaCha8Rng::seed_from_u64(seed))
}

// ---------------------------------------------------------------------------
// Coherent receivers

/// `Nt x Np` pilot block: the identity scaled by `amplitude`, repeated and
/// truncated to `Np` columns.
pub fn pilot_matrix<T: Real>(n_tx: usize, n_pilots: usize, amplitude: T) -> CMatrix<T> {
    CMatrix::from_fn(n_tx, n_pilots, |r, c| {
        if c % n_tx == r {
            Complex::new(amplitude, T::zero())
        } else {
            zero()
        }
    })
}

/// Least-squares estimate `Y_p X_p^H (X_p X_p^H)^{-1}`.
pub fn estimate_channel<T: Real>(pilot_rx: &CMatrix<T>, pilot_tx: &CMatrix<T>) -> Result<CMatrix<T>, LinkError> {
    if pilot_rx.ncols() != pilot_tx.ncols() {
        return Err(LinkError::Config(format!(
            "{} received pilot slots but {} transmitted",
            pilot_rx.ncols(),
            pilot_tx.ncols()
        )));
    }
    if pilot_tx.ncols() < pilot_tx.nrows() {
        return Err(LinkError::RankDeficientPilots);
    }
    let xh = pilot_tx.adjoint();
    let gram = pilot_tx * &xh;
    let scale = gram.diagonal().iter().fold(T::zero(), |m, d| m.max(d.re));
    let chol = Cholesky::new(gram).ok_or(LinkError::RankDeficientPilots)?;
    let min_pivot = chol.l_dirty().diagonal().iter().fold(T::max_value().unwrap(), |m, d| m.min(d.re));
    if min_pivot * min_pivot <= scale * T::lit(1e-12) {
        return Err(LinkError::RankDeficientPilots);
    }
    // H^ = Y X^H G^{-1}, computed as (G^{-1} X Y^H)^H since G is Hermitian.
    let rhs = pilot_tx * pilot_rx.adjoint();
    Ok(chol.solve(&rhs).adjoint())
}

/// Linear MMSE filter `W = (H^H H + s2/p I)^{-1} H^H / sqrt(p)`, so that
/// `W y` estimates `x` from `y = sqrt(p) H x + w`. With zero noise it becomes
/// the pseudo-inverse.
pub fn mmse_matrix<T: Real>(h_est: &CMatrix<T>, noise_var: T, power: T) -> Result<CMatrix<T>, LinkError> {
    if power <= T::zero() {
        return Err(LinkError::Config("equaliser power must be positive".into()));
    }
    let amp = power.sqrt();
    let hh = h_est.adjoint();
    if noise_var <= T::zero() {
        let pinv = h_est
            .clone()
            .pseudo_inverse(T::lit(1e-12))
            .map_err(|e| LinkError::Config(e.to_string()))?;
        return Ok(pinv.unscale(amp));
    }
    let mut gram = &hh * h_est;
    let load = noise_var / power;
    for i in 0..gram.nrows() {
        gram[(i, i)] += Complex::new(load, T::zero());
    }
    let chol = Cholesky::new(gram).ok_or_else(|| LinkError::Config("regularised Gram matrix not positive definite".into()))?;
    Ok(chol.solve(&hh).unscale(amp))
}

/// `x^ = (H^H H + s2/p I)^{-1} H^H y / sqrt(p)`.
pub fn mmse_equalize<T: Real>(y: &CVector<T>, h_est: &CMatrix<T>, noise_var: T, power: T) -> Result<CVector<T>, LinkError> {
    if y.len() != h_est.nrows() {
        return Err(LinkError::Config(format!(
            "received vector has {} entries, channel estimate has {} rows",
            y.len(),
            h_est.nrows()
        )));
    }
    Ok(mmse_matrix(h_est, noise_var, power)? * y)
}

/// Pilot-trained spatial multiplexing link shared by both coherent
/// baselines. Caches the fading generator for the frame layout.
#[derive(Debug, Clone)]
pub struct CoherentLink<T: Real> {
    frame: FrameConfig,
    channel: ChannelConfig<T>,
    source: SourceStats<T>,
    sample_dim: usize,
    fading: ClarkeFading<T>,
    /// Per-stream amplitude before `sqrt(P)`, i.e. `sqrt(1/T)`.
    stream_amp: T,
}

impl<T: Real> CoherentLink<T> {
    pub fn new(
        frame: FrameConfig,
        channel: ChannelConfig<T>,
        source: SourceStats<T>,
        sample_dim: usize,
    ) -> Result<Self, LinkError> {
        channel.validate()?;
        if !frame.scheme.is_coherent() {
            return Err(LinkError::Config("coherent link needs a coherent scheme".into()));
        }
        frame.validate(channel.n_tx)?;
        if sample_dim == 0 {
            return Err(LinkError::Config("sample dimension must be positive".into()));
        }
        if !(source.per_element_power > T::zero()) {
            return Err(LinkError::Config("source power must be positive".into()));
        }
        let data = frame.scheme.data_slots(sample_dim, channel.n_tx);
        let total = frame.slots_for(data).total();
        let t = block_length(sample_dim, channel.n_tx);
        Ok(Self {
            frame,
            channel,
            source,
            sample_dim,
            fading: ClarkeFading::new(channel, total)?,
            stream_amp: (T::one() / T::lit(t as f64)).sqrt(),
        })
    }

    pub fn frame(&self) -> &FrameConfig {
        &self.frame
    }

    pub fn slots_per_sample(&self) -> SlotCount {
        self.frame
            .slots_for(self.frame.scheme.data_slots(self.sample_dim, self.channel.n_tx))
    }

    fn quantizer(&self) -> Quantizer<T> {
        Quantizer::new(self.source.per_dimension_std())
    }

    /// Unit-power symbol stream for one sample, `Nt` symbols per data slot.
    fn modulate(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let nt = self.channel.n_tx;
        let coeffs = padded(values, block_length(self.sample_dim, nt) * nt);
        match self.frame.scheme {
            Scheme::CoherentAnalog => {
                let norm = self.source.per_element_power.sqrt();
                coeffs.iter().map(|c| c.unscale(norm)).collect()
            }
            Scheme::CoherentDigital => {
                let q = self.quantizer();
                let bytes: Vec<u8> = coeffs.iter().map(|&c| q.quantize(c)).collect();
                qpsk_modulate(&bytes_to_bits(&bytes))
            }
            Scheme::Fat => unreachable!("rejected in constructor"),
        }
    }

    fn demodulate(&self, symbols: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out: Vec<Complex<T>> = match self.frame.scheme {
            Scheme::CoherentAnalog => {
                let norm = self.source.per_element_power.sqrt();
                symbols.iter().map(|s| s.scale(norm)).collect()
            }
            Scheme::CoherentDigital => {
                let q = self.quantizer();
                bits_to_bytes(&qpsk_demodulate(symbols))
                    .into_iter()
                    .map(|b| q.dequantize(b))
                    .collect()
            }
            Scheme::Fat => unreachable!("rejected in constructor"),
        };
        out.truncate(self.sample_dim);
        out
    }

    /// Sends one sample over a fresh trace.
    pub fn acquire<R: Rng + ?Sized>(
        &self,
        sample: &DataSample<T>,
        rng: &mut R,
    ) -> Result<ReceivedEuclideanSample<T>, LinkError> {
        let trace = self.fading.sample(rng);
        self.acquire_over(sample, &trace, rng)
    }

    /// Transmit block for one sample, before the `sqrt(P)` gain: a pilot
    /// burst followed by up to `D` data slots per frame, the last frame
    /// truncated. Returns the block and the column where each frame starts
    /// together with its data length.
    pub fn build_block(&self, values: &[Complex<T>]) -> Result<(CMatrix<T>, Vec<(usize, usize)>), LinkError> {
        if values.len() != self.sample_dim {
            return Err(LinkError::Config(format!(
                "sample has {} values, link built for {}",
                values.len(),
                self.sample_dim
            )));
        }
        let nt = self.channel.n_tx;
        let symbols = self.modulate(values);
        let data_slots = symbols.len() / nt;
        let slots = self.frame.slots_for(data_slots);
        let (np, d) = (self.frame.pilot_slots, self.frame.data_slots_per_frame);
        let pilots = self.pilots();

        let mut tx = CMatrix::<T>::zeros(nt, slots.total());
        let mut frames = Vec::new();
        let (mut col, mut sent) = (0, 0);
        while sent < data_slots {
            let len = d.min(data_slots - sent);
            tx.columns_mut(col, np).copy_from(&pilots);
            for s in 0..len {
                for k in 0..nt {
                    tx[(k, col + np + s)] = symbols[(sent + s) * nt + k].scale(self.stream_amp);
                }
            }
            frames.push((col, len));
            col += np + len;
            sent += len;
        }
        debug_assert_eq!(col, slots.total());
        Ok((tx, frames))
    }

    /// Identity pilots whose slot energy matches a data slot, `Nt / T`.
    fn pilots(&self) -> CMatrix<T> {
        let nt = self.channel.n_tx;
        pilot_matrix(nt, self.frame.pilot_slots, T::lit(nt as f64).sqrt() * self.stream_amp)
    }

    /// Sends one sample over `trace`, re-estimates the channel from every
    /// pilot burst and equalises that frame's data slots with the estimate.
    pub fn acquire_over<R: Rng + ?Sized>(
        &self,
        sample: &DataSample<T>,
        trace: &ChannelTrace<T>,
        rng: &mut R,
    ) -> Result<ReceivedEuclideanSample<T>, LinkError> {
        let (tx, frames) = self.build_block(&sample.values)?;
        let np = self.frame.pilot_slots;
        let y = transmit_with_rng(trace, &tx, &self.channel, rng)?.observations;
        let power = self.channel.tx_power;
        let pilots_rx = self.pilots().scale(power.sqrt());
        let stream_power = power * self.stream_amp * self.stream_amp;
        let mut estimates = Vec::with_capacity(tx.ncols() * self.channel.n_tx);
        let mut data = 0;
        for (start, len) in frames {
            let h = estimate_channel(&y.columns(start, np).into_owned(), &pilots_rx)?;
            let w = mmse_matrix(&h, self.channel.noise_variance, stream_power)?;
            let x = &w * y.columns(start + np, len);
            estimates.extend(x.iter().copied());
            data += len;
        }
        Ok(ReceivedEuclideanSample {
            values: self.demodulate(&estimates),
            label: sample.label,
            slots: SlotCount {
                pilot: tx.ncols() - data,
                data,
            },
        })
    }
}

fn coherent_link<T: Real>(
    expected: Scheme,
    sample: &DataSample<T>,
    frame: &FrameConfig,
    channel: &ChannelConfig<T>,
    source: &SourceStats<T>,
    seed: u64,
) -> Result<ReceivedEuclideanSample<T>, LinkError> {
    if frame.scheme != expected {
        return Err(LinkError::Config(format!("frame is for {}, expected {expected}", frame.scheme)));
    }
    let link = CoherentLink::new(*frame, *channel, *source, sample.values.len())?;
    link.acquire(sample, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn coherent_analog_link<T: Real>(
    sample: &DataSample<T>,
    frame: &FrameConfig,
    channel: &ChannelConfig<T>,
    source: &SourceStats<T>,
    seed: u64,
) -> Result<ReceivedEuclideanSample<T>, LinkError> {
    coherent_link(Scheme::CoherentAnalog, sample, frame, channel, source, seed)
}

pub fn coherent_digital_link<T: Real>(
    sample: &DataSample<T>,
    frame: &FrameConfig,
    channel: &ChannelConfig<T>,
    source: &SourceStats<T>,
    seed: u64,
) -> Result<ReceivedEuclideanSample<T>, LinkError> {
    coherent_link(Scheme::CoherentDigital, sample, frame, channel, source, seed)
}

// ---------------------------------------------------------------------------
// Overhead search

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadSearch {
    pub overhead: f64,
    pub frame: FrameConfig,
    /// Error measured at the chosen frame.
    pub error_rate: f64,
    /// Every `(D, error)` probe, in evaluation order.
    pub probes: Vec<(usize, f64)>,
}

/// Largest frame length `D` in `1..=max_data_slots` whose classification
/// error, as reported by `eval`, meets `target_error`; the pilot burst is
/// fixed at `Np = Nt`. Assumes error is nondecreasing in `D` and
/// binary-searches accordingly. FAT needs no pilots and always gets overhead
/// zero (its error is still evaluated once and reported).
pub fn overhead_for_target<T: Real, F>(
    scheme: Scheme,
    channel: &ChannelConfig<T>,
    target_error: f64,
    max_data_slots: usize,
    mut eval: F,
) -> Result<OverheadSearch, LinkError>
where
    F: FnMut(&FrameConfig) -> Result<f64, LinkError>,
{
    channel.validate()?;
    if !(0.0..=1.0).contains(&target_error) {
        return Err(LinkError::Config(format!("target error {target_error} outside [0, 1]")));
    }
    if !scheme.is_coherent() {
        let frame = FrameConfig::fat();
        let error_rate = eval(&frame)?;
        return Ok(OverheadSearch {
            overhead: 0.0,
            frame,
            error_rate,
            probes: Vec::new(),
        });
    }
    if max_data_slots == 0 {
        return Err(LinkError::Config("search range must include D = 1".into()));
    }
    let frame_for = |d| FrameConfig::coherent(scheme, channel.n_tx, d);
    let mut probes = Vec::new();
    let mut probe = |d: usize, probes: &mut Vec<(usize, f64)>| -> Result<f64, LinkError> {
        let e = eval(&frame_for(d))?;
        probes.push((d, e));
        Ok(e)
    };

    let done = |d: usize, e: f64, probes: Vec<(usize, f64)>| {
        let frame = frame_for(d);
        OverheadSearch {
            overhead: frame.overhead(),
            frame,
            error_rate: e,
            probes,
        }
    };

    let e_max = probe(max_data_slots, &mut probes)?;
    if e_max <= target_error {
        return Ok(done(max_data_slots, e_max, probes));
    }
    let e_min = if max_data_slots == 1 { e_max } else { probe(1, &mut probes)? };
    if e_min > target_error {
        return Err(LinkError::Unreachable {
            target: target_error,
            best_error: e_min,
        });
    }
    // Invariant: `lo` meets the target, `hi` does not.
    let (mut lo, mut e_lo, mut hi) = (1, e_min, max_data_slots);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = probe(mid, &mut probes)?;
        if e <= target_error {
            lo = mid;
            e_lo = e;
        } else {
            hi = mid;
        }
    }
    Ok(done(lo, e_lo, probes))
}

#[cfg(test)]
mod tests;
