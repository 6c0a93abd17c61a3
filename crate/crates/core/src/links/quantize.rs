//! Uniform mid-rise quantiser, 4 bits per real dimension (8 bits per complex
//! coefficient), clipped at three standard deviations.

use num_complex::Complex;

use crate::scalar::Real;

pub const BITS_PER_DIM: u32 = 4;
pub const BITS_PER_COEFF: usize = 2 * BITS_PER_DIM as usize;
const LEVELS: i64 = 1 << BITS_PER_DIM;
const CLIP_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer<T> {
    clip: T,
    step: T,
}

impl<T: Real> Quantizer<T> {
    /// Quantiser for a real dimension with standard deviation `dim_std`.
    pub fn new(dim_std: T) -> Self {
        let clip = T::lit(CLIP_SIGMAS) * dim_std;
        Self {
            clip,
            step: T::lit(2.0) * clip / T::lit(LEVELS as f64),
        }
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn clip(&self) -> T {
        self.clip
    }

    fn index(&self, v: T) -> u8 {
        let raw = (v / self.step).floor().as_f64() as i64 + LEVELS / 2;
        raw.clamp(0, LEVELS - 1) as u8
    }

    fn level(&self, idx: u8) -> T {
        (T::lit(idx as f64 - (LEVELS / 2) as f64) + T::lit(0.5)) * self.step
    }

    /// Quantises a coefficient to one byte: I index in the high nibble, Q in
    /// the low nibble.
    pub fn quantize(&self, c: Complex<T>) -> u8 {
        (self.index(c.re) << BITS_PER_DIM) | self.index(c.im)
    }

    pub fn dequantize(&self, code: u8) -> Complex<T> {
        Complex::new(self.level(code >> BITS_PER_DIM), self.level(code & 0x0f))
    }
}

/// Expands bytes into bits, most significant first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|b| (0..8).rev().map(move |k| (b >> k) & 1)).collect()
}

/// Packs bits (most significant first) into bytes; `bits.len()` must be a
/// multiple of 8.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1))).collect()
}
