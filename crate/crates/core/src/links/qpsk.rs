//! Gray-mapped QPSK with unit average symbol energy.

use num_complex::Complex;

use crate::scalar::Real;

pub const BITS_PER_SYMBOL: usize = 2;

/// Maps bit pairs `(b0, b1)` to `((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
/// Neighbouring points differ in exactly one bit. `bits.len()` must be even.
pub fn modulate<T: Real>(bits: &[u8]) -> Vec<Complex<T>> {
    let a = T::one() / T::lit(2.0).sqrt();
    bits.chunks(BITS_PER_SYMBOL)
        .map(|pair| {
            let re = if pair[0] == 0 { a } else { -a };
            let im = if pair[1] == 0 { a } else { -a };
            Complex::new(re, im)
        })
        .collect()
}

/// Hard-decision demapping: quadrant of each symbol.
pub fn demodulate<T: Real>(symbols: &[Complex<T>]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re < T::zero()), u8::from(s.im < T::zero())])
        .collect()
}
