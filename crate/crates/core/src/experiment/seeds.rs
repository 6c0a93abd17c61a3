//! Stable seed derivation.
//!
//! Seeds are derived with a fixed 64-bit mixing function so that results do
//! not depend on the standard library's hasher, the platform or the order in
//! which cells run:
//!
//! ```text
//! mix(z)   = splitmix64 finaliser of z + 0x9E3779B97F4A7C15
//! hash(ws) = fold over words w of h <- mix(h XOR mix(w)), h0 = 0x6772617373_6c696e
//! ```
//!
//! A sweep cell's link randomness uses `hash([base_seed, scheme_tag,
//! value_index, trial_index])`. Datasets use `hash([base_seed, DATA_TAG,
//! trial_index])`, so every scheme and sweep value of one trial sees the same
//! samples. Overhead searches use `hash([base_seed, scheme_tag, OVERHEAD_TAG,
//! trial_index])`, shared across Doppler values and frame lengths.

use crate::links::Scheme;

const INIT: u64 = 0x6772_6173_736c_696e;
pub const DATA_TAG: u64 = 0x4441_5441;
pub const OVERHEAD_TAG: u64 = 0x4f56_4844;

/// splitmix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stable_hash(words: &[u64]) -> u64 {
    words.iter().fold(INIT, |h, &w| mix(h ^ mix(w)))
}

pub fn scheme_tag(scheme: Scheme) -> u64 {
    match scheme {
        Scheme::Fat => 1,
        Scheme::CoherentAnalog => 2,
        Scheme::CoherentDigital => 3,
    }
}

pub fn cell_seed(base_seed: u64, scheme: Scheme, value_index: usize, trial: usize) -> u64 {
    stable_hash(&[base_seed, scheme_tag(scheme), value_index as u64, trial as u64])
}

pub fn data_seed(base_seed: u64, trial: usize) -> u64 {
    stable_hash(&[base_seed, DATA_TAG, trial as u64])
}

pub fn overhead_seed(base_seed: u64, scheme: Scheme, trial: usize) -> u64 {
    stable_hash(&[base_seed, scheme_tag(scheme), OVERHEAD_TAG, trial as u64])
}
