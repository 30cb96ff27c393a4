//! Helpers for bit sequences represented as `&[u8]` with entries in {0, 1}.

use crate::{Error, Result};

/// Checks that every entry is 0 or 1.
pub fn ensure_binary(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(i) => Err(Error::Range(format!(
            "bit {i} is {}, expected 0 or 1",
            bits[i]
        ))),
        None => Ok(()),
    }
}

/// Elementwise XOR of two equal-length bit sequences.
pub fn xor(a: &[u8], b: &[u8]) -> Result<Vec<u8>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "xor of length {} with length {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x ^ y).collect())
}

/// Number of ones.
pub fn weight(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

/// Positions where two equal-length sequences differ.
pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Antipodal image: bit 0 maps to +1.0, bit 1 to -1.0.
pub fn to_bipolar(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

/// Packs bits into an integer, bit k of the result being `bits[k]`.
pub fn bits_to_index(bits: &[u8]) -> usize {
    debug_assert!(bits.len() <= usize::BITS as usize);
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | (usize::from(b) << k))
}

/// Inverse of [`bits_to_index`]: the `k` low bits of `index`, LSB first.
pub fn index_to_bits(index: usize, k: usize) -> Vec<u8> {
    (0..k).map(|j| ((index >> j) & 1) as u8).collect()
}
