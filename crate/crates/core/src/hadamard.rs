//! Walsh-Hadamard machinery for RM(1, m) decoding.
//!
//! A Sylvester-ordered Hadamard matrix of order `2^m` has entries
//! `H[t][j] = (-1)^popcount(t AND j)`. Its rows are exactly the antipodal
//! images of the RM(1, m) codewords whose constant bit is zero, so
//! correlating a received soft vector against every such codeword is one
//! matrix product. [`naive_transform`] evaluates that product directly in
//! `2^(2m)` additions; [`fast_transform`] factors it into m butterfly stages
//! (`I (x) H_2 (x) I` at widening strides) for `m * 2^m` additions. Both
//! report their exact operation count so complexity claims can be checked
//! rather than assumed.
//!
//! [`rm1_fht_decode`] completes maximum likelihood decoding of RM(1, m): the
//! peak magnitude of the transform picks the monomial part, the peak's sign
//! the constant bit. Ties break toward the smallest transform index and a
//! constant bit of zero, so the all-zero input decodes to the all-zero
//! message.

use crate::{Error, Result};

/// Largest order m accepted by the transforms (vectors up to 65536).
pub const MAX_TRANSFORM_ORDER: usize = 16;
/// Largest order m for which an explicit matrix may be built (64 MiB).
pub const MAX_MATRIX_ORDER: usize = 13;

// ---------------------------------------------------------------------------
// Sylvester matrices
// ---------------------------------------------------------------------------

/// Dense Hadamard matrix of order `2^m` with entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    m: usize,
    n: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    /// Order exponent m.
    pub fn order(&self) -> usize {
        self.m
    }

    /// Side length `2^m`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, t: usize, j: usize) -> i8 {
        self.entries[t * self.n + j]
    }

    pub fn row(&self, t: usize) -> &[i8] {
        &self.entries[t * self.n..(t + 1) * self.n]
    }
}

/// Builds the Sylvester Hadamard matrix `H_(2^m) = H_2 (x) H_(2^(m-1))` by
/// repeated doubling from `H_1 = [1]`.
pub fn hadamard_matrix(m: usize) -> Result<HadamardMatrix> {
    if m < 1 {
        return Err(Error::Range("Hadamard order m must be at least 1".into()));
    }
    if m > MAX_MATRIX_ORDER {
        return Err(Error::Capacity(format!(
            "explicit Hadamard matrix of order {m} exceeds the \
             {MAX_MATRIX_ORDER} limit; use the transforms instead"
        )));
    }
    let n = 1usize << m;
    let mut entries = vec![0i8; n * n];
    entries[0] = 1;
    let mut size = 1usize;
    while size < n {
        for r in 0..size {
            for c in 0..size {
                let e = entries[r * n + c];
                entries[r * n + (c + size)] = e;
                entries[(r + size) * n + c] = e;
                entries[(r + size) * n + (c + size)] = -e;
            }
        }
        size *= 2;
    }
    Ok(HadamardMatrix { m, n, entries })
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// Transform output plus the exact number of additions it consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    pub values: Vec<f64>,
    pub ops: u64,
}

fn order_of(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "transform length {len} is not a power of two"
        )));
    }
    let m = len.trailing_zeros() as usize;
    if m < 1 || m > MAX_TRANSFORM_ORDER {
        return Err(Error::Range(format!(
            "transform order {m} outside 1..={MAX_TRANSFORM_ORDER}"
        )));
    }
    Ok(m)
}

/// Direct matrix product `out[j] = sum_t u[t] * H[t][j]`, recomputing matrix
/// entries from popcount parity. Costs exactly `2^(2m)` additions.
pub fn naive_transform(u: &[f64]) -> Result<CorrelationVector> {
    let m = order_of(u.len())?;
    let n = u.len();
    let mut values = vec![0.0; n];
    for (j, out) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (t, &x) in u.iter().enumerate() {
            if (t & j).count_ones() & 1 == 0 {
                acc += x;
            } else {
                acc -= x;
            }
        }
        *out = acc;
    }
    Ok(CorrelationVector {
        values,
        ops: 1u64 << (2 * m),
    })
}

/// Direct matrix product against a precomputed matrix. Same result and the
/// same `2^(2m)` operation count as [`naive_transform`].
pub fn naive_transform_with(u: &[f64], h: &HadamardMatrix) -> Result<CorrelationVector> {
    let m = order_of(u.len())?;
    if h.order() != m {
        return Err(Error::Dimension(format!(
            "matrix order {} does not match input order {m}",
            h.order()
        )));
    }
    let n = u.len();
    let mut values = vec![0.0; n];
    for (j, out) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (t, &x) in u.iter().enumerate() {
            if h.entry(t, j) > 0 {
                acc += x;
            } else {
                acc -= x;
            }
        }
        *out = acc;
    }
    Ok(CorrelationVector {
        values,
        ops: 1u64 << (2 * m),
    })
}

/// Fast Walsh-Hadamard transform: m in-place butterfly stages, stage i
/// applying `I (x) H_2 (x) I` at stride `2^(i-1)`. Costs exactly `m * 2^m`
/// additions.
pub fn fast_transform(u: &[f64]) -> Result<CorrelationVector> {
    let m = order_of(u.len())?;
    let n = u.len();
    let mut values = u.to_vec();
    let mut h = 1usize;
    while h < n {
        let mut start = 0usize;
        while start < n {
            for i in start..start + h {
                let a = values[i];
                let b = values[i + h];
                values[i] = a + b;
                values[i + h] = a - b;
            }
            start += 2 * h;
        }
        h *= 2;
    }
    Ok(CorrelationVector {
        values,
        ops: (m as u64) << m,
    })
}

// ---------------------------------------------------------------------------
// RM(1, m) peak decoding
// ---------------------------------------------------------------------------

/// Which transform backs the block decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockTransform {
    Fast,
    Naive,
}

/// Decodes a soft RM(1, m) block of length `2^m` (positive values favor bit
/// zero) and returns the `m + 1` message bits in encoder order together with
/// the winning correlation magnitude.
///
/// The transform index with the largest magnitude selects the monomial
/// coefficients (its binary expansion), a negative peak sets the constant
/// bit. Ties keep the smallest index, and an exactly zero peak keeps a
/// constant bit of zero.
pub fn rm1_decode_with(u: &[f64], transform: BlockTransform) -> Result<(Vec<u8>, f64)> {
    let m = order_of(u.len())?;
    let cv = match transform {
        BlockTransform::Fast => fast_transform(u)?,
        BlockTransform::Naive => naive_transform(u)?,
    };
    let mut best_j = 0usize;
    let mut best_mag = cv.values[0].abs();
    for (j, &v) in cv.values.iter().enumerate().skip(1) {
        if v.abs() > best_mag {
            best_mag = v.abs();
            best_j = j;
        }
    }
    let mut msg = Vec::with_capacity(m + 1);
    msg.push(u8::from(cv.values[best_j] < 0.0));
    for i in 0..m {
        msg.push(((best_j >> (m - 1 - i)) & 1) as u8);
    }
    Ok((msg, best_mag))
}

/// [`rm1_decode_with`] backed by the fast transform.
pub fn rm1_fht_decode(u: &[f64]) -> Result<(Vec<u8>, f64)> {
    rm1_decode_with(u, BlockTransform::Fast)
}
