//! Encoding chain for short uplink control payloads.
//!
//! Two schemes cover payloads of 3 to 11 bits:
//!
//! - `Standard32K`: the (32, K) block code whose codeword bits are
//!   `c(l) = sum_k b(k) * M(l, k) mod 2` over a fixed 32 x 11 basis table.
//! - `BlockRm1`: the payload is segmented and each segment is encoded with a
//!   first-order Reed-Muller code RM(1, m). The default 11-bit split is
//!   5 bits into RM(1, 4) and 6 bits into RM(1, 5), giving 16 + 32 coded bits.
//!
//! RM(1, m) generator convention: row 0 is the all-ones row, followed by the
//! monomial rows `v_m, v_(m-1), ..., v_1`. Column t spells the m-bit binary
//! expansion of t with `v_1` the least significant bit, so
//! `v_j(t) = (t >> (j - 1)) & 1`. Message bits line up with the rows:
//! `msg[0]` is the constant-term coefficient, `msg[1]` multiplies `v_m`, and
//! `msg[m]` multiplies `v_1`.
//!
//! Rate matching is cyclic repetition `e(l) = c(l mod N')` and only extends a
//! codeword; a target shorter than the mother code is rejected rather than
//! punctured.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bits::ensure_binary;
use crate::{Error, Result};

/// Codeword length of the standard (32, K) code.
pub const CODE_LEN_32K: usize = 32;
/// Smallest payload the (32, K) basis table supports.
pub const MIN_PAYLOAD_32K: usize = 3;
/// Largest payload the (32, K) basis table supports.
pub const MAX_PAYLOAD_32K: usize = 11;
/// Largest RM(1, m) order the encoder accepts.
pub const MAX_RM1_ORDER: usize = 16;

// ---------------------------------------------------------------------------
// First-order Reed-Muller generators
// ---------------------------------------------------------------------------

/// Generator matrix of RM(1, m): `m + 1` rows of length `2^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    m: usize,
    rows: Vec<Vec<u8>>,
}

impl GeneratorMatrix {
    /// Reed-Muller order m.
    pub fn order(&self) -> usize {
        self.m
    }

    /// Number of message bits, `m + 1`.
    pub fn k(&self) -> usize {
        self.m + 1
    }

    /// Codeword length, `2^m`.
    pub fn n(&self) -> usize {
        1 << self.m
    }

    /// Row `i`: the all-ones row for `i = 0`, then `v_m` down to `v_1`.
    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }
}

/// Builds the RM(1, m) generator in the row order `[1, v_m, ..., v_1]`.
pub fn build_rm1_generator(m: usize) -> Result<GeneratorMatrix> {
    if m < 1 || m > MAX_RM1_ORDER {
        return Err(Error::Range(format!(
            "RM(1, m) order {m} outside 1..={MAX_RM1_ORDER}"
        )));
    }
    let n = 1usize << m;
    let mut rows = Vec::with_capacity(m + 1);
    rows.push(vec![1u8; n]);
    for j in (1..=m).rev() {
        rows.push((0..n).map(|t| ((t >> (j - 1)) & 1) as u8).collect());
    }
    Ok(GeneratorMatrix { m, rows })
}

/// Encodes `m + 1` message bits with RM(1, m).
///
/// `msg[0]` selects the all-ones row; `msg[1 + i]` selects `v_(m - i)`.
pub fn encode_rm1(msg: &[u8], m: usize) -> Result<Vec<u8>> {
    let gen = build_rm1_generator(m)?;
    ensure_binary(msg)?;
    if msg.len() != gen.k() {
        return Err(Error::Dimension(format!(
            "RM(1, {m}) expects {} message bits, got {}",
            gen.k(),
            msg.len()
        )));
    }
    let mut code = vec![0u8; gen.n()];
    for (bit, row) in msg.iter().zip(gen.rows()) {
        if *bit == 1 {
            for (c, r) in code.iter_mut().zip(row) {
                *c ^= r;
            }
        }
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// Standard (32, K) block code
// ---------------------------------------------------------------------------

const BASIS_TABLE_TEXT: &str = include_str!("../data/rm_basis_32x11.txt");
/// FNV-1a 64 checksum of the shipped basis table file.
const BASIS_TABLE_FNV1A: u64 = 0xdb6664152efd3ae1;

/// The 32 x 11 basis sequence table of the standard (32, K) code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTable32 {
    rows: [[u8; MAX_PAYLOAD_32K]; CODE_LEN_32K],
}

impl BasisTable32 {
    /// The table shipped with the crate, checksum-verified on first use.
    pub fn shared() -> &'static BasisTable32 {
        static TABLE: OnceLock<BasisTable32> = OnceLock::new();
        TABLE.get_or_init(|| {
            let sum = crate::fnv1a64(BASIS_TABLE_TEXT.as_bytes());
            assert_eq!(
                sum, BASIS_TABLE_FNV1A,
                "embedded basis table failed its checksum: {sum:#018x}"
            );
            BasisTable32::parse(BASIS_TABLE_TEXT).expect("embedded basis table must parse")
        })
    }

    /// Parses a table from text: comment lines start with `#`, data lines
    /// carry 11 space-separated binary digits, 32 data lines in total.
    pub fn parse(text: &str) -> Result<BasisTable32> {
        let mut rows = [[0u8; MAX_PAYLOAD_32K]; CODE_LEN_32K];
        let mut filled = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if filled == CODE_LEN_32K {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("more than {CODE_LEN_32K} data rows"),
                });
            }
            let mut row = [0u8; MAX_PAYLOAD_32K];
            let mut count = 0usize;
            for tok in line.split_whitespace() {
                if count == MAX_PAYLOAD_32K {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("more than {MAX_PAYLOAD_32K} columns"),
                    });
                }
                row[count] = match tok {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            message: format!("expected binary digit, got {other:?}"),
                        })
                    }
                };
                count += 1;
            }
            if count != MAX_PAYLOAD_32K {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {MAX_PAYLOAD_32K} columns, got {count}"),
                });
            }
            rows[filled] = row;
            filled += 1;
        }
        if filled != CODE_LEN_32K {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: format!("expected {CODE_LEN_32K} data rows, got {filled}"),
            });
        }
        Ok(BasisTable32 { rows })
    }

    /// Basis row for code bit `l`.
    pub fn row(&self, l: usize) -> &[u8; MAX_PAYLOAD_32K] {
        &self.rows[l]
    }
}

/// Encodes a K-bit payload, `3 <= K <= 11`, into 32 code bits:
/// `c(l) = sum_k msg(k) * M(l, k) mod 2`.
pub fn encode_32k(msg: &[u8]) -> Result<Vec<u8>> {
    ensure_binary(msg)?;
    let k = msg.len();
    if !(MIN_PAYLOAD_32K..=MAX_PAYLOAD_32K).contains(&k) {
        return Err(Error::Range(format!(
            "(32, K) payload length {k} outside {MIN_PAYLOAD_32K}..={MAX_PAYLOAD_32K}"
        )));
    }
    let table = BasisTable32::shared();
    let mut code = vec![0u8; CODE_LEN_32K];
    for (l, c) in code.iter_mut().enumerate() {
        let row = table.row(l);
        let mut acc = 0u8;
        for (bit, m) in msg.iter().zip(row.iter()) {
            acc ^= bit & m;
        }
        *c = acc;
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// Segmentation and rate matching
// ---------------------------------------------------------------------------

/// Splits `msg` according to `split = [(k_1, m_1), (k_2, m_2), ...]`, encodes
/// each segment with RM(1, m_j) and concatenates the codewords in order.
///
/// Each segment must satisfy `k_j = m_j + 1` and the segment sizes must sum
/// to the message length.
pub fn segment_and_encode(msg: &[u8], split: &[(usize, usize)]) -> Result<Vec<u8>> {
    validate_split(split)?;
    let total: usize = split.iter().map(|&(k, _)| k).sum();
    if total != msg.len() {
        return Err(Error::Dimension(format!(
            "split consumes {total} bits but message has {}",
            msg.len()
        )));
    }
    let mut code = Vec::with_capacity(split.iter().map(|&(_, m)| 1usize << m).sum());
    let mut offset = 0usize;
    for &(k, m) in split {
        code.extend(encode_rm1(&msg[offset..offset + k], m)?);
        offset += k;
    }
    Ok(code)
}

fn validate_split(split: &[(usize, usize)]) -> Result<()> {
    if split.is_empty() {
        return Err(Error::Config("empty segmentation split".into()));
    }
    for &(k, m) in split {
        if m < 1 || m > MAX_RM1_ORDER {
            return Err(Error::Range(format!(
                "segment order {m} outside 1..={MAX_RM1_ORDER}"
            )));
        }
        if k != m + 1 {
            return Err(Error::Config(format!(
                "segment of {k} bits cannot feed RM(1, {m}); it encodes {} bits",
                m + 1
            )));
        }
    }
    Ok(())
}

/// Cyclic repetition `e(l) = c(l mod N')` to `e_len` bits.
///
/// `e_len` shorter than the codeword would puncture it and is rejected.
pub fn rate_match_repeat(code: &[u8], e_len: usize) -> Result<Vec<u8>> {
    if code.is_empty() {
        return Err(Error::Dimension("rate matching an empty codeword".into()));
    }
    if e_len < code.len() {
        return Err(Error::Config(format!(
            "rate-matched length {e_len} shorter than codeword length {}; \
             puncturing is not supported",
            code.len()
        )));
    }
    Ok((0..e_len).map(|l| code[l % code.len()]).collect())
}

// ---------------------------------------------------------------------------
// Scheme configuration
// ---------------------------------------------------------------------------

/// Which encoder protects the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeScheme {
    /// The (32, K) basis-table code.
    #[serde(rename = "standard-32k")]
    Standard32K,
    /// Segmented first-order Reed-Muller blocks.
    #[serde(rename = "block-rm1")]
    BlockRm1,
}

/// A validated payload/encoder/rate-matching arrangement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeConfig {
    scheme: CodeScheme,
    payload_k: usize,
    rate_matched_len: usize,
    /// `(bits, order)` per segment; empty for the standard scheme.
    split: Vec<(usize, usize)>,
}

impl CodeConfig {
    /// Standard (32, K) code rate-matched to `e_len` bits.
    pub fn standard_32k(payload_k: usize, e_len: usize) -> Result<CodeConfig> {
        if !(MIN_PAYLOAD_32K..=MAX_PAYLOAD_32K).contains(&payload_k) {
            return Err(Error::Range(format!(
                "(32, K) payload length {payload_k} outside \
                 {MIN_PAYLOAD_32K}..={MAX_PAYLOAD_32K}"
            )));
        }
        if e_len < CODE_LEN_32K {
            return Err(Error::Config(format!(
                "rate-matched length {e_len} shorter than {CODE_LEN_32K}"
            )));
        }
        Ok(CodeConfig {
            scheme: CodeScheme::Standard32K,
            payload_k,
            rate_matched_len: e_len,
            split: Vec::new(),
        })
    }

    /// Segmented RM(1, m) blocks rate-matched to `e_len` bits.
    pub fn block_rm1(split: Vec<(usize, usize)>, e_len: usize) -> Result<CodeConfig> {
        validate_split(&split)?;
        let payload_k = split.iter().map(|&(k, _)| k).sum();
        let coded: usize = split.iter().map(|&(_, m)| 1usize << m).sum();
        if e_len < coded {
            return Err(Error::Config(format!(
                "rate-matched length {e_len} shorter than the {coded} coded bits"
            )));
        }
        Ok(CodeConfig {
            scheme: CodeScheme::BlockRm1,
            payload_k,
            rate_matched_len: e_len,
            split,
        })
    }

    /// The default 11-bit segmentation: 5 bits into RM(1, 4), 6 into RM(1, 5).
    pub fn block_rm1_for_11(e_len: usize) -> Result<CodeConfig> {
        CodeConfig::block_rm1(vec![(5, 4), (6, 5)], e_len)
    }

    /// Builds the scheme's default arrangement for a payload size.
    pub fn for_scheme(scheme: CodeScheme, payload_k: usize, e_len: usize) -> Result<CodeConfig> {
        match scheme {
            CodeScheme::Standard32K => CodeConfig::standard_32k(payload_k, e_len),
            CodeScheme::BlockRm1 => {
                if payload_k != 11 {
                    return Err(Error::Config(format!(
                        "no default segmentation for a {payload_k}-bit block scheme; \
                         only 11-bit payloads have one"
                    )));
                }
                CodeConfig::block_rm1_for_11(e_len)
            }
        }
    }

    pub fn scheme(&self) -> CodeScheme {
        self.scheme
    }

    /// Payload size K in bits.
    pub fn payload_k(&self) -> usize {
        self.payload_k
    }

    /// Rate-matched length E in bits.
    pub fn rate_matched_len(&self) -> usize {
        self.rate_matched_len
    }

    /// Mother codeword length N' before repetition.
    pub fn coded_len(&self) -> usize {
        match self.scheme {
            CodeScheme::Standard32K => CODE_LEN_32K,
            CodeScheme::BlockRm1 => self.split.iter().map(|&(_, m)| 1usize << m).sum(),
        }
    }

    /// Segment layout; empty for the standard scheme.
    pub fn split(&self) -> &[(usize, usize)] {
        &self.split
    }

    /// Encodes and rate matches a payload to `rate_matched_len` bits.
    pub fn encode_rate_matched(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if msg.len() != self.payload_k {
            return Err(Error::Dimension(format!(
                "payload of {} bits, configured for {}",
                msg.len(),
                self.payload_k
            )));
        }
        let code = match self.scheme {
            CodeScheme::Standard32K => encode_32k(msg)?,
            CodeScheme::BlockRm1 => segment_and_encode(msg, &self.split)?,
        };
        rate_match_repeat(&code, self.rate_matched_len)
    }
}
