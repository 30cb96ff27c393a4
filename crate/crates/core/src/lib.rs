//! Link-level simulation toolkit for short block uplink control transmission.
//!
//! Payloads of 3 to 11 bits are protected either by the standard (32, K)
//! block code or by a pair of first-order Reed-Muller codes, mapped onto a
//! small OFDM resource grid together with DMRS pilots, and recovered by
//! maximum likelihood detectors or by a low-complexity block receiver built
//! on the fast Hadamard transform. A Monte Carlo engine measures block error
//! rates over line-of-sight and tapped-delay-line fading channels and
//! reports receiver-to-receiver SNR gaps at a target error rate.
//!
//! Module map:
//! - [`rm_codes`]: generator matrices, encoders, segmentation, rate matching
//! - [`hadamard`]: Sylvester matrices, naive and fast transforms, RM(1, m) decoding
//! - [`phy_frame`]: scrambling, QPSK mapping, DMRS, resource grid mapping
//! - [`channel`]: LOS-phase and TDL-C channel draws, AWGN, SNR conversion
//! - [`receivers`]: detection metrics, ML decoding, the FHT block receiver
//! - [`sim`]: trial engine, BLER sweeps, Wilson intervals, gap estimation, CSV

pub mod bits;
pub mod channel;
pub mod hadamard;
pub mod phy_frame;
pub mod receivers;
pub mod rm_codes;
pub mod sim;

pub use num_complex::Complex64;

pub use channel::{ChannelConfig, ChannelModel, ChannelRealization};
pub use hadamard::CorrelationVector;
pub use phy_frame::{FrameConfig, ResourceGrid, ScramblingConfig};
pub use receivers::{
    AntennaObservation, CandidateSet, DetectionResult, MetricKind, ReceiverKind, RegionPartition,
    RegionScheme,
};
pub use rm_codes::{CodeConfig, CodeScheme};
pub use sim::{BlerTable, GapReport, SimConfig, SnrGrid};

/// Error taxonomy shared across the toolkit.
///
/// Builders and configuration paths return these; pure math kernels assert
/// their preconditions instead, since a shape violation there is a
/// programming error rather than a recoverable condition.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// FNV-1a 64-bit hash, used to pin the embedded data tables.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
