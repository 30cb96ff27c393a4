//! Detection strategies for short-block uplink control payloads.
//!
//! Three maximum-likelihood style detectors score every candidate message
//! against the received grid:
//!
//! - `noncoherent`: sum over antennas of `|x^H y_i|^2`, phase-blind.
//! - `full-ec`: the estimator-correlator expansion of the same quantity into
//!   a data-independent term, a non-coherent data term and a quasi-coherent
//!   cross term. Algebraically identical to `noncoherent` because the data
//!   and pilot supports are disjoint.
//! - `quasi-coherent`: keeps only the cross term, which is what a
//!   conventional receiver computes after least-squares channel estimation.
//!
//! The block receiver (`fht-block` / `ht-block`) instead estimates the
//! channel from the pilots, maximal-ratio combines the data positions,
//! demaps to soft bits and decodes each first-order Reed-Muller sub-block
//! with a Hadamard transform.
//!
//! Fading is treated as flat per region: metrics and channel estimates are
//! formed per [`RegionPartition`] region and summed across regions and
//! antennas. Per-PRB regions are the simulation default; a whole-frame
//! partition matches the textbook single-coefficient formulas.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hadamard::{rm1_decode_with, BlockTransform};
use crate::phy_frame::{
    demap_resources, generate_dmrs, map_resources, scramble, scrambling_sequence, FrameConfig,
};
use crate::rm_codes::{CodeConfig, CodeScheme};
use crate::{bits, Error, Result};

// ---------------------------------------------------------------------------
// Receiver identities
// ---------------------------------------------------------------------------

/// Metric used by the ML-style detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Noncoherent,
    FullEc,
    QuasiCoherent,
}

/// Selectable receiver front ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverKind {
    /// Exhaustive ML with the non-coherent metric.
    Noncoherent,
    /// Exhaustive ML with the full estimator-correlator metric.
    FullEc,
    /// Exhaustive ML with the quasi-coherent cross term only.
    QuasiCoherent,
    /// Block decoding via the fast Hadamard transform.
    FhtBlock,
    /// Block decoding via the naive Hadamard transform (same decisions).
    HtBlock,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 5] = [
        ReceiverKind::Noncoherent,
        ReceiverKind::FullEc,
        ReceiverKind::QuasiCoherent,
        ReceiverKind::FhtBlock,
        ReceiverKind::HtBlock,
    ];

    /// Stable key used in CLI arguments and result tables.
    pub fn key(self) -> &'static str {
        match self {
            ReceiverKind::Noncoherent => "noncoherent",
            ReceiverKind::FullEc => "full-ec",
            ReceiverKind::QuasiCoherent => "quasi-coherent",
            ReceiverKind::FhtBlock => "fht-block",
            ReceiverKind::HtBlock => "ht-block",
        }
    }

    /// The ML metric this receiver evaluates, if it is an ML receiver.
    pub fn metric(self) -> Option<MetricKind> {
        match self {
            ReceiverKind::Noncoherent => Some(MetricKind::Noncoherent),
            ReceiverKind::FullEc => Some(MetricKind::FullEc),
            ReceiverKind::QuasiCoherent => Some(MetricKind::QuasiCoherent),
            _ => None,
        }
    }

    /// The Hadamard transform flavor, if this is a block receiver.
    pub fn transform(self) -> Option<BlockTransform> {
        match self {
            ReceiverKind::FhtBlock => Some(BlockTransform::Fast),
            ReceiverKind::HtBlock => Some(BlockTransform::Naive),
            _ => None,
        }
    }
}

impl std::fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReceiverKind> {
        ReceiverKind::ALL
            .into_iter()
            .find(|r| r.key() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown receiver {s:?}; expected one of noncoherent, full-ec, \
                     quasi-coherent, fht-block, ht-block"
                ))
            })
    }
}

// ---------------------------------------------------------------------------
// Observations and candidate grids
// ---------------------------------------------------------------------------

/// One antenna's received frame, split into the data and pilot streams in
/// increasing resource-element order.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaObservation {
    pub data: Vec<Complex64>,
    pub pilot: Vec<Complex64>,
}

/// Splits raw per-antenna grids into data/pilot observation streams.
pub fn demap_observations(
    ys: &[Vec<Complex64>],
    frame: &FrameConfig,
) -> Result<Vec<AntennaObservation>> {
    ys.iter()
        .map(|y| {
            let (data, pilot) = demap_resources(y, frame)?;
            Ok(AntennaObservation { data, pilot })
        })
        .collect()
}

/// One hypothesis: the message bits and the data symbols they map to.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub message: Vec<u8>,
    pub data: Vec<Complex64>,
}

/// All `2^K` modulated hypotheses for a code and frame, ordered by message
/// integer value, plus the pilot sub-vector they all share.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    payload_k: usize,
    pub candidates: Vec<Candidate>,
    /// Transmitted pilot values (DMRS scaled by beta, and by the grid
    /// normalization when enabled), identical for every candidate.
    pub pilot: Vec<Complex64>,
}

impl CandidateSet {
    /// Runs the full transmit chain (encode, scramble, modulate, map) for
    /// every message.
    pub fn build(code: &CodeConfig, frame: &FrameConfig) -> Result<CandidateSet> {
        frame.validate()?;
        let k = code.payload_k();
        if k > 16 {
            return Err(Error::Capacity(format!(
                "cannot enumerate 2^{k} candidate messages"
            )));
        }
        if code.rate_matched_len() != 2 * frame.n_data() {
            return Err(Error::Dimension(format!(
                "code emits {} bits but the frame carries {} data bits",
                code.rate_matched_len(),
                2 * frame.n_data()
            )));
        }
        let seq = if frame.scrambling.enabled {
            Some(scrambling_sequence(
                frame.scrambling.c_init,
                code.rate_matched_len(),
            )?)
        } else {
            None
        };
        let dmrs = generate_dmrs(frame)?;
        let mut pilot = Vec::new();
        let mut candidates = Vec::with_capacity(1usize << k);
        for index in 0..(1usize << k) {
            let message = bits::index_to_bits(index, k);
            let mut coded = code.encode_rate_matched(&message)?;
            if let Some(seq) = &seq {
                coded = scramble(&coded, seq)?;
            }
            let data = crate::phy_frame::qpsk_modulate(&coded)?;
            let grid = map_resources(&data, &dmrs, frame)?;
            let (data, p) = demap_resources(&grid.symbols, frame)?;
            if index == 0 {
                pilot = p;
            }
            candidates.push(Candidate { message, data });
        }
        Ok(CandidateSet {
            payload_k: k,
            candidates,
            pilot,
        })
    }

    pub fn payload_k(&self) -> usize {
        self.payload_k
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// The pilot sub-vector a frame actually transmits (beta scaling and grid
/// normalization included), without enumerating candidates.
pub fn transmitted_pilot(frame: &FrameConfig) -> Result<Vec<Complex64>> {
    let dmrs = generate_dmrs(frame)?;
    let zeros = vec![Complex64::ZERO; frame.n_data()];
    let grid = map_resources(&zeros, &dmrs, frame)?;
    let (_, pilot) = demap_resources(&grid.symbols, frame)?;
    Ok(pilot)
}

// ---------------------------------------------------------------------------
// Flatness regions
// ---------------------------------------------------------------------------

/// How a frame is split into flatness regions. The receivers assume one
/// channel coefficient per antenna per region; the choice trades model error
/// under frequency selectivity (coarse regions) against estimation noise
/// (fine regions, fewer pilots each).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionScheme {
    /// One region per PRB, the default for frequency-selective channels.
    #[default]
    PerPrb,
    /// A single region spanning the frame, as in the flat-fading formulas.
    WholeFrame,
}

impl RegionScheme {
    pub fn key(self) -> &'static str {
        match self {
            RegionScheme::PerPrb => "per-prb",
            RegionScheme::WholeFrame => "whole-frame",
        }
    }

    pub fn partition(self, frame: &FrameConfig) -> Result<RegionPartition> {
        match self {
            RegionScheme::PerPrb => RegionPartition::per_prb(frame),
            RegionScheme::WholeFrame => RegionPartition::whole_frame(frame),
        }
    }
}

impl std::str::FromStr for RegionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<RegionScheme> {
        match s {
            "per-prb" => Ok(RegionScheme::PerPrb),
            "whole-frame" => Ok(RegionScheme::WholeFrame),
            _ => Err(Error::Config(format!(
                "unknown region scheme {s:?}; expected per-prb or whole-frame"
            ))),
        }
    }
}

/// Assignment of every data and pilot stream element to a flatness region.
/// Channel estimates and metric correlations are formed per region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    n_regions: usize,
    data_region: Vec<usize>,
    pilot_region: Vec<usize>,
}

impl RegionPartition {
    /// A single region spanning the frame: one channel coefficient per
    /// antenna, as in the flat-fading formulas.
    pub fn whole_frame(frame: &FrameConfig) -> Result<RegionPartition> {
        frame.validate()?;
        Ok(RegionPartition {
            n_regions: 1,
            data_region: vec![0; frame.n_data()],
            pilot_region: vec![0; frame.n_pilot()],
        })
    }

    /// One region per PRB, the default for frequency-selective channels.
    pub fn per_prb(frame: &FrameConfig) -> Result<RegionPartition> {
        frame.validate()?;
        let data_region = frame
            .data_positions()
            .iter()
            .map(|&t| frame.prb_of(t))
            .collect();
        let pilot_region = frame
            .dmrs_positions()
            .iter()
            .map(|&t| frame.prb_of(t))
            .collect();
        Ok(RegionPartition {
            n_regions: frame.prbs,
            data_region,
            pilot_region,
        })
    }

    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    /// Region id of each data stream element.
    pub fn data_region(&self) -> &[usize] {
        &self.data_region
    }

    /// Region id of each pilot stream element.
    pub fn pilot_region(&self) -> &[usize] {
        &self.pilot_region
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// `x^H y` over one region's elements.
fn correlate(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Combines one region's pilot and data correlations under a metric.
pub(crate) fn combine(metric: MetricKind, p: Complex64, d: Complex64) -> f64 {
    match metric {
        MetricKind::Noncoherent => (p + d).norm_sqr(),
        MetricKind::FullEc => p.norm_sqr() + d.norm_sqr() + 2.0 * (p * d.conj()).re,
        MetricKind::QuasiCoherent => 2.0 * (p * d.conj()).re,
    }
}

fn check_metric_dims(
    x_data: &[Complex64],
    x_pilot: &[Complex64],
    ys: &[AntennaObservation],
) -> Result<()> {
    for y in ys {
        if y.data.len() != x_data.len() || y.pilot.len() != x_pilot.len() {
            return Err(Error::Dimension(format!(
                "observation ({} data, {} pilot) against a candidate of ({}, {})",
                y.data.len(),
                y.pilot.len(),
                x_data.len(),
                x_pilot.len()
            )));
        }
    }
    Ok(())
}

fn metric_over_antennas(
    metric: MetricKind,
    x_data: &[Complex64],
    x_pilot: &[Complex64],
    ys: &[AntennaObservation],
) -> Result<f64> {
    check_metric_dims(x_data, x_pilot, ys)?;
    Ok(ys
        .iter()
        .map(|y| {
            combine(
                metric,
                correlate(x_pilot, &y.pilot),
                correlate(x_data, &y.data),
            )
        })
        .sum())
}

/// Fully non-coherent metric `sum_i |x^H y_i|^2`, treating the given
/// vectors as one flat region.
pub fn metric_noncoherent(
    x_data: &[Complex64],
    x_pilot: &[Complex64],
    ys: &[AntennaObservation],
) -> Result<f64> {
    metric_over_antennas(MetricKind::Noncoherent, x_data, x_pilot, ys)
}

/// Estimator-correlator expansion: data-independent term, non-coherent data
/// term and quasi-coherent cross term. Equals [`metric_noncoherent`] exactly
/// because the supports are disjoint.
pub fn metric_full_ec(
    x_data: &[Complex64],
    x_pilot: &[Complex64],
    ys: &[AntennaObservation],
) -> Result<f64> {
    metric_over_antennas(MetricKind::FullEc, x_data, x_pilot, ys)
}

/// Quasi-coherent metric: only the cross term
/// `2 Re(sum_i x_p^H y_i_p * y_i_d^H x_d)`. The data-independent term is
/// constant across candidates and the non-coherent data term is the one a
/// conventional receiver disregards.
pub fn metric_quasi_coherent(
    x_data: &[Complex64],
    x_pilot: &[Complex64],
    ys: &[AntennaObservation],
) -> Result<f64> {
    metric_over_antennas(MetricKind::QuasiCoherent, x_data, x_pilot, ys)
}

// ---------------------------------------------------------------------------
// Channel estimation
// ---------------------------------------------------------------------------

/// Least-squares estimate `h = x_p^H y_p / ||x_p||^2` over one region.
pub fn ls_channel_estimate(x_pilot: &[Complex64], y_pilot: &[Complex64]) -> Result<Complex64> {
    if x_pilot.len() != y_pilot.len() {
        return Err(Error::Dimension(format!(
            "{} pilot symbols against {} observations",
            x_pilot.len(),
            y_pilot.len()
        )));
    }
    let energy: f64 = x_pilot.iter().map(|p| p.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(Error::Config("pilot sequence has zero energy".into()));
    }
    Ok(correlate(x_pilot, y_pilot) / energy)
}

/// LS estimates per antenna and region: `out[i][r]` for antenna `i`.
pub fn estimate_channels(
    ys: &[AntennaObservation],
    pilot: &[Complex64],
    partition: &RegionPartition,
) -> Result<Vec<Vec<Complex64>>> {
    if pilot.len() != partition.pilot_region.len() {
        return Err(Error::Dimension(format!(
            "{} pilot symbols for a partition over {}",
            pilot.len(),
            partition.pilot_region.len()
        )));
    }
    let n_regions = partition.n_regions;
    let mut region_energy = vec![0.0; n_regions];
    for (&p, &r) in pilot.iter().zip(&partition.pilot_region) {
        region_energy[r] += p.norm_sqr();
    }
    if region_energy.iter().any(|&e| e <= 0.0) {
        return Err(Error::Config(
            "a flatness region has zero pilot energy".into(),
        ));
    }
    ys.iter()
        .map(|y| {
            if y.pilot.len() != pilot.len() {
                return Err(Error::Dimension(format!(
                    "observation has {} pilot symbols, expected {}",
                    y.pilot.len(),
                    pilot.len()
                )));
            }
            let mut acc = vec![Complex64::ZERO; n_regions];
            for ((&xp, &yp), &r) in pilot.iter().zip(&y.pilot).zip(&partition.pilot_region) {
                acc[r] += xp.conj() * yp;
            }
            Ok(acc
                .into_iter()
                .zip(&region_energy)
                .map(|(c, &e)| c / e)
                .collect())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// ML detection
// ---------------------------------------------------------------------------

/// Output of an ML search: winning index/message plus the whole metric
/// vector for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub index: usize,
    pub message: Vec<u8>,
    pub metrics: Vec<f64>,
    pub metric: MetricKind,
}

/// Scores every candidate under `metric`, region by region, summed over
/// antennas; returns the argmax with ties broken toward the smallest message
/// index. All candidates share the same symbol energy (QPSK), so the energy
/// correction of the exact likelihood is constant and omitted.
pub fn ml_decode(
    ys: &[AntennaObservation],
    set: &CandidateSet,
    metric: MetricKind,
    partition: &RegionPartition,
) -> Result<DetectionResult> {
    if set.is_empty() {
        return Err(Error::Config("empty candidate set".into()));
    }
    if ys.is_empty() {
        return Err(Error::Config("no antenna observations".into()));
    }
    let n_regions = partition.n_regions;
    if set.pilot.len() != partition.pilot_region.len()
        || set.candidates[0].data.len() != partition.data_region.len()
    {
        return Err(Error::Dimension(
            "partition does not match the candidate frame".into(),
        ));
    }
    check_metric_dims(&set.candidates[0].data, &set.pilot, ys)?;

    // Pilot correlations are candidate-independent: compute once.
    let p_corr: Vec<Vec<Complex64>> = ys
        .iter()
        .map(|y| {
            let mut acc = vec![Complex64::ZERO; n_regions];
            for ((&xp, &yp), &r) in set.pilot.iter().zip(&y.pilot).zip(&partition.pilot_region) {
                acc[r] += xp.conj() * yp;
            }
            acc
        })
        .collect();

    let mut metrics = Vec::with_capacity(set.len());
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    let mut d_corr = vec![Complex64::ZERO; n_regions];
    for (index, cand) in set.candidates.iter().enumerate() {
        let mut score = 0.0;
        for (y, p_i) in ys.iter().zip(&p_corr) {
            d_corr.fill(Complex64::ZERO);
            for ((&xd, &yd), &r) in cand.data.iter().zip(&y.data).zip(&partition.data_region) {
                d_corr[r] += xd.conj() * yd;
            }
            for (&p, &d) in p_i.iter().zip(&d_corr) {
                score += combine(metric, p, d);
            }
        }
        if score > best_score {
            best_score = score;
            best = index;
        }
        metrics.push(score);
    }
    Ok(DetectionResult {
        index: best,
        message: set.candidates[best].message.clone(),
        metrics,
        metric,
    })
}

// ---------------------------------------------------------------------------
// Block receiver
// ---------------------------------------------------------------------------

/// Hadamard-transform block receiver: MRC with the supplied channel
/// estimates, soft demap, descramble, repetition combining, then one
/// Reed-Muller transform decode per sub-block.
///
/// `h_hat[i][r]` is the channel estimate for antenna `i`, region `r` of the
/// partition, typically from [`estimate_channels`].
pub fn fht_receive(
    ys: &[AntennaObservation],
    code: &CodeConfig,
    frame: &FrameConfig,
    partition: &RegionPartition,
    h_hat: &[Vec<Complex64>],
    transform: BlockTransform,
) -> Result<Vec<u8>> {
    if code.scheme() != CodeScheme::BlockRm1 {
        return Err(Error::Config(format!(
            "block receiver requires the block scheme, got {:?}",
            code.scheme()
        )));
    }
    let n_data = frame.n_data();
    if code.rate_matched_len() != 2 * n_data {
        return Err(Error::Dimension(format!(
            "code emits {} bits but the frame carries {} data bits",
            code.rate_matched_len(),
            2 * n_data
        )));
    }
    if partition.data_region.len() != n_data {
        return Err(Error::Dimension(
            "partition does not match the frame".into(),
        ));
    }
    if ys.len() != h_hat.len() || ys.is_empty() {
        return Err(Error::Dimension(format!(
            "{} observations against {} channel estimate rows",
            ys.len(),
            h_hat.len()
        )));
    }
    for (y, h) in ys.iter().zip(h_hat) {
        if y.data.len() != n_data || h.len() != partition.n_regions {
            return Err(Error::Dimension(
                "observation or estimate does not match the frame".into(),
            ));
        }
    }

    // Maximal-ratio combining per data position.
    let mut mrc = vec![Complex64::ZERO; n_data];
    for (y, h) in ys.iter().zip(h_hat) {
        for ((m, &yd), &r) in mrc.iter_mut().zip(&y.data).zip(&partition.data_region) {
            *m += h[r].conj() * yd;
        }
    }

    // Soft demap: positive means bit 0, real part first.
    let mut soft = Vec::with_capacity(2 * n_data);
    for v in &mrc {
        soft.push(v.re);
        soft.push(v.im);
    }

    if frame.scrambling.enabled {
        let seq = scrambling_sequence(frame.scrambling.c_init, soft.len())?;
        for (s, &b) in soft.iter_mut().zip(&seq) {
            if b == 1 {
                *s = -*s;
            }
        }
    }

    // Undo repetition rate matching by summing repeats.
    let coded_len = code.coded_len();
    let mut combined = vec![0.0f64; coded_len];
    for (l, &s) in soft.iter().enumerate() {
        combined[l % coded_len] += s;
    }

    // Transform-decode each sub-block and concatenate the message bits.
    let mut message = Vec::with_capacity(code.payload_k());
    let mut offset = 0usize;
    for &(_, m_j) in code.split() {
        let len = 1usize << m_j;
        let (bits, _) = rm1_decode_with(&combined[offset..offset + len], transform)?;
        message.extend_from_slice(&bits);
        offset += len;
    }
    Ok(message)
}
