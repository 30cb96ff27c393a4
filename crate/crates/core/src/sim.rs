//! Monte Carlo BLER engine.
//!
//! Sweeps an SNR grid, running every configured receiver on the same
//! realizations (paired trials), and reports per-point block error rates
//! with Wilson 95% half-widths. Receiver-to-receiver SNR gaps at a target
//! BLER are read off the curves by interpolating linearly in (SNR dB,
//! log10 BLER).
//!
//! Determinism: each trial derives its own counter-based rng stream from
//! `(master seed, snr_db bits, trial index)`, trials aggregate through
//! commutative integer sums in fixed-size batches, and floats are printed
//! with the shortest round-trip formatting. A sweep therefore produces
//! byte-identical CSV for a given seed under any degree of parallelism,
//! and sweeps that share a seed and grid are paired trial-for-trial across
//! receiver sets, beta values and code schemes (antenna count and frame
//! geometry being equal).

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    apply_channel, draw_los_phase, snr_to_sigma2, ChannelConfig, ChannelModel, TdlcGenerator,
};
use crate::hadamard::BlockTransform;
use crate::phy_frame::{scrambling_sequence, FrameConfig};
use crate::receivers::{
    combine, fht_receive, AntennaObservation, CandidateSet, MetricKind, ReceiverKind,
    RegionPartition, RegionScheme,
};
use crate::rm_codes::{CodeConfig, CodeScheme};
use crate::{bits, Error, Result};

/// Upper bound on receivers per sweep (error masks fit one machine word).
pub const MAX_RECEIVERS: usize = 8;
/// Trials per aggregation batch; early stopping is evaluated at batch
/// boundaries only, so the trial count at a point is schedule-invariant.
const BATCH_TRIALS: u64 = 4096;
/// Minimum observed errors before early stopping may trigger.
const ERROR_FLOOR: u64 = 50;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Inclusive SNR grid in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<SnrGrid> {
        let grid = SnrGrid {
            start_db,
            stop_db,
            step_db,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_db.is_finite() && self.stop_db.is_finite() && self.step_db.is_finite()) {
            return Err(Error::Config("SNR grid must be finite".into()));
        }
        if self.step_db <= 0.0 {
            return Err(Error::Config(format!(
                "SNR step {} must be positive",
                self.step_db
            )));
        }
        if self.stop_db < self.start_db {
            return Err(Error::Config(format!(
                "SNR stop {} below start {}",
                self.stop_db, self.start_db
            )));
        }
        Ok(())
    }

    /// Grid points `start, start+step, …` up to and including `stop`
    /// (with a small tolerance so binary fractions hit the endpoint).
    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = self.start_db + i as f64 * self.step_db;
            if v > self.stop_db + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    }
}

/// Full description of one Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Payload size K in bits.
    pub payload_k: usize,
    pub scheme: CodeScheme,
    pub frame: FrameConfig,
    pub channel: ChannelConfig,
    pub receivers: Vec<ReceiverKind>,
    /// Flatness-region granularity for channel estimation and metrics.
    pub flatness: RegionScheme,
    pub snr: SnrGrid,
    /// Trial budget per SNR point.
    pub trials: u64,
    /// Optional early-stop error target per receiver (floored at 50).
    pub target_errors: Option<u64>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::default_for_payload(4).expect("default 4-bit config is valid")
    }
}

impl SimConfig {
    /// Canonical experiment for a payload size: 4-bit style payloads ride
    /// the (32, K) code on 2 PRBs; the 11-bit payload uses the
    /// Reed-Muller block pair on 3 PRBs with the block receivers.
    pub fn default_for_payload(payload_k: usize) -> Result<SimConfig> {
        let (scheme, prbs, receivers) = if payload_k == 11 {
            (
                CodeScheme::BlockRm1,
                3,
                vec![
                    ReceiverKind::FhtBlock,
                    ReceiverKind::HtBlock,
                    ReceiverKind::QuasiCoherent,
                ],
            )
        } else {
            (
                CodeScheme::Standard32K,
                2,
                vec![ReceiverKind::Noncoherent, ReceiverKind::QuasiCoherent],
            )
        };
        let cfg = SimConfig {
            payload_k,
            scheme,
            frame: FrameConfig {
                prbs,
                ..FrameConfig::default()
            },
            channel: ChannelConfig::default(),
            receivers,
            flatness: RegionScheme::default(),
            snr: SnrGrid {
                start_db: -2.0,
                stop_db: 12.0,
                step_db: 0.5,
            },
            trials: 100_000,
            target_errors: None,
            seed: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The code this sweep transmits; rate-matched length is dictated by
    /// the frame's data capacity (2 bits per data element).
    pub fn code(&self) -> Result<CodeConfig> {
        CodeConfig::for_scheme(self.scheme, self.payload_k, 2 * self.frame.n_data())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("at least one trial per point".into()));
        }
        if self.receivers.is_empty() {
            return Err(Error::Config("at least one receiver".into()));
        }
        if self.receivers.len() > MAX_RECEIVERS {
            return Err(Error::Capacity(format!(
                "at most {MAX_RECEIVERS} receivers per sweep"
            )));
        }
        for (i, r) in self.receivers.iter().enumerate() {
            if self.receivers[..i].contains(r) {
                return Err(Error::Config(format!("receiver {r} listed twice")));
            }
            if r.transform().is_some() && self.scheme != CodeScheme::BlockRm1 {
                return Err(Error::Config(format!(
                    "receiver {r} requires the block-rm1 scheme"
                )));
            }
        }
        self.snr.validate()?;
        self.frame.validate()?;
        self.channel.validate()?;
        self.code()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Deterministic per-trial streams
// ---------------------------------------------------------------------------

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based stream seed for one trial. Receiver set and beta are
/// deliberately not mixed in: sweeps sharing (seed, snr, index) see the
/// same message, channel and noise draws.
fn trial_seed(master: u64, snr_db: f64, trial: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ snr_db.to_bits());
    splitmix64(h ^ trial)
}

// ---------------------------------------------------------------------------
// Sweep context
// ---------------------------------------------------------------------------

/// Per-sweep precomputation: candidate grids, flatness partition, channel
/// generator, receiver dispatch tables. Immutable during the sweep, so
/// trials can run concurrently against it.
pub struct SweepContext {
    cfg: SimConfig,
    code: CodeConfig,
    set: CandidateSet,
    partition: RegionPartition,
    /// Full transmitted symbol grid per candidate message.
    tx_grids: Vec<Vec<Complex64>>,
    data_positions: Vec<usize>,
    pilot_positions: Vec<usize>,
    region_pilot_energy: Vec<f64>,
    tdlc: Option<TdlcGenerator>,
    /// ML receivers evaluated through the shared-correlation path.
    generic_ml: Vec<(usize, MetricKind)>,
    /// Slot of a quasi-coherent receiver served by the soft-bit path.
    fast_qc_slot: Option<usize>,
    block: Vec<(usize, BlockTransform)>,
    /// `1 - 2c` per coded bit, per candidate (soft-bit path only).
    qc_signs: Vec<f64>,
    /// `1 - 2d` per rate-matched position when scrambling is on.
    descramble: Vec<f64>,
}

impl SweepContext {
    pub fn new(cfg: &SimConfig) -> Result<SweepContext> {
        cfg.validate()?;
        let code = cfg.code()?;
        let set = CandidateSet::build(&code, &cfg.frame)?;
        let partition = cfg.flatness.partition(&cfg.frame)?;
        let data_positions = cfg.frame.data_positions();
        let pilot_positions = cfg.frame.dmrs_positions();

        let mut tx_grids = Vec::with_capacity(set.len());
        for cand in &set.candidates {
            let mut grid = vec![Complex64::ZERO; cfg.frame.n()];
            for (&t, &v) in data_positions.iter().zip(&cand.data) {
                grid[t] = v;
            }
            for (&t, &p) in pilot_positions.iter().zip(&set.pilot) {
                grid[t] = p;
            }
            tx_grids.push(grid);
        }

        let mut region_pilot_energy = vec![0.0f64; partition.n_regions()];
        for (&p, &r) in set.pilot.iter().zip(partition.pilot_region()) {
            region_pilot_energy[r] += p.norm_sqr();
        }

        let tdlc = match cfg.channel.model {
            ChannelModel::TdlC => Some(TdlcGenerator::new(&cfg.channel, &cfg.frame)?),
            ChannelModel::LosPhase => None,
        };

        let mut ml = Vec::new();
        let mut block = Vec::new();
        for (slot, r) in cfg.receivers.iter().enumerate() {
            if let Some(metric) = r.metric() {
                ml.push((slot, metric));
            } else if let Some(t) = r.transform() {
                block.push((slot, t));
            }
        }
        // The quasi-coherent metric is linear in the candidate data symbols,
        // so when it is the only ML metric requested the 2^K search reduces
        // to bit-level soft correlations. Other metrics need per-candidate
        // data correlations anyway, in which case quasi-coherent rides along.
        let (generic_ml, fast_qc_slot) = match ml.as_slice() {
            [(slot, MetricKind::QuasiCoherent)] => (Vec::new(), Some(*slot)),
            _ => (ml, None),
        };

        let mut qc_signs = Vec::new();
        if fast_qc_slot.is_some() {
            let n_coded = code.coded_len();
            qc_signs.reserve(set.len() * n_coded);
            for cand in &set.candidates {
                let coded = code.encode_rate_matched(&cand.message)?;
                qc_signs.extend(coded[..n_coded].iter().map(|&b| 1.0 - 2.0 * f64::from(b)));
            }
        }

        let descramble = if cfg.frame.scrambling.enabled {
            scrambling_sequence(cfg.frame.scrambling.c_init, code.rate_matched_len())?
                .iter()
                .map(|&b| 1.0 - 2.0 * f64::from(b))
                .collect()
        } else {
            Vec::new()
        };

        Ok(SweepContext {
            cfg: cfg.clone(),
            code,
            set,
            partition,
            tx_grids,
            data_positions,
            pilot_positions,
            region_pilot_energy,
            tdlc,
            generic_ml,
            fast_qc_slot,
            block,
            qc_signs,
            descramble,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn candidate_set(&self) -> &CandidateSet {
        &self.set
    }

    pub fn partition(&self) -> &RegionPartition {
        &self.partition
    }

    /// Draws one trial's message, channel and noise; the draw order
    /// (message index, channel gains, noise) is part of the pairing
    /// contract across sweeps.
    fn generate(&self, snr_db: f64, sigma2: f64, trial: u64) -> (usize, Vec<AntennaObservation>) {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(self.cfg.seed, snr_db, trial));
        let tx_index = rng.random_range(0..self.set.len());
        let realization = match &self.tdlc {
            Some(generator) => generator.draw(sigma2, &mut rng),
            None => draw_los_phase(&self.cfg.channel, &self.cfg.frame, sigma2, &mut rng)
                .expect("config validated at context build"),
        };
        let raw = apply_channel(&self.tx_grids[tx_index], &realization, &mut rng);
        let observations = raw
            .iter()
            .map(|y| AntennaObservation {
                data: self.data_positions.iter().map(|&t| y[t]).collect(),
                pilot: self.pilot_positions.iter().map(|&t| y[t]).collect(),
            })
            .collect();
        (tx_index, observations)
    }

    /// Runs every configured receiver on one observation set; returns the
    /// decoded message index per receiver slot.
    pub fn decide(&self, observations: &[AntennaObservation]) -> [usize; MAX_RECEIVERS] {
        let n_regions = self.partition.n_regions();
        let n_rx = observations.len();
        let mut out = [0usize; MAX_RECEIVERS];

        // Pilot correlations per (antenna, region), candidate-independent.
        let mut p_corr = vec![Complex64::ZERO; n_rx * n_regions];
        for (i, y) in observations.iter().enumerate() {
            let row = &mut p_corr[i * n_regions..(i + 1) * n_regions];
            for ((&xp, &yp), &r) in self
                .set
                .pilot
                .iter()
                .zip(&y.pilot)
                .zip(self.partition.pilot_region())
            {
                row[r] += xp.conj() * yp;
            }
        }

        if !self.generic_ml.is_empty() {
            let mut best_score = [f64::NEG_INFINITY; MAX_RECEIVERS];
            let mut best_index = [0usize; MAX_RECEIVERS];
            let mut d_corr = vec![Complex64::ZERO; n_rx * n_regions];
            for (c_index, cand) in self.set.candidates.iter().enumerate() {
                d_corr.fill(Complex64::ZERO);
                for (i, y) in observations.iter().enumerate() {
                    let row = &mut d_corr[i * n_regions..(i + 1) * n_regions];
                    for ((&xd, &yd), &r) in cand
                        .data
                        .iter()
                        .zip(&y.data)
                        .zip(self.partition.data_region())
                    {
                        row[r] += xd.conj() * yd;
                    }
                }
                for (g, &(_, metric)) in self.generic_ml.iter().enumerate() {
                    let score: f64 = p_corr
                        .iter()
                        .zip(&d_corr)
                        .map(|(&p, &d)| combine(metric, p, d))
                        .sum();
                    if score > best_score[g] {
                        best_score[g] = score;
                        best_index[g] = c_index;
                    }
                }
            }
            for (g, &(slot, _)) in self.generic_ml.iter().enumerate() {
                out[slot] = best_index[g];
            }
        }

        if let Some(slot) = self.fast_qc_slot {
            out[slot] = self.decide_qc_fast(observations, &p_corr, n_regions);
        }

        if !self.block.is_empty() {
            let h_hat: Vec<Vec<Complex64>> = (0..n_rx)
                .map(|i| {
                    (0..n_regions)
                        .map(|r| p_corr[i * n_regions + r] / self.region_pilot_energy[r])
                        .collect()
                })
                .collect();
            for &(slot, transform) in &self.block {
                let decoded = fht_receive(
                    observations,
                    &self.code,
                    &self.cfg.frame,
                    &self.partition,
                    &h_hat,
                    transform,
                )
                .expect("block receiver validated at context build");
                out[slot] = bits::bits_to_index(&decoded);
            }
        }
        out
    }

    /// Soft-bit evaluation of the quasi-coherent argmax: the metric equals
    /// a positive scale times `sum_l (1-2c_l) u_l` over the coded bits,
    /// where `u` is the descrambled, repetition-combined soft sequence
    /// weighted by the per-region pilot correlations.
    fn decide_qc_fast(
        &self,
        observations: &[AntennaObservation],
        p_corr: &[Complex64],
        n_regions: usize,
    ) -> usize {
        let n_data = self.data_positions.len();
        let mut soft = vec![0.0f64; 2 * n_data];
        for (t, &r) in self.partition.data_region().iter().enumerate() {
            let mut v = Complex64::ZERO;
            for (i, y) in observations.iter().enumerate() {
                v += p_corr[i * n_regions + r] * y.data[t].conj();
            }
            soft[2 * t] = v.re;
            soft[2 * t + 1] = -v.im;
        }
        if !self.descramble.is_empty() {
            for (s, &d) in soft.iter_mut().zip(&self.descramble) {
                *s *= d;
            }
        }
        let n_coded = self.code.coded_len();
        let mut u = vec![0.0f64; n_coded];
        for (l, &s) in soft.iter().enumerate() {
            u[l % n_coded] += s;
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_index = 0usize;
        for c in 0..self.set.len() {
            let signs = &self.qc_signs[c * n_coded..(c + 1) * n_coded];
            let score: f64 = signs.iter().zip(&u).map(|(a, b)| a * b).sum();
            if score > best {
                best = score;
                best_index = c;
            }
        }
        best_index
    }

    fn trial_error_mask(&self, snr_db: f64, sigma2: f64, trial: u64) -> u32 {
        let (tx_index, observations) = self.generate(snr_db, sigma2, trial);
        let decisions = self.decide(&observations);
        let mut mask = 0u32;
        for slot in 0..self.cfg.receivers.len() {
            if decisions[slot] != tx_index {
                mask |= 1 << slot;
            }
        }
        mask
    }

    /// Full BLER sweep over the configured grid.
    pub fn sweep(&self) -> Result<BlerTable> {
        let n_slots = self.cfg.receivers.len();
        let floor = self.cfg.target_errors.map(|t| t.max(ERROR_FLOOR));
        let mut rows = Vec::new();
        for snr_db in self.cfg.snr.points() {
            let sigma2 = snr_to_sigma2(snr_db, &self.cfg.frame);
            let mut errors = [0u64; MAX_RECEIVERS];
            let mut done = 0u64;
            while done < self.cfg.trials {
                let batch = BATCH_TRIALS.min(self.cfg.trials - done);
                let sums = (done..done + batch)
                    .into_par_iter()
                    .fold(
                        || [0u64; MAX_RECEIVERS],
                        |mut acc, trial| {
                            let mask = self.trial_error_mask(snr_db, sigma2, trial);
                            for (slot, count) in acc.iter_mut().enumerate().take(n_slots) {
                                *count += u64::from((mask >> slot) & 1);
                            }
                            acc
                        },
                    )
                    .reduce(
                        || [0u64; MAX_RECEIVERS],
                        |mut a, b| {
                            for (x, y) in a.iter_mut().zip(b) {
                                *x += y;
                            }
                            a
                        },
                    );
                for (total, add) in errors.iter_mut().zip(sums) {
                    *total += add;
                }
                done += batch;
                if let Some(f) = floor {
                    if errors.iter().take(n_slots).all(|&e| e >= f) {
                        break;
                    }
                }
            }
            for (slot, &receiver) in self.cfg.receivers.iter().enumerate() {
                rows.push(BlerRow {
                    snr_db,
                    receiver,
                    trials: done,
                    errors: errors[slot],
                    bler: errors[slot] as f64 / done as f64,
                    ci95: wilson_half_width(errors[slot], done),
                });
            }
        }
        rows.sort_by(|a, b| {
            a.receiver
                .key()
                .cmp(b.receiver.key())
                .then(a.snr_db.total_cmp(&b.snr_db))
        });
        Ok(BlerTable { rows })
    }
}

/// One trial's full record, for paired receiver studies and tests.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub message_index: usize,
    pub message: Vec<u8>,
    pub observations: Vec<AntennaObservation>,
    /// Decoded message index per configured receiver.
    pub decisions: Vec<usize>,
    pub success: Vec<bool>,
}

/// Runs one deterministic trial: message, channel and noise are derived
/// from `(seed, snr_db, trial)` and every configured receiver decodes the
/// same observations.
pub fn run_trial_full(ctx: &SweepContext, snr_db: f64, trial: u64) -> TrialOutcome {
    let sigma2 = snr_to_sigma2(snr_db, &ctx.cfg.frame);
    let (message_index, observations) = ctx.generate(snr_db, sigma2, trial);
    let all = ctx.decide(&observations);
    let decisions: Vec<usize> = all[..ctx.cfg.receivers.len()].to_vec();
    let success = decisions.iter().map(|&d| d == message_index).collect();
    TrialOutcome {
        message_index,
        message: bits::index_to_bits(message_index, ctx.set.payload_k()),
        observations,
        decisions,
        success,
    }
}

/// Per-receiver success flags for one trial.
pub fn run_trial(ctx: &SweepContext, snr_db: f64, trial: u64) -> Vec<bool> {
    run_trial_full(ctx, snr_db, trial).success
}

/// Builds a context and runs the configured sweep.
pub fn run_bler_sweep(cfg: &SimConfig) -> Result<BlerTable> {
    SweepContext::new(cfg)?.sweep()
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// One (SNR point, receiver) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerRow {
    pub snr_db: f64,
    pub receiver: ReceiverKind,
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    /// Wilson 95% half-width.
    pub ci95: f64,
}

/// Sweep result, sorted by (receiver, SNR).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlerTable {
    pub rows: Vec<BlerRow>,
}

pub const BLER_CSV_HEADER: &str = "snr_db,receiver,trials,errors,bler,ci95";

impl BlerTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(BLER_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.snr_db, r.receiver, r.trials, r.errors, r.bler, r.ci95
            ));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<BlerTable> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == BLER_CSV_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {BLER_CSV_HEADER:?}"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 6 fields, got {}", fields.len()),
                });
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            rows.push(BlerRow {
                snr_db: fields[0]
                    .parse()
                    .map_err(|_| parse_err(format!("bad snr_db {:?}", fields[0])))?,
                receiver: fields[1]
                    .parse()
                    .map_err(|_| parse_err(format!("bad receiver {:?}", fields[1])))?,
                trials: fields[2]
                    .parse()
                    .map_err(|_| parse_err(format!("bad trials {:?}", fields[2])))?,
                errors: fields[3]
                    .parse()
                    .map_err(|_| parse_err(format!("bad errors {:?}", fields[3])))?,
                bler: fields[4]
                    .parse()
                    .map_err(|_| parse_err(format!("bad bler {:?}", fields[4])))?,
                ci95: fields[5]
                    .parse()
                    .map_err(|_| parse_err(format!("bad ci95 {:?}", fields[5])))?,
            });
        }
        Ok(BlerTable { rows })
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<BlerTable> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        BlerTable::parse_csv(&text)
    }
}

/// Wilson-score 95% half-width for `errors` out of `trials`.
pub fn wilson_half_width(errors: u64, trials: u64) -> f64 {
    // z for a two-sided 95% interval.
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    Z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Wilson interval center; together with [`wilson_half_width`] this gives
/// the 95% interval for the true BLER.
pub fn wilson_center(errors: u64, trials: u64) -> f64 {
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    (p + z2 / (2.0 * n)) / (1.0 + z2 / n)
}

// ---------------------------------------------------------------------------
// Gap estimation
// ---------------------------------------------------------------------------

/// SNR difference between two receivers at a common target BLER.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub receiver_a: ReceiverKind,
    pub receiver_b: ReceiverKind,
    pub target_bler: f64,
    pub snr_a_db: f64,
    pub snr_b_db: f64,
    /// `snr_a_db - snr_b_db`: positive means `a` needs more SNR.
    pub gap_db: f64,
}

pub const GAP_CSV_HEADER: &str = "pair,target_bler,snr_a_db,snr_b_db,gap_db";

impl GapReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{} vs {},{},{},{},{}",
            self.receiver_a, self.receiver_b, self.target_bler, self.snr_a_db, self.snr_b_db,
            self.gap_db
        )
    }
}

/// CSV for a batch of gap reports.
pub fn gap_reports_to_csv(reports: &[GapReport]) -> String {
    let mut out = String::from(GAP_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// SNR at which a receiver's curve crosses `target`, interpolating
/// linearly in (SNR dB, log10 BLER) between the first bracketing pair of
/// grid points. Zero-BLER rows cannot be interpolated through and are
/// skipped; an exact hit returns that grid point.
pub fn snr_at_target_bler(
    table: &BlerTable,
    receiver: ReceiverKind,
    target: f64,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Range(format!(
            "target BLER {target} outside (0, 1)"
        )));
    }
    let mut points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.receiver == receiver)
        .map(|r| (r.snr_db, r.bler))
        .collect();
    if points.is_empty() {
        return Err(Error::Range(format!("no rows for receiver {receiver}")));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(snr, bler) in &points {
        if bler == target {
            return Ok(snr);
        }
    }
    for w in points.windows(2) {
        let (s0, b0) = w[0];
        let (s1, b1) = w[1];
        if b0 > target && b1 < target && b1 > 0.0 {
            let f = (b0.log10() - target.log10()) / (b0.log10() - b1.log10());
            return Ok(s0 + f * (s1 - s0));
        }
    }
    Err(Error::Range(format!(
        "receiver {receiver} does not bracket BLER {target} within the sweep"
    )))
}

/// Gap between two receivers at `target`: `snr_a - snr_b` at equal BLER.
pub fn estimate_gap_at_bler(
    table: &BlerTable,
    receiver_a: ReceiverKind,
    receiver_b: ReceiverKind,
    target: f64,
) -> Result<GapReport> {
    let snr_a_db = snr_at_target_bler(table, receiver_a, target)?;
    let snr_b_db = snr_at_target_bler(table, receiver_b, target)?;
    Ok(GapReport {
        receiver_a,
        receiver_b,
        target_bler: target,
        snr_a_db,
        snr_b_db,
        gap_db: snr_a_db - snr_b_db,
    })
}
