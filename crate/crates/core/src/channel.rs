//! Channel models, noise injection and the SNR convention.
//!
//! Two per-antenna channel draws are supported, both constant over the OFDM
//! symbols of a frame (block fading):
//!
//! - `LosPhase`: a single uniform phase per antenna, unit modulus at every
//!   resource element. Isolates detection behavior from fading.
//! - `TdlC`: the 24-tap urban NLOS tapped-delay-line profile with Rayleigh
//!   taps, drawn independently per antenna. Tap delays scale with the
//!   configured delay spread; the frequency response at subcarrier `k` is
//!   `g(k) = sum_t a_t * exp(-j 2 pi f_k tau_t)` with `f_k = k * spacing`.
//!
//! Noise is circular complex Gaussian with variance `sigma^2` per real
//! dimension (`N_0 = 2 sigma^2` per element). The SNR definition charges the
//! full transmitted energy including any pilot boost:
//! `sigma^2 = 10^(-snr_db / 10) * E_s / 2` where `E_s` is the frame's average
//! symbol energy `(N_d + beta^2 N_p) / N` (1 when the grid is normalized).

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::phy_frame::FrameConfig;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    /// Unit-modulus random phase per antenna.
    LosPhase,
    /// Tapped-delay-line urban NLOS fading.
    TdlC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    /// Receive antennas N_R.
    pub n_rx: usize,
    /// RMS delay spread in seconds (TDL only).
    pub delay_spread: f64,
    /// Subcarrier spacing in Hz (TDL only).
    pub subcarrier_spacing: f64,
    /// Normalize the tap powers to unit total, giving unit average gain.
    pub normalize_power: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            model: ChannelModel::TdlC,
            n_rx: 2,
            delay_spread: 300e-9,
            subcarrier_spacing: 30e3,
            normalize_power: true,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 {
            return Err(Error::Config("at least one receive antenna".into()));
        }
        if !(self.delay_spread.is_finite() && self.delay_spread >= 0.0) {
            return Err(Error::Config(format!(
                "delay spread {} must be finite and non-negative",
                self.delay_spread
            )));
        }
        if !(self.subcarrier_spacing.is_finite() && self.subcarrier_spacing > 0.0) {
            return Err(Error::Config(format!(
                "subcarrier spacing {} must be positive",
                self.subcarrier_spacing
            )));
        }
        Ok(())
    }
}

/// One channel draw: per-antenna complex gain at every resource element,
/// together with the noise variance the observation will be drawn at.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `gains[i][t]` for antenna `i`, resource element `t`.
    pub gains: Vec<Vec<Complex64>>,
    /// Noise variance per real dimension; `N_0 = 2 sigma^2`.
    pub sigma2: f64,
}

impl ChannelRealization {
    pub fn n_rx(&self) -> usize {
        self.gains.len()
    }
}

// ---------------------------------------------------------------------------
// TDL-C profile
// ---------------------------------------------------------------------------

const TDL_C_TEXT: &str = include_str!("../data/tdl_c.txt");
/// FNV-1a 64 checksum of the shipped profile file.
const TDL_C_FNV1A: u64 = 0xd9e4eb97b00883b9;

/// A tapped-delay-line power delay profile: normalized delays and powers in
/// dB, one row per tap.
#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    taps: Vec<(f64, f64)>,
}

impl TdlProfile {
    /// The TDL-C profile shipped with the crate, checksum-verified on first
    /// use.
    pub fn tdl_c() -> &'static TdlProfile {
        static PROFILE: OnceLock<TdlProfile> = OnceLock::new();
        PROFILE.get_or_init(|| {
            let sum = crate::fnv1a64(TDL_C_TEXT.as_bytes());
            assert_eq!(
                sum, TDL_C_FNV1A,
                "embedded TDL-C profile failed its checksum: {sum:#018x}"
            );
            TdlProfile::parse(TDL_C_TEXT).expect("embedded TDL-C profile must parse")
        })
    }

    /// Parses `normalized_delay power_db` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<TdlProfile> {
        let mut taps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let delay: f64 = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or(Error::Parse {
                    line: lineno + 1,
                    message: "missing or invalid normalized delay".into(),
                })?;
            let power_db: f64 = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or(Error::Parse {
                    line: lineno + 1,
                    message: "missing or invalid power".into(),
                })?;
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "expected exactly two columns".into(),
                });
            }
            if delay < 0.0 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("negative normalized delay {delay}"),
                });
            }
            taps.push((delay, power_db));
        }
        if taps.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "profile has no taps".into(),
            });
        }
        Ok(TdlProfile { taps })
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    /// `(normalized_delay, power_db)` rows.
    pub fn taps(&self) -> &[(f64, f64)] {
        &self.taps
    }

    /// Linear tap powers, normalized to unit total when asked.
    pub fn linear_powers(&self, normalize: bool) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .taps
            .iter()
            .map(|&(_, db)| 10f64.powf(db / 10.0))
            .collect();
        if normalize {
            let total: f64 = p.iter().sum();
            for x in p.iter_mut() {
                *x /= total;
            }
        }
        p
    }
}

// ---------------------------------------------------------------------------
// Channel draws
// ---------------------------------------------------------------------------

/// Precomputed TDL-C draw machinery for one (channel, frame) pairing.
///
/// The per-(subcarrier, tap) phase factors do not depend on the realization,
/// so sweeps build this once and draw cheaply.
#[derive(Debug, Clone)]
pub struct TdlcGenerator {
    n_rx: usize,
    n: usize,
    n_subcarriers: usize,
    /// Per-tap amplitude of each real dimension, `sqrt(p_t / 2)`.
    amps: Vec<f64>,
    /// `phases[k * n_taps + t] = exp(-j 2 pi f_k tau_t)`.
    phases: Vec<Complex64>,
}

impl TdlcGenerator {
    pub fn new(cfg: &ChannelConfig, frame: &FrameConfig) -> Result<TdlcGenerator> {
        cfg.validate()?;
        frame.validate()?;
        let profile = TdlProfile::tdl_c();
        let powers = profile.linear_powers(cfg.normalize_power);
        let amps = powers.iter().map(|&p| (p / 2.0).sqrt()).collect();
        let n_sc = frame.n_subcarriers();
        let n_taps = profile.n_taps();
        let mut phases = Vec::with_capacity(n_sc * n_taps);
        for k in 0..n_sc {
            let f_k = k as f64 * cfg.subcarrier_spacing;
            for &(delay, _) in profile.taps() {
                let tau = delay * cfg.delay_spread;
                let angle = -std::f64::consts::TAU * f_k * tau;
                phases.push(Complex64::from_polar(1.0, angle));
            }
        }
        Ok(TdlcGenerator {
            n_rx: cfg.n_rx,
            n: frame.n(),
            n_subcarriers: n_sc,
            amps,
            phases,
        })
    }

    /// Draws i.i.d. Rayleigh taps per antenna and evaluates the frequency
    /// response, constant across the frame's OFDM symbols.
    pub fn draw<R: Rng + ?Sized>(&self, sigma2: f64, rng: &mut R) -> ChannelRealization {
        let n_taps = self.amps.len();
        let mut gains = Vec::with_capacity(self.n_rx);
        let mut taps = vec![Complex64::ZERO; n_taps];
        for _ in 0..self.n_rx {
            for (a, amp) in taps.iter_mut().zip(&self.amps) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *a = Complex64::new(amp * re, amp * im);
            }
            let mut per_sc = Vec::with_capacity(self.n_subcarriers);
            for k in 0..self.n_subcarriers {
                let base = k * n_taps;
                let mut g = Complex64::ZERO;
                for (t, a) in taps.iter().enumerate() {
                    g += a * self.phases[base + t];
                }
                per_sc.push(g);
            }
            gains.push((0..self.n).map(|t| per_sc[t % self.n_subcarriers]).collect());
        }
        ChannelRealization { gains, sigma2 }
    }
}

/// One uniform phase per antenna, replicated over the frame.
pub fn draw_los_phase<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    frame: &FrameConfig,
    sigma2: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    frame.validate()?;
    let n = frame.n();
    let gains = (0..cfg.n_rx)
        .map(|_| {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            vec![Complex64::from_polar(1.0, theta); n]
        })
        .collect();
    Ok(ChannelRealization { gains, sigma2 })
}

/// Fresh TDL-C draw. Sweeps should hold a [`TdlcGenerator`] instead of
/// calling this per trial.
pub fn draw_tdlc<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    frame: &FrameConfig,
    sigma2: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    Ok(TdlcGenerator::new(cfg, frame)?.draw(sigma2, rng))
}

/// Dispatches on the configured model.
pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    frame: &FrameConfig,
    sigma2: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    match cfg.model {
        ChannelModel::LosPhase => draw_los_phase(cfg, frame, sigma2, rng),
        ChannelModel::TdlC => draw_tdlc(cfg, frame, sigma2, rng),
    }
}

/// Applies the channel to a transmitted grid:
/// `y_i(t) = gains[i][t] * x(t) + z` with `z` circular complex Gaussian of
/// variance `sigma^2` per real dimension.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[Complex64],
    ch: &ChannelRealization,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    let sigma = ch.sigma2.sqrt();
    ch.gains
        .iter()
        .map(|g| {
            assert_eq!(g.len(), x.len(), "channel drawn for a different frame size");
            g.iter()
                .zip(x)
                .map(|(&gain, &sym)| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    gain * sym + Complex64::new(sigma * re, sigma * im)
                })
                .collect()
        })
        .collect()
}

/// Noise variance per real dimension for an SNR in dB:
/// `sigma^2 = 10^(-snr_db / 10) * E_s / 2`.
pub fn snr_to_sigma2(snr_db: f64, frame: &FrameConfig) -> f64 {
    10f64.powf(-snr_db / 10.0) * frame.avg_symbol_energy() / 2.0
}
