//! Scrambling, QPSK mapping, DMRS generation and resource grid layout.
//!
//! A frame spans `P` resource blocks of 12 subcarriers over `L` OFDM symbols,
//! `N = 12 * P * L` resource elements in total. Element `t` sits at symbol
//! `l = t / (12 P)` and subcarrier `k = t mod 12 P`. A configurable set of
//! per-PRB subcarriers carries DMRS pilots in every symbol (default
//! {1, 4, 7, 10}, the standard pattern for this frame type); the remaining
//! elements carry data in increasing index order.
//!
//! The transmitted grid is `x = x_data + beta * x_pilot`, so its energy is
//! `N_d + beta^2 * N_p` and grows with the pilot boost. An optional
//! normalization flag rescales the grid to unit average symbol energy for
//! fairness studies; the default keeps the boosted energy and lets the SNR
//! definition account for it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::ensure_binary;
use crate::{Error, Result};

/// Subcarriers per resource block.
pub const SUBCARRIERS_PER_PRB: usize = 12;
/// Warm-up offset of the length-31 Gold generator.
pub const GOLD_SEQUENCE_OFFSET: usize = 1600;

// ---------------------------------------------------------------------------
// Scrambling
// ---------------------------------------------------------------------------

/// Generates `len` bits of the length-31 Gold sequence
/// `c(n) = (x1(n + 1600) + x2(n + 1600)) mod 2` with
/// `x1(n+31) = x1(n+3) + x1(n)` seeded at `x1 = 1, 0, ..., 0` and
/// `x2(n+31) = x2(n+3) + x2(n+2) + x2(n+1) + x2(n)` seeded with the binary
/// expansion of `c_init`.
pub fn scrambling_sequence(c_init: u32, len: usize) -> Result<Vec<u8>> {
    if c_init >= 1 << 31 {
        return Err(Error::Range(format!(
            "scrambling c_init {c_init} does not fit in 31 bits"
        )));
    }
    // Bit i of each state holds x(n + i); stepping shifts the window by one.
    let mut x1: u32 = 1;
    let mut x2: u32 = c_init;
    let step = |x1: &mut u32, x2: &mut u32| {
        let n1 = ((*x1 >> 3) ^ *x1) & 1;
        let n2 = ((*x2 >> 3) ^ (*x2 >> 2) ^ (*x2 >> 1) ^ *x2) & 1;
        *x1 = (*x1 >> 1) | (n1 << 30);
        *x2 = (*x2 >> 1) | (n2 << 30);
    };
    for _ in 0..GOLD_SEQUENCE_OFFSET {
        step(&mut x1, &mut x2);
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(((x1 ^ x2) & 1) as u8);
        step(&mut x1, &mut x2);
    }
    Ok(out)
}

/// Elementwise XOR of a bit sequence with a scrambling sequence of the same
/// length.
pub fn scramble(bits: &[u8], sequence: &[u8]) -> Result<Vec<u8>> {
    ensure_binary(bits)?;
    ensure_binary(sequence)?;
    crate::bits::xor(bits, sequence)
}

// ---------------------------------------------------------------------------
// QPSK
// ---------------------------------------------------------------------------

/// Maps bit pairs to unit-energy QPSK symbols:
/// `s = ((1 - 2 b_even) + j (1 - 2 b_odd)) / sqrt(2)`.
pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    ensure_binary(bits)?;
    if bits.len() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|pair| {
            Complex64::new(
                (1.0 - 2.0 * f64::from(pair[0])) * std::f64::consts::FRAC_1_SQRT_2,
                (1.0 - 2.0 * f64::from(pair[1])) * std::f64::consts::FRAC_1_SQRT_2,
            )
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Frame configuration
// ---------------------------------------------------------------------------

/// Data scrambling switch and seed. Disabled by default so algorithm studies
/// see raw codewords; receivers embed the same sequence either way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScramblingConfig {
    pub enabled: bool,
    pub c_init: u32,
}

impl Default for ScramblingConfig {
    fn default() -> Self {
        ScramblingConfig {
            enabled: false,
            c_init: 0,
        }
    }
}

/// Geometry and power layout of one transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameConfig {
    /// Resource blocks P.
    pub prbs: usize,
    /// OFDM symbols L.
    pub symbols: usize,
    /// Per-PRB subcarrier indices carrying DMRS, each in `0..12`.
    pub dmrs_subcarriers: Vec<usize>,
    /// Pilot amplitude boost beta.
    pub beta: f64,
    pub scrambling: ScramblingConfig,
    /// Seed of the DMRS symbol sequence.
    pub dmrs_c_init: u32,
    /// Rescale the grid to unit average symbol energy.
    pub normalize_power: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            prbs: 2,
            symbols: 1,
            dmrs_subcarriers: vec![1, 4, 7, 10],
            beta: 1.0,
            scrambling: ScramblingConfig::default(),
            dmrs_c_init: 1,
            normalize_power: false,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prbs == 0 || self.symbols == 0 {
            return Err(Error::Config("frame needs at least one PRB and symbol".into()));
        }
        if self.dmrs_subcarriers.is_empty() {
            return Err(Error::Config("frame needs at least one DMRS subcarrier".into()));
        }
        let mut seen = [false; SUBCARRIERS_PER_PRB];
        for &sc in &self.dmrs_subcarriers {
            if sc >= SUBCARRIERS_PER_PRB {
                return Err(Error::Range(format!(
                    "DMRS subcarrier {sc} outside 0..{SUBCARRIERS_PER_PRB}"
                )));
            }
            if seen[sc] {
                return Err(Error::Config(format!("duplicate DMRS subcarrier {sc}")));
            }
            seen[sc] = true;
        }
        if self.dmrs_subcarriers.len() == SUBCARRIERS_PER_PRB {
            return Err(Error::Config("DMRS occupies every subcarrier".into()));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config(format!("beta {} must be positive", self.beta)));
        }
        if self.scrambling.c_init >= 1 << 31 || self.dmrs_c_init >= 1 << 31 {
            return Err(Error::Range("c_init does not fit in 31 bits".into()));
        }
        Ok(())
    }

    /// Total resource elements `N = 12 P L`.
    pub fn n(&self) -> usize {
        SUBCARRIERS_PER_PRB * self.prbs * self.symbols
    }

    /// Subcarriers spanned, `12 P`.
    pub fn n_subcarriers(&self) -> usize {
        SUBCARRIERS_PER_PRB * self.prbs
    }

    /// Pilot elements `N_p`.
    pub fn n_pilot(&self) -> usize {
        self.dmrs_subcarriers.len() * self.prbs * self.symbols
    }

    /// Data elements `N_d = N - N_p`.
    pub fn n_data(&self) -> usize {
        self.n() - self.n_pilot()
    }

    /// PRB index of resource element `t`.
    pub fn prb_of(&self, t: usize) -> usize {
        (t % self.n_subcarriers()) / SUBCARRIERS_PER_PRB
    }

    /// Subcarrier index of resource element `t`.
    pub fn subcarrier_of(&self, t: usize) -> usize {
        t % self.n_subcarriers()
    }

    /// Pilot positions in increasing resource element order.
    pub fn dmrs_positions(&self) -> Vec<usize> {
        let mut pattern = self.dmrs_subcarriers.clone();
        pattern.sort_unstable();
        let mut positions = Vec::with_capacity(self.n_pilot());
        for l in 0..self.symbols {
            for p in 0..self.prbs {
                for &sc in &pattern {
                    positions.push(l * self.n_subcarriers() + p * SUBCARRIERS_PER_PRB + sc);
                }
            }
        }
        positions
    }

    /// Data positions in increasing resource element order.
    pub fn data_positions(&self) -> Vec<usize> {
        let mut is_pilot = vec![false; self.n()];
        for t in self.dmrs_positions() {
            is_pilot[t] = true;
        }
        (0..self.n()).filter(|&t| !is_pilot[t]).collect()
    }

    /// Average transmitted symbol energy `(N_d + beta^2 N_p) / N`, or 1 when
    /// the grid is normalized.
    pub fn avg_symbol_energy(&self) -> f64 {
        if self.normalize_power {
            1.0
        } else {
            self.raw_symbol_energy()
        }
    }

    fn raw_symbol_energy(&self) -> f64 {
        (self.n_data() as f64 + self.beta * self.beta * self.n_pilot() as f64) / self.n() as f64
    }
}

/// Deterministic unit-modulus DMRS symbols for a frame: QPSK symbols drawn
/// from the Gold sequence seeded with `dmrs_c_init`.
pub fn generate_dmrs(cfg: &FrameConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let bits = scrambling_sequence(cfg.dmrs_c_init, 2 * cfg.n_pilot())?;
    qpsk_modulate(&bits)
}

// ---------------------------------------------------------------------------
// Resource grid
// ---------------------------------------------------------------------------

/// A mapped frame: symbol per resource element plus a mask telling data
/// positions from pilot positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub symbols: Vec<Complex64>,
    pub data_mask: Vec<bool>,
}

impl ResourceGrid {
    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Lays out `x = x_data + beta * x_pilot`: pilots (scaled by `beta`) at the
/// DMRS positions, data filling the remaining elements in increasing index
/// order. With `normalize_power` set, the grid is divided by
/// `sqrt((N_d + beta^2 N_p) / N)`.
pub fn map_resources(
    data: &[Complex64],
    dmrs: &[Complex64],
    cfg: &FrameConfig,
) -> Result<ResourceGrid> {
    cfg.validate()?;
    if data.len() != cfg.n_data() {
        return Err(Error::Dimension(format!(
            "{} data symbols for {} data positions",
            data.len(),
            cfg.n_data()
        )));
    }
    if dmrs.len() != cfg.n_pilot() {
        return Err(Error::Dimension(format!(
            "{} DMRS symbols for {} pilot positions",
            dmrs.len(),
            cfg.n_pilot()
        )));
    }
    let mut symbols = vec![Complex64::ZERO; cfg.n()];
    let mut data_mask = vec![true; cfg.n()];
    for (pos, &p) in cfg.dmrs_positions().iter().zip(dmrs) {
        symbols[*pos] = cfg.beta * p;
        data_mask[*pos] = false;
    }
    let mut di = 0usize;
    for (t, s) in symbols.iter_mut().enumerate() {
        if data_mask[t] {
            *s = data[di];
            di += 1;
        }
    }
    if cfg.normalize_power {
        let scale = cfg.raw_symbol_energy().sqrt().recip();
        for s in symbols.iter_mut() {
            *s *= scale;
        }
    }
    Ok(ResourceGrid { symbols, data_mask })
}

/// Splits received symbols back into (data, pilot) streams in increasing
/// index order. No scaling is undone: the pilot stream of a mapped grid is
/// `beta` times the DMRS sequence.
pub fn demap_resources(
    symbols: &[Complex64],
    cfg: &FrameConfig,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    cfg.validate()?;
    if symbols.len() != cfg.n() {
        return Err(Error::Dimension(format!(
            "{} symbols for a {}-element frame",
            symbols.len(),
            cfg.n()
        )));
    }
    let data = cfg.data_positions().iter().map(|&t| symbols[t]).collect();
    let pilot = cfg.dmrs_positions().iter().map(|&t| symbols[t]).collect();
    Ok((data, pilot))
}
