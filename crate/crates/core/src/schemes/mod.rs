//! Per-scheme analytic models.
//!
//! [`SchemeId`] and [`SchemeConfig`] describe what is transmitted; `ser`
//! holds the error-rate models and their inversion, `energy` the circuit
//! and per-frame energy accounting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod energy;
mod ser;

pub use energy::{
    circuit_power, ook_total_energy_sampled, total_energy, CircuitPower, CircuitProfile,
    EnergyBreakdown,
};
pub use ser::{
    avg_ser_closed, avg_ser_general, avg_ser_model, bound_terms, conditional_ser,
    inversion_coefficient, required_avg_snr, required_symbol_energy, AvgMethod, BoundTerm,
    SerModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    NcMfsk,
    CoherentMfsk,
    Mqam,
    Doqpsk,
    Ook,
    Mppm,
}

/// Radio front end a scheme runs on; selects the default circuit profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    PassBand,
    Uwb,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::NcMfsk,
        SchemeId::CoherentMfsk,
        SchemeId::Mqam,
        SchemeId::Doqpsk,
        SchemeId::Ook,
        SchemeId::Mppm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::NcMfsk => "nc-mfsk",
            SchemeId::CoherentMfsk => "coherent-mfsk",
            SchemeId::Mqam => "mqam",
            SchemeId::Doqpsk => "doqpsk",
            SchemeId::Ook => "ook",
            SchemeId::Mppm => "mppm",
        }
    }

    pub fn band(self) -> Band {
        match self {
            SchemeId::Ook | SchemeId::Mppm => Band::Uwb,
            _ => Band::PassBand,
        }
    }

    /// Schemes whose rate is fixed and whose M is always 2.
    pub fn fixed_m(self) -> Option<u64> {
        match self {
            SchemeId::Doqpsk | SchemeId::Ook => Some(2),
            _ => None,
        }
    }

    /// Tone-spacing divisor ζ for the orthogonal FSK variants.
    pub fn zeta(self) -> Option<f64> {
        match self {
            SchemeId::NcMfsk => Some(1.0),
            SchemeId::CoherentMfsk => Some(2.0),
            _ => None,
        }
    }

    /// Checks that `m` is an admissible constellation size.
    pub fn validate_m(self, m: u64) -> Result<()> {
        let invalid = |reason| Error::InvalidConstellation {
            scheme: self.name(),
            m,
            reason,
        };
        if m < 2 || !m.is_power_of_two() {
            return Err(invalid("M must be a power of two and at least 2"));
        }
        if let Some(fixed) = self.fixed_m() {
            if m != fixed {
                return Err(invalid("this scheme has a fixed M of 2"));
            }
        }
        if self == SchemeId::Mqam && !m.trailing_zeros().is_multiple_of(2) {
            return Err(invalid("square QAM needs M to be a power of 4"));
        }
        Ok(())
    }

    /// Smallest admissible M.
    pub fn min_m(self) -> u64 {
        match self {
            SchemeId::Mqam => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                Error::domain(
                    "scheme",
                    format!("unknown scheme `{s}`, expected one of nc-mfsk, coherent-mfsk, mqam, doqpsk, ook, mppm"),
                )
            })
    }
}

pub(crate) fn log2m(m: u64) -> f64 {
    m.trailing_zeros() as f64
}

/// Scheme, constellation and framing of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: SchemeId,
    pub m: u64,
    /// Bits sensed per frame, N.
    pub payload_bits: u64,
    pub bandwidth_hz: f64,
    /// Frame period T_N.
    pub frame_period_s: f64,
    /// Start-up time T_tr.
    pub transient_s: f64,
    /// Target symbol error rate; bit error rate for OOK.
    pub target_ser: f64,
    /// Pulse width over symbol period, T_p / T_s. Only OOK reads it.
    pub ook_duty: f64,
}

impl SchemeConfig {
    /// Evaluation defaults for `scheme`, with target error rate 1e-3.
    ///
    /// Pass-band: N = 8192, B = 62.5 kHz, T_N = 1.4 s, T_tr = 5 µs for the
    /// FSK variants and 20 µs for MQAM and OQPSK. UWB: N = 20000,
    /// B = 500 MHz, T_N = 100 ms, T_tr = 2 ns.
    pub fn table_one(scheme: SchemeId, m: u64) -> Self {
        let (payload_bits, bandwidth_hz, frame_period_s, transient_s) = match scheme {
            SchemeId::NcMfsk | SchemeId::CoherentMfsk => (8192, 62_500.0, 1.4, 5e-6),
            SchemeId::Mqam | SchemeId::Doqpsk => (8192, 62_500.0, 1.4, 20e-6),
            SchemeId::Ook | SchemeId::Mppm => (20_000, 5e8, 0.1, 2e-9),
        };
        SchemeConfig {
            scheme,
            m: scheme.fixed_m().unwrap_or(m),
            payload_bits,
            bandwidth_hz,
            frame_period_s,
            transient_s,
            target_ser: 1e-3,
            ook_duty: 0.5,
        }
    }

    pub fn with_m(self, m: u64) -> Self {
        SchemeConfig { m, ..self }
    }

    pub fn with_target(self, target_ser: f64) -> Self {
        SchemeConfig { target_ser, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate_m(self.m)?;
        if self.payload_bits == 0 {
            return Err(Error::domain("payload_bits", "must be > 0"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::domain("bandwidth_hz", "must be finite and > 0"));
        }
        if !(self.frame_period_s > 0.0 && self.frame_period_s.is_finite()) {
            return Err(Error::domain("frame_period_s", "must be finite and > 0"));
        }
        if !(self.transient_s >= 0.0 && self.transient_s < self.frame_period_s) {
            return Err(Error::domain("transient_s", "must be >= 0 and below frame_period_s"));
        }
        if !(self.target_ser > 0.0 && self.target_ser < 1.0) {
            return Err(Error::domain("target_ser", "must lie in (0, 1)"));
        }
        if !(self.ook_duty > 0.0 && self.ook_duty <= 1.0) {
            return Err(Error::domain("ook_duty", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Time available for the payload, T_N - T_tr.
    pub fn active_budget_s(&self) -> f64 {
        self.frame_period_s - self.transient_s
    }
}

/// Spectral efficiency R/B in bits/s/Hz.
pub fn bandwidth_efficiency(scheme: SchemeId, m: u64, ook_duty: f64) -> Result<f64> {
    scheme.validate_m(m)?;
    let b = log2m(m);
    let mf = m as f64;
    Ok(match scheme {
        SchemeId::NcMfsk => b / mf,
        SchemeId::CoherentMfsk => 2.0 * b / mf,
        SchemeId::Mqam => 2.0 * b,
        SchemeId::Doqpsk => 2.0,
        SchemeId::Ook => {
            if !(ook_duty > 0.0 && ook_duty <= 1.0) {
                return Err(Error::domain("ook_duty", "must lie in (0, 1]"));
            }
            ook_duty
        }
        SchemeId::Mppm => b / mf,
    })
}

/// Time T_ac needed to send the N-bit payload.
pub fn active_duration(cfg: &SchemeConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.payload_bits as f64;
    let bw = cfg.bandwidth_hz;
    let b = log2m(cfg.m);
    let mf = cfg.m as f64;
    Ok(match cfg.scheme {
        SchemeId::NcMfsk | SchemeId::CoherentMfsk => {
            let zeta = cfg.scheme.zeta().unwrap_or(1.0);
            mf * n / (zeta * bw * b)
        }
        SchemeId::Mqam => n / (2.0 * bw * b),
        SchemeId::Doqpsk => n / (2.0 * bw),
        SchemeId::Ook => n / (cfg.ook_duty * bw),
        SchemeId::Mppm => mf * n / (bw * b),
    })
}

/// Power-amplifier overhead α, so that P_Amp = α P_t.
///
/// Class-B value 0.33 for every scheme but MQAM, where the peak-to-average
/// ratio ξ = 3(√M - 1)/(√M + 1) over drain efficiency 0.35 sets α = ξ/0.35 - 1.
pub fn amplifier_alpha(scheme: SchemeId, m: u64) -> f64 {
    match scheme {
        SchemeId::Mqam => {
            let r = (m as f64).sqrt();
            3.0 * (r - 1.0) / ((r + 1.0) * 0.35) - 1.0
        }
        _ => 0.33,
    }
}

/// Largest b (and M = 2^b) whose payload still fits in T_N - T_tr.
///
/// Only the orthogonal schemes, whose active time grows with M, have such a
/// ceiling.
pub fn max_constellation(cfg: &SchemeConfig) -> Result<(u32, u64)> {
    if !matches!(
        cfg.scheme,
        SchemeId::NcMfsk | SchemeId::CoherentMfsk | SchemeId::Mppm
    ) {
        return Err(Error::domain(
            "scheme",
            format!("{} has no constellation ceiling; use nc-mfsk, coherent-mfsk or mppm", cfg.scheme),
        ));
    }
    let budget = cfg.active_budget_s();
    let mut best = None;
    for b in 1..63u32 {
        let t = active_duration(&cfg.with_m(1u64 << b))?;
        if t <= budget {
            best = Some(b);
        } else if b >= 2 {
            // 2^b / b is nondecreasing from b = 1 on.
            break;
        }
    }
    best.map(|b| (b, 1u64 << b)).ok_or(Error::NoFeasibleM)
}
