//! Circuit power and per-frame energy accounting.

use serde::{Deserialize, Serialize};

use super::{active_duration, amplifier_alpha, log2m, required_symbol_energy, Band, SchemeConfig, SchemeId};
use crate::error::{Error, Result};
use crate::linkbudget::{avg_snr, FadingModel, LinkBudget};

/// Block power draws in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitProfile {
    pub p_sy: f64,
    pub p_filt_tx: f64,
    pub p_filt_rx: f64,
    pub p_lna: f64,
    pub p_ed: f64,
    pub p_ifa: f64,
    pub p_adc: f64,
    pub p_dac: f64,
    pub p_mix: f64,
    pub p_pg: f64,
    pub p_int: f64,
    /// Class-B amplifier overhead used by every scheme except MQAM.
    pub alpha_fixed: f64,
}

impl CircuitProfile {
    pub fn pass_band() -> Self {
        CircuitProfile {
            p_sy: 10e-3,
            p_filt_tx: 2.5e-3,
            p_filt_rx: 2.5e-3,
            p_lna: 9e-3,
            p_ed: 3e-3,
            p_ifa: 3e-3,
            p_adc: 7e-3,
            p_dac: 7e-3,
            p_mix: 7e-3,
            p_pg: 0.0,
            p_int: 0.0,
            alpha_fixed: 0.33,
        }
    }

    pub fn uwb() -> Self {
        CircuitProfile {
            p_sy: 0.0,
            p_filt_tx: 2.5e-3,
            p_filt_rx: 2.5e-3,
            p_lna: 3.1e-3,
            p_ed: 3e-3,
            p_ifa: 0.0,
            p_adc: 7e-3,
            p_dac: 0.0,
            p_mix: 0.0,
            p_pg: 675e-6,
            p_int: 3e-3,
            alpha_fixed: 0.33,
        }
    }

    pub fn for_scheme(scheme: SchemeId) -> Self {
        match scheme.band() {
            Band::PassBand => Self::pass_band(),
            Band::Uwb => Self::uwb(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_sy", self.p_sy),
            ("p_filt_tx", self.p_filt_tx),
            ("p_filt_rx", self.p_filt_rx),
            ("p_lna", self.p_lna),
            ("p_ed", self.p_ed),
            ("p_ifa", self.p_ifa),
            ("p_adc", self.p_adc),
            ("p_dac", self.p_dac),
            ("p_mix", self.p_mix),
            ("p_pg", self.p_pg),
            ("p_int", self.p_int),
            ("alpha_fixed", self.alpha_fixed),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    fn alpha(&self, scheme: SchemeId, m: u64) -> f64 {
        match scheme {
            SchemeId::Mqam => amplifier_alpha(scheme, m),
            _ => self.alpha_fixed,
        }
    }
}

/// Amplifier-free circuit power of a scheme.
///
/// `tx_w + rx_w` runs for the whole active period. `gated_w` only runs
/// while pulses are on air (the OOK transmit filter, the PPM pulse
/// generator and filter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitPower {
    pub tx_w: f64,
    pub rx_w: f64,
    pub gated_w: f64,
}

impl CircuitPower {
    pub fn continuous_w(&self) -> f64 {
        self.tx_w + self.rx_w
    }
}

pub fn circuit_power(scheme: SchemeId, m: u64, profile: &CircuitProfile) -> Result<CircuitPower> {
    scheme.validate_m(m)?;
    profile.validate()?;
    let p = profile;
    let mf = m as f64;
    Ok(match scheme {
        SchemeId::NcMfsk => CircuitPower {
            tx_w: p.p_sy + p.p_filt_tx,
            rx_w: p.p_lna + mf * (p.p_filt_rx + p.p_ed) + p.p_ifa + p.p_adc,
            gated_w: 0.0,
        },
        SchemeId::CoherentMfsk => CircuitPower {
            tx_w: p.p_sy + p.p_filt_tx,
            rx_w: p.p_lna + mf * (p.p_sy + p.p_mix + p.p_filt_rx) + p.p_ifa + p.p_adc,
            gated_w: 0.0,
        },
        SchemeId::Mqam | SchemeId::Doqpsk => CircuitPower {
            tx_w: p.p_dac + p.p_sy + p.p_mix + p.p_filt_tx,
            rx_w: p.p_lna + p.p_mix + p.p_sy + p.p_filt_rx + p.p_ifa + p.p_adc,
            gated_w: 0.0,
        },
        SchemeId::Ook => CircuitPower {
            tx_w: p.p_pg,
            rx_w: p.p_lna + p.p_ed + p.p_filt_rx + p.p_int + p.p_adc,
            gated_w: p.p_filt_tx,
        },
        SchemeId::Mppm => CircuitPower {
            tx_w: 0.0,
            rx_w: p.p_lna + mf * (p.p_ed + p.p_filt_rx) + p.p_adc,
            gated_w: p.p_pg + p.p_filt_tx,
        },
    })
}

/// Per-frame energy split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub t_active_s: f64,
    /// Per-symbol (per-pulse for OOK) transmit energy E_t.
    pub symbol_energy_j: f64,
    pub transmit_j: f64,
    pub circuit_j: f64,
    pub transient_j: f64,
    pub total_j: f64,
    /// T_ac fits in T_N - T_tr.
    pub feasible: bool,
    pub gamma_bar_required: f64,
}

/// Symbols carrying the payload. OOK counts its expected N/2 pulses.
fn symbols_per_frame(cfg: &SchemeConfig) -> f64 {
    let n = cfg.payload_bits as f64;
    match cfg.scheme {
        SchemeId::Doqpsk | SchemeId::Ook => n / 2.0,
        _ => n / log2m(cfg.m),
    }
}

/// Time the gated blocks are on: one pulse of width 1/B per OOK one, or
/// per PPM symbol.
fn gated_time(cfg: &SchemeConfig, ones: f64) -> f64 {
    match cfg.scheme {
        SchemeId::Ook => ones / cfg.bandwidth_hz,
        SchemeId::Mppm => cfg.payload_bits as f64 / (cfg.bandwidth_hz * log2m(cfg.m)),
        _ => 0.0,
    }
}

fn transient_energy(cfg: &SchemeConfig, profile: &CircuitProfile) -> f64 {
    let t = cfg.transient_s;
    match cfg.scheme {
        SchemeId::NcMfsk | SchemeId::CoherentMfsk => 1.75 * profile.p_sy * t,
        SchemeId::Mqam | SchemeId::Doqpsk => 2.0 * profile.p_sy * t,
        SchemeId::Ook | SchemeId::Mppm => 2.0 * profile.p_pg * t,
    }
}

/// Energy to deliver one N-bit frame at the target error rate.
pub fn total_energy(
    cfg: &SchemeConfig,
    lb: &LinkBudget,
    fading: &FadingModel,
    profile: &CircuitProfile,
) -> Result<EnergyBreakdown> {
    cfg.validate()?;
    profile.validate()?;
    let t_active_s = active_duration(cfg)?;
    let symbol_energy_j = required_symbol_energy(cfg, lb, fading)?;
    let alpha = profile.alpha(cfg.scheme, cfg.m);
    let transmit_j = (1.0 + alpha) * symbol_energy_j * symbols_per_frame(cfg);
    let power = circuit_power(cfg.scheme, cfg.m, profile)?;
    let ones = cfg.payload_bits as f64 / 2.0;
    let circuit_j = power.continuous_w() * t_active_s + power.gated_w * gated_time(cfg, ones);
    let transient_j = transient_energy(cfg, profile);
    Ok(EnergyBreakdown {
        t_active_s,
        symbol_energy_j,
        transmit_j,
        circuit_j,
        transient_j,
        total_j: transmit_j + circuit_j + transient_j,
        feasible: t_active_s <= cfg.active_budget_s(),
        gamma_bar_required: avg_snr(lb, fading, symbol_energy_j)?.value(),
    })
}

/// OOK frame energy when the payload holds exactly `ones` one-bits.
///
/// Only ones are keyed onto the air, so transmit and transmit-filter
/// energy scale with `ones`; the receiver and pulse generator run for the
/// whole active period.
pub fn ook_total_energy_sampled(
    cfg: &SchemeConfig,
    lb: &LinkBudget,
    fading: &FadingModel,
    profile: &CircuitProfile,
    ones: u64,
) -> Result<f64> {
    cfg.validate()?;
    profile.validate()?;
    if cfg.scheme != SchemeId::Ook {
        return Err(Error::domain("scheme", "sampled frame energy is defined for OOK only"));
    }
    if ones > cfg.payload_bits {
        return Err(Error::domain("ones", "must not exceed payload_bits"));
    }
    let l = ones as f64;
    let e_t = required_symbol_energy(cfg, lb, fading)?;
    let power = circuit_power(cfg.scheme, cfg.m, profile)?;
    let transmit = (1.0 + profile.alpha_fixed) * l * e_t;
    let circuit = power.continuous_w() * active_duration(cfg)? + power.gated_w * gated_time(cfg, l);
    Ok(transmit + circuit + transient_energy(cfg, profile))
}
