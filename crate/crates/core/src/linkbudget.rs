//! Path loss and flat-fading channel primitives.
//!
//! The received SNR of a symbol with energy `E_t` is `|h|² E_t / (L_d N0)`,
//! where `L_d = M_l d^η L_1` is the gain factor and `|h|²` follows the
//! fading law. Every averaging step in the crate goes through [`snr_pdf`] or
//! [`fading_mgf`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::bessel_i0e;
use crate::units::db_to_linear;

/// Distance, path-loss law and noise floor of one sensor-to-sink link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub distance_m: f64,
    /// Path-loss exponent η.
    pub path_loss_exponent: f64,
    /// Gain margin M_l, linear.
    pub gain_margin: f64,
    /// Gain factor at 1 m, L_1, linear. Antenna gains and wavelength are
    /// folded in here.
    pub reference_gain: f64,
    /// Noise power spectral density N0 in W/Hz.
    pub noise_psd: f64,
}

impl LinkBudget {
    pub fn new(
        distance_m: f64,
        path_loss_exponent: f64,
        gain_margin: f64,
        reference_gain: f64,
        noise_psd: f64,
    ) -> Result<Self> {
        let lb = LinkBudget {
            distance_m,
            path_loss_exponent,
            gain_margin,
            reference_gain,
            noise_psd,
        };
        lb.validate()?;
        Ok(lb)
    }

    /// Evaluation defaults: η = 3.5, M_l = 40 dB, L_1 = 30 dB and
    /// N0 = -180 dB(W/Hz).
    pub fn table_one(distance_m: f64) -> Self {
        LinkBudget {
            distance_m,
            path_loss_exponent: 3.5,
            gain_margin: db_to_linear(40.0),
            reference_gain: db_to_linear(30.0),
            noise_psd: db_to_linear(-180.0),
        }
    }

    pub fn with_distance(self, distance_m: f64) -> Self {
        LinkBudget { distance_m, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return Err(Error::domain("distance_m", "must be finite and > 0"));
        }
        if !self.path_loss_exponent.is_finite() {
            return Err(Error::domain("path_loss_exponent", "must be finite"));
        }
        for (name, v) in [
            ("gain_margin", self.gain_margin),
            ("reference_gain", self.reference_gain),
            ("noise_psd", self.noise_psd),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// L_d = M_l · d^η · L_1.
    pub fn path_gain(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.gain_margin * self.distance_m.powf(self.path_loss_exponent) * self.reference_gain)
    }

    /// L_d · N0 / Ω: the symbol energy that yields an average SNR of one.
    pub fn unit_snr_energy(&self, fading: &FadingModel) -> Result<f64> {
        Ok(self.path_gain()? * self.noise_psd / fading.omega())
    }
}

/// Gain factor of the link, see [`LinkBudget::path_gain`].
pub fn path_gain(lb: &LinkBudget) -> Result<f64> {
    lb.path_gain()
}

/// Small-scale fading law of the channel coefficient h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FadingModel {
    Rayleigh { omega: f64 },
    /// `k` is the linear Rician factor A² / 2σ².
    Rician { k: f64, omega: f64 },
    Awgn { omega: f64 },
}

impl FadingModel {
    pub fn rayleigh() -> Self {
        FadingModel::Rayleigh { omega: 1.0 }
    }

    pub fn rician_db(k_db: f64, omega: f64) -> Self {
        FadingModel::Rician {
            k: db_to_linear(k_db),
            omega,
        }
    }

    /// Mean-square gain E[|h|²].
    pub fn omega(&self) -> f64 {
        match *self {
            FadingModel::Rayleigh { omega }
            | FadingModel::Rician { omega, .. }
            | FadingModel::Awgn { omega } => omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega() > 0.0 && self.omega().is_finite()) {
            return Err(Error::domain("omega", "must be finite and > 0"));
        }
        if let FadingModel::Rician { k, .. } = *self {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::domain("k", "Rician factor must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Rician with K = 0 is the Rayleigh law; fold it so that every
    /// consumer takes the same path for both.
    pub fn canonical(self) -> Self {
        match self {
            FadingModel::Rician { k: 0.0, omega } => FadingModel::Rayleigh { omega },
            other => other,
        }
    }

    pub fn is_rayleigh(&self) -> bool {
        matches!(self.canonical(), FadingModel::Rayleigh { .. })
    }

    /// Line-of-sight amplitude A and diffuse variance σ² of the Rician
    /// amplitude law, from A² = ΩK/(1+K) and 2σ² = Ω/(1+K).
    pub fn rician_parameters(&self) -> Option<(f64, f64)> {
        match *self {
            FadingModel::Rician { k, omega } => {
                Some(((omega * k / (1.0 + k)).sqrt(), 0.5 * omega / (1.0 + k)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FadingModel::Rayleigh { .. } => write!(f, "rayleigh"),
            FadingModel::Rician { k, .. } => write!(f, "rician(K={k})"),
            FadingModel::Awgn { .. } => write!(f, "awgn"),
        }
    }
}

/// Average received SNR γ̄.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AvgSnr(f64);

impl AvgSnr {
    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 && value.is_finite() {
            Ok(AvgSnr(value))
        } else {
            Err(Error::domain("gamma_bar", "must be finite and >= 0"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// γ̄ = (Ω / L_d) · E_t / N0.
pub fn avg_snr(lb: &LinkBudget, fading: &FadingModel, symbol_energy: f64) -> Result<AvgSnr> {
    fading.validate()?;
    if !(symbol_energy >= 0.0) {
        return Err(Error::domain("symbol_energy", "must be >= 0"));
    }
    AvgSnr::new(symbol_energy / lb.unit_snr_energy(fading)?)
}

/// Density of the instantaneous SNR γ.
///
/// Rayleigh: (1/γ̄) e^{-γ/γ̄}. Rician: the noncentral chi-square (2 degrees
/// of freedom) law induced by the Rician amplitude,
/// ((1+K)/γ̄) e^{-K-(1+K)γ/γ̄} I0(2√(K(1+K)γ/γ̄)). The AWGN law is a point
/// mass at γ̄ and has no density.
pub fn snr_pdf(fading: &FadingModel, gamma_bar: AvgSnr, gamma: f64) -> Result<f64> {
    fading.validate()?;
    if !(gamma >= 0.0) {
        return Err(Error::domain("gamma", "must be >= 0"));
    }
    let g = gamma_bar.value();
    if g <= 0.0 {
        return Err(Error::domain("gamma_bar", "density needs gamma_bar > 0"));
    }
    match fading.canonical() {
        FadingModel::Rayleigh { .. } => Ok((-gamma / g).exp() / g),
        FadingModel::Rician { k, .. } => {
            let scale = (1.0 + k) / g;
            let arg = 2.0 * (k * scale * gamma).sqrt();
            // I0(arg) = e^arg · i0e(arg); fold the exponent to avoid overflow.
            Ok(scale * (arg - k - scale * gamma).exp() * bessel_i0e(arg))
        }
        FadingModel::Awgn { .. } => Err(Error::domain(
            "fading",
            "the AWGN SNR is deterministic and has no density",
        )),
    }
}

/// Laplace transform E[e^{-sγ}] of the SNR law.
///
/// Rayleigh: 1/(1+sγ̄). Rician: ((1+K)/(1+K+sγ̄)) e^{-Ksγ̄/(1+K+sγ̄)}.
/// AWGN: e^{-sγ̄}.
pub fn fading_mgf(fading: &FadingModel, gamma_bar: AvgSnr, s: f64) -> f64 {
    let g = gamma_bar.value();
    match *fading {
        FadingModel::Rayleigh { .. } => 1.0 / (1.0 + s * g),
        FadingModel::Rician { k, .. } => {
            let denom = 1.0 + k + s * g;
            (1.0 + k) / denom * (-k * s * g / denom).exp()
        }
        FadingModel::Awgn { .. } => (-s * g).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_semi_infinite, Tolerance};

    fn snr(v: f64) -> AvgSnr {
        AvgSnr::new(v).unwrap()
    }

    #[test]
    fn path_gain_examples() {
        let g = LinkBudget::table_one(10.0).path_gain().unwrap();
        assert!((g / 10f64.powf(10.5) - 1.0).abs() < 1e-12);
        assert!((LinkBudget::table_one(1.0).path_gain().unwrap() - 1e7).abs() < 1e-6);
        let g = LinkBudget::table_one(100.0).path_gain().unwrap();
        assert!((g / 1e14 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_gain_rejects_nonpositive_distance() {
        assert!(LinkBudget::table_one(0.0).path_gain().is_err());
        assert!(LinkBudget::table_one(-3.0).path_gain().is_err());
    }

    #[test]
    fn path_gain_monotone_and_above_reference() {
        let mut prev = 0.0;
        for i in 1..200 {
            let lb = LinkBudget::table_one(i as f64 * 0.5 + 1.0);
            let g = lb.path_gain().unwrap();
            assert!(g > prev && g >= lb.reference_gain);
            prev = g;
        }
    }

    #[test]
    fn avg_snr_examples() {
        let lb = LinkBudget::table_one(10.0);
        let f = FadingModel::rayleigh();
        assert_eq!(avg_snr(&lb, &f, 0.0).unwrap().value(), 0.0);
        let unit = lb.unit_snr_energy(&f).unwrap();
        assert!((unit / 3.1623e-8 - 1.0).abs() < 1e-4);
        assert!((avg_snr(&lb, &f, unit).unwrap().value() - 1.0).abs() < 1e-12);
        let g = avg_snr(&lb, &f, 9.477e-5).unwrap().value();
        assert!((g - 2997.0).abs() < 0.5, "{g}");
    }

    #[test]
    fn pdf_examples() {
        let ray = FadingModel::rayleigh();
        assert_eq!(snr_pdf(&ray, snr(2.0), 0.0).unwrap(), 0.5);
        let ric0 = FadingModel::Rician { k: 0.0, omega: 1.0 };
        let want = 0.5 * (-0.5f64).exp();
        assert!((snr_pdf(&ric0, snr(2.0), 1.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.30327).abs() < 1e-5);
        assert!(snr_pdf(&ray, snr(2.0), -1.0).is_err());
        assert!(snr_pdf(&FadingModel::Awgn { omega: 1.0 }, snr(2.0), 1.0).is_err());
    }

    fn models() -> Vec<FadingModel> {
        vec![
            FadingModel::rayleigh(),
            FadingModel::Rician { k: 0.0, omega: 1.0 },
            FadingModel::Rician { k: 1.0, omega: 1.0 },
            FadingModel::Rician { k: 10.0, omega: 1.0 },
            FadingModel::Rician { k: 31.6, omega: 2.0 },
        ]
    }

    const TOL: Tolerance = Tolerance::new(1e-12, 1e-12);

    #[test]
    fn pdf_normalised_with_mean_gamma_bar() {
        for f in models() {
            for g in [1.0, 10.0, 100.0] {
                let mass = integrate_semi_infinite(|x| snr_pdf(&f, snr(g), x).unwrap(), g, TOL)
                    .unwrap()
                    .value;
                assert!((mass - 1.0).abs() < 1e-9, "{f} γ̄={g} mass={mass}");
                let mean = integrate_semi_infinite(|x| x * snr_pdf(&f, snr(g), x).unwrap(), g, TOL)
                    .unwrap()
                    .value;
                assert!((mean / g - 1.0).abs() < 1e-6, "{f} γ̄={g} mean={mean}");
            }
        }
    }

    #[test]
    fn mgf_matches_quadrature() {
        for k in [0.0, 1.0, 10.0] {
            let f = FadingModel::Rician { k, omega: 1.0 };
            for g in [1.0, 10.0, 100.0] {
                for s in [0.1, 0.5, 1.0] {
                    let closed = fading_mgf(&f, snr(g), s);
                    let quad = integrate_semi_infinite(
                        |x| (-s * x).exp() * snr_pdf(&f, snr(g), x).unwrap(),
                        g,
                        TOL,
                    )
                    .unwrap()
                    .value;
                    assert!((quad / closed - 1.0).abs() < 1e-8, "K={k} γ̄={g} s={s}");
                }
            }
        }
    }

    #[test]
    fn mgf_examples() {
        for f in models() {
            assert_eq!(fading_mgf(&f, snr(7.0), 0.0), 1.0);
        }
        let ric0 = FadingModel::Rician { k: 0.0, omega: 1.0 };
        for (s, g) in [(0.5, 3.0), (1.0, 100.0), (0.25, 0.0)] {
            let diff = fading_mgf(&ric0, snr(g), s) - 1.0 / (1.0 + s * g);
            assert!(diff.abs() < 1e-12);
        }
        let ric10 = FadingModel::Rician { k: 10.0, omega: 1.0 };
        let v = fading_mgf(&ric10, snr(20.0), 0.5);
        assert!((v - 11.0 / 21.0 * (-100.0f64 / 21.0).exp()).abs() < 1e-15);
        assert!((v - 4.478209727454599e-3).abs() < 1e-15);
    }

    #[test]
    fn mgf_monotone() {
        for f in models() {
            let mut prev = 1.0;
            for i in 1..50 {
                let v = fading_mgf(&f, snr(i as f64), 0.5);
                assert!(v < prev && v > 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn rician_parameters_recover_omega() {
        let f = FadingModel::Rician { k: 10.0, omega: 2.0 };
        let (a, sigma2) = f.rician_parameters().unwrap();
        assert!((a * a + 2.0 * sigma2 - 2.0).abs() < 1e-15);
        assert!((a * a / (2.0 * sigma2) - 10.0).abs() < 1e-12);
    }
}
