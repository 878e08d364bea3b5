//! Error-rate models: conditional SER, fading averages and their inversion.

use std::f64::consts::{PI, SQRT_2};

use super::{SchemeConfig, SchemeId};
use crate::error::{Error, Result};
use crate::linkbudget::{fading_mgf, snr_pdf, AvgSnr, FadingModel, LinkBudget};
use crate::quad::{integrate_semi_infinite, Tolerance};
use crate::solver::{bisect, RootSpec};
use crate::special::{gauss_hermite, gaussian_q, marcum_q1, marcum_q1_complement};

/// Largest M for which orthogonal-signalling SER is taken from the
/// alternating binomial sum. Past it the sum cancels catastrophically
/// (C(31, 15) ≈ 3e8) and the Poisson-mixture table takes over.
pub const ALT_SUM_MAX_M: u64 = 16;

/// Starting order of the Gauss-Hermite rule for coherent MFSK. The order
/// doubles until two successive rules agree to [`HERMITE_AGREEMENT`] at low
/// SNR, where the integrand is least smooth.
pub const HERMITE_NODES: usize = 64;
/// Past this order coherent MFSK is integrated adaptively instead.
pub const HERMITE_MAX_NODES: usize = 256;
pub const HERMITE_AGREEMENT: f64 = 1e-11;
const HERMITE_PROBES: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];

const POISSON_TABLE_FLOOR: f64 = 1e-25;
const POISSON_TABLE_MAX: usize = 4000;

/// Tolerance for averaging the exact conditional SER over the SNR law.
pub const AVERAGE_TOLERANCE: Tolerance = Tolerance::new(1e-12, 1e-10);

/// How an average SER is obtained for arbitrary fading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvgMethod {
    /// Exponential conditional bound c·e^{-sγ} averaged in closed form
    /// through the fading MGF.
    MgfBound,
    /// Exact conditional SER integrated against the SNR density.
    QuadratureExact,
}

/// Conditional bound c·e^{-sγ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm {
    pub coef: f64,
    pub rate: f64,
}

impl BoundTerm {
    pub fn conditional(&self, gamma: f64) -> f64 {
        (self.coef * (-self.rate * gamma).exp()).min(1.0)
    }

    pub fn average(&self, fading: &FadingModel, gamma_bar: AvgSnr) -> f64 {
        (self.coef * fading_mgf(&fading.canonical(), gamma_bar, self.rate)).min(1.0)
    }
}

/// Exponential-type upper bound on the conditional SER.
///
/// Orthogonal schemes use the union bound (M-1)/2·e^{-γ/2}; MQAM uses
/// Q(x) ≤ ½e^{-x²/2} on its leading term; OQPSK uses erfc(x) ≤ e^{-x²} on
/// the two-bit Marcum expression; OOK is its own bound.
pub fn bound_terms(scheme: SchemeId, m: u64) -> Result<BoundTerm> {
    scheme.validate_m(m)?;
    let mf = m as f64;
    Ok(match scheme {
        SchemeId::NcMfsk | SchemeId::CoherentMfsk | SchemeId::Mppm => BoundTerm {
            coef: 0.5 * (mf - 1.0),
            rate: 0.5,
        },
        SchemeId::Mqam => BoundTerm {
            coef: 2.0 * (1.0 - 1.0 / mf.sqrt()),
            rate: 1.5 / (mf - 1.0),
        },
        SchemeId::Doqpsk => BoundTerm {
            coef: oqpsk_scale(),
            rate: (2.0 - SQRT_2) / 4.0,
        },
        SchemeId::Ook => BoundTerm {
            coef: 0.5,
            rate: 0.5,
        },
    })
}

fn oqpsk_scale() -> f64 {
    ((1.0 + SQRT_2) / 2.0).sqrt()
}

#[derive(Debug, Clone)]
enum Kind {
    /// Σ_k c_k e^{-r_k γ}.
    AlternatingSum(Vec<(f64, f64)>),
    /// Σ_n Poisson(n; γ)·u_n.
    PoissonMixture(Vec<(f64, f64)>),
    /// Pre-scaled Gauss-Hermite nodes u_i = √2 x_i and weights w_i/√π.
    Hermite { order: usize, rule: Vec<(f64, f64)> },
    /// Adaptive Gauss-Kronrod over u, for M too large for the rule.
    CoherentAdaptive,
    Mqam { lead: f64, scale: f64 },
    Doqpsk,
    Ook,
}

/// Exact conditional SER of one (scheme, M) with its per-M tables built
/// once, for repeated evaluation inside averages and sampling loops.
#[derive(Debug, Clone)]
pub struct SerModel {
    scheme: SchemeId,
    m: u64,
    kind: Kind,
}

impl SerModel {
    pub fn new(scheme: SchemeId, m: u64) -> Result<Self> {
        scheme.validate_m(m)?;
        if scheme == SchemeId::CoherentMfsk {
            return Ok(SerModel {
                scheme,
                m,
                kind: calibrated_coherent(m)?,
            });
        }
        Self::with_hermite_nodes(scheme, m, HERMITE_NODES)
    }

    /// As [`SerModel::new`], but coherent MFSK uses a fixed Gauss-Hermite
    /// order instead of a calibrated one.
    pub fn with_hermite_nodes(scheme: SchemeId, m: u64, nodes: usize) -> Result<Self> {
        scheme.validate_m(m)?;
        let mf = m as f64;
        let kind = match scheme {
            SchemeId::NcMfsk | SchemeId::Mppm if m <= ALT_SUM_MAX_M => {
                Kind::AlternatingSum(alternating_terms(m))
            }
            SchemeId::NcMfsk | SchemeId::Mppm => Kind::PoissonMixture(poisson_table(m)?),
            SchemeId::CoherentMfsk => Kind::Hermite { order: nodes, rule: hermite_rule(nodes) },
            SchemeId::Mqam => Kind::Mqam {
                lead: 4.0 * (1.0 - 1.0 / mf.sqrt()),
                scale: 3.0 / (mf - 1.0),
            },
            SchemeId::Doqpsk => Kind::Doqpsk,
            SchemeId::Ook => Kind::Ook,
        };
        Ok(SerModel { scheme, m, kind })
    }

    /// Gauss-Hermite order in use, if any.
    pub fn hermite_nodes(&self) -> Option<usize> {
        match &self.kind {
            Kind::Hermite { order, .. } => Some(*order),
            _ => None,
        }
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// SER at instantaneous SNR γ.
    pub fn conditional(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::domain("gamma", "must be >= 0"));
        }
        let p = match &self.kind {
            Kind::AlternatingSum(terms) => terms
                .iter()
                .map(|&(c, r)| c * (-r * gamma).exp())
                .sum::<f64>(),
            Kind::PoissonMixture(table) => poisson_mixture(table, gamma),
            Kind::Hermite { rule, .. } => hermite_coherent(rule, self.m, gamma),
            Kind::CoherentAdaptive => adaptive_coherent(self.m, gamma)?,
            &Kind::Mqam { lead, scale } => {
                let q = gaussian_q((scale * gamma).sqrt());
                lead * q - 0.25 * lead * lead * q * q
            }
            Kind::Doqpsk => {
                let root = gamma.sqrt();
                let hi = ((2.0 + SQRT_2) / 4.0).sqrt() * root;
                let lo = ((2.0 - SQRT_2) / 4.0).sqrt() * root;
                marcum_q1_complement(hi, lo)? + marcum_q1(lo, hi)?
            }
            Kind::Ook => 0.5 * (-0.5 * gamma).exp(),
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Exact average over the fading law by adaptive quadrature in
    /// γ = γ̄·t/(1 - t). AWGN has no spread, so the conditional at γ̄ is
    /// returned.
    pub fn average(&self, fading: &FadingModel, gamma_bar: AvgSnr) -> Result<f64> {
        fading.validate()?;
        let g = gamma_bar.value();
        let fading = fading.canonical();
        if g == 0.0 || matches!(fading, FadingModel::Awgn { .. }) {
            return self.conditional(g);
        }
        let mut failure = None;
        let est = integrate_semi_infinite(
            |x| {
                let density = match snr_pdf(&fading, gamma_bar, x) {
                    Ok(0.0) => return 0.0,
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return f64::NAN;
                    }
                };
                match self.conditional(x) {
                    Ok(p) => p * density,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            g,
            AVERAGE_TOLERANCE,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est?.value.clamp(0.0, 1.0))
    }
}

/// Gauss-Hermite nodes and weights rescaled for ∫ φ(u) g(u) du, dropping
/// nodes whose weight cannot move the sum.
fn hermite_rule(nodes: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_hermite(nodes);
    let norm = PI.sqrt();
    x.iter()
        .zip(&w)
        .map(|(x, w)| (SQRT_2 * x, w / norm))
        .filter(|&(_, w)| w > 1e-20)
        .collect()
}

/// Probability that the coherent detector's matched-filter output for a
/// wrong tone at offset u loses: 1 - (1 - Q(u + √(2γ)))^{M-1}.
fn coherent_miss(m: u64, u: f64, shift: f64) -> f64 {
    let q = gaussian_q(u + shift);
    -(((m - 1) as f64) * (-q).ln_1p()).exp_m1()
}

/// 1 - ∫ φ(u) Φ(u + √(2γ))^{M-1} du by the rule.
///
/// Walks the nodes upward in u. The miss probability falls with u and the
/// weights sum to 1, so once it drops below 1e-17 of the running sum the
/// rest cannot change the result.
fn hermite_coherent(rule: &[(f64, f64)], m: u64, gamma: f64) -> f64 {
    let shift = (2.0 * gamma).sqrt();
    let mut sum = 0.0;
    for &(u, w) in rule.iter().rev() {
        let miss = coherent_miss(m, u, shift);
        if miss <= 1e-17 * sum {
            break;
        }
        sum += w * miss;
    }
    sum
}

fn adaptive_coherent(m: u64, gamma: f64) -> Result<f64> {
    let shift = (2.0 * gamma).sqrt();
    let norm = (2.0 * PI).sqrt();
    let est = crate::quad::integrate_pieces(
        |u| (-0.5 * u * u).exp() / norm * coherent_miss(m, u, shift),
        -39.0,
        39.0,
        78,
        Tolerance::new(1e-14, 1e-12),
    )?;
    Ok(est.value)
}

fn calibrated_coherent(m: u64) -> Result<Kind> {
    let mut nodes = HERMITE_NODES;
    let mut rule = hermite_rule(nodes);
    while nodes <= HERMITE_MAX_NODES {
        let finer = hermite_rule(2 * nodes);
        let worst = HERMITE_PROBES
            .iter()
            .map(|&g| (hermite_coherent(&rule, m, g) - hermite_coherent(&finer, m, g)).abs())
            .fold(0.0, f64::max);
        if worst <= HERMITE_AGREEMENT {
            return Ok(Kind::Hermite { order: nodes, rule });
        }
        nodes *= 2;
        rule = finer;
    }
    Ok(Kind::CoherentAdaptive)
}

/// Σ_{k=1}^{M-1} (-1)^{k+1}/(k+1)·C(M-1, k)·e^{-kγ/(k+1)}.
fn alternating_terms(m: u64) -> Vec<(f64, f64)> {
    let n = m - 1;
    let mut binom = 1.0;
    (1..=n)
        .map(|k| {
            binom *= (n - k + 1) as f64 / k as f64;
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            (sign * binom / (kf + 1.0), kf / (kf + 1.0))
        })
        .collect()
}

/// Tabulates u_n = ∫ x^n e^{-x}/n! · [1 - (1 - e^{-x})^{M-1}] dx.
///
/// Expanding the Bessel kernel of the non-coherent orthogonal SER integral
/// gives P_s(γ) = Σ_n e^{-γ}γ^n/n!·u_n, a sum of positive terms. u_n decays
/// like (M-1)·2^{-n-1}, so the table stops once it falls below 1e-25.
fn poisson_table(m: u64) -> Result<Vec<(f64, f64)>> {
    let m1 = (m - 1) as f64;
    let miss = |x: f64| -(m1 * (-(-x).exp()).ln_1p()).exp_m1();
    let tol = Tolerance::new(1e-30, 1e-13);
    let mut table = Vec::new();
    for n in 0..POISSON_TABLE_MAX {
        let nf = n as f64;
        let log_norm = libm::lgamma(nf + 1.0);
        let u = integrate_semi_infinite(
            |x| {
                let density = if n == 0 {
                    (-x).exp()
                } else {
                    (nf * x.ln() - x - log_norm).exp()
                };
                if density == 0.0 {
                    0.0
                } else {
                    density * miss(x)
                }
            },
            nf + 1.0,
            tol,
        )?
        .value;
        table.push((u, log_norm));
        if u < POISSON_TABLE_FLOOR {
            return Ok(table);
        }
    }
    Err(Error::Series(format!(
        "orthogonal SER table for M={m} did not decay within {POISSON_TABLE_MAX} terms"
    )))
}

fn poisson_mixture(table: &[(f64, f64)], gamma: f64) -> f64 {
    if gamma == 0.0 {
        return table[0].0;
    }
    let lg = gamma.ln();
    table
        .iter()
        .enumerate()
        .map(|(n, &(u, log_fact))| (n as f64 * lg - gamma - log_fact).exp() * u)
        .sum()
}

/// Exact SER conditioned on instantaneous SNR γ.
///
/// Builds the per-M tables on every call; hold a [`SerModel`] when
/// evaluating many SNRs.
pub fn conditional_ser(scheme: SchemeId, m: u64, gamma: f64) -> Result<f64> {
    SerModel::new(scheme, m)?.conditional(gamma)
}

/// Rayleigh-fading SER upper bounds in closed form, clamped to 1.
pub fn avg_ser_closed(
    scheme: SchemeId,
    m: u64,
    fading: &FadingModel,
    gamma_bar: AvgSnr,
) -> Result<f64> {
    scheme.validate_m(m)?;
    fading.validate()?;
    if !fading.is_rayleigh() {
        return Err(Error::UnsupportedFading(fading.to_string()));
    }
    let g = gamma_bar.value();
    let mf = m as f64;
    let p = match scheme {
        SchemeId::NcMfsk => -((mf - 1.0) * (-1.0 / (2.0 + g)).ln_1p()).exp_m1(),
        SchemeId::CoherentMfsk | SchemeId::Mppm => (mf - 1.0) / (g + 2.0),
        SchemeId::Mqam => {
            4.0 * (mf - 1.0) / (3.0 * g + 2.0 * (mf - 1.0)) * (1.0 - 1.0 / mf.sqrt())
        }
        SchemeId::Doqpsk => oqpsk_scale() * 4.0 / ((2.0 - SQRT_2) * g + 4.0),
        SchemeId::Ook => 1.0 / (g + 2.0),
    };
    Ok(p.min(1.0))
}

/// Average SER for any fading law by the chosen method.
pub fn avg_ser_general(
    scheme: SchemeId,
    m: u64,
    fading: &FadingModel,
    gamma_bar: AvgSnr,
    method: AvgMethod,
) -> Result<f64> {
    fading.validate()?;
    match method {
        AvgMethod::MgfBound => Ok(bound_terms(scheme, m)?.average(fading, gamma_bar)),
        AvgMethod::QuadratureExact => SerModel::new(scheme, m)?.average(fading, gamma_bar),
    }
}

/// The error-rate model energies are sized against: the closed form under
/// Rayleigh fading, the MGF-averaged bound otherwise.
pub fn avg_ser_model(
    scheme: SchemeId,
    m: u64,
    fading: &FadingModel,
    gamma_bar: AvgSnr,
) -> Result<f64> {
    if fading.is_rayleigh() {
        avg_ser_closed(scheme, m, fading, gamma_bar)
    } else {
        avg_ser_general(scheme, m, fading, gamma_bar, AvgMethod::MgfBound)
    }
}

/// γ̄ at which the Rayleigh closed-form bound equals `target`.
///
/// Multiplying by L_d N0 / Ω gives the required symbol energy.
pub fn inversion_coefficient(scheme: SchemeId, m: u64, target: f64) -> Result<f64> {
    scheme.validate_m(m)?;
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain("target_ser", "must lie in (0, 1)"));
    }
    let mf = m as f64;
    let p = target;
    let coef = match scheme {
        SchemeId::NcMfsk => {
            // 1 - (1 - P)^{1/(M-1)}
            let q = -((-p).ln_1p() / (mf - 1.0)).exp_m1();
            1.0 / q - 2.0
        }
        SchemeId::CoherentMfsk | SchemeId::Mppm => (mf - 1.0) / p - 2.0,
        SchemeId::Mqam => 2.0 * (mf - 1.0) / 3.0 * (2.0 * (1.0 - 1.0 / mf.sqrt()) / p - 1.0),
        SchemeId::Doqpsk => (4.0 / p * oqpsk_scale() - 4.0) / (2.0 - SQRT_2),
        SchemeId::Ook => 1.0 / p - 2.0,
    };
    if coef < 0.0 {
        let ceiling = avg_ser_closed(scheme, m, &FadingModel::rayleigh(), AvgSnr::new(0.0)?)?;
        return Err(Error::InfeasibleTarget { target, ceiling });
    }
    Ok(coef)
}

/// Bracket growth limit, relative to the Rayleigh starting point.
const BRACKET_CAP: f64 = 1e6;

/// γ̄ at which [`avg_ser_model`] meets `target`.
///
/// Rayleigh inverts the closed form exactly and AWGN inverts c·e^{-sγ̄}
/// directly. Rician fading bisects the MGF-averaged bound, starting from
/// [γ̄_R·1e-3, γ̄_R·1e3] around the Rayleigh answer γ̄_R and widening by
/// decades up to 1e6 either way.
pub fn required_avg_snr(scheme: SchemeId, m: u64, fading: &FadingModel, target: f64) -> Result<f64> {
    fading.validate()?;
    let fading = fading.canonical();
    if let FadingModel::Rayleigh { .. } = fading {
        return inversion_coefficient(scheme, m, target);
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain("target_ser", "must lie in (0, 1)"));
    }
    let term = bound_terms(scheme, m)?;
    if target > term.coef {
        return Err(Error::InfeasibleTarget {
            target,
            ceiling: term.coef.min(1.0),
        });
    }
    if target == term.coef {
        return Ok(0.0);
    }
    if let FadingModel::Awgn { .. } = fading {
        return Ok((term.coef / target).ln() / term.rate);
    }
    let anchor = match inversion_coefficient(scheme, m, target) {
        Ok(c) if c > 0.0 => c,
        _ => (term.coef / target - 1.0) / term.rate,
    };
    let excess = |g: f64| -> f64 {
        let snr = AvgSnr::new(g).expect("bracket points are finite and >= 0");
        term.coef * fading_mgf(&fading, snr, term.rate) / target - 1.0
    };
    let mut up = 1e3;
    while excess(anchor * up) > 0.0 {
        up *= 10.0;
        if up > BRACKET_CAP {
            return Err(Error::BracketFailure {
                lo: anchor * 1e-3,
                hi: anchor * BRACKET_CAP,
            });
        }
    }
    let mut down = 1e-3;
    while excess(anchor * down) < 0.0 {
        down *= 0.1;
        if down < 1.0 / BRACKET_CAP {
            return Err(Error::BracketFailure {
                lo: anchor / BRACKET_CAP,
                hi: anchor * up,
            });
        }
    }
    bisect(
        excess,
        RootSpec {
            lo: anchor * down,
            hi: anchor * up,
            rel_tol: 1e-13,
            max_iter: 200,
        },
    )
}

/// Symbol energy E_t that meets the configured target, treating the bound
/// as an equality.
pub fn required_symbol_energy(
    cfg: &SchemeConfig,
    lb: &LinkBudget,
    fading: &FadingModel,
) -> Result<f64> {
    cfg.validate()?;
    let g = required_avg_snr(cfg.scheme, cfg.m, fading, cfg.target_ser)?;
    Ok(g * lb.unit_snr_energy(fading)?)
}
