//! Root finding, parameter sweeps and constellation-size optimisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::{FadingModel, LinkBudget};
use crate::schemes::{
    bandwidth_efficiency, total_energy, CircuitProfile, EnergyBreakdown, SchemeConfig, SchemeId,
};
use crate::units::db_to_linear;

/// Bracket and stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    pub lo: f64,
    pub hi: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl RootSpec {
    pub fn new(lo: f64, hi: f64) -> Self {
        RootSpec {
            lo,
            hi,
            rel_tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// Bisection for a sign change of `f` on [lo, hi].
///
/// Stops at an exact zero or once the bracket is narrower than
/// `rel_tol·|midpoint|`, returning the midpoint.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, spec: RootSpec) -> Result<f64> {
    let RootSpec {
        mut lo,
        mut hi,
        rel_tol,
        max_iter,
    } = spec;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("bracket", "needs finite lo < hi"));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::domain("rel_tol", "must be > 0"));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::domain("f", "returned NaN inside the bracket"));
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid == lo || mid == hi {
            return Ok(mid);
        }
    }
    Err(Error::MaxIterations(max_iter))
}

/// Optional replacements for the framing defaults of a scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramingOverrides {
    pub payload_bits: Option<u64>,
    pub bandwidth_hz: Option<f64>,
    pub frame_period_s: Option<f64>,
    pub transient_s: Option<f64>,
    pub ook_duty: Option<f64>,
}

/// Optional replacements for circuit block powers, in watts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitOverrides {
    pub p_sy: Option<f64>,
    pub p_filt_tx: Option<f64>,
    pub p_filt_rx: Option<f64>,
    pub p_lna: Option<f64>,
    pub p_ed: Option<f64>,
    pub p_ifa: Option<f64>,
    pub p_adc: Option<f64>,
    pub p_dac: Option<f64>,
    pub p_mix: Option<f64>,
    pub p_pg: Option<f64>,
    pub p_int: Option<f64>,
    pub alpha_fixed: Option<f64>,
}

impl CircuitOverrides {
    pub fn apply(&self, base: CircuitProfile) -> CircuitProfile {
        CircuitProfile {
            p_sy: self.p_sy.unwrap_or(base.p_sy),
            p_filt_tx: self.p_filt_tx.unwrap_or(base.p_filt_tx),
            p_filt_rx: self.p_filt_rx.unwrap_or(base.p_filt_rx),
            p_lna: self.p_lna.unwrap_or(base.p_lna),
            p_ed: self.p_ed.unwrap_or(base.p_ed),
            p_ifa: self.p_ifa.unwrap_or(base.p_ifa),
            p_adc: self.p_adc.unwrap_or(base.p_adc),
            p_dac: self.p_dac.unwrap_or(base.p_dac),
            p_mix: self.p_mix.unwrap_or(base.p_mix),
            p_pg: self.p_pg.unwrap_or(base.p_pg),
            p_int: self.p_int.unwrap_or(base.p_int),
            alpha_fixed: self.alpha_fixed.unwrap_or(base.alpha_fixed),
        }
    }
}

/// Everything a sweep holds fixed. Scheme-dependent values start from the
/// evaluation defaults of the scheme's band and take the overrides on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    /// Link parameters; the distance is replaced per cell.
    pub link: LinkBudget,
    /// Fading used when the sweep has no K axis. Its Ω also applies to the
    /// Rician cells of a K axis.
    pub fading: FadingModel,
    pub target_ser: f64,
    pub framing: FramingOverrides,
    pub circuit: CircuitOverrides,
}

impl Baseline {
    pub fn table_one() -> Self {
        Baseline {
            link: LinkBudget::table_one(10.0),
            fading: FadingModel::rayleigh(),
            target_ser: 1e-3,
            framing: FramingOverrides::default(),
            circuit: CircuitOverrides::default(),
        }
    }

    pub fn config_for(&self, scheme: SchemeId, m: u64) -> SchemeConfig {
        let base = SchemeConfig::table_one(scheme, m);
        let f = &self.framing;
        SchemeConfig {
            payload_bits: f.payload_bits.unwrap_or(base.payload_bits),
            bandwidth_hz: f.bandwidth_hz.unwrap_or(base.bandwidth_hz),
            frame_period_s: f.frame_period_s.unwrap_or(base.frame_period_s),
            transient_s: f.transient_s.unwrap_or(base.transient_s),
            ook_duty: f.ook_duty.unwrap_or(base.ook_duty),
            target_ser: self.target_ser,
            ..base
        }
    }

    pub fn circuit_for(&self, scheme: SchemeId) -> CircuitProfile {
        self.circuit.apply(CircuitProfile::for_scheme(scheme))
    }

    fn fading_for(&self, k_db: Option<f64>) -> FadingModel {
        match k_db {
            Some(k) => FadingModel::Rician {
                k: db_to_linear(k),
                omega: self.fading.omega(),
            },
            None => self.fading,
        }
    }
}

/// Grid of scenarios to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub schemes: Vec<SchemeId>,
    pub m_values: Vec<u64>,
    pub distances_m: Vec<f64>,
    /// Rician K factors in dB; empty means the baseline fading only.
    pub k_db: Vec<f64>,
    /// When non-empty, only M values whose bandwidth efficiency is listed
    /// here are evaluated.
    pub bandwidth_efficiency: Vec<f64>,
    pub baseline: Baseline,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::domain("schemes", "sweep axis is empty"));
        }
        if self.m_values.is_empty() {
            return Err(Error::domain("m", "sweep axis is empty"));
        }
        if self.distances_m.is_empty() {
            return Err(Error::domain("distance_m", "sweep axis is empty"));
        }
        for &d in &self.distances_m {
            self.baseline.link.with_distance(d).validate()?;
        }
        for &k in &self.k_db {
            if !k.is_finite() {
                return Err(Error::domain("k_db", "must be finite"));
            }
        }
        for &b in &self.bandwidth_efficiency {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::domain("bandwidth_efficiency", "must be finite and > 0"));
            }
        }
        self.baseline.fading.validate()
    }

    /// Constellation sizes evaluated for `scheme`, in axis order.
    ///
    /// Fixed-rate schemes collapse the axis to their single M; sizes the
    /// scheme cannot use (non-powers of 4 for MQAM, say) are dropped.
    pub fn m_axis(&self, scheme: SchemeId) -> Vec<u64> {
        if let Some(m) = scheme.fixed_m() {
            return vec![m];
        }
        let duty = self.baseline.framing.ook_duty.unwrap_or(0.5);
        let mut out = Vec::new();
        for &m in &self.m_values {
            if scheme.validate_m(m).is_err() || out.contains(&m) {
                continue;
            }
            if !self.bandwidth_efficiency.is_empty() {
                let Ok(b) = bandwidth_efficiency(scheme, m, duty) else {
                    continue;
                };
                if !self
                    .bandwidth_efficiency
                    .iter()
                    .any(|&x| (x - b).abs() <= 1e-12 * x.max(b))
                {
                    continue;
                }
            }
            out.push(m);
        }
        out
    }

    /// Constellation sizes on the M axis that `scheme` cannot use.
    pub fn skipped_m(&self, scheme: SchemeId) -> Vec<u64> {
        if scheme.fixed_m().is_some() {
            return Vec::new();
        }
        self.m_values
            .iter()
            .copied()
            .filter(|&m| scheme.validate_m(m).is_err())
            .collect()
    }
}

/// One evaluated sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeId,
    pub m: u64,
    pub d_m: f64,
    pub k_db: Option<f64>,
    pub fading: FadingModel,
    pub target_ser: f64,
    pub outcome: std::result::Result<EnergyBreakdown, Error>,
}

impl SweepRow {
    pub fn feasible(&self) -> bool {
        matches!(&self.outcome, Ok(e) if e.feasible)
    }

    pub fn total_j(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|e| e.total_j)
    }
}

/// Evaluates a single scheme, M and distance under the baseline.
pub fn evaluate_cell(
    baseline: &Baseline,
    scheme: SchemeId,
    m: u64,
    d_m: f64,
    k_db: Option<f64>,
) -> SweepRow {
    let cfg = baseline.config_for(scheme, m);
    let fading = baseline.fading_for(k_db);
    let outcome = total_energy(
        &cfg,
        &baseline.link.with_distance(d_m),
        &fading,
        &baseline.circuit_for(scheme),
    );
    SweepRow {
        scheme,
        m,
        d_m,
        k_db,
        fading,
        target_ser: baseline.target_ser,
        outcome,
    }
}

/// Evaluates every cell, iterating scheme, then M, then distance, then K.
/// Failed cells carry their error instead of aborting the sweep.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let k_axis: Vec<Option<f64>> = if spec.k_db.is_empty() {
        vec![None]
    } else {
        spec.k_db.iter().copied().map(Some).collect()
    };
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        for m in spec.m_axis(scheme) {
            for &d in &spec.distances_m {
                for &k in &k_axis {
                    rows.push(evaluate_cell(&spec.baseline, scheme, m, d, k));
                }
            }
        }
    }
    Ok(rows)
}

/// Outcome of an exhaustive search over M.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub best_m: u64,
    pub best_total_j: f64,
    /// One row per candidate M, ascending.
    pub rows: Vec<SweepRow>,
    pub feasible: Vec<bool>,
}

/// Energy-minimising M for one scheme at one distance (and at most one K).
/// Ties go to the smaller M.
pub fn optimal_m(spec: &SweepSpec) -> Result<OptimumReport> {
    spec.validate()?;
    if spec.schemes.len() != 1 || spec.distances_m.len() != 1 || spec.k_db.len() > 1 {
        return Err(Error::domain(
            "sweep",
            "optimal M needs exactly one scheme and one distance",
        ));
    }
    let scheme = spec.schemes[0];
    let mut ms = spec.m_axis(scheme);
    ms.sort_unstable();
    let k = spec.k_db.first().copied();
    let rows: Vec<SweepRow> = ms
        .iter()
        .map(|&m| evaluate_cell(&spec.baseline, scheme, m, spec.distances_m[0], k))
        .collect();
    let feasible: Vec<bool> = rows.iter().map(SweepRow::feasible).collect();
    let mut best: Option<(u64, f64)> = None;
    for (row, &ok) in rows.iter().zip(&feasible) {
        let Some(total) = row.total_j().filter(|_| ok) else {
            continue;
        };
        if best.is_none_or(|(_, t)| total < t) {
            best = Some((row.m, total));
        }
    }
    let (best_m, best_total_j) = best.ok_or(Error::AllInfeasible)?;
    Ok(OptimumReport {
        best_m,
        best_total_j,
        rows,
        feasible,
    })
}

/// A point of the energy versus bandwidth-efficiency trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub m: u64,
    pub b_eff: f64,
    pub d_m: f64,
    pub total_j: f64,
    pub feasible: bool,
}

/// Total energy of NC-MFSK against its bandwidth efficiency log2(M)/M,
/// over every listed M and distance.
pub fn energy_vs_bandwidth_efficiency(
    scheme: SchemeId,
    m_values: &[u64],
    distances_m: &[f64],
    baseline: &Baseline,
) -> Result<Vec<EfficiencyRow>> {
    if scheme != SchemeId::NcMfsk {
        return Err(Error::domain(
            "scheme",
            "the bandwidth-efficiency trade-off is tabulated for nc-mfsk",
        ));
    }
    let mut rows = Vec::with_capacity(m_values.len() * distances_m.len());
    for &m in m_values {
        let b_eff = bandwidth_efficiency(scheme, m, 0.5)?;
        for &d in distances_m {
            let cfg = baseline.config_for(scheme, m);
            let e = total_energy(
                &cfg,
                &baseline.link.with_distance(d),
                &baseline.fading,
                &baseline.circuit_for(scheme),
            )?;
            rows.push(EfficiencyRow {
                m,
                b_eff,
                d_m: d,
                total_j: e.total_j,
                feasible: e.feasible,
            });
        }
    }
    Ok(rows)
}
