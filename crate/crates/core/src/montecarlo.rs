//! Independent checks on the error-rate models: seeded SNR sampling,
//! Monte Carlo and quadrature averages of the exact conditional SER, and
//! a bound-domination report.
//!
//! Random numbers come from ChaCha20 (RFC 7539 block function, 20 rounds)
//! keyed by `seed` through `seed_from_u64` and positioned by `stream_id`
//! through the ChaCha stream word. Uniforms take the top 53 bits of a
//! 64-bit output; normals are drawn with the `rand_distr` ziggurat. Both
//! are platform independent.

use std::thread;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub use crate::special::{bessel_i0, marcum_q1};

use crate::error::{Error, Result};
use crate::linkbudget::{AvgSnr, FadingModel};
use crate::schemes::{avg_ser_model, SchemeId, SerModel};

/// Smallest sample count accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: usize = 1000;

/// Slack allowed on the quadrature side of the bound check.
pub const QUAD_TOLERANCE: f64 = 1e-9;

const Z_95: f64 = 1.96;

/// Identifies one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(self) -> Draws {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        Draws { rng }
    }
}

/// Generator state for one [`RngStream`].
pub struct Draws {
    rng: ChaCha20Rng,
}

impl Draws {
    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Raw access for `rand_distr` distributions.
    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

/// Sample mean with its 95% normal-approximation half width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// Welford pass over `values`.
    pub fn from_samples(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for x in values {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        let std = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
        McEstimate {
            mean,
            half_width_95: if n > 0 { Z_95 * std / (n as f64).sqrt() } else { 0.0 },
            n_samples: n,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.mean).abs() <= self.half_width_95
    }
}

/// Draws `n` instantaneous SNRs with mean γ̄.
///
/// Rayleigh: γ = -γ̄·ln(1 - U). Rician: γ = γ̄/(1+K)·((√K + G₁/√2)² +
/// (G₂/√2)²) with G₁, G₂ standard normal, which is the squared envelope of
/// a unit-variance complex Gaussian plus a line-of-sight term. K = 0 goes
/// through the Rician construction, so it is an independent route to the
/// exponential law. AWGN returns γ̄ every time.
pub fn sample_snr(fading: &FadingModel, gamma_bar: AvgSnr, n: usize, stream: RngStream) -> Vec<f64> {
    let g = gamma_bar.value();
    let mut draws = stream.generator();
    match *fading {
        FadingModel::Awgn { .. } => vec![g; n],
        FadingModel::Rayleigh { .. } => (0..n).map(|_| -g * (-draws.uniform()).ln_1p()).collect(),
        FadingModel::Rician { k, .. } => {
            let los = k.sqrt();
            let scale = g / (1.0 + k);
            (0..n)
                .map(|_| {
                    let i = los + draws.normal() * std::f64::consts::FRAC_1_SQRT_2;
                    let q = draws.normal() * std::f64::consts::FRAC_1_SQRT_2;
                    scale * (i * i + q * q)
                })
                .collect()
        }
    }
}

/// Monte Carlo average of the exact conditional SER.
pub fn mc_avg_ser(
    scheme: SchemeId,
    m: u64,
    fading: &FadingModel,
    gamma_bar: AvgSnr,
    n: usize,
    stream: RngStream,
) -> Result<McEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::domain("samples", format!("need at least {MIN_SAMPLES}")));
    }
    fading.validate()?;
    let model = SerModel::new(scheme, m)?;
    let values = sample_snr(fading, gamma_bar, n, stream)
        .into_iter()
        .map(|g| model.conditional(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(McEstimate::from_samples(values))
}

/// Exact average SER by adaptive quadrature over γ = γ̄·t/(1 - t).
pub fn quad_avg_ser(scheme: SchemeId, m: u64, fading: &FadingModel, gamma_bar: AvgSnr) -> Result<f64> {
    SerModel::new(scheme, m)?.average(fading, gamma_bar)
}

/// Cells to check: every (scheme, M) against every fading law and γ̄.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub cells: Vec<(SchemeId, u64)>,
    pub fadings: Vec<FadingModel>,
    pub gamma_bars: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Multiplies every bound before comparison. 1 in normal use; lower
    /// values exercise the failure path.
    pub bound_scale: f64,
}

impl VerifyGrid {
    /// Six schemes at their valid M in {2, 4, 8, 16, 64}, γ̄ in
    /// {10, 100, 1000}, Rayleigh and Rician K = 0 and 10.
    pub fn standard(seed: u64, samples: usize) -> Self {
        let cells = SchemeId::ALL
            .iter()
            .flat_map(|&s| {
                [2, 4, 8, 16, 64]
                    .into_iter()
                    .filter(move |&m| s.validate_m(m).is_ok())
                    .map(move |m| (s, m))
            })
            .collect();
        VerifyGrid {
            cells,
            fadings: vec![
                FadingModel::rayleigh(),
                FadingModel::Rician { k: 0.0, omega: 1.0 },
                FadingModel::Rician { k: 10.0, omega: 1.0 },
            ],
            gamma_bars: vec![10.0, 100.0, 1000.0],
            seed,
            samples,
            bound_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::domain("samples", format!("need at least {MIN_SAMPLES}")));
        }
        if !(self.bound_scale > 0.0 && self.bound_scale.is_finite()) {
            return Err(Error::domain("bound_scale", "must be positive and finite"));
        }
        if self.cells.is_empty() || self.fadings.is_empty() || self.gamma_bars.is_empty() {
            return Err(Error::domain("grid", "every axis needs at least one entry"));
        }
        for &(s, m) in &self.cells {
            s.validate_m(m)?;
        }
        for f in &self.fadings {
            f.validate()?;
        }
        for &g in &self.gamma_bars {
            AvgSnr::new(g)?;
        }
        Ok(())
    }

    fn points(&self) -> Vec<(SchemeId, u64, FadingModel, f64)> {
        let mut out = Vec::new();
        for &(s, m) in &self.cells {
            for f in &self.fadings {
                for &g in &self.gamma_bars {
                    out.push((s, m, *f, g));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub scheme: SchemeId,
    pub m: u64,
    pub fading: FadingModel,
    pub gamma_bar: f64,
    pub bound: f64,
    pub exact: f64,
    pub mc: McEstimate,
    pub pass: bool,
    /// Set when a value could not be computed; the row then fails.
    pub error: Option<Error>,
}

/// Checks every cell; cells run on worker threads, each with its own
/// stream, so the rows do not depend on scheduling.
pub fn verify_bounds(grid: &VerifyGrid) -> Result<Vec<VerifyRow>> {
    grid.validate()?;
    let points = grid.points();
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(points.len());
    let mut rows: Vec<Option<VerifyRow>> = vec![None; points.len()];
    thread::scope(|scope| {
        let chunk = points.len().div_ceil(workers);
        for (block, (slot, pts)) in rows.chunks_mut(chunk).zip(points.chunks(chunk)).enumerate() {
            scope.spawn(move || {
                for (i, (out, &(s, m, f, g))) in slot.iter_mut().zip(pts).enumerate() {
                    let stream = RngStream::new(grid.seed, (block * chunk + i) as u64);
                    *out = Some(verify_cell(s, m, f, g, grid, stream));
                }
            });
        }
    });
    Ok(rows.into_iter().map(|r| r.expect("every cell is filled")).collect())
}

fn verify_cell(
    scheme: SchemeId,
    m: u64,
    fading: FadingModel,
    gamma_bar: f64,
    grid: &VerifyGrid,
    stream: RngStream,
) -> VerifyRow {
    let nan = McEstimate {
        mean: f64::NAN,
        half_width_95: f64::NAN,
        n_samples: 0,
    };
    let mut row = VerifyRow {
        scheme,
        m,
        fading,
        gamma_bar,
        bound: f64::NAN,
        exact: f64::NAN,
        mc: nan,
        pass: false,
        error: None,
    };
    let computed = (|| {
        let g = AvgSnr::new(gamma_bar)?;
        let bound = grid.bound_scale * avg_ser_model(scheme, m, &fading, g)?;
        let exact = quad_avg_ser(scheme, m, &fading, g)?;
        let mc = mc_avg_ser(scheme, m, &fading, g, grid.samples, stream)?;
        Ok::<_, Error>((bound, exact, mc))
    })();
    match computed {
        Ok((bound, exact, mc)) => {
            row.bound = bound;
            row.exact = exact;
            row.mc = mc;
            row.pass = bound >= exact - QUAD_TOLERANCE && bound >= mc.mean - mc.half_width_95;
        }
        Err(e) => row.error = Some(e),
    }
    row
}
