//! Scenario files: one TOML document describing a link, a fading law, a
//! scheme and optionally a sweep.
//!
//! ```toml
//! [link]                  # every key optional
//! distance_m = 10.0       # default 10
//! eta = 3.5               # path-loss exponent
//! gain_margin_db = 40.0   # M_l
//! l1_db = 30.0            # gain factor at 1 m
//! n0_db = -180.0          # noise PSD, dB(W/Hz)
//!
//! [fading]                # optional, default Rayleigh with omega = 1
//! type = "rician"         # rayleigh | rician | awgn
//! k_db = 10.0             # rician only, required there
//! omega = 1.0
//!
//! [scheme]
//! id = "nc-mfsk"          # nc-mfsk | coherent-mfsk | mqam | doqpsk | ook | mppm
//! m = 4                   # needed by `energy` unless the scheme fixes M
//! target_ser = 1e-3       # default 1e-3
//! # payload_bits, bandwidth_hz, frame_period_s, transient_s, ook_duty:
//! # optional, defaulting to the scheme's band (pass-band or UWB)
//!
//! [circuit]               # optional block powers in W, band defaults
//! # p_sy, p_filt_tx, p_filt_rx, p_lna, p_ed, p_ifa, p_adc, p_dac,
//! # p_mix, p_pg, p_int, alpha_fixed
//!
//! [sweep]                 # optional; lists must not be empty
//! schemes = ["nc-mfsk"]   # default [scheme.id]
//! m = [2, 4, 8]           # default [scheme.m]
//! distance_m = [10.0]     # default [link.distance_m]
//! k_db = [1.0, 10.0]      # Rician K axis in dB; absent uses [fading]
//! bandwidth_efficiency = [0.5]  # keep only M with this B_eff
//! ```
//!
//! Unknown keys are rejected. Decibel values are converted when the file
//! is loaded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::{FadingModel, LinkBudget};
use crate::schemes::SchemeId;
use crate::solver::{Baseline, CircuitOverrides, FramingOverrides, SweepSpec};
use crate::units::db_to_linear;

/// Scenarios shipped with the binary, by name.
pub const PRESETS: [(&str, &str); 6] = [
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6a", include_str!("../presets/fig6a.toml")),
    ("fig6b", include_str!("../presets/fig6b.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("table2", include_str!("../presets/table2.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_margin_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingKind {
    #[default]
    Rayleigh,
    Rician,
    Awgn,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    #[serde(rename = "type", default)]
    pub kind: FadingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub id: SchemeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_ser: Option<f64>,
    #[serde(flatten)]
    pub framing: FramingOverrides,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<SchemeId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_efficiency: Option<Vec<f64>>,
}

/// The document as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub fading: FadingSection,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub circuit: CircuitOverrides,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// A loaded scenario: the engine inputs plus the document they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub scheme: SchemeId,
    pub m: Option<u64>,
    pub baseline: Baseline,
    pub sweep: Option<SweepSpec>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::domain("scenario", e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let file = file.with_defaults();
        let l = &file.link;
        let link = LinkBudget::new(
            l.distance_m.unwrap_or_default(),
            l.eta.unwrap_or_default(),
            db_to_linear(l.gain_margin_db.unwrap_or_default()),
            db_to_linear(l.l1_db.unwrap_or_default()),
            db_to_linear(l.n0_db.unwrap_or_default()),
        )?;
        let f = &file.fading;
        let omega = f.omega.unwrap_or(1.0);
        let fading = match (f.kind, f.k_db) {
            (FadingKind::Rician, Some(k)) => FadingModel::rician_db(k, omega),
            (FadingKind::Rician, None) => {
                return Err(Error::domain("fading.k_db", "required for rician fading"));
            }
            (_, Some(_)) => {
                return Err(Error::domain("fading.k_db", "only rician fading takes a K factor"));
            }
            (FadingKind::Rayleigh, None) => FadingModel::Rayleigh { omega },
            (FadingKind::Awgn, None) => FadingModel::Awgn { omega },
        };
        fading.validate()?;
        let s = &file.scheme;
        if let Some(m) = s.m {
            s.id.validate_m(m)?;
        }
        let baseline = Baseline {
            link,
            fading,
            target_ser: s.target_ser.unwrap_or(1e-3),
            framing: s.framing,
            circuit: file.circuit,
        };
        let sweep = match &file.sweep {
            None => None,
            Some(sw) => Some(build_sweep(sw, s, &baseline)?),
        };
        let scenario = Scenario {
            scheme: s.id,
            m: s.m.or(s.id.fixed_m()),
            baseline,
            sweep,
            file,
        };
        // Catch framing and circuit errors at load time.
        if let Some(m) = scenario.m {
            scenario.baseline.config_for(scenario.scheme, m).validate()?;
        }
        scenario.baseline.circuit_for(scenario.scheme).validate()?;
        Ok(scenario)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset(name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::domain("preset", format!("unknown preset `{name}`; have {}", names.join(", ")))
        })?;
        Self::parse(text)
    }

    /// The document with scheme-independent defaults written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("scenario documents always serialize")
    }
}

impl ScenarioFile {
    /// Fills link, fading and target defaults. Framing and circuit values
    /// depend on the scheme of each sweep cell, so absent ones stay absent.
    pub fn with_defaults(mut self) -> Self {
        let l = &mut self.link;
        l.distance_m.get_or_insert(10.0);
        l.eta.get_or_insert(3.5);
        l.gain_margin_db.get_or_insert(40.0);
        l.l1_db.get_or_insert(30.0);
        l.n0_db.get_or_insert(-180.0);
        self.fading.omega.get_or_insert(1.0);
        self.scheme.target_ser.get_or_insert(1e-3);
        self
    }
}

fn build_sweep(sw: &SweepSection, s: &SchemeSection, baseline: &Baseline) -> Result<SweepSpec> {
    fn axis<T: Clone>(given: &Option<Vec<T>>, name: &'static str, default: Option<T>) -> Result<Vec<T>> {
        match given {
            Some(v) if v.is_empty() => Err(Error::domain(name, "sweep axis is empty")),
            Some(v) => Ok(v.clone()),
            None => default
                .map(|d| vec![d])
                .ok_or_else(|| Error::domain(name, "no sweep values and no default")),
        }
    }
    if matches!(&sw.k_db, Some(k) if k.is_empty()) {
        return Err(Error::domain("sweep.k_db", "sweep axis is empty"));
    }
    if matches!(&sw.bandwidth_efficiency, Some(b) if b.is_empty()) {
        return Err(Error::domain("sweep.bandwidth_efficiency", "sweep axis is empty"));
    }
    let spec = SweepSpec {
        schemes: axis(&sw.schemes, "sweep.schemes", Some(s.id))?,
        m_values: axis(&sw.m, "sweep.m", s.m.or(s.id.fixed_m()))?,
        distances_m: axis(&sw.distance_m, "sweep.distance_m", Some(baseline.link.distance_m))?,
        k_db: sw.k_db.clone().unwrap_or_default(),
        bandwidth_efficiency: sw.bandwidth_efficiency.clone().unwrap_or_default(),
        baseline: *baseline,
    };
    spec.validate()?;
    for &scheme in &spec.schemes {
        if spec.m_axis(scheme).is_empty() {
            return Err(Error::domain(
                "sweep.m",
                format!("no listed constellation size is valid for {scheme}"),
            ));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scheme]
id = "nc-mfsk"
m = 4
"#;

    #[test]
    fn defaults_match_evaluation_parameters() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.baseline.link, LinkBudget::table_one(10.0));
        assert_eq!(s.baseline.fading, FadingModel::rayleigh());
        assert_eq!(s.baseline.target_ser, 1e-3);
        assert_eq!(s.m, Some(4));
        assert!(s.sweep.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[link]\ndistnace_m = 10.0\n[scheme]\nid = \"ook\"\n";
        let err = Scenario::parse(text).unwrap_err().to_string();
        assert!(err.contains("distnace_m"), "{err}");
        for bad in [
            "[scheme]\nid = \"ook\"\ncolour = 1\n",
            "[scheme]\nid = \"ook\"\n[circuit]\np_xyz = 1.0\n",
            "[scheme]\nid = \"ook\"\n[sweep]\nd = [1.0]\n",
            "[scheme]\nid = \"ook\"\n[extra]\n",
        ] {
            assert!(Scenario::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn fading_variants() {
        let rician = "[fading]\ntype = \"rician\"\nk_db = 10.0\n[scheme]\nid = \"mqam\"\nm = 16\n";
        let s = Scenario::parse(rician).unwrap();
        assert_eq!(s.baseline.fading, FadingModel::rician_db(10.0, 1.0));
        let awgn = "[fading]\ntype = \"awgn\"\nomega = 2.0\n[scheme]\nid = \"ook\"\n";
        assert_eq!(Scenario::parse(awgn).unwrap().baseline.fading, FadingModel::Awgn { omega: 2.0 });
        assert!(Scenario::parse("[fading]\ntype = \"rician\"\n[scheme]\nid = \"ook\"\n").is_err());
        assert!(Scenario::parse("[fading]\nk_db = 3.0\n[scheme]\nid = \"ook\"\n").is_err());
        assert!(Scenario::parse("[fading]\ntype = \"nakagami\"\n[scheme]\nid = \"ook\"\n").is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for bad in [
            "[scheme]\nid = \"mqam\"\nm = 8\n",
            "[link]\ndistance_m = -1.0\n[scheme]\nid = \"ook\"\n",
            "[scheme]\nid = \"ook\"\n[circuit]\np_lna = -1e-3\n",
            "[scheme]\nid = \"nc-mfsk\"\nm = 4\nbandwidth_hz = 0.0\n",
            "[scheme]\nid = \"nc-mfsk\"\nm = 4\n[sweep]\nm = []\n",
            "[scheme]\nid = \"nc-mfsk\"\nm = 4\n[sweep]\nk_db = []\n",
            "[scheme]\nid = \"nc-mfsk\"\n[sweep]\ndistance_m = [1.0]\n",
            "[scheme]\nid = \"mqam\"\nm = 4\n[sweep]\nm = [2, 8]\n",
        ] {
            let err = Scenario::parse(bad).unwrap_err();
            assert!(!err.is_numerical(), "{bad}: {err}");
        }
    }

    #[test]
    fn framing_overrides_reach_the_config() {
        let text = "[scheme]\nid = \"mppm\"\nm = 8\npayload_bits = 1000\ntransient_s = 1e-9\n";
        let s = Scenario::parse(text).unwrap();
        let cfg = s.baseline.config_for(s.scheme, 8);
        assert_eq!(cfg.payload_bits, 1000);
        assert_eq!(cfg.transient_s, 1e-9);
        assert_eq!(cfg.bandwidth_hz, 5e8);
    }

    #[test]
    fn sweep_axes_default_from_the_scenario() {
        let text = "[link]\ndistance_m = 42.0\n[scheme]\nid = \"mqam\"\nm = 16\n[sweep]\n";
        let sw = Scenario::parse(text).unwrap().sweep.unwrap();
        assert_eq!(sw.schemes, vec![SchemeId::Mqam]);
        assert_eq!(sw.m_values, vec![16]);
        assert_eq!(sw.distances_m, vec![42.0]);
        assert!(sw.k_db.is_empty());
    }

    #[test]
    fn presets_load() {
        for (name, _) in PRESETS {
            let s = Scenario::preset(name).unwrap();
            assert!(s.sweep.is_some(), "{name}");
        }
        assert!(Scenario::preset("fig9").is_err());
    }

    #[test]
    fn round_trip_keeps_engine_inputs() {
        let texts: Vec<&str> = PRESETS
            .iter()
            .map(|(_, t)| *t)
            .chain([
                MINIMAL,
                "[link]\nn0_db = -174.3\n[fading]\ntype = \"rician\"\nk_db = 7.5\n[scheme]\nid = \"doqpsk\"\n[circuit]\np_sy = 0.02\n",
            ])
            .collect();
        for text in texts {
            let a = Scenario::parse(text).unwrap();
            let out = a.to_toml();
            let b = Scenario::parse(&out).unwrap();
            assert_eq!(a, b, "{out}");
            assert_eq!(out, b.to_toml());
        }
    }
}
