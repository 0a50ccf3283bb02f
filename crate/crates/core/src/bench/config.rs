use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::WindowKind;
use crate::hamiltonian::LatticeSpec;
use crate::stats::VerdictRule;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!("unknown profile '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    I,
    II,
}

impl Variant {
    pub fn index(self) -> u64 {
        match self {
            Variant::I => 1,
            Variant::II => 2,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::I => "I",
            Variant::II => "II",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantSelection {
    #[serde(rename = "1", alias = "I")]
    One,
    #[serde(rename = "2", alias = "II")]
    Two,
    Both,
}

impl VariantSelection {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantSelection::One => vec![Variant::I],
            VariantSelection::Two => vec![Variant::II],
            VariantSelection::Both => vec![Variant::I, Variant::II],
        }
    }
}

impl std::str::FromStr for VariantSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "I" => Ok(VariantSelection::One),
            "2" | "II" => Ok(VariantSelection::Two),
            "both" => Ok(VariantSelection::Both),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// Knobs of the simulation diagnostic that differ between profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArbitrationConfig {
    /// Base averaging time in periods of the fastest frequency `Δ_B`.
    pub periods: f64,
    /// Sampling interval as a fraction of the aliasing limit `π/Δ_B`.
    pub sampling_safety: f64,
    pub rel_tol: f64,
    pub max_doublings: usize,
    /// Annealing times offered to Variant II.
    pub anneal_taus: Vec<f64>,
    /// Peak threshold relative to the strongest line or the mean level.
    pub peak_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub lattice: LatticeSpec,
    pub omega0: f64,
    pub eta_list: Vec<f64>,
    pub windows: Vec<WindowKind>,
    pub variant: VariantSelection,
    pub n_standard: usize,
    pub n_arbitrate: usize,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub arbitration: ArbitrationConfig,
    #[serde(default)]
    pub verdict_rule: VerdictRule,
    /// Record wall-clock times in reports. Off by default so that reports
    /// are byte-identical between runs.
    #[serde(default)]
    pub record_timings: bool,
}

impl RunConfig {
    pub fn profile(p: Profile) -> Self {
        match p {
            Profile::Desk => RunConfig {
                schema_version: SCHEMA_VERSION,
                lattice: LatticeSpec {
                    n_half: 50,
                    a: 1.0,
                    m: 1.0,
                },
                omega0: 2e-3,
                eta_list: vec![0.0, 0.01, 0.02, 0.05, 0.1],
                windows: WindowKind::ALL.to_vec(),
                variant: VariantSelection::Both,
                n_standard: 500,
                n_arbitrate: 500,
                seeds: vec![1],
                output: None,
                arbitration: ArbitrationConfig {
                    periods: 200.0,
                    sampling_safety: 0.9,
                    rel_tol: 1e-4,
                    max_doublings: 1,
                    anneal_taus: vec![1000.0],
                    peak_threshold: 1e-3,
                },
                verdict_rule: VerdictRule::Overlap,
                record_timings: false,
            },
            Profile::Paper => RunConfig {
                lattice: LatticeSpec {
                    n_half: 500,
                    a: 1.0,
                    m: 1.0,
                },
                n_standard: 10_000,
                n_arbitrate: 10_000,
                arbitration: ArbitrationConfig {
                    periods: 200.0,
                    sampling_safety: 0.5,
                    rel_tol: 1e-4,
                    max_doublings: 8,
                    anneal_taus: vec![1000.0, 4000.0],
                    peak_threshold: 1e-3,
                },
                ..RunConfig::profile(Profile::Desk)
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.lattice
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return bad(format!("omega0 must be positive, got {}", self.omega0));
        }
        if self.eta_list.iter().any(|e| !e.is_finite()) {
            return bad("eta_list must be finite".into());
        }
        let zeros = self.eta_list.iter().filter(|&&e| e == 0.0).count();
        if zeros != 1 {
            return bad(format!(
                "eta_list must contain 0 exactly once, found {zeros}"
            ));
        }
        for (i, e) in self.eta_list.iter().enumerate() {
            if self.eta_list[..i].contains(e) {
                return bad(format!("eta {e} listed twice"));
            }
        }
        if self.windows.is_empty() {
            return bad("no windows selected".into());
        }
        for (i, w) in self.windows.iter().enumerate() {
            if self.windows[..i].contains(w) {
                return bad(format!("window {w} listed twice"));
            }
        }
        if self.n_standard < 10 || self.n_arbitrate < 10 {
            return bad("n_standard and n_arbitrate must be at least 10".into());
        }
        if self.seeds.is_empty() {
            return bad("no seeds given".into());
        }
        let a = &self.arbitration;
        if !(a.periods > 0.0 && a.sampling_safety > 0.0 && a.sampling_safety < 1.0) {
            return bad(
                "arbitration periods must be positive and sampling_safety in (0, 1)".into(),
            );
        }
        if a.anneal_taus.is_empty() || a.anneal_taus.iter().any(|t| !(*t > 0.0)) {
            return bad("anneal_taus must be a non-empty list of positive times".into());
        }
        if !(a.peak_threshold > 0.0 && a.peak_threshold < 1.0) {
            return bad("peak_threshold must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// Reads a JSON or TOML file; the extension decides, and files without
    /// one are tried as JSON first.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let cfg = match ext {
            "json" => Self::from_json(&text),
            "toml" => Self::from_toml(&text),
            _ => Self::from_json(&text).or_else(|_| Self::from_toml(&text)),
        }?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("json: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("toml: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_valid() {
        RunConfig::profile(Profile::Desk).validate().unwrap();
        RunConfig::profile(Profile::Paper).validate().unwrap();
    }

    #[test]
    fn json_and_toml_roundtrip() {
        let cfg = RunConfig::profile(Profile::Desk);
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn eta_zero_required_once() {
        let mut cfg = RunConfig::profile(Profile::Desk);
        cfg.eta_list = vec![0.01, 0.1];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.eta_list = vec![0.0, 0.0];
        assert!(cfg.validate().is_err());
        cfg.eta_list = vec![0.0];
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_small_samples_and_unknown_fields() {
        let mut cfg = RunConfig::profile(Profile::Desk);
        cfg.n_arbitrate = 9;
        assert!(cfg.validate().is_err());
        let text = RunConfig::profile(Profile::Desk)
            .to_json()
            .replacen('{', "{\"bogus\": 1,", 1);
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_other_schema_versions() {
        let mut cfg = RunConfig::profile(Profile::Desk);
        cfg.schema_version = 2;
        assert!(cfg.validate().is_err());
    }
}
