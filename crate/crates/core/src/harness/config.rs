//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [scenario]
//! frequency_ghz = 30.0
//! bs_elements = 400
//!
//! [experiment]
//! trials = 100
//! iterations = 10
//!
//! [rng]
//! master_seed = 1
//! ```
//!
//! Missing keys take the baseline values; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ScenarioSpec;

pub const DEFAULT_MASTER_SEED: u64 = 20_240_917;

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub experiment: ExperimentParams,
    pub rng: RngParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentParams {
    /// Uniform-random AO trials per sweep point.
    pub trials: usize,
    /// AO iterations for every AO run.
    pub iterations: usize,
    /// Relative-gain stopping threshold for the sweep AO runs; 0 disables it.
    pub rel_tol: f64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    pub freqs_ghz: Vec<f64>,
    pub bs_offsets_deg: Vec<f64>,
    pub irs_offsets_deg: Vec<f64>,
    pub scale_factors: Vec<f64>,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            trials: 100,
            iterations: 10,
            rel_tol: 0.0,
            threads: None,
            freqs_ghz: (1..=8).map(|i| 10.0 * i as f64).collect(),
            bs_offsets_deg: default_offsets(),
            irs_offsets_deg: default_offsets(),
            scale_factors: (0..12).map(|i| (8 + 2 * i) as f64 / 10.0).collect(),
        }
    }
}

/// -15° to 15° in 3° steps.
fn default_offsets() -> Vec<f64> {
    (-5..=5).map(|i| 3.0 * i as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RngParams {
    pub master_seed: u64,
}

impl Default for RngParams {
    fn default() -> Self {
        RngParams {
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

/// Named starting points for a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Full-size arrays, 100 trials.
    Baseline,
    /// 100 BS and 500 IRS elements, 20 trials.
    Reduced,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Preset::Baseline),
            "reduced" => Ok(Preset::Reduced),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected baseline or reduced)"
            ))),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Baseline => ExperimentConfig::default(),
            Preset::Reduced => ExperimentConfig {
                scenario: ScenarioSpec::reduced(),
                experiment: ExperimentParams {
                    trials: 20,
                    ..ExperimentParams::default()
                },
                ..ExperimentConfig::default()
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(Error::Config("experiment.trials must be at least 1".into()));
        }
        if e.iterations == 0 {
            return Err(Error::Config("experiment.iterations must be at least 1".into()));
        }
        if !(e.rel_tol >= 0.0 && e.rel_tol.is_finite()) {
            return Err(Error::Config(format!(
                "experiment.rel_tol must be nonnegative, got {}",
                e.rel_tol
            )));
        }
        if e.threads == Some(0) {
            return Err(Error::Config("experiment.threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweeps() {
        let p = ExperimentParams::default();
        assert_eq!(p.freqs_ghz, vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0]);
        assert_eq!(p.bs_offsets_deg.len(), 11);
        assert_eq!(p.bs_offsets_deg[0], -15.0);
        assert_eq!(p.bs_offsets_deg[5], 0.0);
        assert_eq!(p.scale_factors.len(), 12);
        assert_eq!(p.scale_factors[1], 1.0);
        assert_eq!(p.scale_factors[11], 3.0);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let c = ExperimentConfig::from_toml_str("[experiment]\ntrials = 5\n[rng]\nmaster_seed = 9\n").unwrap();
        assert_eq!(c.experiment.trials, 5);
        assert_eq!(c.experiment.iterations, 10);
        assert_eq!(c.rng.master_seed, 9);
        assert_eq!(c.scenario, ScenarioSpec::baseline());
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::preset(Preset::Reduced);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::from_toml_str("[experiment]\ntrails = 5\n").unwrap_err();
        assert_eq!(err.class(), "config");
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.experiment.trials = 0;
        assert!(c.validate().is_err());
        assert!("huge".parse::<Preset>().is_err());
    }
}
