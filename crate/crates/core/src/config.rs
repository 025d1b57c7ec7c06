//! Experiment configuration files.
//!
//! ```toml
//! [system]
//! ar = [0.999]
//! ma = [1.0, 1.0]
//! edge_override = false
//!
//! [noise]
//! innovation = "rademacher"
//! initial = "stationary"
//! seed = 42
//!
//! [study]
//! t_grid = [16, 32, 64]
//! replicates = 20000
//! case = "auto"
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lti::{ArmaSpec, StabilityPolicy};
use crate::noise::{InitialCondition, InnovationDistribution, InputProcess, VarianceSchedule};
use crate::stein::{AlphaMode, BoundCase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub ar: Vec<f64>,
    #[serde(default = "default_ma")]
    pub ma: Vec<f64>,
    /// Accept poles on the unit circle.
    #[serde(default)]
    pub edge_override: bool,
}

fn default_ma() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSection {
    #[serde(flatten)]
    pub distribution: InnovationDistribution,
    #[serde(default)]
    pub variance_schedule: VarianceSchedule,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub seed: u64,
}

/// Which assembled bound a study reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseSelection {
    /// From the input's correlation class.
    #[default]
    Auto,
    Independent,
    Poscorr,
    Decay,
    /// Only the Stein bound with exact moments.
    None,
}

impl CaseSelection {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(CaseSelection::Auto),
            "independent" => Ok(CaseSelection::Independent),
            "poscorr" | "positively_correlated" => Ok(CaseSelection::Poscorr),
            "decay" => Ok(CaseSelection::Decay),
            "none" => Ok(CaseSelection::None),
            other => Err(Error::InvalidSpec(format!(
                "unknown case '{other}' (auto|independent|poscorr|decay|none)"
            ))),
        }
    }

    /// The bound case, resolving `Auto` through the class of `process` at horizon `t`.
    pub fn resolve(self, process: &InputProcess, t: usize) -> Result<Option<BoundCase>> {
        Ok(match self {
            CaseSelection::Auto => BoundCase::for_class(process.statistics(t.max(1))?.profile.classify()),
            CaseSelection::Independent => Some(BoundCase::Independent),
            CaseSelection::Poscorr => Some(BoundCase::PositivelyCorrelated),
            CaseSelection::Decay => Some(BoundCase::Decay),
            CaseSelection::None => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default = "default_grid")]
    pub t_grid: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub case: CaseSelection,
    #[serde(default)]
    pub alpha_mode: AlphaMode,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_grid() -> Vec<usize> {
    vec![16, 32, 64, 128, 256, 512]
}

fn default_replicates() -> usize {
    10_000
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_bootstrap() -> usize {
    crate::wasserstein::BOOTSTRAP_RESAMPLES
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            t_grid: default_grid(),
            replicates: default_replicates(),
            case: CaseSelection::Auto,
            alpha_mode: AlphaMode::Literal,
            epsilon: default_epsilon(),
            bootstrap: default_bootstrap(),
        }
    }
}

/// A full experiment: system, noise and study settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub noise: NoiseSection,
    #[serde(default)]
    pub study: StudySection,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let config_err = |message: String| Error::Config { line: None, message };
        self.spec()?;
        self.process()?;
        let grid = &self.study.t_grid;
        if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("t_grid must be a strictly increasing list of positive integers".into()));
        }
        if self.study.replicates < 100 {
            return Err(config_err(format!(
                "replicates must be at least 100, got {}",
                self.study.replicates
            )));
        }
        if !(self.study.epsilon > 0.0 && self.study.epsilon.is_finite()) {
            return Err(config_err(format!("epsilon must be positive, got {}", self.study.epsilon)));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ArmaSpec> {
        ArmaSpec::new(self.system.ar.clone(), self.system.ma.clone())
    }

    pub fn process(&self) -> Result<InputProcess> {
        let schedule = VarianceSchedule::new(self.noise.variance_schedule.multipliers().to_vec())?;
        Ok(InputProcess::new(self.system.ma.clone(), self.noise.distribution.clone())?
            .with_schedule(schedule)
            .with_initial(self.noise.initial))
    }

    pub fn policy(&self) -> StabilityPolicy {
        if self.system.edge_override {
            StabilityPolicy::AllowEdge
        } else {
            StabilityPolicy::Strict
        }
    }

    pub fn max_t(&self) -> usize {
        self.study.t_grid.last().copied().unwrap_or(1)
    }

    /// SHA-256 of the canonical JSON form; covers every field.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
