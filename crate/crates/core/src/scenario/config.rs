use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::FrameError;
use crate::frame::PowerLaw;
use crate::graded::WeightGrading;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Alternating diagonal weights.
    Exf1,
    /// Paired functionals over the shifted-power grading.
    Exf2,
    /// `ℓ^q ⊂ ℓ² ⊂ ℓ^p` chain.
    Runo,
    Custom,
}

impl ScenarioKind {
    pub fn id(&self) -> &'static str {
        match self {
            ScenarioKind::Exf1 => "exf1",
            ScenarioKind::Exf2 => "exf2",
            ScenarioKind::Runo => "runo",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exf1" => Ok(ScenarioKind::Exf1),
            "exf2" => Ok(ScenarioKind::Exf2),
            "runo" => Ok(ScenarioKind::Runo),
            "custom" => Ok(ScenarioKind::Custom),
            other => Err(format!("unknown scenario `{other}` (expected exf1, exf2, runo or custom)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunoConfig {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_prefixes")]
    pub prefixes: Vec<usize>,
}

fn default_p() -> f64 {
    1.5
}
fn default_q() -> f64 {
    3.0
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_prefixes() -> Vec<usize> {
    vec![10, 100, 1_000, 10_000]
}

impl Default for RunoConfig {
    fn default() -> Self {
        Self { p: default_p(), q: default_q(), epsilon: default_epsilon(), prefixes: default_prefixes() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomFrame {
    /// `b_j` from periodic power laws.
    Diagonal { weights: Vec<PowerLaw> },
    Block { weights: Vec<PowerLaw> },
    /// Rows are functionals; the column count fixes the truncation.
    Dense { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GradingSpec {
    #[default]
    Power,
    ShiftedPower { factor: u32 },
    LogExponential,
    Exponential { alpha: Vec<f64> },
}

impl GradingSpec {
    pub fn build(&self, levels: usize, truncation: usize) -> crate::Result<WeightGrading> {
        match self {
            GradingSpec::Power => WeightGrading::power(levels, truncation),
            GradingSpec::ShiftedPower { factor } => WeightGrading::shifted_power(*factor, levels, truncation),
            GradingSpec::LogExponential => WeightGrading::log_exponential(levels, truncation),
            GradingSpec::Exponential { alpha } => WeightGrading::exponential(alpha.clone(), levels, truncation),
        }
    }
}

/// `s_k = k`, `s̃_k = k + shift`, constant `A, B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    #[serde(default)]
    pub shift: usize,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PlanSpec {
    fn default() -> Self {
        Self { shift: 0, a: 1.0, b: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    /// `f_i = e_i / b_i` (diagonal) or `f_{2j} = e_j / b_pair(j)` (block).
    Canonical,
    /// Least-squares left inverse.
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    pub frame: CustomFrame,
    #[serde(default)]
    pub x: GradingSpec,
    #[serde(default)]
    pub theta: GradingSpec,
    #[serde(default)]
    pub plan: PlanSpec,
    #[serde(default)]
    pub source: Option<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// A scenario run. Output settings are not part of the echo or hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default = "default_r")]
    pub r: u32,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub runo: RunoConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomConfig>,
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

fn default_r() -> u32 {
    2
}
fn default_truncation() -> usize {
    4096
}
fn default_levels() -> usize {
    8
}
fn default_n_max() -> usize {
    32
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            r: default_r(),
            truncation: default_truncation(),
            levels: default_levels(),
            n_max: default_n_max(),
            runo: RunoConfig::default(),
            custom: None,
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.truncation < 16 {
            return Err(invalid("truncation", format!("must be at least 16, got {}", self.truncation)));
        }
        if self.levels < 2 {
            return Err(invalid("levels", format!("must be at least 2, got {}", self.levels)));
        }
        if self.r < 1 {
            return Err(invalid("r", "must be at least 1"));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        if self.scenario == ScenarioKind::Runo {
            let RunoConfig { p, q, epsilon, ref prefixes } = self.runo;
            if !(p > 1.0 && p < 2.0) {
                return Err(invalid("runo.p", format!("need 1 < p < 2, got {p}")));
            }
            if !(q > 2.0 && q.is_finite()) {
                return Err(invalid("runo.q", format!("need 2 < q < ∞, got {q}")));
            }
            if !(epsilon > 0.0 && p + epsilon < 2.0) {
                return Err(invalid("runo.epsilon", format!("need 0 < ε < 2 − p, got {epsilon}")));
            }
            if prefixes.is_empty() || prefixes.contains(&0) {
                return Err(invalid("runo.prefixes", "need nonempty positive prefix lengths"));
            }
        }
        if self.scenario == ScenarioKind::Custom {
            let custom = self.custom.as_ref().ok_or_else(|| invalid("custom", "section required for scenario = custom"))?;
            match &custom.frame {
                CustomFrame::Diagonal { weights } | CustomFrame::Block { weights } if weights.is_empty() => {
                    return Err(invalid("custom.frame.weights", "need at least one class"));
                }
                CustomFrame::Dense { matrix } => {
                    let cols = matrix.first().map_or(0, Vec::len);
                    if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
                        return Err(invalid("custom.frame.matrix", "rows must be nonempty and of equal length"));
                    }
                }
                _ => {}
            }
            let PlanSpec { a, b, .. } = custom.plan;
            if !(a > 0.0 && a <= b && b.is_finite()) {
                return Err(invalid("custom.plan", format!("need 0 < a ≤ b, got a={a}, b={b}")));
            }
        }
        Ok(())
    }

    /// Canonical JSON echo of the scenario-defining fields.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`echo`](Self::echo), hex encoded.
    pub fn hash(&self) -> String {
        hash_echo(&self.echo())
    }
}

pub fn hash_echo(echo: &str) -> String {
    Sha256::digest(echo.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
