//! Suite configuration: a JSON document whose every field has an embedded
//! default, so `SuiteConfig::default()` reproduces the stock runs.

use std::collections::BTreeMap;
use std::path::Path;

use minstab::geodesic::{GeodesicSpec, SecondFactor};
use minstab::variation::ClassifierCase;
use minstab::{FactorModel, ProductSpace, ProjectiveKind, ProjectiveModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Model(#[from] minstab::Error),
}

/// Named tolerances. Every entry must be positive and finite.
pub const TOLERANCE_NAMES: [&str; 12] = [
    "identity_relative",
    "sign",
    "equality",
    "violation_margin",
    "violation_q",
    "structure",
    "collapse",
    "lambda_min",
    "spectrum_floor",
    "holonomy",
    "symmetry",
    "richardson_factor",
];

fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("identity_relative", 1e-9),
        ("sign", 1e-11),
        ("equality", 1e-10),
        ("violation_margin", 1e-2),
        ("violation_q", 1e-6),
        ("structure", 1e-9),
        ("collapse", 1e-8),
        ("lambda_min", 1e-2),
        ("spectrum_floor", 1e-6),
        ("holonomy", 1e-9),
        ("symmetry", 1e-12),
        ("richardson_factor", 1.5),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Complex,
    Quaternionic,
}

impl From<Kind> for ProjectiveKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Complex => ProjectiveKind::Complex,
            Kind::Quaternionic => ProjectiveKind::Quaternionic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstFactorConfig {
    pub kind: Kind,
    pub dim: usize,
    /// Replaces `λ²` in the second fundamental form and the closed forms
    /// while the curvature keeps its own normalisation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_squared_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SecondFactorConfig {
    Flat { dim: usize },
    Sphere { dim: usize, radius: f64 },
    Complex { dim: usize },
    Quaternionic { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub factor1: FirstFactorConfig,
    pub factor2: SecondFactorConfig,
}

impl SpaceConfig {
    pub fn build(&self) -> Result<ProductSpace, ConfigError> {
        let mut first = ProjectiveModel::new(self.factor1.kind.into(), self.factor1.dim)?;
        if let Some(l) = self.factor1.lambda_squared_override {
            if !(l.is_finite() && l > 0.0) {
                return Err(ConfigError::Invalid(format!("lambda_squared_override must be positive, got {l}")));
            }
            first = first.with_lambda_squared_override(l);
        }
        let second = match self.factor2 {
            SecondFactorConfig::Flat { dim } => FactorModel::flat(dim)?,
            SecondFactorConfig::Sphere { dim, radius } => FactorModel::sphere(dim, radius)?,
            SecondFactorConfig::Complex { dim } => FactorModel::Projective(ProjectiveModel::complex(dim)?),
            SecondFactorConfig::Quaternionic { dim } => {
                FactorModel::Projective(ProjectiveModel::quaternionic(dim)?)
            }
        };
        Ok(ProductSpace::new(first, second))
    }

    /// Short label such as `CP(4)xFlat(2)`.
    pub fn label(&self) -> String {
        let first = match self.factor1.kind {
            Kind::Complex => "CP",
            Kind::Quaternionic => "HP",
        };
        let second = match self.factor2 {
            SecondFactorConfig::Flat { dim } => format!("Flat({dim})"),
            SecondFactorConfig::Sphere { dim, radius } => format!("S({dim},{radius})"),
            SecondFactorConfig::Complex { dim } => format!("CP({dim})"),
            SecondFactorConfig::Quaternionic { dim } => format!("HP({dim})"),
        };
        let lambda = self
            .factor1
            .lambda_squared_override
            .map(|l| format!("[lambda2={l}]"))
            .unwrap_or_default();
        format!("{first}({}){lambda}x{second}", self.factor1.dim)
    }

    pub fn new(kind: Kind, dim: usize, factor2: SecondFactorConfig) -> Self {
        Self {
            factor1: FirstFactorConfig {
                kind,
                dim,
                lambda_squared_override: None,
            },
            factor2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SecondFactorSpec {
    Circle { circumference: f64 },
    Sphere { dim: usize, radius: f64 },
}

impl From<&SecondFactorSpec> for SecondFactor {
    fn from(s: &SecondFactorSpec) -> Self {
        match *s {
            SecondFactorSpec::Circle { circumference } => SecondFactor::Circle { circumference },
            SecondFactorSpec::Sphere { dim, radius } => SecondFactor::Sphere { dim, radius },
        }
    }
}

/// Either winding numbers or explicit speeds and length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Closure {
    Windings { p: u32, q: u32 },
    Explicit { speeds: (f64, f64), length: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub second: SecondFactorSpec,
    #[serde(flatten)]
    pub closure: Closure,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Expected Morse index; when absent the stability classification
    /// prediction is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_index: Option<usize>,
}

fn default_nodes() -> usize {
    256
}

impl GeodesicConfig {
    pub fn build(&self) -> Result<GeodesicSpec, ConfigError> {
        let second = SecondFactor::from(&self.second);
        let spec = match self.closure {
            Closure::Windings { p, q } => GeodesicSpec::from_windings(second, p, q)?,
            Closure::Explicit { speeds, length } => GeodesicSpec::new(second, speeds, length)?,
        };
        if self.nodes < minstab::geodesic::MIN_NODES {
            return Err(ConfigError::Invalid(format!(
                "geodesic nodes must be at least {}, got {}",
                minstab::geodesic::MIN_NODES,
                self.nodes
            )));
        }
        Ok(spec)
    }

    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let second = match self.second {
            SecondFactorSpec::Circle { circumference } => format!("S1(c={circumference})"),
            SecondFactorSpec::Sphere { dim, radius } => format!("S({dim},{radius})"),
        };
        match self.closure {
            Closure::Windings { p, q } => format!("CP(2)x{second} windings ({p},{q})"),
            Closure::Explicit { speeds, length } => {
                format!("CP(2)x{second} a={} b={} L={length}", speeds.0, speeds.1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub spaces: Vec<SpaceConfig>,
    pub cases: Vec<ClassifierCase>,
    /// Node count for the three canonical geodesics.
    pub canonical_nodes: usize,
    pub geodesics: Vec<GeodesicConfig>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        use Kind::*;
        use SecondFactorConfig as F;
        Self {
            seed: 42,
            samples: 2000,
            tolerances: default_tolerances(),
            spaces: vec![
                SpaceConfig::new(Complex, 2, F::Flat { dim: 1 }),
                SpaceConfig::new(Complex, 4, F::Flat { dim: 2 }),
                SpaceConfig::new(Complex, 6, F::Flat { dim: 1 }),
                SpaceConfig::new(Complex, 6, F::Flat { dim: 2 }),
                SpaceConfig::new(Complex, 4, F::Sphere { dim: 2, radius: 1.5 }),
                SpaceConfig::new(Complex, 2, F::Complex { dim: 2 }),
                SpaceConfig::new(Complex, 4, F::Complex { dim: 2 }),
                SpaceConfig::new(Quaternionic, 4, F::Flat { dim: 2 }),
                SpaceConfig::new(Quaternionic, 8, F::Flat { dim: 1 }),
                SpaceConfig::new(Quaternionic, 4, F::Sphere { dim: 3, radius: 0.8 }),
            ],
            cases: ClassifierCase::ALL.to_vec(),
            canonical_nodes: 256,
            geodesics: vec![
                GeodesicConfig {
                    label: None,
                    second: SecondFactorSpec::Sphere { dim: 2, radius: 1.0 },
                    closure: Closure::Windings { p: 0, q: 1 },
                    nodes: 128,
                    expect_index: Some(1),
                },
                GeodesicConfig {
                    label: None,
                    second: SecondFactorSpec::Circle { circumference: 3.0 },
                    closure: Closure::Windings { p: 1, q: 2 },
                    nodes: 192,
                    expect_index: None,
                },
            ],
        }
    }
}

impl SuiteConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Parses a (possibly partial) config; missing fields take defaults and
    /// given tolerances override the default map entry by entry.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let mut config: Self = serde_json::from_str(text)?;
        let mut tolerances = default_tolerances();
        tolerances.extend(std::mem::take(&mut config.tolerances));
        config.tolerances = tolerances;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be at least 1".into()));
        }
        for (name, value) in &self.tolerances {
            if !TOLERANCE_NAMES.contains(&name.as_str()) {
                return Err(ConfigError::Invalid(format!("unknown tolerance {name:?}")));
            }
            if !(value.is_finite() && *value > 0.0) {
                return Err(ConfigError::Invalid(format!("tolerance {name} must be positive, got {value}")));
            }
        }
        for name in TOLERANCE_NAMES {
            if !self.tolerances.contains_key(name) {
                return Err(ConfigError::Invalid(format!("missing tolerance {name}")));
            }
        }
        for s in &self.spaces {
            s.build()?;
        }
        if self.canonical_nodes < minstab::geodesic::MIN_NODES {
            return Err(ConfigError::Invalid(format!(
                "canonical_nodes must be at least {}",
                minstab::geodesic::MIN_NODES
            )));
        }
        for g in &self.geodesics {
            g.build()?;
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Built spaces paired with their labels.
    pub fn built_spaces(&self) -> Result<Vec<(String, ProductSpace)>, ConfigError> {
        self.spaces.iter().map(|s| Ok((s.label(), s.build()?))).collect()
    }

    pub fn require_cases(&self) -> Result<(), ConfigError> {
        if self.cases.is_empty() {
            Err(ConfigError::Invalid("case list is empty".into()))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = SuiteConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(SuiteConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c = SuiteConfig::from_json(r#"{"seed": 7, "tolerances": {"sign": 1e-10}}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.tolerance("sign"), 1e-10);
        assert_eq!(c.tolerance("equality"), 1e-10);
        assert_eq!(c.spaces, SuiteConfig::default().spaces);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            r#"{"samples": 0}"#,
            r#"{"tolerances": {"sign": -1}}"#,
            r#"{"tolerances": {"bogus": 1}}"#,
            r#"{"spaces": [{"factor1": {"kind": "complex", "dim": 3}, "factor2": {"kind": "flat", "dim": 1}}]}"#,
            r#"{"geodesics": [{"second": {"kind": "circle", "circumference": 6.283185307179586}, "speeds": [0.6, 0.8], "length": 5.0}]}"#,
            r#"{"unknown": 1}"#,
        ] {
            assert!(SuiteConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn labels() {
        let s = &SuiteConfig::default().spaces[4];
        assert_eq!(s.label(), "CP(4)xS(2,1.5)");
    }
}
