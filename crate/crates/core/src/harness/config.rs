use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mitigation::BASES_PER_ITERATION;
use crate::sampling::ShotScale;
use crate::spsa::SpsaConfig;

/// Analytic probabilities or Poisson-sampled counts at a given scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotMode {
    Exact,
    Sampled(ShotScale),
}

impl Default for ShotMode {
    fn default() -> Self {
        ShotMode::Sampled(ShotScale::default())
    }
}

impl Serialize for ShotMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ShotMode::Exact => s.serialize_str("exact"),
            ShotMode::Sampled(scale) => s.serialize_f64(scale.get()),
        }
    }
}

impl<'de> Deserialize<'de> for ShotMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Float(f64),
            Int(i64),
        }
        let scale = match Raw::deserialize(d)? {
            Raw::Text(t) if t == "exact" => return Ok(ShotMode::Exact),
            Raw::Text(t) => {
                return Err(serde::de::Error::custom(format!(
                    "expected \"exact\" or a number, got {t:?}"
                )))
            }
            Raw::Float(f) => f,
            Raw::Int(i) => i as f64,
        };
        ShotScale::new(scale)
            .map(ShotMode::Sampled)
            .map_err(serde::de::Error::custom)
    }
}

/// A scalar or a list of mass parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassValues {
    One(f64),
    Many(Vec<f64>),
}

impl MassValues {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            MassValues::One(m) => vec![*m],
            MassValues::Many(ms) => ms.clone(),
        }
    }
}

/// Everything an experiment needs. Loaded from a flat TOML file whose keys
/// are these field names; CLI flags override individual values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Mass parameter(s). `None` lets each command pick its default.
    pub m: Option<MassValues>,
    /// `(ε₁, ε₂)` for single runs, sweeps over m and the deferred heatmap.
    pub epsilon_levels: [f64; 2],
    /// ε₁ grid for the noise sweep; ε₂ = ratio · ε₁.
    pub epsilon_grid: Vec<f64>,
    pub ratio: f64,
    pub shot_scale: ShotMode,
    /// Unmitigated iterations before mitigation starts.
    pub k0: usize,
    /// Mitigated iterations. The unmitigated strategy in the sweeps runs
    /// `k0 + k1` plain iterations instead.
    pub k1: usize,
    pub runs: usize,
    pub master_seed: Option<u64>,
    pub output: PathBuf,
    /// Measurement budgets N for the deferred heatmap.
    pub budget_grid: Vec<usize>,
    /// Deferral points k₀ for the deferred heatmap.
    pub k0_grid: Vec<usize>,
    /// Number of HWP angles in `[0, 45°]` for the HOM scan.
    pub theta_points: usize,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub spsa_alpha: f64,
    pub spsa_gamma: f64,
    pub spsa_stability: f64,
}

pub const DEFAULT_M: f64 = -10.0;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let spsa = SpsaConfig::for_iterations(200);
        let n = BASES_PER_ITERATION;
        Self {
            m: None,
            epsilon_levels: [0.18, 0.29],
            epsilon_grid: vec![
                0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6,
            ],
            ratio: 1.61,
            shot_scale: ShotMode::default(),
            k0: 80,
            k1: 120,
            runs: 100,
            master_seed: None,
            output: PathBuf::from("results"),
            budget_grid: (1..=20).map(|j| 2 * n * j).collect(),
            k0_grid: (0..=30).collect(),
            theta_points: 100,
            spsa_a: spsa.a,
            spsa_c: spsa.c,
            spsa_alpha: spsa.alpha,
            spsa_gamma: spsa.gamma,
            spsa_stability: spsa.stability,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn masses_or(&self, default: &[f64]) -> Vec<f64> {
        self.m
            .as_ref()
            .map_or_else(|| default.to_vec(), MassValues::to_vec)
    }

    pub fn mass(&self) -> Result<f64> {
        let ms = self.masses_or(&[DEFAULT_M]);
        match ms.as_slice() {
            [m] => Ok(*m),
            _ => Err(Error::Config("this command takes a single m".into())),
        }
    }

    /// SPSA settings for a stage of `iterations` steps; the stability
    /// offset stays fixed so stages of any length share one gain law.
    pub fn spsa(&self, iterations: usize) -> SpsaConfig {
        SpsaConfig {
            a: self.spsa_a,
            c: self.spsa_c,
            alpha: self.spsa_alpha,
            gamma: self.spsa_gamma,
            stability: self.spsa_stability,
            max_iterations: iterations,
            periodic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.k0 + self.k1 == 0 {
            return Err(Error::Config("k0 + k1 must be at least 1".into()));
        }
        let [e1, e2] = self.epsilon_levels;
        check_levels(e1, e2)?;
        if !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(Error::Config(format!(
                "ratio must exceed 1, got {}",
                self.ratio
            )));
        }
        if self.epsilon_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Config(
                "epsilon_grid values must lie in [0, 1]".into(),
            ));
        }
        if let Some(ms) = &self.m {
            let ms = ms.to_vec();
            if ms.is_empty() || ms.iter().any(|m| !m.is_finite()) {
                return Err(Error::Config("m must be finite and non-empty".into()));
            }
        }
        self.spsa(1).validate()
    }
}

/// `0 ≤ ε₁ < ε₂ ≤ 1`. A zero ε₁ is allowed: extrapolating from an already
/// noise-free point returns that point.
pub fn check_levels(eps1: f64, eps2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps1) || !(0.0..=1.0).contains(&eps2) || eps1 >= eps2 {
        return Err(Error::Config(format!(
            "noise levels must satisfy 0 <= eps1 < eps2 <= 1, got ({eps1}, {eps2})"
        )));
    }
    Ok(())
}
