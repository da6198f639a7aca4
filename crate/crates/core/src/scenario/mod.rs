//! Named verification scenarios and their JSON reports.

mod library;
mod report;

pub use report::{CheckRecord, Comparison, ConfigEcho, ReportDocument, SCHEMA_VERSION};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use crate::diff::DiffConfig;
use crate::error::Result;
use crate::sampling::sample_rng;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}` (try `list`)")]
    Unknown(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    /// Overrides the scenario's default sample count.
    pub samples: Option<usize>,
    /// Overrides every upper-bound tolerance of the scenario.
    pub tol: Option<f64>,
    pub params: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            seed: 7,
            samples: None,
            tol: None,
            params: BTreeMap::new(),
            output_path: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    fn validate(&self, info: &ScenarioInfo) -> std::result::Result<(), ScenarioError> {
        if self.samples == Some(0) {
            return Err(ScenarioError::Config("samples must be at least 1".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(ScenarioError::Config(format!("tol must be positive, got {tol}")));
            }
        }
        for (key, value) in &self.params {
            if !info.params.contains(&key.as_str()) {
                return Err(ScenarioError::Config(format!(
                    "scenario `{}` does not take parameter `{key}` (accepted: {})",
                    info.name,
                    if info.params.is_empty() { "none".to_string() } else { info.params.join(", ") }
                )));
            }
            if !value.is_finite() {
                return Err(ScenarioError::Config(format!("parameter `{key}` must be finite")));
            }
            library::check_param(key, *value).map_err(ScenarioError::Config)?;
        }
        Ok(())
    }
}

/// Resolved settings handed to a scenario body.
pub(crate) struct Ctx<'a> {
    pub seed: u64,
    pub samples: usize,
    tol: Option<f64>,
    params: &'a BTreeMap<String, f64>,
    pub cfg: DiffConfig,
}

impl Ctx<'_> {
    pub fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// Independent stream `index` of sub-experiment `tag`.
    pub fn rng(&self, tag: u32, index: usize) -> ChaCha8Rng {
        sample_rng(self.seed, (u64::from(tag) << 32) | index as u64)
    }

    pub fn sub_seed(&self, tag: u32) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(u64::from(tag))
    }
}

pub(crate) type ScenarioFn = fn(&Ctx) -> Result<Vec<CheckRecord>>;

#[derive(Clone, Copy)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub default_samples: usize,
    pub params: &'static [&'static str],
    run: ScenarioFn,
}

pub fn registry() -> &'static [ScenarioInfo] {
    library::REGISTRY
}

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    registry().iter().find(|s| s.name == name)
}

pub fn run_scenario(config: &ScenarioConfig) -> std::result::Result<ReportDocument, ScenarioError> {
    let info = find(&config.name).ok_or_else(|| ScenarioError::Unknown(config.name.clone()))?;
    config.validate(info)?;
    let samples = config.samples.unwrap_or(info.default_samples);
    let ctx = Ctx {
        seed: config.seed,
        samples,
        tol: config.tol,
        params: &config.params,
        cfg: DiffConfig::default(),
    };
    let start = Instant::now();
    let (checks, error) = match (info.run)(&ctx) {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(ReportDocument::new(
        info,
        ConfigEcho {
            seed: config.seed,
            samples,
            tol: config.tol,
            params: config.params.clone(),
        },
        checks,
        error,
        elapsed_ms,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_is_a_usage_error() {
        assert_eq!(
            run_scenario(&ScenarioConfig::new("no-such-thing")),
            Err(ScenarioError::Unknown("no-such-thing".into()))
        );
    }

    #[test]
    fn bad_configuration_is_rejected() {
        let cfg = ScenarioConfig::new("gauss-relation").with_samples(0);
        assert!(matches!(run_scenario(&cfg), Err(ScenarioError::Config(_))));
        let cfg = ScenarioConfig::new("gauss-relation").with_tol(-1.0);
        assert!(matches!(run_scenario(&cfg), Err(ScenarioError::Config(_))));
        let cfg = ScenarioConfig::new("gauss-relation").with_param("q", 1.0);
        assert!(matches!(run_scenario(&cfg), Err(ScenarioError::Config(_))));
    }

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<_> = registry().iter().map(|s| s.name).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
        assert_eq!(n, 11);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = ScenarioConfig::new("k-transfer").with_samples(5).with_seed(11);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        let strip = |r: &ReportDocument| serde_json::to_string(&r.checks).unwrap();
        assert_eq!(strip(&a), strip(&b));
        assert!(a.overall_pass);
    }

    #[test]
    fn tolerance_override_applies() {
        let cfg = ScenarioConfig::new("gauss-relation").with_samples(2).with_tol(1e-300);
        let r = run_scenario(&cfg).unwrap();
        assert!(!r.overall_pass);
        assert!(r.checks.iter().filter(|c| c.comparison == Comparison::AtMost).all(|c| c.tolerance == 1e-300));
    }
}
