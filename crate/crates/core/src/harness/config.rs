use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamic::DynamicConfig;
use crate::error::{Error, Result};
use crate::estimators::{GroupTimeSpec, RegressionSpec};
use crate::model::{HouseholdConfig, SweepAxes};
use crate::panel::{DgpMode, DgpSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Sweep,
    Simulate,
    Estimate,
    Montecarlo,
}

impl Pipeline {
    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::Sweep => "sweep",
            Pipeline::Simulate => "simulate",
            Pipeline::Estimate => "estimate",
            Pipeline::Montecarlo => "montecarlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub axes: SweepAxes,
    #[serde(default = "default_points")]
    pub wealth_points: usize,
    #[serde(default = "default_points")]
    pub wage_points: usize,
}

fn default_points() -> usize {
    11
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            axes: SweepAxes::default(),
            wealth_points: default_points(),
            wage_points: default_points(),
        }
    }
}

/// Options for the `estimate` pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimateOptions {
    /// Also fit every estimator separately on men and on women.
    #[serde(default)]
    pub stratify_by_gender: bool,
    /// Cap weekly hours at this percentile before fitting.
    #[serde(default)]
    pub winsorize_hours: Option<f64>,
}

/// One named estimator; exactly one of `regression` and `group_time` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub name: String,
    #[serde(default)]
    pub regression: Option<RegressionSpec>,
    #[serde(default)]
    pub group_time: Option<GroupTimeSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind<'a> {
    Regression(&'a RegressionSpec),
    GroupTime(&'a GroupTimeSpec),
}

impl EstimatorConfig {
    pub fn regression(name: &str, spec: RegressionSpec) -> Self {
        EstimatorConfig {
            name: name.to_string(),
            regression: Some(spec),
            group_time: None,
        }
    }

    pub fn group_time(name: &str, spec: GroupTimeSpec) -> Self {
        EstimatorConfig {
            name: name.to_string(),
            regression: None,
            group_time: Some(spec),
        }
    }

    pub fn kind(&self) -> EstimatorKind<'_> {
        match (&self.regression, &self.group_time) {
            (Some(r), None) => EstimatorKind::Regression(r),
            (None, Some(g)) => EstimatorKind::GroupTime(g),
            _ => unreachable!("validated"),
        }
    }
}

/// A complete pipeline description, normally read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    #[serde(default)]
    pub pipeline: Option<Pipeline>,
    /// Base seed; required (there is no clock-based default).
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    /// Panel CSV for `estimate`; relative paths resolve against the config
    /// file's directory.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub model: Option<HouseholdConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub dynamic: Option<DynamicConfig>,
    #[serde(default)]
    pub dgp: Option<DgpSpec>,
    #[serde(default)]
    pub estimate: EstimateOptions,
    #[serde(default, rename = "estimator")]
    pub estimators: Vec<EstimatorConfig>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Re-labels parameter errors with the config section they came from.
pub(crate) fn in_section<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            Error::config(format!("{section}.{name}"), reason)
        }
        other => other,
    })
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| format!("{origin}:{}", line_of(text, s.start)))
                .unwrap_or(origin.to_string());
            Error::config(at, e.message().trim().to_string())
        })
    }

    /// Reads a TOML file and resolves `input` relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(
                path.display().to_string(),
                format!("cannot read config: {e}"),
            )
        })?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        if let (Some(input), Some(dir)) = (&cfg.input, path.parent()) {
            if input.is_relative() {
                cfg.input = Some(dir.join(input));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::config(
                "seed",
                "a base seed is required (set `seed` or pass --seed)",
            )
        })
    }

    /// Checks that the sections `pipeline` needs are present and valid.
    pub fn validate(&self, pipeline: Pipeline) -> Result<()> {
        if let Some(p) = self.pipeline {
            if p != pipeline {
                return Err(Error::config(
                    "pipeline",
                    format!(
                        "config is for `{}` but `{}` was requested",
                        p.as_str(),
                        pipeline.as_str()
                    ),
                ));
            }
        }
        self.seed()?;
        if self.jobs == Some(0) {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        if let Some(m) = &self.model {
            in_section("model", m.build().map(|_| ()))?;
        }
        if let Some(d) = &self.dynamic {
            in_section("dynamic", d.build().map(|_| ()))?;
        }
        if let Some(d) = &self.dgp {
            in_section("dgp", d.validate())?;
            if d.mode == DgpMode::Structural {
                let horizon = self.dynamic.clone().unwrap_or_default().horizon;
                if horizon < d.n_waves {
                    return Err(Error::config(
                        "dynamic.horizon",
                        format!("structural panels need a horizon of at least n_waves = {}, got {horizon}", d.n_waves),
                    ));
                }
            }
        }
        match pipeline {
            Pipeline::Sweep => {
                let s = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| Error::config("sweep", "section is required"))?;
                if s.wealth_points == 0 || s.wage_points == 0 {
                    return Err(Error::config("sweep", "grids need at least one point"));
                }
            }
            Pipeline::Simulate => {
                self.dgp
                    .as_ref()
                    .ok_or_else(|| Error::config("dgp", "section is required"))?;
            }
            Pipeline::Estimate => {
                self.input
                    .as_ref()
                    .ok_or_else(|| Error::config("input", "a panel CSV path is required"))?;
                self.validate_estimators()?;
                if let Some(p) = self.estimate.winsorize_hours {
                    if !(p > 50.0 && p <= 100.0) {
                        return Err(Error::config(
                            "estimate.winsorize_hours",
                            "must lie in (50, 100]",
                        ));
                    }
                }
            }
            Pipeline::Montecarlo => {
                self.dgp
                    .as_ref()
                    .ok_or_else(|| Error::config("dgp", "section is required"))?;
                match self.replications {
                    Some(r) if r >= 1 => {}
                    _ => return Err(Error::config("replications", "must be at least 1")),
                }
                self.validate_estimators()?;
            }
        }
        Ok(())
    }

    fn validate_estimators(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::config(
                "estimator",
                "at least one [[estimator]] is required",
            ));
        }
        let mut seen = BTreeSet::new();
        for (k, e) in self.estimators.iter().enumerate() {
            let at = format!("estimator[{k}]");
            if e.name.is_empty()
                || !e
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::config(
                    format!("{at}.name"),
                    "use letters, digits, `_` or `-`",
                ));
            }
            if !seen.insert(e.name.as_str()) {
                return Err(Error::config(
                    format!("{at}.name"),
                    format!("duplicate estimator name `{}`", e.name),
                ));
            }
            if e.regression.is_some() == e.group_time.is_some() {
                return Err(Error::config(
                    at,
                    "set exactly one of `regression` and `group_time`",
                ));
            }
        }
        Ok(())
    }
}
