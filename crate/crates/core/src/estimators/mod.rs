//! Staggered difference-in-differences estimators: two-way fixed effects,
//! event study, interacted heterogeneity, group-time ATT, plus the Wald ratio
//! and winsorization utilities.

mod design;
mod group_time;
mod ols;
mod ratio;
mod within;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

pub use group_time::{
    fit_group_time, Aggregate, ControlGroup, GroupTimeATT, GroupTimeCell, GroupTimeSpec, Inference,
};
pub use ratio::{wald_ratio, winsorize, winsorize_hours, WaldRatio};

use crate::error::{Error, Result};
use crate::panel::{Column, Gender, Panel, PanelObservation};

/// Rows entering an estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SampleFilter {
    pub gender: Option<Gender>,
    /// Inclusive wave range.
    pub waves: Option<(i64, i64)>,
}

impl SampleFilter {
    pub fn keeps(&self, r: &PanelObservation) -> bool {
        self.gender.is_none_or(|g| r.gender == g)
            && self
                .waves
                .is_none_or(|(lo, hi)| r.wave >= lo && r.wave <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClusterBy {
    #[default]
    Id,
    Wave,
}

/// Where an individual-level moderator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "column", rename_all = "snake_case")]
pub enum ModeratorSource {
    /// Column that must already be constant within each id.
    Column(Column),
    /// Within-id average of a possibly time-varying column.
    IdMean(Column),
}

impl ModeratorSource {
    pub fn column(self) -> Column {
        match self {
            ModeratorSource::Column(c) | ModeratorSource::IdMean(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeratorForm {
    /// `1{m > median}` over individuals.
    #[default]
    AboveMedianIndicator,
    /// `m - median` over individuals.
    CenteredAtMedian,
    /// `m` as is.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreatmentTerms {
    /// Single `d_it` regressor.
    Static,
    /// Event-time dummies `event_q` for `q` in `lower..=upper` (step
    /// `period_years`), endpoints pooled, `q = -2` omitted.
    EventTime {
        #[serde(default = "default_lower")]
        lower: i64,
        #[serde(default = "default_upper")]
        upper: i64,
        #[serde(default = "default_period")]
        period_years: i64,
    },
    /// `d_it` and `d_it × moderator`.
    Interacted {
        source: ModeratorSource,
        #[serde(default)]
        form: ModeratorForm,
    },
}

fn default_lower() -> i64 {
    -8
}
fn default_upper() -> i64 {
    8
}
fn default_period() -> i64 {
    2
}

impl TreatmentTerms {
    pub fn event_time() -> Self {
        TreatmentTerms::EventTime {
            lower: default_lower(),
            upper: default_upper(),
            period_years: default_period(),
        }
    }
}

/// `y = treatment terms + Z'β + wave FE + id FE + ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSpec {
    pub outcome: Column,
    pub treatment: TreatmentTerms,
    #[serde(default)]
    pub covariates: Vec<Column>,
    #[serde(default)]
    pub cluster: ClusterBy,
    #[serde(default)]
    pub filter: SampleFilter,
}

impl RegressionSpec {
    pub fn new(outcome: Column, treatment: TreatmentTerms) -> Self {
        RegressionSpec {
            outcome,
            treatment,
            covariates: Vec::new(),
            cluster: ClusterBy::Id,
            filter: SampleFilter::default(),
        }
    }

    pub fn with_covariates(mut self, covariates: Vec<Column>) -> Self {
        self.covariates = covariates;
        self
    }

    pub fn with_filter(mut self, filter: SampleFilter) -> Self {
        self.filter = filter;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    /// Undefined when the standard error is zero.
    pub t: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DropReason {
    /// The regressor is zero on every sample row (e.g. an event-time bin
    /// with no observations).
    EmptyCell,
    /// Linearly dependent on earlier regressors or the fixed effects.
    Collinear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    /// Cluster-robust covariance over the retained coefficients.
    pub covariance: DMatrix<f64>,
    pub n_obs: usize,
    pub n_clusters: usize,
    /// Individuals observed once; kept, they carry no within variation.
    pub n_singletons: usize,
    pub dropped: Vec<DroppedColumn>,
    pub r2_within: f64,
    /// Parameters counted in the small-sample correction.
    pub k: usize,
    /// Outcome has no within variation; estimates and SEs are zero.
    pub degenerate: bool,
}

/// `F` statistic `W / q` with its degrees of freedom and p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTest {
    pub statistic: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
}

impl RegressionResult {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.coef(name).map(|c| c.estimate)
    }

    /// Joint cluster-robust Wald test that the named coefficients are all
    /// zero, referred to `F(q, G - 1)`. Terms that were dropped are skipped;
    /// `None` when no named term was estimated or the covariance block is
    /// singular.
    pub fn wald_test(&self, terms: &[&str]) -> Option<WaldTest> {
        let idx: Vec<usize> = terms
            .iter()
            .filter_map(|t| self.coefficients.iter().position(|c| c.name == *t))
            .collect();
        let q = idx.len();
        if q == 0 || self.n_clusters < 2 {
            return None;
        }
        let b = DVector::from_iterator(q, idx.iter().map(|&i| self.coefficients[i].estimate));
        let v = DMatrix::from_fn(q, q, |r, c| self.covariance[(idx[r], idx[c])]);
        let chol = v.cholesky()?;
        let statistic = b.dot(&chol.solve(&b)) / q as f64;
        let df2 = (self.n_clusters - 1) as f64;
        let f = FisherSnedecor::new(q as f64, df2).ok()?;
        Some(WaldTest {
            statistic,
            df1: q,
            df2: self.n_clusters - 1,
            p: f.sf(statistic),
        })
    }

    /// Joint test of every pre-treatment event-time coefficient.
    pub fn pre_trend_test(&self) -> Option<WaldTest> {
        let pre: Vec<&str> = self
            .coefficients
            .iter()
            .filter(|c| {
                c.name
                    .strip_prefix("event_")
                    .and_then(|q| q.parse::<i64>().ok())
                    .is_some_and(|q| q < 0)
            })
            .map(|c| c.name.as_str())
            .collect();
        self.wald_test(&pre)
    }

    /// CSV `term,estimate,se,t,p,n_obs,n_clusters`; dropped terms appear
    /// with empty numeric fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term", "estimate", "se", "t", "p", "n_obs", "n_clusters"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.coefficients {
            w.write_record([
                c.name.clone(),
                c.estimate.to_string(),
                c.se.to_string(),
                opt(c.t),
                opt(c.p),
                self.n_obs.to_string(),
                self.n_clusters.to_string(),
            ])?;
        }
        for d in &self.dropped {
            w.write_record([
                d.name.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                self.n_obs.to_string(),
                self.n_clusters.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Static staggered DiD with individual and wave fixed effects.
pub fn fit_twfe(panel: &Panel, spec: &RegressionSpec) -> Result<RegressionResult> {
    let spec = RegressionSpec {
        treatment: TreatmentTerms::Static,
        ..spec.clone()
    };
    fit(panel, &spec)
}

/// Event study with binned endpoints and the `-2` reference omitted.
pub fn fit_event_study(panel: &Panel, spec: &RegressionSpec) -> Result<RegressionResult> {
    if !matches!(spec.treatment, TreatmentTerms::EventTime { .. }) {
        return Err(Error::param(
            "treatment",
            "event study requires event-time terms",
        ));
    }
    fit(panel, spec)
}

/// Treatment main effect plus its interaction with an individual-level
/// moderator.
pub fn fit_interacted(panel: &Panel, spec: &RegressionSpec) -> Result<RegressionResult> {
    if !matches!(spec.treatment, TreatmentTerms::Interacted { .. }) {
        return Err(Error::param(
            "treatment",
            "interacted fit requires a moderator",
        ));
    }
    fit(panel, spec)
}

/// Dispatches on `spec.treatment`.
pub fn fit(panel: &Panel, spec: &RegressionSpec) -> Result<RegressionResult> {
    let d = design::build(panel, spec)?;
    ols::estimate(d)
}

/// Index of `wave` among the sorted distinct waves: the count of waves
/// strictly below it.
pub(crate) fn wave_rank(waves: &[i64], wave: i64) -> usize {
    waves.partition_point(|&w| w < wave)
}

#[cfg(test)]
mod tests;
