//! Repeated generate-then-estimate experiments scored against the
//! generator's ground truth.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::config::{EstimatorKind, ExperimentConfig, Pipeline};
use super::{fit_estimator, EstimateOutput};
use crate::dynamic::{solve_bellman, DynamicParams, ValueFunction};
use crate::error::{Error, Result};
use crate::estimators::{GroupTimeSpec, Inference, ModeratorForm, RegressionSpec, TreatmentTerms};
use crate::numerics::{derive_seed, mean_sd};
use crate::panel::{
    generate_reduced_form, generate_structural, DgpMode, DgpSpec, EffectProfile, GroundTruth, Panel,
};

/// Pseudo-term reporting how often at least one pre-period event-time
/// coefficient rejects zero at the 5% level.
pub const PRE_TREND_ANY: &str = "pre_trend_any";
/// Pseudo-term for the joint F test of all pre-treatment coefficients; its
/// estimate column holds the mean F statistic.
pub const PRE_TREND_WALD: &str = "pre_trend_wald";

/// One estimator-term summary across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    pub estimator: String,
    pub term: String,
    /// Mean over replicates of the replicate-specific truth.
    pub truth: Option<f64>,
    pub mean_estimate: Option<f64>,
    pub mc_sd: Option<f64>,
    pub mean_se: Option<f64>,
    /// Share of nominal 95% intervals containing the truth.
    pub coverage: Option<f64>,
    /// `mean_estimate - truth`.
    pub bias: Option<f64>,
    /// Share of replicates rejecting zero at 5%.
    pub rejection_rate: Option<f64>,
    /// Replicates in which the term was estimated.
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub rows: Vec<MonteCarloRow>,
    pub replications: usize,
}

impl MonteCarloReport {
    pub fn row(&self, estimator: &str, term: &str) -> Option<&MonteCarloRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.term == term)
    }

    /// CSV `estimator,term,truth,mean_estimate,mc_sd,mean_se,coverage,bias,rejection_rate,replications`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let rows: Vec<MonteCarloRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let replications = rows.iter().map(|r| r.replications).max().unwrap_or(0);
        Ok(MonteCarloReport { rows, replications })
    }
}

/// A single estimate scored in one replicate.
#[derive(Debug, Clone, PartialEq)]
struct Scored {
    estimator: usize,
    term: String,
    estimate: Option<f64>,
    se: Option<f64>,
    truth: Option<f64>,
    /// Two-sided 95% critical value.
    critical: f64,
    reject: Option<bool>,
}

fn regression_truth(
    term: &str,
    spec: &RegressionSpec,
    dgp: &DgpSpec,
    truth: &GroundTruth,
) -> Option<f64> {
    if let Some(q) = term.strip_prefix("event_") {
        let q: i64 = q.parse().ok()?;
        let TreatmentTerms::EventTime { lower, upper, .. } = spec.treatment else {
            return None;
        };
        if q < 0 || q == lower {
            return Some(0.0);
        }
        return truth.binned(upper).get(&q).copied();
    }
    if term == "d_it" {
        if let TreatmentTerms::Interacted { source, form } = &spec.treatment {
            return match (&dgp.effect, form) {
                (
                    EffectProfile::Moderated {
                        below, moderator, ..
                    },
                    ModeratorForm::AboveMedianIndicator,
                ) if *moderator == source.column() => Some(*below),
                _ => None,
            };
        }
        return truth.overall;
    }
    if term.starts_with("d_it_x_") {
        if let (
            TreatmentTerms::Interacted { source, form },
            EffectProfile::Moderated {
                below,
                above,
                moderator,
            },
        ) = (&spec.treatment, &dgp.effect)
        {
            if *form == ModeratorForm::AboveMedianIndicator && *moderator == source.column() {
                return Some(above - below);
            }
        }
        return None;
    }
    truth.covariate_effects.get(term).copied()
}

fn score(
    k: usize,
    output: &EstimateOutput,
    kind: &EstimatorKind<'_>,
    dgp: &DgpSpec,
    truth: &GroundTruth,
) -> Result<Vec<Scored>> {
    let mut out = Vec::new();
    match (output, kind) {
        (EstimateOutput::Regression(r), EstimatorKind::Regression(spec)) => {
            let t = StudentsT::new(0.0, 1.0, r.n_clusters as f64 - 1.0)
                .map_err(|e| Error::Estimation(e.to_string()))?;
            let critical = t.inverse_cdf(0.975);
            let mut pre_any = false;
            let mut has_pre = false;
            for c in &r.coefficients {
                let reject = c.p.map(|p| p < 0.05);
                if let Some(q) = c
                    .name
                    .strip_prefix("event_")
                    .and_then(|q| q.parse::<i64>().ok())
                {
                    if q < 0 {
                        has_pre = true;
                        pre_any |= reject.unwrap_or(false);
                    }
                }
                out.push(Scored {
                    estimator: k,
                    term: c.name.clone(),
                    estimate: Some(c.estimate),
                    se: Some(c.se),
                    truth: regression_truth(&c.name, spec, dgp, truth),
                    critical,
                    reject,
                });
            }
            if has_pre {
                out.push(Scored {
                    estimator: k,
                    term: PRE_TREND_ANY.to_string(),
                    estimate: None,
                    se: None,
                    truth: None,
                    critical,
                    reject: Some(pre_any),
                });
                let joint = r.pre_trend_test();
                out.push(Scored {
                    estimator: k,
                    term: PRE_TREND_WALD.to_string(),
                    estimate: joint.map(|w| w.statistic),
                    se: None,
                    truth: None,
                    critical,
                    reject: joint.map(|w| w.p < 0.05),
                });
            }
        }
        (EstimateOutput::GroupTime(g), EstimatorKind::GroupTime(_)) => {
            let normal = Normal::standard();
            let critical = normal.inverse_cdf(0.975);
            let reject =
                |att: f64, se: f64| (se > 0.0).then(|| 2.0 * normal.sf((att / se).abs()) < 0.05);
            out.push(Scored {
                estimator: k,
                term: "overall".to_string(),
                estimate: Some(g.overall.att),
                se: Some(g.overall.se),
                truth: truth.overall,
                critical,
                reject: reject(g.overall.att, g.overall.se),
            });
            for a in &g.by_event_time {
                let e = a.event_time.expect("event-time aggregate");
                out.push(Scored {
                    estimator: k,
                    term: format!("event_{e}"),
                    estimate: Some(a.att),
                    se: Some(a.se),
                    truth: if e < 0 {
                        Some(0.0)
                    } else {
                        truth.by_event_time.get(&e).copied()
                    },
                    critical,
                    reject: reject(a.att, a.se),
                });
            }
        }
        _ => unreachable!("output matches its estimator kind"),
    }
    Ok(out)
}

#[derive(Default)]
struct Acc {
    estimates: Vec<f64>,
    ses: Vec<f64>,
    truths: Vec<f64>,
    covered: usize,
    scored: usize,
    rejected: usize,
    tested: usize,
    seen: usize,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn aggregate(cfg: &ExperimentConfig, replicates: Vec<Vec<Scored>>) -> MonteCarloReport {
    let n = replicates.len();
    // first-seen order per estimator keeps the report layout stable
    let mut keys: Vec<(usize, String)> = Vec::new();
    let mut accs: Vec<Acc> = Vec::new();
    for rep in replicates {
        for s in rep {
            let pos = match keys
                .iter()
                .position(|(e, t)| *e == s.estimator && *t == s.term)
            {
                Some(p) => p,
                None => {
                    keys.push((s.estimator, s.term.clone()));
                    accs.push(Acc::default());
                    keys.len() - 1
                }
            };
            let a = &mut accs[pos];
            a.seen += 1;
            if let Some(e) = s.estimate {
                a.estimates.push(e);
            }
            if let Some(se) = s.se {
                a.ses.push(se);
            }
            if let (Some(e), Some(se), Some(t)) = (s.estimate, s.se, s.truth) {
                a.truths.push(t);
                a.scored += 1;
                a.covered += ((e - t).abs() <= s.critical * se) as usize;
            }
            if let Some(r) = s.reject {
                a.tested += 1;
                a.rejected += r as usize;
            }
        }
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| keys[i].0);
    let rows = order
        .into_iter()
        .map(|i| {
            let a = &accs[i];
            let mean_estimate = mean(&a.estimates);
            let truth = mean(&a.truths);
            let bias = match (truth, a.scored == a.estimates.len()) {
                (Some(t), true) => mean_estimate.map(|m| m - t),
                _ => None,
            };
            MonteCarloRow {
                estimator: cfg.estimators[keys[i].0].name.clone(),
                term: keys[i].1.clone(),
                truth,
                mean_estimate,
                mc_sd: (a.estimates.len() >= 2).then(|| mean_sd(&a.estimates).1),
                mean_se: mean(&a.ses),
                coverage: (a.scored > 0).then(|| a.covered as f64 / a.scored as f64),
                bias,
                rejection_rate: (a.tested > 0).then(|| a.rejected as f64 / a.tested as f64),
                replications: a.seen,
            }
        })
        .collect();
    MonteCarloReport {
        rows,
        replications: n,
    }
}

enum Generator {
    ReducedForm,
    Structural(Box<(DynamicParams, ValueFunction)>),
}

impl Generator {
    fn new(cfg: &ExperimentConfig, dgp: &DgpSpec) -> Result<Self> {
        Ok(match dgp.mode {
            DgpMode::ReducedForm => Generator::ReducedForm,
            DgpMode::Structural => {
                let params = super::config::in_section(
                    "dynamic",
                    cfg.dynamic.clone().unwrap_or_default().build(),
                )?;
                let vf = solve_bellman(&params)?;
                Generator::Structural(Box::new((params, vf)))
            }
        })
    }

    fn generate(&self, spec: &DgpSpec) -> Result<(Panel, GroundTruth)> {
        match self {
            Generator::ReducedForm => generate_reduced_form(spec),
            Generator::Structural(pv) => generate_structural(spec, &pv.0, &pv.1),
        }
    }
}

/// Bootstrap draws use a replicate-specific stream.
fn reseeded(spec: &GroupTimeSpec, replicate_seed: u64) -> GroupTimeSpec {
    let mut s = spec.clone();
    if let Inference::Bootstrap { draws, seed } = s.inference {
        s.inference = Inference::Bootstrap {
            draws,
            seed: derive_seed(seed, replicate_seed),
        };
    }
    s
}

/// Replicate `r` generates its panel with seed `base + r`, fits every
/// configured estimator and scores it against that panel's truth. The first
/// failing replicate aborts the run.
pub fn run_montecarlo(cfg: &ExperimentConfig) -> Result<MonteCarloReport> {
    cfg.validate(Pipeline::Montecarlo)?;
    let base = cfg.seed()?;
    let dgp = cfg.dgp.as_ref().expect("validated");
    let n = cfg.replications.expect("validated");
    let generator = Generator::new(cfg, dgp)?;
    let replicates: Vec<Vec<Scored>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let seed = base.wrapping_add(r as u64);
            let run = || -> Result<Vec<Scored>> {
                let spec = DgpSpec {
                    seed,
                    ..dgp.clone()
                };
                let (panel, truth) = generator.generate(&spec)?;
                let mut scored = Vec::new();
                for (k, est) in cfg.estimators.iter().enumerate() {
                    let kind = est.kind();
                    let filter = match &kind {
                        EstimatorKind::Regression(s) => &s.filter,
                        EstimatorKind::GroupTime(s) => &s.filter,
                    };
                    let truth = truth.restrict_to(&panel.filter(|o| filter.keeps(o)));
                    let output = match &kind {
                        EstimatorKind::Regression(_) => fit_estimator(&panel, &kind)?,
                        EstimatorKind::GroupTime(g) => {
                            fit_estimator(&panel, &EstimatorKind::GroupTime(&reseeded(g, seed)))?
                        }
                    };
                    scored.extend(score(k, &output, &kind, &spec, &truth)?);
                }
                Ok(scored)
            };
            run().map_err(|e| Error::Replicate {
                replicate: r,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(cfg, replicates))
}
