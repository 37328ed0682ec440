//! Configured pipelines behind the `carelab` binary: comparative-statics
//! sweeps, panel simulation, estimation on panel files and Monte Carlo
//! experiments.

mod config;
mod montecarlo;

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{
    EstimateOptions, EstimatorConfig, EstimatorKind, ExperimentConfig, Pipeline, SweepConfig,
};
pub use montecarlo::{
    run_montecarlo, MonteCarloReport, MonteCarloRow, PRE_TREND_ANY, PRE_TREND_WALD,
};

use crate::dynamic::{solve_bellman, ValueFunction};
use crate::error::{Error, Result};
use crate::estimators::{fit, fit_group_time, winsorize_hours, GroupTimeATT, RegressionResult};
use crate::model::{gradient_sweep, unit_grid, GradientSurface};
use crate::panel::{
    generate_reduced_form, generate_structural, read_panel, write_panel, DgpMode, DgpSpec, Gender,
    GroundTruth, Panel,
};

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateOutput {
    Regression(RegressionResult),
    GroupTime(GroupTimeATT),
}

pub(crate) fn fit_estimator(panel: &Panel, kind: &EstimatorKind<'_>) -> Result<EstimateOutput> {
    Ok(match kind {
        EstimatorKind::Regression(spec) => EstimateOutput::Regression(fit(panel, spec)?),
        EstimatorKind::GroupTime(spec) => EstimateOutput::GroupTime(fit_group_time(panel, spec)?),
    })
}

/// One fitted estimator on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedOutput {
    pub name: String,
    /// `None` for the pooled sample.
    pub stratum: Option<Gender>,
    pub output: EstimateOutput,
}

impl NamedOutput {
    pub fn file_stem(&self) -> String {
        match self.stratum {
            None => self.name.clone(),
            Some(g) => format!("{}_{}", self.name, g.as_str()),
        }
    }
}

/// Generated panel plus its truth; structural runs keep the solved model.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub panel: Panel,
    pub truth: GroundTruth,
    pub value_function: Option<ValueFunction>,
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<GradientSurface> {
    cfg.validate(Pipeline::Sweep)?;
    let sweep = cfg.sweep.as_ref().expect("validated");
    let params = config::in_section("model", cfg.model.clone().unwrap_or_default().build())?;
    config::in_section(
        "sweep",
        gradient_sweep(
            &params,
            &sweep.axes,
            &unit_grid(sweep.wealth_points),
            &unit_grid(sweep.wage_points),
        ),
    )
}

/// Generates one panel with the configured DGP; the top-level seed replaces
/// `dgp.seed`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate(Pipeline::Simulate)?;
    let spec = DgpSpec {
        seed: cfg.seed()?,
        ..cfg.dgp.clone().expect("validated")
    };
    match spec.mode {
        DgpMode::ReducedForm => {
            let (panel, truth) = generate_reduced_form(&spec)?;
            Ok(Simulation {
                panel,
                truth,
                value_function: None,
            })
        }
        DgpMode::Structural => {
            let params =
                config::in_section("dynamic", cfg.dynamic.clone().unwrap_or_default().build())?;
            let vf = solve_bellman(&params)?;
            let (panel, truth) = generate_structural(&spec, &params, &vf)?;
            Ok(Simulation {
                panel,
                truth,
                value_function: Some(vf),
            })
        }
    }
}

/// Fits every configured estimator to `panel`, pooled and (optionally) by
/// gender.
pub fn estimate_panel(cfg: &ExperimentConfig, panel: &Panel) -> Result<Vec<NamedOutput>> {
    let panel = match cfg.estimate.winsorize_hours {
        Some(p) => winsorize_hours(panel, p)?,
        None => panel.clone(),
    };
    let strata: &[Option<Gender>] = if cfg.estimate.stratify_by_gender {
        &[None, Some(Gender::Male), Some(Gender::Female)]
    } else {
        &[None]
    };
    let mut out = Vec::new();
    for est in &cfg.estimators {
        for &stratum in strata {
            let sample = match stratum {
                None => panel.clone(),
                Some(g) => panel.by_gender(g),
            };
            let output = fit_estimator(&sample, &est.kind()).map_err(|e| match e {
                Error::Estimation(msg) => {
                    Error::Estimation(format!("estimator `{}`: {msg}", est.name))
                }
                other => other,
            })?;
            out.push(NamedOutput {
                name: est.name.clone(),
                stratum,
                output,
            });
        }
    }
    Ok(out)
}

pub fn run_estimate(cfg: &ExperimentConfig) -> Result<Vec<NamedOutput>> {
    cfg.validate(Pipeline::Estimate)?;
    let panel = read_panel(cfg.input.as_ref().expect("validated"))?;
    estimate_panel(cfg, &panel)
}

/// Aggregated group-time effects, one row per event time plus `overall`
/// (empty event time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub event_time: Option<i64>,
    pub att: f64,
    pub se: f64,
    pub n_cells: usize,
}

pub fn write_aggregates<W: Write>(g: &GroupTimeATT, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for a in g.by_event_time.iter().chain(std::iter::once(&g.overall)) {
        w.serialize(AggregateRow {
            event_time: a.event_time,
            att: a.att,
            se: a.se,
            n_cells: a.n_cells,
        })?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Row of a results CSV (`term,estimate,se,t,p,n_obs,n_clusters`); numeric
/// fields are empty for dropped terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub term: String,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub n_obs: usize,
    pub n_clusters: usize,
}

pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Row of a group-time CSV (`g,t,event_time,att,se,weight`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTimeRow {
    pub g: i64,
    pub t: i64,
    pub event_time: i64,
    pub att: Option<f64>,
    pub se: Option<f64>,
    pub weight: f64,
}

pub fn read_group_time_csv<R: Read>(input: R) -> Result<Vec<GroupTimeRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn emit(
    dir: &Path,
    name: &str,
    written: &mut Vec<PathBuf>,
    f: impl FnOnce(BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let path = dir.join(name);
    f(create(&path)?)?;
    written.push(path);
    Ok(())
}

/// Runs `pipeline` and writes its outputs into `out_dir`; returns the files
/// written. Everything is computed before the first file is created, so a
/// failed run leaves no partial output. `cfg.jobs` bounds the worker
/// threads; results do not depend on it.
pub fn run(pipeline: Pipeline, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate(pipeline)?;
    let work = || -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        match pipeline {
            Pipeline::Sweep => {
                let surface = run_sweep(cfg)?;
                prepare(out_dir)?;
                emit(out_dir, "gradient.csv", &mut written, |w| {
                    surface.write_csv(w)
                })?;
            }
            Pipeline::Simulate => {
                let sim = run_simulate(cfg)?;
                prepare(out_dir)?;
                let path = out_dir.join("panel.csv");
                write_panel(&sim.panel, &path)?;
                written.push(path);
                emit(out_dir, "truth.csv", &mut written, |w| {
                    sim.truth.write_csv(w)
                })?;
                if let Some(vf) = &sim.value_function {
                    emit(out_dir, "value_function.csv", &mut written, |w| {
                        vf.write_csv(w)
                    })?;
                }
            }
            Pipeline::Estimate => {
                let outputs = run_estimate(cfg)?;
                prepare(out_dir)?;
                for o in &outputs {
                    let stem = o.file_stem();
                    match &o.output {
                        EstimateOutput::Regression(r) => {
                            emit(out_dir, &format!("{stem}.csv"), &mut written, |w| {
                                r.write_csv(w)
                            })?
                        }
                        EstimateOutput::GroupTime(g) => {
                            emit(out_dir, &format!("{stem}.csv"), &mut written, |w| {
                                g.write_csv(w)
                            })?;
                            emit(
                                out_dir,
                                &format!("{stem}_aggregates.csv"),
                                &mut written,
                                |w| write_aggregates(g, w),
                            )?;
                        }
                    }
                }
            }
            Pipeline::Montecarlo => {
                let report = run_montecarlo(cfg)?;
                prepare(out_dir)?;
                emit(out_dir, "montecarlo.csv", &mut written, |w| {
                    report.write_csv(w)
                })?;
            }
        }
        Ok(written)
    };
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
