//! Group-time average treatment effects for staggered adoption, built from
//! clean two-period comparisons against untreated controls.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::rank_event_time;
use super::{wave_rank, SampleFilter};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, mean_sd, rng_from};
use crate::panel::{Column, Panel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControlGroup {
    #[default]
    NeverTreated,
    /// Never treated plus units first treated after both compared waves.
    NotYetTreated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inference {
    /// Analytic variance from per-individual influence functions.
    InfluenceFunction,
    /// Individuals resampled with replacement.
    Bootstrap { draws: usize, seed: u64 },
}

impl Default for Inference {
    fn default() -> Self {
        Inference::Bootstrap {
            draws: 499,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupTimeSpec {
    pub outcome: Column,
    #[serde(default)]
    pub control: ControlGroup,
    #[serde(default)]
    pub inference: Inference,
    #[serde(default)]
    pub filter: SampleFilter,
    #[serde(default = "two")]
    pub period_years: i64,
}

fn two() -> i64 {
    2
}

impl GroupTimeSpec {
    pub fn new(outcome: Column) -> Self {
        GroupTimeSpec {
            outcome,
            control: ControlGroup::default(),
            inference: Inference::default(),
            filter: SampleFilter::default(),
            period_years: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTimeCell {
    /// Cohort: the wave of first treatment.
    pub g: i64,
    pub t: i64,
    pub event_time: i64,
    /// `None` when the cell has no treated or no control individuals.
    pub att: Option<f64>,
    pub se: Option<f64>,
    pub n_treated: usize,
    pub n_control: usize,
    /// Weight in the overall post-treatment average.
    pub weight: f64,
    /// Why `att` is missing.
    pub absent_reason: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    /// `None` for the overall post-treatment average.
    pub event_time: Option<i64>,
    pub att: f64,
    pub se: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupTimeATT {
    pub cells: Vec<GroupTimeCell>,
    pub by_event_time: Vec<Aggregate>,
    pub overall: Aggregate,
    pub n_ids: usize,
}

impl GroupTimeATT {
    /// CSV `g,t,event_time,att,se,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["g", "t", "event_time", "att", "se", "weight"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            w.write_record([
                c.g.to_string(),
                c.t.to_string(),
                c.event_time.to_string(),
                opt(c.att),
                opt(c.se),
                c.weight.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn event_time(&self, e: i64) -> Option<&Aggregate> {
        self.by_event_time.iter().find(|a| a.event_time == Some(e))
    }
}

/// Long differences `y_t - y_base` for one cell.
struct CellData {
    g: i64,
    t: i64,
    event_time: i64,
    treated: Vec<(usize, f64)>,
    control: Vec<(usize, f64)>,
}

fn weighted_mean(xs: &[(usize, f64)], mult: Option<&[u32]>) -> Option<(f64, f64)> {
    let (mut s, mut n) = (0.0, 0.0);
    for &(i, v) in xs {
        let m = mult.map_or(1.0, |m| m[i] as f64);
        s += m * v;
        n += m;
    }
    (n > 0.0).then(|| (s / n, n))
}

impl CellData {
    /// ATT and treated mass under optional resampling multiplicities.
    fn att(&self, mult: Option<&[u32]>) -> Option<(f64, f64)> {
        let (mt, nt) = weighted_mean(&self.treated, mult)?;
        let (mc, _) = weighted_mean(&self.control, mult)?;
        Some((mt - mc, nt))
    }

    /// Per-individual influence contributions.
    fn influence(&self) -> Vec<(usize, f64)> {
        let (mt, nt) = weighted_mean(&self.treated, None).expect("non-empty");
        let (mc, nc) = weighted_mean(&self.control, None).expect("non-empty");
        self.treated
            .iter()
            .map(|&(i, v)| (i, (v - mt) / nt))
            .chain(self.control.iter().map(|&(i, v)| (i, -(v - mc) / nc)))
            .collect()
    }
}

/// Aggregate ATT and the (cell index, weight) pairs behind it.
type Weighted = (f64, Vec<(usize, f64)>);

/// Cell ATTs, overall ATT and event-time ATTs from one bootstrap draw.
type BootstrapDraw = (Vec<Option<f64>>, Option<f64>, Vec<Option<f64>>);

/// Weighted averages of cell ATTs with weights proportional to treated mass.
fn aggregate(
    cells: &[CellData],
    atts: &[Option<(f64, f64)>],
    select: impl Fn(&CellData) -> bool,
) -> Option<Weighted> {
    let chosen: Vec<(usize, f64, f64)> = cells
        .iter()
        .zip(atts)
        .enumerate()
        .filter(|(_, (c, a))| a.is_some() && select(c))
        .map(|(k, (_, a))| {
            let (att, n) = a.expect("filtered");
            (k, att, n)
        })
        .collect();
    let total: f64 = chosen.iter().map(|c| c.2).sum();
    if chosen.is_empty() || total <= 0.0 {
        return None;
    }
    let att = chosen.iter().map(|c| c.1 * c.2).sum::<f64>() / total;
    Some((att, chosen.iter().map(|c| (c.0, c.2 / total)).collect()))
}

/// Group-time ATT(g, t) with base period the wave before `g`, aggregated
/// by event time and overall. Estimation uses, for each cell, individuals
/// observed in both compared waves. Cohorts first treated in the first
/// sample wave have no pre-period and are excluded.
pub fn fit_group_time(panel: &Panel, spec: &GroupTimeSpec) -> Result<GroupTimeATT> {
    if spec.period_years <= 0 {
        return Err(Error::param("period_years", "must be positive"));
    }
    let rows: Vec<_> = panel
        .rows()
        .iter()
        .filter(|r| spec.filter.keeps(r) && spec.outcome.value(r).is_some())
        .collect();
    let mut waves: Vec<i64> = rows.iter().map(|r| r.wave).collect();
    waves.sort_unstable();
    waves.dedup();
    if waves.len() < 2 {
        return Err(Error::Estimation(
            "group-time estimation needs at least 2 waves".into(),
        ));
    }

    // per individual: cohort and outcome by wave index
    let mut units: Vec<(Option<i64>, Vec<Option<f64>>)> = Vec::new();
    let mut last_id = None;
    for r in &rows {
        if last_id != Some(r.id) {
            units.push((r.event_wave, vec![None; waves.len()]));
            last_id = Some(r.id);
        }
        let u = units.last_mut().expect("pushed");
        u.1[wave_rank(&waves, r.wave)] = spec.outcome.value(r);
    }
    let cohorts: Vec<i64> = {
        let mut g: Vec<i64> = units
            .iter()
            .filter_map(|u| u.0)
            .filter(|&e| wave_rank(&waves, e) >= 1)
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    if cohorts.is_empty() {
        return Err(Error::Estimation(
            "no treated cohort with a pre-treatment wave".into(),
        ));
    }

    let mut cells = Vec::new();
    for &g in &cohorts {
        let base = wave_rank(&waves, g) - 1;
        for (ti, &t) in waves.iter().enumerate() {
            if ti == base {
                continue;
            }
            let later = t.max(waves[base]);
            let mut data = CellData {
                g,
                t,
                event_time: rank_event_time(&waves, t, g, spec.period_years),
                treated: Vec::new(),
                control: Vec::new(),
            };
            for (i, (e, y)) in units.iter().enumerate() {
                let (Some(yt), Some(yb)) = (y[ti], y[base]) else {
                    continue;
                };
                let is_control = match (spec.control, e) {
                    (_, None) => true,
                    (ControlGroup::NotYetTreated, Some(e)) => *e != g && *e > later,
                    (ControlGroup::NeverTreated, Some(_)) => false,
                };
                if *e == Some(g) {
                    data.treated.push((i, yt - yb));
                } else if is_control {
                    data.control.push((i, yt - yb));
                }
            }
            cells.push(data);
        }
    }

    let atts: Vec<Option<(f64, f64)>> = cells.iter().map(|c| c.att(None)).collect();
    let mut event_times: Vec<i64> = cells
        .iter()
        .filter(|c| c.att(None).is_some())
        .map(|c| c.event_time)
        .collect();
    event_times.sort_unstable();
    event_times.dedup();
    let overall = aggregate(&cells, &atts, |c| c.event_time >= 0)
        .ok_or_else(|| Error::Estimation("no estimable post-treatment cell".into()))?;
    let by_e: Vec<(i64, Weighted)> = event_times
        .iter()
        .filter_map(|&e| aggregate(&cells, &atts, |c| c.event_time == e).map(|a| (e, a)))
        .collect();

    let n_ids = units.len();
    let (cell_se, overall_se, by_e_se): (Vec<Option<f64>>, f64, Vec<f64>) = match spec.inference {
        Inference::InfluenceFunction => {
            let infl: Vec<Option<Vec<(usize, f64)>>> = cells
                .iter()
                .zip(&atts)
                .map(|(c, a)| a.map(|_| c.influence()))
                .collect();
            let combine = |weights: &[(usize, f64)]| {
                let mut acc = vec![0.0; n_ids];
                for &(k, w) in weights {
                    for &(i, psi) in infl[k].as_ref().expect("estimable") {
                        acc[i] += w * psi;
                    }
                }
                acc.iter().map(|v| v * v).sum::<f64>().sqrt()
            };
            let cell_se = (0..cells.len())
                .map(|k| infl[k].as_ref().map(|_| combine(&[(k, 1.0)])))
                .collect();
            (
                cell_se,
                combine(&overall.1),
                by_e.iter().map(|(_, a)| combine(&a.1)).collect(),
            )
        }
        Inference::Bootstrap { draws, seed } => {
            if draws < 2 {
                return Err(Error::param("draws", "bootstrap needs at least 2 draws"));
            }
            let reps: Vec<BootstrapDraw> = (0..draws as u64)
                .into_par_iter()
                .map(|b| {
                    let mut rng = rng_from(derive_seed(seed, b));
                    let mut mult = vec![0u32; n_ids];
                    for _ in 0..n_ids {
                        mult[rng.random_range(0..n_ids)] += 1;
                    }
                    let a: Vec<Option<(f64, f64)>> =
                        cells.iter().map(|c| c.att(Some(&mult))).collect();
                    let cell = a.iter().map(|x| x.map(|v| v.0)).collect();
                    let ov = aggregate(&cells, &a, |c| c.event_time >= 0).map(|v| v.0);
                    let be = event_times
                        .iter()
                        .filter(|e| by_e.iter().any(|(x, _)| x == *e))
                        .map(|&e| aggregate(&cells, &a, |c| c.event_time == e).map(|v| v.0))
                        .collect();
                    (cell, ov, be)
                })
                .collect();
            let sd = |vals: Vec<f64>| mean_sd(&vals).1;
            let cell_se = (0..cells.len())
                .map(|k| atts[k].map(|_| sd(reps.iter().filter_map(|r| r.0[k]).collect())))
                .collect();
            let overall_se = sd(reps.iter().filter_map(|r| r.1).collect());
            let by_e_se = (0..by_e.len())
                .map(|j| sd(reps.iter().filter_map(|r| r.2[j]).collect()))
                .collect();
            (cell_se, overall_se, by_e_se)
        }
    };

    let overall_weight: BTreeMap<usize, f64> = overall.1.iter().copied().collect();
    let out_cells = cells
        .iter()
        .enumerate()
        .map(|(k, c)| GroupTimeCell {
            g: c.g,
            t: c.t,
            event_time: c.event_time,
            att: atts[k].map(|a| a.0),
            se: cell_se[k],
            n_treated: c.treated.len(),
            n_control: c.control.len(),
            weight: overall_weight.get(&k).copied().unwrap_or(0.0),
            absent_reason: if c.treated.is_empty() {
                Some("no treated individuals observed in both waves")
            } else if c.control.is_empty() {
                Some("no control individuals observed in both waves")
            } else {
                None
            },
        })
        .collect();
    let n_cells = |w: &[(usize, f64)]| w.len();
    Ok(GroupTimeATT {
        cells: out_cells,
        by_event_time: by_e
            .iter()
            .zip(by_e_se)
            .map(|((e, (att, w)), se)| Aggregate {
                event_time: Some(*e),
                att: *att,
                se,
                n_cells: n_cells(w),
            })
            .collect(),
        overall: Aggregate {
            event_time: None,
            att: overall.0,
            se: overall_se,
            n_cells: n_cells(&overall.1),
        },
        n_ids,
    })
}
