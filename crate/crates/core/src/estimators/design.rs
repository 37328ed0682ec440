//! Sample selection and regressor construction.

use std::collections::BTreeMap;

use super::{wave_rank, ClusterBy, ModeratorForm, ModeratorSource, RegressionSpec, TreatmentTerms};
use crate::error::{Error, Result};
use crate::numerics::median;
use crate::panel::{Panel, PanelObservation};

pub(crate) const REFERENCE_EVENT_TIME: i64 = -2;

/// Raw (not yet demeaned) regression inputs.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub names: Vec<String>,
    /// Event-time indicator columns; an all-zero one is an empty cell.
    pub is_bin: Vec<bool>,
    pub id: Vec<usize>,
    pub n_id: usize,
    pub wave: Vec<usize>,
    pub n_wave: usize,
    pub cluster: Vec<usize>,
    pub n_cluster: usize,
    /// Fixed-effect parameters not nested in the clusters.
    pub fe_params: usize,
    pub n_singletons: usize,
}

/// Event-time bins in output order, reference excluded.
pub(crate) fn event_bins(lower: i64, upper: i64, period: i64) -> Result<Vec<i64>> {
    if period <= 0 {
        return Err(Error::param("period_years", "must be positive"));
    }
    if lower > REFERENCE_EVENT_TIME || upper < 0 {
        return Err(Error::param(
            "lower",
            format!("need lower <= -2 and upper >= 0, got [{lower}, {upper}]"),
        ));
    }
    if lower % period != 0 || upper % period != 0 || REFERENCE_EVENT_TIME % period != 0 {
        return Err(Error::param(
            "period_years",
            format!("bins [{lower}, {upper}] and -2 must be multiples of {period}"),
        ));
    }
    Ok((lower / period..=upper / period)
        .map(|k| k * period)
        .filter(|&q| q != REFERENCE_EVENT_TIME)
        .collect())
}

pub(crate) fn event_term(q: i64) -> String {
    format!("event_{q}")
}

/// Event time in years computed from wave ranks, so any order-preserving
/// relabeling of waves yields the same bins.
pub(crate) fn rank_event_time(waves: &[i64], wave: i64, event_wave: i64, period: i64) -> i64 {
    (wave_rank(waves, wave) as i64 - wave_rank(waves, event_wave) as i64) * period
}

/// Per-id moderator values over the sample rows.
fn moderator_by_id(
    rows: &[&PanelObservation],
    source: ModeratorSource,
) -> Result<BTreeMap<u64, f64>> {
    let col = source.column();
    let mut acc: BTreeMap<u64, (f64, usize, Option<f64>)> = BTreeMap::new();
    for r in rows {
        let Some(v) = col.value(r) else { continue };
        let e = acc.entry(r.id).or_insert((0.0, 0, Some(v)));
        if let ModeratorSource::Column(_) = source {
            if e.2 != Some(v) {
                return Err(Error::TimeVaryingModerator {
                    column: col.name().to_string(),
                    id: r.id,
                });
            }
        }
        e.0 += v;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(id, (s, n, _))| (id, s / n as f64))
        .collect())
}

pub(crate) fn build(panel: &Panel, spec: &RegressionSpec) -> Result<Design> {
    let mut rows: Vec<&PanelObservation> = panel
        .rows()
        .iter()
        .filter(|r| spec.filter.keeps(r))
        .filter(|r| {
            spec.outcome.value(r).is_some() && spec.covariates.iter().all(|c| c.value(r).is_some())
        })
        .collect();

    let moderator = match &spec.treatment {
        TreatmentTerms::Interacted { source, form } => {
            let by_id = moderator_by_id(&rows, *source)?;
            rows.retain(|r| by_id.contains_key(&r.id));
            let values: Vec<f64> = by_id.values().copied().collect();
            let med = median(&values);
            let transformed: BTreeMap<u64, f64> = by_id
                .into_iter()
                .map(|(id, m)| {
                    let v = match form {
                        ModeratorForm::AboveMedianIndicator => (m > med) as u8 as f64,
                        ModeratorForm::CenteredAtMedian => m - med,
                        ModeratorForm::Raw => m,
                    };
                    (id, v)
                })
                .collect();
            Some((source.column(), transformed))
        }
        _ => None,
    };

    if rows.is_empty() {
        return Err(Error::Estimation("estimation sample is empty".into()));
    }

    let mut waves: Vec<i64> = rows.iter().map(|r| r.wave).collect();
    waves.sort_unstable();
    waves.dedup();

    let n = rows.len();
    let mut names = Vec::new();
    let mut x: Vec<Vec<f64>> = Vec::new();
    let d: Vec<f64> = rows.iter().map(|r| r.d_it as u8 as f64).collect();
    match &spec.treatment {
        TreatmentTerms::Static => {
            names.push("d_it".to_string());
            x.push(d);
        }
        TreatmentTerms::EventTime {
            lower,
            upper,
            period_years,
        } => {
            let bins = event_bins(*lower, *upper, *period_years)?;
            let mut cols = vec![vec![0.0; n]; bins.len()];
            for (k, r) in rows.iter().enumerate() {
                let Some(e) = r.event_wave else { continue };
                let q = rank_event_time(&waves, r.wave, e, *period_years).clamp(*lower, *upper);
                if let Some(j) = bins.iter().position(|&b| b == q) {
                    cols[j][k] = 1.0;
                }
            }
            names.extend(bins.iter().map(|&q| event_term(q)));
            x.extend(cols);
        }
        TreatmentTerms::Interacted { .. } => {
            let (col, m) = moderator.as_ref().expect("moderator computed above");
            let inter = rows.iter().zip(&d).map(|(r, &dv)| dv * m[&r.id]).collect();
            names.push("d_it".to_string());
            names.push(format!("d_it_x_{}", col.name()));
            x.push(d);
            x.push(inter);
        }
    }
    for c in &spec.covariates {
        names.push(c.name().to_string());
        x.push(rows.iter().map(|r| c.value(r).expect("filtered")).collect());
    }
    let y = rows
        .iter()
        .map(|r| spec.outcome.value(r).expect("filtered"))
        .collect();
    let is_bin = names.iter().map(|n| n.starts_with("event_")).collect();

    // rows are sorted by id, so ids are contiguous
    let mut id = Vec::with_capacity(n);
    let mut n_id = 0;
    let mut n_singletons = 0;
    let mut run = 0;
    for k in 0..n {
        if k > 0 && rows[k].id != rows[k - 1].id {
            n_id += 1;
            n_singletons += (run == 1) as usize;
            run = 0;
        }
        id.push(n_id);
        run += 1;
    }
    n_id += 1;
    n_singletons += (run == 1) as usize;

    let wave: Vec<usize> = rows.iter().map(|r| wave_rank(&waves, r.wave)).collect();
    let n_wave = waves.len();
    let (cluster, n_cluster, fe_params) = match spec.cluster {
        ClusterBy::Id => (id.clone(), n_id, n_wave - 1),
        ClusterBy::Wave => (wave.clone(), n_wave, n_id - 1),
    };
    Ok(Design {
        y,
        x,
        names,
        is_bin,
        id,
        n_id,
        wave,
        n_wave,
        cluster,
        n_cluster,
        fe_params,
        n_singletons,
    })
}
