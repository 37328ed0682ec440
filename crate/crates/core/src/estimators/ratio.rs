use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::{Panel, PanelObservation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaldRatio {
    pub ratio: f64,
    pub se: f64,
}

/// `reduced_form / first_stage` with a delta-method standard error.
/// `cov` is the covariance between the two estimates (zero when they come
/// from independent samples).
pub fn wald_ratio(
    reduced_form: f64,
    first_stage: f64,
    var_reduced_form: f64,
    var_first_stage: f64,
    cov: f64,
    tolerance: f64,
) -> Result<WaldRatio> {
    if !(tolerance >= 0.0) {
        return Err(Error::param("tolerance", "must be non-negative"));
    }
    if first_stage.abs() < tolerance || first_stage == 0.0 {
        return Err(Error::WeakFirstStage {
            first_stage,
            tolerance,
        });
    }
    if var_reduced_form < 0.0 || var_first_stage < 0.0 {
        return Err(Error::param("variance", "must be non-negative"));
    }
    let ratio = reduced_form / first_stage;
    let g_rf = 1.0 / first_stage;
    let g_fs = -reduced_form / (first_stage * first_stage);
    let var =
        g_rf * g_rf * var_reduced_form + g_fs * g_fs * var_first_stage + 2.0 * g_rf * g_fs * cov;
    Ok(WaldRatio {
        ratio,
        se: var.max(0.0).sqrt(),
    })
}

/// Caps values above the nearest-rank `percentile` (in `(50, 100]`) of the
/// present values; missing entries pass through.
pub fn winsorize(values: &[Option<f64>], percentile: f64) -> Result<Vec<Option<f64>>> {
    if !(percentile > 50.0 && percentile <= 100.0) {
        return Err(Error::param(
            "percentile",
            format!("must lie in (50, 100], got {percentile}"),
        ));
    }
    let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
    if sorted.is_empty() {
        return Err(Error::param("values", "column has no non-missing values"));
    }
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("values", "must be finite"));
    }
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = ((percentile / 100.0 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    let cap = sorted[rank - 1];
    Ok(values.iter().map(|v| v.map(|x| x.min(cap))).collect())
}

/// Winsorizes weekly hours (missing for non-employed rows).
pub fn winsorize_hours(panel: &Panel, percentile: f64) -> Result<Panel> {
    let hours: Vec<Option<f64>> = panel.rows().iter().map(|r| r.weekly_hours).collect();
    let capped = winsorize(&hours, percentile)?;
    let rows = panel
        .rows()
        .iter()
        .zip(capped)
        .map(|(r, h)| PanelObservation {
            weekly_hours: h,
            ..r.clone()
        })
        .collect();
    Panel::new(rows)
}
