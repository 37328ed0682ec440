//! Comparative statics of the health-shock employment response over a
//! normalized (wealth, wage) grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::household::HouseholdParams;
use super::returns::work_probability;
use super::utility::Health;
use crate::error::{Error, Result};

/// Maps the unit grids onto model primitives: normalized wealth `a` becomes
/// non-labor income `a * wealth_max`; normalized wage `φ` becomes the wife's
/// wage `wage_min + φ (wage_max - wage_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub wealth_max: f64,
    pub wage_min: f64,
    pub wage_max: f64,
}

impl Default for SweepAxes {
    fn default() -> Self {
        SweepAxes {
            wealth_max: 2.0,
            wage_min: 0.4,
            wage_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub wealth: f64,
    pub wage: f64,
    /// `P(work | z = 1) - P(work | z = 0)`; `None` when the mapped
    /// parameters violate the budget invariant.
    pub delta_work_prob: Option<f64>,
}

impl SweepCell {
    pub fn feasible(&self) -> bool {
        self.delta_work_prob.is_some()
    }
}

/// Row-major over wealth (outer) then wage (inner).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSurface {
    pub wealth_grid: Vec<f64>,
    pub wage_grid: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl GradientSurface {
    pub fn cell(&self, wealth_idx: usize, wage_idx: usize) -> &SweepCell {
        &self.cells[wealth_idx * self.wage_grid.len() + wage_idx]
    }

    /// Non-decreasing along wage and non-increasing along wealth over all
    /// feasible neighbours.
    pub fn is_monotone(&self) -> bool {
        let (na, nw) = (self.wealth_grid.len(), self.wage_grid.len());
        for a in 0..na {
            for w in 0..nw {
                let Some(here) = self.cell(a, w).delta_work_prob else {
                    continue;
                };
                if w + 1 < nw {
                    if let Some(next) = self.cell(a, w + 1).delta_work_prob {
                        if next < here {
                            return false;
                        }
                    }
                }
                if a + 1 < na {
                    if let Some(next) = self.cell(a + 1, w).delta_work_prob {
                        if next > here {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// CSV with header `wealth,wage,delta_work_prob,feasible`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["wealth", "wage", "delta_work_prob", "feasible"])?;
        for c in &self.cells {
            w.write_record([
                c.wealth.to_string(),
                c.wage.to_string(),
                c.delta_work_prob.map(|d| d.to_string()).unwrap_or_default(),
                c.feasible().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Evenly spaced points on [0, 1].
pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        n => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn gradient_sweep(
    base: &HouseholdParams,
    axes: &SweepAxes,
    wealth_grid: &[f64],
    wage_grid: &[f64],
) -> Result<GradientSurface> {
    for (name, grid) in [("wealth_grid", wealth_grid), ("wage_grid", wage_grid)] {
        if let Some(bad) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(
                name,
                format!("values must be normalized to [0, 1], got {bad}"),
            ));
        }
    }
    if !(axes.wealth_max >= 0.0 && axes.wage_min >= 0.0 && axes.wage_max >= axes.wage_min) {
        return Err(Error::param("sweep axes", format!("{axes:?}")));
    }
    let mut cells = Vec::with_capacity(wealth_grid.len() * wage_grid.len());
    for &a in wealth_grid {
        for &phi in wage_grid {
            let wage = axes.wage_min + phi * (axes.wage_max - axes.wage_min);
            let params = base
                .with_non_labor_income(a * axes.wealth_max)
                .and_then(|p| p.with_wife_wage(wage));
            let delta = match params {
                Ok(p) => {
                    Some(work_probability(&p, Health::Poor)? - work_probability(&p, Health::Good)?)
                }
                Err(Error::InvalidParameter { .. }) => None,
                Err(e) => return Err(e),
            };
            cells.push(SweepCell {
                wealth: a,
                wage: phi,
                delta_work_prob: delta,
            });
        }
    }
    Ok(GradientSurface {
        wealth_grid: wealth_grid.to_vec(),
        wage_grid: wage_grid.to_vec(),
        cells,
    })
}
