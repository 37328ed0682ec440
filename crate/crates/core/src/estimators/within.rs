//! Two-way within transformation by alternating projections.

use crate::error::{Error, Result};

pub(crate) const TOLERANCE: f64 = 1e-10;
pub(crate) const MAX_SWEEPS: usize = 10_000;

pub(crate) struct TwoWay<'a> {
    pub id: &'a [usize],
    pub wave: &'a [usize],
    pub n_id: usize,
    pub n_wave: usize,
}

fn project_out(
    col: &mut [f64],
    group: &[usize],
    n_group: usize,
    sums: &mut [f64],
    counts: &[f64],
) -> f64 {
    sums.iter_mut().for_each(|s| *s = 0.0);
    for (&g, &v) in group.iter().zip(col.iter()) {
        sums[g] += v;
    }
    let mut max_change = 0.0f64;
    for g in 0..n_group {
        sums[g] /= counts[g];
        max_change = max_change.max(sums[g].abs());
    }
    for (&g, v) in group.iter().zip(col.iter_mut()) {
        *v -= sums[g];
    }
    max_change
}

impl TwoWay<'_> {
    fn counts(group: &[usize], n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n];
        group.iter().for_each(|&g| c[g] += 1.0);
        c
    }

    /// Removes id and wave means until a full sweep moves no value by more
    /// than `TOLERANCE` times the column scale. Returns the sweeps used.
    pub fn demean(&self, col: &mut [f64]) -> Result<usize> {
        let scale = col.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let (id_counts, wave_counts) = (
            Self::counts(self.id, self.n_id),
            Self::counts(self.wave, self.n_wave),
        );
        let mut id_sums = vec![0.0; self.n_id];
        let mut wave_sums = vec![0.0; self.n_wave];
        let mut change = f64::INFINITY;
        for sweep in 1..=MAX_SWEEPS {
            change = project_out(col, self.id, self.n_id, &mut id_sums, &id_counts).max(
                project_out(col, self.wave, self.n_wave, &mut wave_sums, &wave_counts),
            );
            if change <= TOLERANCE * scale {
                return Ok(sweep);
            }
        }
        Err(Error::DemeanNotConverged {
            sweeps: MAX_SWEEPS,
            max_change: change,
        })
    }
}
