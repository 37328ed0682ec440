use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::Panel;
use crate::error::{Error, Result};

/// True treatment effects embedded by a generator.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GroundTruth {
    /// Mean effect over treated observations (`d_it = 1`); `None` when
    /// nobody is treated.
    pub overall: Option<f64>,
    /// Mean effect by event time in years.
    pub by_event_time: BTreeMap<i64, f64>,
    /// Treated observations per event time.
    pub counts: BTreeMap<i64, usize>,
    /// Effect on every treated `(id, wave)`.
    pub per_observation: BTreeMap<(u64, i64), f64>,
    /// Coefficients of the covariates entering the outcome equation.
    pub covariate_effects: BTreeMap<String, f64>,
}

impl GroundTruth {
    /// Aggregates per-observation effects over the treated rows of `panel`.
    pub fn from_effects(
        panel: &Panel,
        per_observation: BTreeMap<(u64, i64), f64>,
        covariate_effects: BTreeMap<String, f64>,
    ) -> Self {
        let mut sums: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
        let mut kept = BTreeMap::new();
        for r in panel.rows().iter().filter(|r| r.d_it) {
            let Some(&eff) = per_observation.get(&(r.id, r.wave)) else {
                continue;
            };
            kept.insert((r.id, r.wave), eff);
            let q = r.event_time.expect("treated rows carry an event time");
            let e = sums.entry(q).or_default();
            e.0 += eff;
            e.1 += 1;
        }
        let total: usize = sums.values().map(|s| s.1).sum();
        let overall = (total > 0).then(|| sums.values().map(|s| s.0).sum::<f64>() / total as f64);
        GroundTruth {
            overall,
            by_event_time: sums.iter().map(|(&q, s)| (q, s.0 / s.1 as f64)).collect(),
            counts: sums.iter().map(|(&q, s)| (q, s.1)).collect(),
            per_observation: kept,
            covariate_effects,
        }
    }

    /// Recomputes the aggregates over the rows still present in `panel`.
    pub fn restrict_to(&self, panel: &Panel) -> Self {
        GroundTruth::from_effects(
            panel,
            self.per_observation.clone(),
            self.covariate_effects.clone(),
        )
    }

    /// Count-weighted mean of the event-time profile.
    pub fn profile_average(&self) -> Option<f64> {
        let n: usize = self.counts.values().sum();
        (n > 0).then(|| {
            self.by_event_time
                .iter()
                .map(|(q, v)| v * self.counts[q] as f64)
                .sum::<f64>()
                / n as f64
        })
    }

    /// Mean effect over event times `>= 0` pooled into the bins used by the
    /// event study (`>= upper` collapsed).
    pub fn binned(&self, upper: i64) -> BTreeMap<i64, f64> {
        let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
        for (&q, &v) in &self.by_event_time {
            let n = self.counts[&q];
            let e = acc.entry(q.min(upper)).or_default();
            e.0 += v * n as f64;
            e.1 += n;
        }
        acc.into_iter()
            .map(|(q, (s, n))| (q, s / n as f64))
            .collect()
    }

    /// Sidecar CSV `scope,event_time,att`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scope", "event_time", "att"])?;
        if let Some(o) = self.overall {
            w.write_record(["overall".to_string(), String::new(), o.to_string()])?;
        }
        for (q, v) in &self.by_event_time {
            w.write_record(["event_time".to_string(), q.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
