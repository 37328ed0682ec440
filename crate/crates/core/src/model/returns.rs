use serde::Serialize;

use super::household::{HouseholdParams, Spouse, WorkChoice};
use super::utility::Health;
use crate::error::{Error, Result};

/// Return to work of one spouse, split into its two static channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkReturn {
    /// `U(c | works) - U(c | cares)`.
    pub consumption_gain: f64,
    /// `γ [u(z, d | cares) - u(z, d | works)]`.
    pub altruism_loss: f64,
}

impl WorkReturn {
    pub fn total(&self) -> f64 {
        self.consumption_gain - self.altruism_loss
    }
}

/// `S_k(z)`: utility gain (before the disutility shock) of spouse `k` working
/// rather than caring, holding the other spouse's work decision fixed.
pub fn return_to_work(
    params: &HouseholdParams,
    z: Health,
    spouse: Spouse,
    other_works: bool,
) -> Result<WorkReturn> {
    let base = WorkChoice::new(true, true).with(spouse.other(), other_works);
    let work = base.with(spouse, true);
    let care = base.with(spouse, false);
    let (c_work, c_care) = (params.consumption(z, work), params.consumption(z, care));
    for (choice, c) in [(work, c_work), (care, c_care)] {
        if c <= 0.0 {
            return Err(Error::Infeasible {
                choice: choice.to_string(),
                consumption: c,
            });
        }
    }
    let u = params.consumption_utility();
    let cu = params.care_utility();
    Ok(WorkReturn {
        consumption_gain: u.value(c_work)? - u.value(c_care)?,
        altruism_loss: params.altruism()
            * (cu.value(z, care.household_care()) - cu.value(z, work.household_care())),
    })
}

/// `P(w_j = 1 | w_i = 1) = F(S_j(z))`.
pub fn work_probability(params: &HouseholdParams, z: Health) -> Result<f64> {
    let s = return_to_work(params, z, Spouse::Wife, true)?.total();
    Ok(params.disutility().cdf(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WorkerType {
    /// Works regardless of parental health.
    AlwaysWorker,
    /// Works under good parental health, cares under poor health.
    Complier,
    /// Cares regardless of parental health.
    AlwaysCaregiver,
    /// Works only under poor parental health; exists only when the income
    /// effect dominates (`s1 > s0`).
    Defier,
}

/// Partition of the disutility axis at the two return thresholds.
///
/// A spouse works under health `z` iff `ε <= S(z)`; the boundary belongs to
/// the working side, matching the tie rule of the choice problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkerTypePartition {
    pub s0: f64,
    pub s1: f64,
}

impl WorkerTypePartition {
    pub fn from_thresholds(s0: f64, s1: f64) -> Self {
        WorkerTypePartition { s0, s1 }
    }

    pub fn label(&self, eps: f64) -> WorkerType {
        match (eps <= self.s0, eps <= self.s1) {
            (true, true) => WorkerType::AlwaysWorker,
            (true, false) => WorkerType::Complier,
            (false, true) => WorkerType::Defier,
            (false, false) => WorkerType::AlwaysCaregiver,
        }
    }

    /// Interval endpoints `(lo, hi]` of each non-empty type.
    pub fn intervals(&self) -> Vec<(WorkerType, f64, f64)> {
        let (lo, hi) = (self.s0.min(self.s1), self.s0.max(self.s1));
        let middle = if self.s1 > self.s0 {
            WorkerType::Defier
        } else {
            WorkerType::Complier
        };
        let mut out = vec![(WorkerType::AlwaysWorker, f64::NEG_INFINITY, lo)];
        if hi > lo {
            out.push((middle, lo, hi));
        }
        out.push((WorkerType::AlwaysCaregiver, hi, f64::INFINITY));
        out
    }
}

/// Thresholds of the wife's return to work (husband employed) under both
/// health states.
pub fn classify_types(params: &HouseholdParams) -> Result<WorkerTypePartition> {
    let s0 = return_to_work(params, Health::Good, Spouse::Wife, true)?.total();
    let s1 = return_to_work(params, Health::Poor, Spouse::Wife, true)?.total();
    Ok(WorkerTypePartition { s0, s1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::household::{HouseholdConfig, PerSpouse};
    use crate::model::utility::{CareUtility, ConsumptionUtility};

    #[test]
    fn closed_form_log_two() {
        // γ = 0, M = 0, Y = 2, phi_j Td_j = 1
        let p = HouseholdConfig {
            altruism: 0.0,
            wage: PerSpouse::new(1.0, 1.0),
            time: PerSpouse::new(1.0, 1.0),
            care_time: None,
            medical_cost: 0.0,
            non_labor_income: 0.0,
            care_utility: CareUtility::new(0.0, 0.0, 0.0, 0.0).unwrap(),
            consumption_curvature: ConsumptionUtility::LOG,
            disutility: Default::default(),
        }
        .build()
        .unwrap();
        let s = return_to_work(&p, Health::Good, Spouse::Wife, true).unwrap();
        assert!((s.total() - 2f64.ln()).abs() < 1e-15);
        assert!((work_probability(&p, Health::Good).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_return_gives_half() {
        let p = HouseholdConfig {
            altruism: 0.0,
            care_time: Some(PerSpouse::new(0.0, 0.0)),
            ..HouseholdConfig::default()
        }
        .build()
        .unwrap();
        assert_eq!(work_probability(&p, Health::Good).unwrap(), 0.5);
    }

    #[test]
    fn labels_follow_interval_partition() {
        let part = WorkerTypePartition::from_thresholds(3.0, 1.0);
        assert_eq!(part.label(2.0), WorkerType::Complier);
        assert_eq!(part.label(0.5), WorkerType::AlwaysWorker);
        assert_eq!(part.label(4.0), WorkerType::AlwaysCaregiver);
        // boundaries belong to the working side
        assert_eq!(part.label(1.0), WorkerType::AlwaysWorker);
        assert_eq!(part.label(3.0), WorkerType::Complier);
        let defier = WorkerTypePartition::from_thresholds(1.0, 3.0);
        assert_eq!(defier.label(2.0), WorkerType::Defier);
        assert_eq!(defier.intervals()[1].0, WorkerType::Defier);
    }

    #[test]
    fn spouse_not_working_removes_altruism_channel() {
        let p = HouseholdConfig {
            care_time: Some(PerSpouse::new(0.3, 0.3)),
            ..HouseholdConfig::default()
        }
        .build()
        .unwrap();
        let s = return_to_work(&p, Health::Poor, Spouse::Wife, false).unwrap();
        assert_eq!(s.altruism_loss, 0.0);
        assert!(s.consumption_gain > 0.0);
    }
}
