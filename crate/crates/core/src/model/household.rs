use std::fmt;

use serde::{Deserialize, Serialize};

use super::shocks::{Disutility, ShockDraw};
use super::utility::{CareUtility, ConsumptionUtility, Health};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spouse {
    /// Spouse `i`, the higher-wage earner in the default calibrations.
    Husband,
    /// Spouse `j`.
    Wife,
}

impl Spouse {
    pub fn other(self) -> Spouse {
        match self {
            Spouse::Husband => Spouse::Wife,
            Spouse::Wife => Spouse::Husband,
        }
    }
}

/// A value held per spouse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PerSpouse<T> {
    pub husband: T,
    pub wife: T,
}

impl<T: Copy> PerSpouse<T> {
    pub fn new(husband: T, wife: T) -> Self {
        PerSpouse { husband, wife }
    }

    pub fn get(&self, s: Spouse) -> T {
        match s {
            Spouse::Husband => self.husband,
            Spouse::Wife => self.wife,
        }
    }

    pub fn swapped(&self) -> Self {
        PerSpouse {
            husband: self.wife,
            wife: self.husband,
        }
    }
}

/// Joint work decision `(w_i, w_j)`; the non-working spouse provides care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WorkChoice {
    pub husband: bool,
    pub wife: bool,
}

impl WorkChoice {
    /// All alternatives in tie-break order: higher `w_i` first, then higher `w_j`.
    pub const ALL: [WorkChoice; 4] = [
        WorkChoice::new(true, true),
        WorkChoice::new(true, false),
        WorkChoice::new(false, true),
        WorkChoice::new(false, false),
    ];

    pub const fn new(husband: bool, wife: bool) -> Self {
        WorkChoice { husband, wife }
    }

    pub fn index(self) -> usize {
        match (self.husband, self.wife) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    }

    pub fn works(self, s: Spouse) -> bool {
        match s {
            Spouse::Husband => self.husband,
            Spouse::Wife => self.wife,
        }
    }

    pub fn with(self, s: Spouse, works: bool) -> Self {
        match s {
            Spouse::Husband => WorkChoice::new(works, self.wife),
            Spouse::Wife => WorkChoice::new(self.husband, works),
        }
    }

    /// Parents receive care when at least one spouse does not work.
    pub fn household_care(self) -> bool {
        !(self.husband && self.wife)
    }

    pub fn swapped(self) -> Self {
        WorkChoice::new(self.wife, self.husband)
    }
}

impl fmt::Display for WorkChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(w_i={}, w_j={})", self.husband as u8, self.wife as u8)
    }
}

/// Primitives of the static household problem.
///
/// Construct through [`HouseholdConfig`]; the `with_*` methods return
/// validated copies for comparative statics.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdParams {
    altruism: f64,
    wage: PerSpouse<f64>,
    time: PerSpouse<f64>,
    care_time: PerSpouse<f64>,
    medical_cost: f64,
    non_labor_income: f64,
    care_utility: CareUtility,
    consumption: ConsumptionUtility,
    disutility: Disutility,
}

/// Serializable description of [`HouseholdParams`]; omitted fields take
/// their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HouseholdConfig {
    /// Altruism weight on parental utility.
    pub altruism: f64,
    pub wage: PerSpouse<f64>,
    pub time: PerSpouse<f64>,
    /// Defaults to `time` (work and care mutually exclusive).
    pub care_time: Option<PerSpouse<f64>>,
    /// Out-of-pocket medical expenditure when parents are in poor health.
    pub medical_cost: f64,
    pub non_labor_income: f64,
    pub care_utility: CareUtility,
    pub consumption_curvature: ConsumptionUtility,
    pub disutility: Disutility,
}

impl Default for HouseholdConfig {
    /// Calibration with a visible income effect for low-wealth, high-wage
    /// households.
    fn default() -> Self {
        HouseholdConfig {
            altruism: 0.5,
            wage: PerSpouse::new(1.0, 0.7),
            time: PerSpouse::new(1.0, 1.0),
            care_time: None,
            medical_cost: 0.3,
            non_labor_income: 0.0,
            care_utility: CareUtility::new(0.0, 0.2, -0.5, 0.1).expect("valid default"),
            consumption_curvature: ConsumptionUtility::crra(2.0).expect("valid default"),
            disutility: Disutility::default(),
        }
    }
}

impl HouseholdConfig {
    pub fn build(&self) -> Result<HouseholdParams> {
        HouseholdParams::new(self)
    }
}

impl HouseholdParams {
    pub fn new(cfg: &HouseholdConfig) -> Result<Self> {
        let p = HouseholdParams {
            altruism: cfg.altruism,
            wage: cfg.wage,
            time: cfg.time,
            care_time: cfg.care_time.unwrap_or(cfg.time),
            medical_cost: cfg.medical_cost,
            non_labor_income: cfg.non_labor_income,
            care_utility: cfg.care_utility,
            consumption: cfg.consumption_curvature,
            disutility: cfg.disutility,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let nonneg = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        };
        nonneg("altruism", self.altruism)?;
        nonneg("wage.husband", self.wage.husband)?;
        nonneg("wage.wife", self.wage.wife)?;
        nonneg("time.husband", self.time.husband)?;
        nonneg("time.wife", self.time.wife)?;
        nonneg("care_time.husband", self.care_time.husband)?;
        nonneg("care_time.wife", self.care_time.wife)?;
        nonneg("medical_cost", self.medical_cost)?;
        if !self.non_labor_income.is_finite() {
            return Err(Error::param("non_labor_income", "must be finite"));
        }
        if self.care_time.husband > self.time.husband || self.care_time.wife > self.time.wife {
            return Err(Error::param(
                "care_time",
                "care time cannot exceed the time endowment",
            ));
        }
        self.disutility.validate()?;
        let largest_single_care =
            (self.wage.husband * self.care_time.husband).max(self.wage.wife * self.care_time.wife);
        let resources = self.full_income() + self.non_labor_income;
        if resources <= self.medical_cost + largest_single_care {
            return Err(Error::param(
                "budget",
                format!(
                    "full income plus non-labor income {resources} must exceed medical cost {} plus the larger single-earner care cost {largest_single_care}",
                    self.medical_cost
                ),
            ));
        }
        Ok(())
    }

    pub fn to_config(&self) -> HouseholdConfig {
        HouseholdConfig {
            altruism: self.altruism,
            wage: self.wage,
            time: self.time,
            care_time: Some(self.care_time),
            medical_cost: self.medical_cost,
            non_labor_income: self.non_labor_income,
            care_utility: self.care_utility,
            consumption_curvature: self.consumption,
            disutility: self.disutility,
        }
    }

    pub fn with_wife_wage(&self, wage: f64) -> Result<Self> {
        let mut cfg = self.to_config();
        cfg.wage.wife = wage;
        cfg.build()
    }

    pub fn with_non_labor_income(&self, income: f64) -> Result<Self> {
        let mut cfg = self.to_config();
        cfg.non_labor_income = income;
        cfg.build()
    }

    pub fn with_medical_cost(&self, cost: f64) -> Result<Self> {
        let mut cfg = self.to_config();
        cfg.medical_cost = cost;
        cfg.build()
    }

    /// Exchanges every spouse-indexed primitive.
    pub fn swapped_spouses(&self) -> Self {
        HouseholdParams {
            wage: self.wage.swapped(),
            time: self.time.swapped(),
            care_time: self.care_time.swapped(),
            ..self.clone()
        }
    }

    pub fn altruism(&self) -> f64 {
        self.altruism
    }
    pub fn wage(&self) -> PerSpouse<f64> {
        self.wage
    }
    pub fn time(&self) -> PerSpouse<f64> {
        self.time
    }
    pub fn care_time(&self) -> PerSpouse<f64> {
        self.care_time
    }
    pub fn care_utility(&self) -> &CareUtility {
        &self.care_utility
    }
    pub fn consumption_utility(&self) -> ConsumptionUtility {
        self.consumption
    }
    pub fn disutility(&self) -> Disutility {
        self.disutility
    }
    pub fn non_labor_income(&self) -> f64 {
        self.non_labor_income
    }

    /// `M(z)`: zero in good health.
    pub fn medical_cost(&self, z: Health) -> f64 {
        match z {
            Health::Good => 0.0,
            Health::Poor => self.medical_cost,
        }
    }

    /// `Y = phi_i T_i + phi_j T_j`.
    pub fn full_income(&self) -> f64 {
        self.wage.husband * self.time.husband + self.wage.wife * self.time.wife
    }

    /// Foregone earnings `phi_k Td_k` when spouse `k` provides care.
    pub fn care_cost(&self, s: Spouse) -> f64 {
        self.wage.get(s) * self.care_time.get(s)
    }

    /// Budget residual `c` for a choice; may be non-positive.
    pub fn consumption(&self, z: Health, choice: WorkChoice) -> f64 {
        let mut c = self.full_income() + self.non_labor_income - self.medical_cost(z);
        for s in [Spouse::Husband, Spouse::Wife] {
            if !choice.works(s) {
                c -= self.care_cost(s);
            }
        }
        c
    }

    /// Utility net of the disutility shocks; `-inf` if infeasible.
    pub fn deterministic_utility(&self, z: Health, choice: WorkChoice) -> f64 {
        let c = self.consumption(z, choice);
        if c <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.consumption.eval(c)
            + self.altruism * self.care_utility.value(z, choice.household_care())
    }

    pub(crate) fn alternative_values(&self, z: Health) -> [f64; 4] {
        WorkChoice::ALL.map(|ch| self.deterministic_utility(z, ch))
    }
}

/// Evaluated alternative of the static problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceOutcome {
    pub work: WorkChoice,
    pub care: PerSpouse<bool>,
    pub household_care: bool,
    pub consumption: f64,
    pub utility: f64,
}

/// Household utility `U(c) + γ u(z,d) - ε_i w_i - ε_j w_j` of one alternative.
pub fn household_utility(
    params: &HouseholdParams,
    z: Health,
    choice: WorkChoice,
    shocks: ShockDraw,
) -> Result<ChoiceOutcome> {
    let c = params.consumption(z, choice);
    if c <= 0.0 {
        return Err(Error::Infeasible {
            choice: choice.to_string(),
            consumption: c,
        });
    }
    let household_care = choice.household_care();
    let utility = params.consumption.value(c)?
        + params.altruism * params.care_utility.value(z, household_care)
        - shocks.husband * choice.husband as u8 as f64
        - shocks.wife * choice.wife as u8 as f64;
    Ok(ChoiceOutcome {
        work: choice,
        care: PerSpouse::new(!choice.husband, !choice.wife),
        household_care,
        consumption: c,
        utility,
    })
}

/// Utility-maximizing feasible alternative. Exact ties go to the alternative
/// earlier in [`WorkChoice::ALL`].
pub fn optimal_choice(
    params: &HouseholdParams,
    z: Health,
    shocks: ShockDraw,
) -> Result<ChoiceOutcome> {
    let mut best: Option<ChoiceOutcome> = None;
    for choice in WorkChoice::ALL {
        let Ok(outcome) = household_utility(params, z, choice, shocks) else {
            continue;
        };
        if best.is_none_or(|b| outcome.utility > b.utility) {
            best = Some(outcome);
        }
    }
    best.ok_or_else(|| Error::NoFeasibleAlternative {
        best_residual: params.consumption(z, WorkChoice::new(true, true)),
        resources: params.full_income() + params.non_labor_income,
        medical_cost: params.medical_cost(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_params() -> HouseholdParams {
        // Y = 4 with phi_i Td_i = 2 and phi_j Td_j = 1, M(1) = 1
        HouseholdConfig {
            altruism: 0.5,
            wage: PerSpouse::new(2.0, 2.0),
            time: PerSpouse::new(1.0, 1.0),
            care_time: Some(PerSpouse::new(1.0, 0.5)),
            medical_cost: 1.0,
            non_labor_income: 0.0,
            care_utility: CareUtility::new(0.1, 0.3, -0.4, 0.2).unwrap(),
            consumption_curvature: ConsumptionUtility::LOG,
            disutility: Disutility::default(),
        }
        .build()
        .unwrap()
    }

    #[test]
    fn altruism_free_good_health_is_log_income() {
        let mut cfg = table_params().to_config();
        cfg.altruism = 0.0;
        let p = cfg.build().unwrap();
        let out = household_utility(
            &p,
            Health::Good,
            WorkChoice::new(true, true),
            ShockDraw::zero(),
        )
        .unwrap();
        assert!((out.utility - 4f64.ln()).abs() < 1e-15);
        assert!(!out.household_care);
    }

    #[test]
    fn four_alternative_table_matches_hand_evaluation() {
        let p = table_params();
        let gamma = 0.5;
        let (u10, u11) = (-0.4, 0.2);
        // hand evaluation, z = 1: c = 4 - 1 - care costs
        let expected = [
            (WorkChoice::new(true, true), Some(3f64.ln() + gamma * u10)),
            (WorkChoice::new(true, false), Some(2f64.ln() + gamma * u11)),
            (WorkChoice::new(false, true), Some(1f64.ln() + gamma * u11)),
            (WorkChoice::new(false, false), None),
        ];
        for (choice, want) in expected {
            let got = household_utility(&p, Health::Poor, choice, ShockDraw::zero());
            match want {
                Some(v) => assert!((got.unwrap().utility - v).abs() < 1e-15, "{choice}"),
                None => assert!(matches!(got, Err(Error::Infeasible { .. }))),
            }
        }
        // wife works, husband cares: U(Y - M(1) - phi_i Td_i) + γ u(1,1)
        let shocks = ShockDraw::new(0.3, -0.2).unwrap();
        let out =
            household_utility(&p, Health::Poor, WorkChoice::new(false, true), shocks).unwrap();
        assert!((out.utility - (0.0 + gamma * u11 + 0.2)).abs() < 1e-15);
        assert_eq!(out.care, PerSpouse::new(true, false));
    }

    #[test]
    fn one_earner_substitution() {
        let cfg = HouseholdConfig {
            altruism: 1.0,
            ..HouseholdConfig::default()
        };
        let p = cfg.build().unwrap();
        let out = household_utility(
            &p,
            Health::Poor,
            WorkChoice::new(true, false),
            ShockDraw::zero(),
        )
        .unwrap();
        let u = p.consumption_utility();
        let y = p.full_income();
        let want = u.value(y - 0.3 - p.care_cost(Spouse::Wife)).unwrap()
            + p.care_utility().value(Health::Poor, true);
        assert!((out.utility - want).abs() < 1e-15);
    }

    #[test]
    fn extreme_shocks_pick_corners() {
        let p = HouseholdConfig::default().build().unwrap();
        let out = optimal_choice(&p, Health::Poor, ShockDraw::new(-1e6, -1e6).unwrap()).unwrap();
        assert_eq!(out.work, WorkChoice::new(true, true));
        let out = optimal_choice(&p, Health::Poor, ShockDraw::new(-1e6, 1e6).unwrap()).unwrap();
        assert_eq!(out.work, WorkChoice::new(true, false));
    }

    #[test]
    fn ties_prefer_work() {
        // altruism zero and Td = 0: all alternatives give identical utility
        let p = HouseholdConfig {
            altruism: 0.0,
            care_time: Some(PerSpouse::new(0.0, 0.0)),
            ..HouseholdConfig::default()
        }
        .build()
        .unwrap();
        let out = optimal_choice(&p, Health::Good, ShockDraw::zero()).unwrap();
        assert_eq!(out.work, WorkChoice::new(true, true));
    }

    #[test]
    fn budget_invariant_is_enforced() {
        let cfg = HouseholdConfig {
            medical_cost: 5.0,
            ..HouseholdConfig::default()
        };
        assert!(matches!(
            cfg.build(),
            Err(Error::InvalidParameter { name: "budget", .. })
        ));
    }

    #[test]
    fn outcome_satisfies_care_identities() {
        let p = table_params();
        for choice in WorkChoice::ALL.into_iter().take(3) {
            let out = household_utility(&p, Health::Good, choice, ShockDraw::zero()).unwrap();
            assert_eq!(out.care.husband, !out.work.husband);
            assert_eq!(out.care.wife, !out.work.wife);
            assert_eq!(out.household_care, out.care.husband || out.care.wife);
            assert!(out.consumption > 0.0);
        }
    }
}
