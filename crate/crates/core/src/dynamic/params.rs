use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HouseholdConfig, HouseholdParams, PerSpouse};

/// Finite, strictly increasing state grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Grid {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Grid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Grid::new(points)
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Vec<f64> {
        g.points
    }
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("grid", "must contain at least one point"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("grid", "points must be finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("grid", "points must be strictly increasing"));
        }
        Ok(Grid { points })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        match n {
            0 => Grid::new(vec![]),
            1 => Grid::new(vec![lo]),
            _ => Grid::new(
                (0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                    .collect(),
            ),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.points[idx]
    }

    /// Nearest grid point and the absolute snap error; exact midpoints round up.
    pub fn snap(&self, x: f64) -> (usize, f64) {
        let idx = self.points.partition_point(|&p| p < x);
        let best = if idx == 0 {
            0
        } else if idx == self.points.len() {
            idx - 1
        } else {
            let (below, above) = (self.points[idx - 1], self.points[idx]);
            if x - below < above - x {
                idx - 1
            } else {
                idx
            }
        };
        (best, (self.points[best] - x).abs())
    }
}

/// Log-linear Mincer wage `exp(b0 + b1 E + b2 X + b3 X²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MincerCoeffs {
    pub intercept: f64,
    pub schooling: f64,
    pub experience: f64,
    pub experience_sq: f64,
}

impl Default for MincerCoeffs {
    fn default() -> Self {
        MincerCoeffs {
            intercept: -1.0,
            schooling: 0.08,
            experience: 0.05,
            experience_sq: -0.001,
        }
    }
}

pub fn mincer_wage(education: f64, experience: f64, coeffs: &MincerCoeffs) -> f64 {
    (coeffs.intercept
        + coeffs.schooling * education
        + coeffs.experience * experience
        + coeffs.experience_sq * experience * experience)
        .exp()
}

/// `X' = max(0, X + δ w - λ_t)`.
pub fn transition_experience(
    experience: f64,
    worked: bool,
    accrual: f64,
    depreciation: f64,
) -> f64 {
    (experience + accrual * worked as u8 as f64 - depreciation).max(0.0)
}

/// Per-period schedule: a constant or one value per period (the last value
/// repeats beyond the end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Constant(f64),
    PerPeriod(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PerPeriod(v) => v[t.min(v.len() - 1)],
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        let ok = match self {
            Schedule::Constant(v) => v.is_finite() && *v >= 0.0,
            Schedule::PerPeriod(v) => !v.is_empty() && v.iter().all(|x| x.is_finite() && *x >= 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(
                name,
                "must be a non-empty list of finite values >= 0",
            ))
        }
    }
}

/// Parental health Markov chain `P(z' = 1 | z, d)`, optionally indexed by
/// model period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HealthTransition {
    /// `table[t][z][d]`; the last row applies beyond the end.
    table: Vec<[[f64; 2]; 2]>,
    initial_sick: f64,
    start_age: f64,
    period_years: f64,
}

impl HealthTransition {
    pub fn new(
        table: Vec<[[f64; 2]; 2]>,
        initial_sick: f64,
        start_age: f64,
        period_years: f64,
    ) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::param("health", "transition table is empty"));
        }
        if !(0.0..=1.0).contains(&initial_sick) {
            return Err(Error::param("health.initial_sick", "must lie in [0, 1]"));
        }
        for (t, cells) in table.iter().enumerate() {
            if cells.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::param(
                    "health",
                    format!("period {t}: probabilities must lie in [0, 1]"),
                ));
            }
            for (d, (sick, healthy)) in cells[1].iter().zip(&cells[0]).enumerate() {
                if sick <= healthy {
                    return Err(Error::param(
                        "health",
                        format!(
                            "period {t}: persistence requires P(1|1,d={d}) = {} > P(1|0,d={d}) = {}",
                            cells[1][d], cells[0][d]
                        ),
                    ));
                }
            }
            if cells[1][1] >= cells[1][0] {
                return Err(Error::param(
                    "health",
                    format!(
                        "period {t}: care efficacy requires P(1|1,1) = {} < P(1|1,0) = {}",
                        cells[1][1], cells[1][0]
                    ),
                ));
            }
        }
        Ok(HealthTransition {
            table,
            initial_sick,
            start_age,
            period_years,
        })
    }

    /// Time-invariant chain.
    pub fn constant(cells: [[f64; 2]; 2], initial_sick: f64) -> Result<Self> {
        HealthTransition::new(vec![cells], initial_sick, 0.0, 1.0)
    }

    /// Chain that never leaves good health. Deliberately bypasses the strict
    /// persistence check, which a degenerate chain cannot satisfy.
    pub fn always_healthy() -> Self {
        HealthTransition {
            table: vec![[[0.0, 0.0], [1.0, 1.0]]],
            initial_sick: 0.0,
            start_age: 0.0,
            period_years: 1.0,
        }
    }

    /// Chain with constant `P(z' = 1) = p` irrespective of state and care.
    /// Bypasses the strict inequalities, which it satisfies only weakly.
    pub fn memoryless(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("health", "probability must lie in [0, 1]"));
        }
        Ok(HealthTransition {
            table: vec![[[p, p], [p, p]]],
            initial_sick: p,
            start_age: 0.0,
            period_years: 1.0,
        })
    }

    pub fn prob_sick(&self, period: usize, sick: bool, care: bool) -> f64 {
        self.table[period.min(self.table.len() - 1)][sick as usize][care as usize]
    }

    pub fn initial_sick(&self) -> f64 {
        self.initial_sick
    }

    pub fn age_at(&self, period: usize) -> f64 {
        self.start_age + self.period_years * period as f64
    }

    pub fn periods(&self) -> usize {
        self.table.len()
    }
}

/// Age-indexed logistic calibration of the parental health chain:
/// `logit P(1|0,·) = a0 + b0 (age - pivot)`, `logit P(1|1,no care) = a1 + b1 (age - pivot)`
/// and `P(1|1,care) = efficacy · P(1|1,no care)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgeProfile {
    pub start_age: f64,
    pub period_years: f64,
    pub periods: usize,
    pub pivot_age: f64,
    pub onset_intercept: f64,
    pub onset_slope: f64,
    pub persistence_intercept: f64,
    pub persistence_slope: f64,
    /// Multiplier (< 1) on persistence when care is received.
    pub care_efficacy: f64,
    pub initial_sick: f64,
}

impl Default for AgeProfile {
    /// Parents aged 50 to 90 in two-year periods; about 20% hospitalized at 70.
    fn default() -> Self {
        AgeProfile {
            start_age: 50.0,
            period_years: 2.0,
            periods: 21,
            pivot_age: 70.0,
            onset_intercept: -1.45,
            onset_slope: 0.05,
            persistence_intercept: -0.4,
            persistence_slope: 0.09,
            care_efficacy: 0.8,
            initial_sick: 0.06,
        }
    }
}

impl AgeProfile {
    pub fn starting_at(self, start_age: f64, periods: usize) -> Self {
        AgeProfile {
            start_age,
            periods,
            ..self
        }
    }

    pub fn build(&self) -> Result<HealthTransition> {
        if self.periods == 0 {
            return Err(Error::param("health.periods", "must be positive"));
        }
        let logistic = crate::numerics::logistic_cdf;
        let table = (0..self.periods)
            .map(|t| {
                let age = self.start_age + self.period_years * t as f64 - self.pivot_age;
                let onset = logistic(self.onset_intercept + self.onset_slope * age);
                let persist = logistic(self.persistence_intercept + self.persistence_slope * age);
                [[onset, onset], [persist, self.care_efficacy * persist]]
            })
            .collect();
        HealthTransition::new(table, self.initial_sick, self.start_age, self.period_years)
    }
}

/// Continuation value after the last period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    #[default]
    Zero,
    /// Linear value of remaining assets.
    Bequest { weight: f64 },
}

impl Terminal {
    pub fn value(&self, assets: f64) -> f64 {
        match self {
            Terminal::Zero => 0.0,
            Terminal::Bequest { weight } => weight * assets,
        }
    }
}

/// Serializable description of [`DynamicParams`]; omitted fields take
/// their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicConfig {
    pub discount: f64,
    pub interest: f64,
    /// Experience gained per worked period.
    pub accrual: f64,
    /// Human-capital depreciation per period.
    pub depreciation: Schedule,
    pub horizon: usize,
    pub asset_grid: Grid,
    pub experience_grid: Grid,
    pub education: PerSpouse<f64>,
    pub mincer: MincerCoeffs,
    pub health: AgeProfile,
    pub household: HouseholdConfig,
    pub terminal: Terminal,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        DynamicConfig {
            discount: 0.9,
            interest: 0.04,
            // one period spans two years
            accrual: 2.0,
            depreciation: Schedule::Constant(1.0),
            horizon: 10,
            asset_grid: Grid::uniform(0.0, 2.0, 9).expect("grid"),
            experience_grid: Grid::uniform(0.0, 20.0, 21).expect("grid"),
            education: PerSpouse::new(12.0, 9.0),
            mincer: MincerCoeffs::default(),
            health: AgeProfile::default().starting_at(60.0, 10),
            household: HouseholdConfig {
                altruism: 1.0,
                medical_cost: 0.15,
                ..HouseholdConfig::default()
            },
            terminal: Terminal::Zero,
        }
    }
}

impl DynamicConfig {
    pub fn build(&self) -> Result<DynamicParams> {
        let health = self.health.build()?;
        DynamicParams::new(self, health)
    }

    /// Builds with an explicit health chain instead of the age profile.
    pub fn build_with_health(&self, health: HealthTransition) -> Result<DynamicParams> {
        DynamicParams::new(self, health)
    }
}

/// Primitives of the dynamic problem. Wages in `household` are placeholders;
/// each state's wages come from the Mincer law.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicParams {
    pub(crate) discount: f64,
    pub(crate) interest: f64,
    pub(crate) accrual: f64,
    pub(crate) depreciation: Schedule,
    pub(crate) horizon: usize,
    pub(crate) asset_grid: Grid,
    pub(crate) experience_grid: Grid,
    pub(crate) education: PerSpouse<f64>,
    pub(crate) mincer: MincerCoeffs,
    pub(crate) health: HealthTransition,
    pub(crate) household: HouseholdParams,
    pub(crate) terminal: Terminal,
}

impl DynamicParams {
    fn new(cfg: &DynamicConfig, health: HealthTransition) -> Result<Self> {
        if !(cfg.discount >= 0.0 && cfg.discount < 1.0) {
            return Err(Error::param(
                "discount",
                format!("must lie in [0, 1), got {}", cfg.discount),
            ));
        }
        if !(cfg.interest.is_finite() && cfg.interest > -1.0) {
            return Err(Error::param("interest", "must be finite and > -1"));
        }
        if !(cfg.accrual.is_finite() && cfg.accrual >= 0.0) {
            return Err(Error::param("accrual", "must be finite and >= 0"));
        }
        cfg.depreciation.validate("depreciation")?;
        if cfg.horizon == 0 {
            return Err(Error::param("horizon", "must be at least one period"));
        }
        if cfg.education.husband < 0.0 || cfg.education.wife < 0.0 {
            return Err(Error::param("education", "must be >= 0"));
        }
        if cfg.experience_grid.get(0) < 0.0 {
            return Err(Error::param("experience_grid", "must be >= 0"));
        }
        if let Terminal::Bequest { weight } = cfg.terminal {
            if !weight.is_finite() {
                return Err(Error::param("terminal.weight", "must be finite"));
            }
        }
        let household = cfg.household.build()?;
        Ok(DynamicParams {
            discount: cfg.discount,
            interest: cfg.interest,
            accrual: cfg.accrual,
            depreciation: cfg.depreciation.clone(),
            horizon: cfg.horizon,
            asset_grid: cfg.asset_grid.clone(),
            experience_grid: cfg.experience_grid.clone(),
            education: cfg.education,
            mincer: cfg.mincer,
            health,
            household,
            terminal: cfg.terminal,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn discount(&self) -> f64 {
        self.discount
    }
    pub fn interest(&self) -> f64 {
        self.interest
    }
    pub fn asset_grid(&self) -> &Grid {
        &self.asset_grid
    }
    pub fn experience_grid(&self) -> &Grid {
        &self.experience_grid
    }
    pub fn education(&self) -> PerSpouse<f64> {
        self.education
    }
    pub fn mincer(&self) -> &MincerCoeffs {
        &self.mincer
    }
    pub fn health(&self) -> &HealthTransition {
        &self.health
    }
    pub fn household(&self) -> &HouseholdParams {
        &self.household
    }
    pub fn depreciation(&self, t: usize) -> f64 {
        self.depreciation.at(t)
    }
    pub fn accrual(&self) -> f64 {
        self.accrual
    }
    pub fn terminal(&self) -> Terminal {
        self.terminal
    }

    /// Wages implied by experience grid indices.
    pub fn wages(&self, experience: PerSpouse<usize>) -> PerSpouse<f64> {
        PerSpouse::new(
            mincer_wage(
                self.education.husband,
                self.experience_grid.get(experience.husband),
                &self.mincer,
            ),
            mincer_wage(
                self.education.wife,
                self.experience_grid.get(experience.wife),
                &self.mincer,
            ),
        )
    }
}
