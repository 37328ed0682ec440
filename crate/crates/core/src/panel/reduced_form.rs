//! Oracle DGP `y = α_i + fe_t + Z'β + τ_q D + trend + noise`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_attrition, Column, Gender, GroundTruth, Panel, PanelObservation};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, median, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DgpMode {
    #[default]
    ReducedForm,
    Structural,
}

/// True effect path. Event time is counted in waves since treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EffectProfile {
    Constant {
        tau: f64,
    },
    /// `tau[k]` applies `k` waves after treatment (the last entry repeats);
    /// `cohort_slope` shifts each later treatment cohort by that amount.
    Dynamic {
        tau: Vec<f64>,
        #[serde(default)]
        cohort_slope: f64,
    },
    /// Constant effect that depends on whether an individual's mean of
    /// `moderator` lies above the median of those means.
    Moderated {
        below: f64,
        above: f64,
        moderator: Column,
    },
}

impl Default for EffectProfile {
    fn default() -> Self {
        EffectProfile::Constant { tau: -0.04 }
    }
}

impl EffectProfile {
    fn at(&self, waves_since: usize, cohort: usize, above_median: bool) -> f64 {
        match self {
            EffectProfile::Constant { tau } => *tau,
            EffectProfile::Dynamic { tau, cohort_slope } => {
                tau[waves_since.min(tau.len() - 1)] + cohort_slope * cohort.saturating_sub(1) as f64
            }
            EffectProfile::Moderated { below, above, .. } => {
                if above_median {
                    *above
                } else {
                    *below
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrendSpec {
    #[default]
    Common,
    /// Ever-treated individuals drift by `slope_per_wave` per wave relative
    /// to controls (a parallel-trends violation).
    DifferentialLinear { slope_per_wave: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeKind {
    /// Linear probability model: employment is Bernoulli with probability
    /// `base_rate + index`, clipped to [0, 1].
    Employment { base_rate: f64 },
    /// Continuous index reported as weekly hours around `level`; every row
    /// is employed.
    Hours { level: f64 },
}

impl Default for OutcomeKind {
    fn default() -> Self {
        OutcomeKind::Employment { base_rate: 0.7 }
    }
}

impl OutcomeKind {
    pub fn column(self) -> Column {
        match self {
            OutcomeKind::Employment { .. } => Column::Employment,
            OutcomeKind::Hours { .. } => Column::WeeklyHours,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgpSpec {
    pub mode: DgpMode,
    pub n_individuals: usize,
    pub n_waves: usize,
    pub first_wave: i64,
    /// Years between waves.
    pub wave_spacing: i64,
    pub never_treated_share: f64,
    /// Relative weights of the first-treatment wave over wave indices
    /// `1..n_waves`; uniform when empty.
    pub event_wave_weights: Vec<f64>,
    pub effect: EffectProfile,
    pub trend: TrendSpec,
    pub covariate_effects: BTreeMap<Column, f64>,
    pub outcome: OutcomeKind,
    /// Noise sd of the continuous outcome.
    pub noise_sd: f64,
    pub female_share: f64,
    pub attrition_rate: f64,
    pub seed: u64,
}

impl Default for DgpSpec {
    fn default() -> Self {
        DgpSpec {
            mode: DgpMode::ReducedForm,
            n_individuals: 2000,
            n_waves: 5,
            first_wave: 2012,
            wave_spacing: 2,
            never_treated_share: 0.4,
            event_wave_weights: Vec::new(),
            effect: EffectProfile::default(),
            trend: TrendSpec::Common,
            covariate_effects: BTreeMap::new(),
            outcome: OutcomeKind::default(),
            noise_sd: 0.1,
            female_share: 0.5,
            attrition_rate: 0.0,
            seed: 0,
        }
    }
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        let share = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(name, format!("must lie in [0, 1], got {v}")))
            }
        };
        share("never_treated_share", self.never_treated_share)?;
        share("female_share", self.female_share)?;
        if !(0.0..1.0).contains(&self.attrition_rate) {
            return Err(Error::param("attrition_rate", "must lie in [0, 1)"));
        }
        if self.n_individuals == 0 {
            return Err(Error::param("n_individuals", "must be positive"));
        }
        if self.n_waves < 3 {
            return Err(Error::param("n_waves", "need at least 3 waves"));
        }
        if self.wave_spacing <= 0 {
            return Err(Error::param("wave_spacing", "must be positive"));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::param("noise_sd", "must be finite and >= 0"));
        }
        if !self.event_wave_weights.is_empty() {
            let w = &self.event_wave_weights;
            if w.len() != self.n_waves - 1
                || w.iter().any(|x| !(x.is_finite() && *x >= 0.0))
                || w.iter().sum::<f64>() <= 0.0
            {
                return Err(Error::param(
                    "event_wave_weights",
                    format!(
                        "need {} non-negative weights with a positive sum",
                        self.n_waves - 1
                    ),
                ));
            }
        }
        if let EffectProfile::Dynamic { tau, .. } = &self.effect {
            if tau.is_empty() {
                return Err(Error::param("effect.tau", "must not be empty"));
            }
        }
        if let OutcomeKind::Employment { base_rate } = self.outcome {
            share("outcome.base_rate", base_rate)?;
        }
        Ok(())
    }

    pub fn wave_label(&self, k: usize) -> i64 {
        self.first_wave + self.wave_spacing * k as i64
    }

    /// Wave index of first treatment, or `None` for never-treated.
    pub(crate) fn draw_event<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if rng.random::<f64>() < self.never_treated_share {
            return None;
        }
        let n = self.n_waves - 1;
        let u = rng.random::<f64>();
        if self.event_wave_weights.is_empty() {
            return Some(1 + ((u * n as f64) as usize).min(n - 1));
        }
        let total: f64 = self.event_wave_weights.iter().sum();
        let mut acc = 0.0;
        for (k, w) in self.event_wave_weights.iter().enumerate() {
            acc += w / total;
            if u < acc {
                return Some(k + 1);
            }
        }
        Some(n)
    }
}

/// Individual-level covariate draws shared by both generators.
pub(crate) struct Person {
    pub gender: Gender,
    pub age0: f64,
    pub school_years: f64,
    pub married: bool,
    pub urban: bool,
    pub child_under6: bool,
    pub asset_level: f64,
    pub father_gap: Option<f64>,
    pub mother_gap: f64,
}

impl Person {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, female_share: f64) -> Self {
        let age0 = rng.random_range(25..=55) as f64;
        Person {
            gender: if rng.random::<f64>() < female_share {
                Gender::Female
            } else {
                Gender::Male
            },
            age0,
            school_years: rng.random_range(0..=16) as f64,
            married: rng.random::<f64>() < 0.85,
            urban: rng.random::<f64>() < 0.45,
            child_under6: rng.random::<f64>() < ((40.0 - age0) / 30.0).clamp(0.0, 1.0),
            asset_level: Normal::new(1.5, 0.8).expect("sd > 0").sample(rng),
            father_gap: (rng.random::<f64>() >= 0.15).then(|| rng.random_range(24..=36) as f64),
            mother_gap: rng.random_range(22..=34) as f64,
        }
    }

    /// Row skeleton for wave index `k`; outcome fields are filled in later.
    #[allow(clippy::too_many_arguments)]
    pub fn row<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        id: u64,
        wave: i64,
        k: usize,
        years: f64,
        event_wave: Option<i64>,
        log_assets: Option<f64>,
    ) -> PanelObservation {
        let age = self.age0 + years;
        PanelObservation {
            id,
            wave,
            gender: self.gender,
            event_wave,
            treated_ever: event_wave.is_some(),
            d_it: event_wave.is_some_and(|e| wave >= e),
            event_time: event_wave.map(|e| wave - e),
            employment: true,
            weekly_hours: None,
            age,
            married: self.married,
            school_years: self.school_years,
            self_rated_health: rng.random_range(1..=5) as f64,
            log_assets: log_assets.unwrap_or_else(|| {
                self.asset_level
                    + 0.03 * k as f64
                    + 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal)
            }),
            child_under6: self.child_under6 && years < 6.0,
            urban: self.urban,
            father_age: self.father_gap.map(|g| age + g),
            mother_age: Some(age + self.mother_gap),
            true_y0: None,
        }
    }
}

struct Draft {
    rows: Vec<PanelObservation>,
    alpha: f64,
    event: Option<usize>,
    /// Outcome uniform (employment) or standard normal (hours) per wave.
    draws: Vec<f64>,
    hours_noise: Vec<f64>,
}

pub fn generate_reduced_form(spec: &DgpSpec) -> Result<(Panel, GroundTruth)> {
    spec.validate()?;
    let mut time_rng = rng_from(derive_seed(spec.seed, u64::MAX));
    let time_fe: Vec<f64> = (0..spec.n_waves)
        .map(|_| time_rng.random_range(-0.05..0.05))
        .collect();

    let drafts: Vec<Draft> = (0..spec.n_individuals as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = rng_from(derive_seed(spec.seed, id));
            let person = Person::draw(&mut rng, spec.female_share);
            let event = spec.draw_event(&mut rng);
            let event_wave = event.map(|e| spec.wave_label(e));
            let alpha = rng.random_range(-0.1..0.1);
            let mut rows = Vec::with_capacity(spec.n_waves);
            let (mut draws, mut hours_noise) = (Vec::new(), Vec::new());
            for k in 0..spec.n_waves {
                let years = (spec.wave_spacing * k as i64) as f64;
                rows.push(person.row(&mut rng, id, spec.wave_label(k), k, years, event_wave, None));
                draws.push(match spec.outcome {
                    OutcomeKind::Employment { .. } => rng.random::<f64>(),
                    OutcomeKind::Hours { .. } => rng.sample(rand_distr::StandardNormal),
                });
                hours_noise.push(rng.sample(rand_distr::StandardNormal));
            }
            Draft {
                rows,
                alpha,
                event,
                draws,
                hours_noise,
            }
        })
        .collect();

    // moderator split over individual means
    let threshold = match &spec.effect {
        EffectProfile::Moderated { moderator, .. } => {
            let means: Vec<f64> = drafts
                .iter()
                .filter_map(|d| id_mean(&d.rows, *moderator))
                .collect();
            Some((*moderator, median(&means)))
        }
        _ => None,
    };

    let mut rows = Vec::with_capacity(spec.n_individuals * spec.n_waves);
    let mut effects = BTreeMap::new();
    for d in drafts {
        let above = threshold.is_some_and(|(col, m)| id_mean(&d.rows, col).is_some_and(|v| v > m));
        for (k, mut row) in d.rows.into_iter().enumerate() {
            let mut index = d.alpha + time_fe[k];
            for (col, beta) in &spec.covariate_effects {
                index += beta * col.value(&row).unwrap_or(0.0);
            }
            if let (TrendSpec::DifferentialLinear { slope_per_wave }, Some(e)) =
                (spec.trend, d.event)
            {
                index += slope_per_wave * (k as f64 - e as f64);
            }
            let tau = match d.event {
                Some(e) if k >= e => spec.effect.at(k - e, e, above),
                _ => 0.0,
            };
            match spec.outcome {
                OutcomeKind::Employment { base_rate } => {
                    let p0 = (base_rate + index).clamp(0.0, 1.0);
                    let p1 = (base_rate + index + tau).clamp(0.0, 1.0);
                    let u = d.draws[k];
                    let y0 = u < p0;
                    let y = if row.d_it { u < p1 } else { y0 };
                    row.employment = y;
                    row.weekly_hours = y.then(|| (40.0 + 6.0 * d.hours_noise[k]).max(1.0));
                    row.true_y0 = Some(y0 as u8 as f64);
                    if row.d_it {
                        effects.insert((row.id, row.wave), p1 - p0);
                    }
                }
                OutcomeKind::Hours { level } => {
                    let y0 = level + index + spec.noise_sd * d.draws[k];
                    row.employment = true;
                    row.weekly_hours = Some(if row.d_it { y0 + tau } else { y0 });
                    row.true_y0 = Some(y0);
                    if row.d_it {
                        effects.insert((row.id, row.wave), tau);
                    }
                }
            }
            rows.push(row);
        }
    }
    let panel = Panel::new(rows)?;
    let covariates = spec
        .covariate_effects
        .iter()
        .map(|(c, b)| (c.name().to_string(), *b))
        .collect();
    let truth = GroundTruth::from_effects(&panel, effects, covariates);
    if spec.attrition_rate > 0.0 {
        let attrited = apply_attrition(
            &panel,
            spec.attrition_rate,
            derive_seed(spec.seed, u64::MAX - 1),
        )?;
        let truth = truth.restrict_to(&attrited);
        return Ok((attrited, truth));
    }
    Ok((panel, truth))
}

fn id_mean(rows: &[PanelObservation], col: Column) -> Option<f64> {
    let vals: Vec<f64> = rows.iter().filter_map(|r| col.value(r)).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
