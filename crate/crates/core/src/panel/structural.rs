//! Panels simulated from the solved dynamic model.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::reduced_form::Person;
use super::{apply_attrition, DgpSpec, Gender, GroundTruth, Panel, PanelObservation};
use crate::dynamic::{transition_experience, DynamicParams, DynamicState, ValueFunction};
use crate::error::{Error, Result};
use crate::model::{Health, PerSpouse, ShockDraw, ShockSampler, Spouse, WorkChoice};
use crate::numerics::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arm {
    health: Health,
    assets: usize,
    experience: PerSpouse<usize>,
}

/// Per-wave random inputs shared by the factual and counterfactual arms.
struct Draws {
    shocks: ShockDraw,
    health: f64,
}

fn step(
    params: &DynamicParams,
    vf: &ValueFunction,
    t: usize,
    arm: Arm,
    draws: &Draws,
    force_healthy: bool,
) -> Result<(WorkChoice, Arm)> {
    let state = DynamicState::new(t, arm.health, arm.assets, arm.experience);
    let sol = vf.solution(&state)?;
    let mut best = None;
    let mut best_value = f64::NEG_INFINITY;
    for (k, choice) in WorkChoice::ALL.into_iter().enumerate() {
        if sol.savings[k].is_none() {
            continue;
        }
        let v = sol.choice_values[k]
            - draws.shocks.husband * choice.husband as u8 as f64
            - draws.shocks.wife * choice.wife as u8 as f64;
        if v > best_value {
            best_value = v;
            best = Some(k);
        }
    }
    let k = best.ok_or_else(|| Error::EmptyFeasibleSet {
        state: state.to_string(),
    })?;
    let choice = WorkChoice::ALL[k];
    let grid = params.experience_grid();
    let next_x = |x: usize, worked: bool| {
        grid.snap(transition_experience(
            grid.get(x),
            worked,
            params.accrual(),
            params.depreciation(t),
        ))
        .0
    };
    let p_sick = params
        .health()
        .prob_sick(t, arm.health.is_poor(), choice.household_care());
    let sick = !force_healthy && draws.health < p_sick;
    Ok((
        choice,
        Arm {
            health: if sick { Health::Poor } else { Health::Good },
            assets: sol.savings[k].expect("feasible"),
            experience: PerSpouse::new(
                next_x(arm.experience.husband, choice.husband),
                next_x(arm.experience.wife, choice.wife),
            ),
        },
    ))
}

/// Observations for one person and their per-(id, wave) treatment effects.
type PersonDraw = (Vec<PanelObservation>, Vec<((u64, i64), f64)>);

/// Simulates `spec.n_individuals` households forward from good parental
/// health under the solved policy. Treatment is the first wave with poor
/// parental health; the counterfactual arm reuses every random draw with
/// parental health held good. Only the sample-design fields of `spec` are
/// used (size, waves, gender mix, attrition, seed).
pub fn generate_structural(
    spec: &DgpSpec,
    params: &DynamicParams,
    vf: &ValueFunction,
) -> Result<(Panel, GroundTruth)> {
    spec.validate()?;
    if params.horizon() < spec.n_waves {
        return Err(Error::param(
            "horizon",
            format!(
                "dynamic horizon {} is shorter than n_waves {}",
                params.horizon(),
                spec.n_waves
            ),
        ));
    }
    let sampler = ShockSampler::independent(params.household().disutility());
    let (na, nx) = (params.asset_grid().len(), params.experience_grid().len());
    let years = spec.wave_spacing as f64;

    let people: Vec<PersonDraw> = (0..spec.n_individuals as u64)
        .into_par_iter()
        .map(|id| -> Result<_> {
            let mut rng = rng_from(derive_seed(spec.seed, id));
            let person = Person::draw(&mut rng, spec.female_share);
            let role = match person.gender {
                Gender::Female => Spouse::Wife,
                Gender::Male => Spouse::Husband,
            };
            let start = Arm {
                health: Health::Good,
                assets: rng.random_range(0..na),
                experience: PerSpouse::new(
                    rng.random_range(0..=nx / 2),
                    rng.random_range(0..=nx / 2),
                ),
            };
            let (mut fact, mut cf) = (start, start);
            let mut path = Vec::with_capacity(spec.n_waves);
            for t in 0..spec.n_waves {
                let draws = Draws {
                    shocks: sampler.from_uniforms(rng.random(), rng.random()),
                    health: rng.random(),
                };
                let hours: f64 = rng.sample(rand_distr::StandardNormal);
                let sick = fact.health.is_poor();
                let (c_fact, next_fact) = step(params, vf, t, fact, &draws, false)?;
                let (c_cf, next_cf) = step(params, vf, t, cf, &draws, true)?;
                path.push((
                    sick,
                    c_fact.works(role),
                    c_cf.works(role),
                    hours,
                    fact.assets,
                ));
                fact = next_fact;
                cf = next_cf;
            }
            let event = path.iter().position(|p| p.0);
            let event_wave = event.map(|e| spec.wave_label(e));
            let mut rows = Vec::with_capacity(spec.n_waves);
            let mut effects = Vec::new();
            for (k, &(_, works, works_cf, hours, assets)) in path.iter().enumerate() {
                let log_assets = (1.0 + params.asset_grid().get(assets)).ln();
                let mut row = person.row(
                    &mut rng,
                    id,
                    spec.wave_label(k),
                    k,
                    years * k as f64,
                    event_wave,
                    Some(log_assets),
                );
                row.school_years = params.education().get(role);
                row.employment = works;
                row.weekly_hours = works.then(|| (40.0 + 6.0 * hours).max(1.0));
                row.true_y0 = Some(works_cf as u8 as f64);
                if row.d_it {
                    effects.push(((id, row.wave), works as u8 as f64 - works_cf as u8 as f64));
                }
                rows.push(row);
            }
            Ok((rows, effects))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(spec.n_individuals * spec.n_waves);
    let mut effects = BTreeMap::new();
    for (r, e) in people {
        rows.extend(r);
        effects.extend(e);
    }
    let panel = Panel::new(rows)?;
    let truth = GroundTruth::from_effects(&panel, effects, BTreeMap::new());
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::{solve_bellman, DynamicConfig, HealthTransition};
    use crate::model::{CareUtility, HouseholdConfig};

    fn spec() -> DgpSpec {
        DgpSpec {
            n_individuals: 400,
            seed: 11,
            ..DgpSpec::default()
        }
    }

    #[test]
    fn healthy_chain_has_no_treated() {
        let p = DynamicConfig::default()
            .build_with_health(HealthTransition::always_healthy())
            .unwrap();
        let vf = solve_bellman(&p).unwrap();
        let (panel, truth) = generate_structural(&spec(), &p, &vf).unwrap();
        assert!(panel.rows().iter().all(|r| !r.treated_ever));
        assert!(truth.overall.is_none());
        // both arms coincide when health never changes
        assert!(panel
            .rows()
            .iter()
            .all(|r| r.true_y0 == Some(r.employment as u8 as f64)));
    }

    #[test]
    fn no_health_channel_means_no_effect() {
        let cfg = DynamicConfig {
            household: HouseholdConfig {
                altruism: 0.0,
                medical_cost: 0.0,
                care_utility: CareUtility::new(0.0, 0.0, 0.0, 0.0).unwrap(),
                ..DynamicConfig::default().household
            },
            ..DynamicConfig::default()
        };
        let p = cfg.build().unwrap();
        let vf = solve_bellman(&p).unwrap();
        let (_, truth) = generate_structural(&spec(), &p, &vf).unwrap();
        assert!(!truth.per_observation.is_empty());
        assert!(truth.per_observation.values().all(|&e| e == 0.0));
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let p = DynamicConfig::default().build().unwrap();
        let vf = solve_bellman(&p).unwrap();
        let a = generate_structural(&spec(), &p, &vf).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| generate_structural(&spec(), &p, &vf).unwrap());
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn default_calibration_lowers_female_employment() {
        let p = DynamicConfig::default().build().unwrap();
        let vf = solve_bellman(&p).unwrap();
        let spec = DgpSpec {
            n_individuals: 4000,
            ..spec()
        };
        let (panel, truth) = generate_structural(&spec, &p, &vf).unwrap();
        let female: Vec<f64> = panel
            .rows()
            .iter()
            .filter(|r| r.d_it && r.gender == Gender::Female)
            .map(|r| truth.per_observation[&(r.id, r.wave)])
            .collect();
        let male: Vec<f64> = panel
            .rows()
            .iter()
            .filter(|r| r.d_it && r.gender == Gender::Male)
            .map(|r| truth.per_observation[&(r.id, r.wave)])
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&female) < 0.0 && mean(&female) >= -0.10);
        // daughters carry more of the care burden than sons
        assert!(mean(&female) < mean(&male));
    }
}
