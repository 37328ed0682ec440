use carelab::model::{
    CareUtility, ConsumptionUtility, Disutility, Health, HouseholdConfig, HouseholdParams,
    PerSpouse, ShockDraw, ShockSampler, WorkChoice,
};
use rand::Rng;

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random supermodular, increasing care-utility table.
pub fn random_care_utility<R: Rng>(rng: &mut R) -> CareUtility {
    let good_no = uniform(rng, -0.5, 0.5);
    let good_gain = uniform(rng, 0.0, 0.5);
    let poor_no = uniform(rng, -1.5, 0.0);
    let poor_gain = good_gain + uniform(rng, 0.0, 1.0);
    CareUtility::new(good_no, good_no + good_gain, poor_no, poor_no + poor_gain).unwrap()
}

/// Random configuration that satisfies the budget invariant.
pub fn random_config<R: Rng>(rng: &mut R) -> HouseholdConfig {
    loop {
        let time = PerSpouse::new(uniform(rng, 0.5, 1.5), uniform(rng, 0.5, 1.5));
        let cfg = HouseholdConfig {
            altruism: uniform(rng, 0.0, 3.0),
            wage: PerSpouse::new(uniform(rng, 0.2, 2.0), uniform(rng, 0.2, 2.0)),
            time,
            care_time: Some(PerSpouse::new(
                time.husband * uniform(rng, 0.1, 1.0),
                time.wife * uniform(rng, 0.1, 1.0),
            )),
            medical_cost: uniform(rng, 0.0, 1.0),
            non_labor_income: uniform(rng, 0.0, 1.0),
            care_utility: random_care_utility(rng),
            consumption_curvature: ConsumptionUtility::crra(uniform(rng, 0.5, 4.0)).unwrap(),
            disutility: Disutility::Logistic {
                scale: uniform(rng, 0.2, 2.0),
            },
        };
        if cfg.build().is_ok() {
            return cfg;
        }
    }
}

fn crra(curvature: f64, c: f64) -> f64 {
    if curvature == 1.0 {
        c.ln()
    } else {
        (c.powf(1.0 - curvature) - 1.0) / (1.0 - curvature)
    }
}

/// Utility of every alternative straight from the configuration, `None`
/// when consumption is not positive.
pub fn alternative_utilities(
    cfg: &HouseholdConfig,
    z: Health,
    shocks: ShockDraw,
) -> [Option<f64>; 4] {
    let care_time = cfg.care_time.unwrap_or(cfg.time);
    let medical = if z == Health::Poor {
        cfg.medical_cost
    } else {
        0.0
    };
    WorkChoice::ALL.map(|w| {
        let mut c = cfg.wage.husband * cfg.time.husband
            + cfg.wage.wife * cfg.time.wife
            + cfg.non_labor_income
            - medical;
        if !w.husband {
            c -= cfg.wage.husband * care_time.husband;
        }
        if !w.wife {
            c -= cfg.wage.wife * care_time.wife;
        }
        (c > 0.0).then(|| {
            crra(cfg.consumption_curvature.curvature(), c)
                + cfg.altruism * cfg.care_utility.value(z, !(w.husband && w.wife))
                - shocks.husband * w.husband as u8 as f64
                - shocks.wife * w.wife as u8 as f64
        })
    })
}

/// Exhaustive argmax; ties go to the earlier alternative.
pub fn enumerate_best(cfg: &HouseholdConfig, z: Health, shocks: ShockDraw) -> Option<WorkChoice> {
    let mut best: Option<(WorkChoice, f64)> = None;
    for (w, u) in WorkChoice::ALL
        .into_iter()
        .zip(alternative_utilities(cfg, z, shocks))
    {
        if let Some(u) = u {
            if best.is_none_or(|(_, b)| u > b) {
                best = Some((w, u));
            }
        }
    }
    best.map(|(w, _)| w)
}

pub fn random_shocks<R: Rng>(rng: &mut R, params: &HouseholdParams) -> ShockDraw {
    ShockSampler::independent(params.disutility()).from_uniforms(rng.random(), rng.random())
}
