//! Exhaustive expectimax over decision trees for small dynamic problems with
//! degenerate shocks. Written against the configuration only, so it shares no
//! code with the tensor solver beyond the primitive utility functions.

use carelab::dynamic::{mincer_wage, DynamicConfig, HealthTransition};
use carelab::model::{Disutility, Health};

pub struct TreeOracle<'a> {
    pub cfg: &'a DynamicConfig,
    pub health: &'a HealthTransition,
}

fn nearest(grid: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (k, &g) in grid.iter().enumerate() {
        let (d, db) = ((g - x).abs(), (grid[best] - x).abs());
        // ties go to the upper point
        if d < db || (d == db && g > grid[best]) {
            best = k;
        }
    }
    best
}

impl TreeOracle<'_> {
    /// Value and the argmax alternative index at `(t, z, a, xi, xj)`.
    pub fn solve(&self, t: usize, z: usize, a: usize, xi: usize, xj: usize) -> (f64, usize) {
        let cfg = self.cfg;
        assert!(matches!(cfg.household.disutility, Disutility::Degenerate));
        let assets = cfg.asset_grid.points();
        if t == cfg.horizon {
            return (cfg.terminal.value(assets[a]), usize::MAX);
        }
        let xs = cfg.experience_grid.points();
        let hh = &cfg.household;
        let care_time = hh.care_time.unwrap_or(hh.time);
        let wi = mincer_wage(cfg.education.husband, xs[xi], &cfg.mincer);
        let wj = mincer_wage(cfg.education.wife, xs[xj], &cfg.mincer);
        let dep = cfg.depreciation.at(t);
        let health = if z == 1 { Health::Poor } else { Health::Good };
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        let alternatives = [(true, true), (true, false), (false, true), (false, false)];
        for (k, &(work_i, work_j)) in alternatives.iter().enumerate() {
            let care = !(work_i && work_j);
            let mut income = wi * hh.time.husband
                + wj * hh.time.wife
                + hh.non_labor_income
                + (1.0 + cfg.interest) * assets[a]
                - if z == 1 { hh.medical_cost } else { 0.0 };
            if !work_i {
                income -= wi * care_time.husband;
            }
            if !work_j {
                income -= wj * care_time.wife;
            }
            let next_x = |x: f64, w: bool| {
                nearest(xs, (x + if w { cfg.accrual } else { 0.0 } - dep).max(0.0))
            };
            let (ni, nj) = (next_x(xs[xi], work_i), next_x(xs[xj], work_j));
            let p1 = self.health.prob_sick(t, z == 1, care);
            for (an, &a_next) in assets.iter().enumerate() {
                let c = income - a_next;
                if c <= 0.0 {
                    continue;
                }
                let u = hh.consumption_curvature.value(c).unwrap()
                    + hh.altruism * hh.care_utility.value(health, care);
                let ev = (1.0 - p1) * self.solve(t + 1, 0, an, ni, nj).0
                    + p1 * self.solve(t + 1, 1, an, ni, nj).0;
                let v = u + cfg.discount * ev;
                if v > best.0 {
                    best = (v, k);
                }
            }
        }
        best
    }
}

/// Random `T = 2` instance on 2-point grids with degenerate shocks.
pub fn random_instance<R: rand::Rng>(rng: &mut R) -> (DynamicConfig, HealthTransition) {
    use carelab::dynamic::{Grid, MincerCoeffs, Schedule, Terminal};
    use carelab::model::{CareUtility, ConsumptionUtility, HouseholdConfig, PerSpouse};

    let u = |rng: &mut R, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let good_gain = u(rng, 0.0, 0.3);
    let poor_base = u(rng, -1.0, 0.0);
    let care_utility = CareUtility::new(
        0.0,
        good_gain,
        poor_base,
        poor_base + good_gain + u(rng, 0.0, 0.5),
    )
    .unwrap();
    let household = HouseholdConfig {
        altruism: u(rng, 0.0, 2.0),
        wage: PerSpouse::new(1.0, 1.0),
        time: PerSpouse::new(1.0, 1.0),
        care_time: Some(PerSpouse::new(u(rng, 0.3, 1.0), u(rng, 0.3, 1.0))),
        medical_cost: u(rng, 0.0, 0.4),
        non_labor_income: u(rng, 0.5, 1.5),
        care_utility,
        consumption_curvature: ConsumptionUtility::crra(u(rng, 0.5, 3.0)).unwrap(),
        disutility: Disutility::Degenerate,
    };
    let p01 = u(rng, 0.0, 0.4);
    let p11_no = u(rng, p01 + 0.05, 1.0);
    let p11_care = u(rng, p01 + 0.01, p11_no - 0.01).max(p01 + 0.001);
    let health = HealthTransition::constant([[p01, p01], [p11_no, p11_care]], 0.0).unwrap();
    let cfg = DynamicConfig {
        discount: u(rng, 0.0, 0.99),
        interest: u(rng, 0.0, 0.1),
        accrual: u(rng, 0.0, 3.0),
        depreciation: Schedule::PerPeriod(vec![u(rng, 0.0, 1.0), u(rng, 0.0, 1.0)]),
        horizon: 2,
        asset_grid: Grid::new(vec![0.0, u(rng, 0.1, 1.0)]).unwrap(),
        experience_grid: Grid::new(vec![0.0, u(rng, 0.5, 3.0)]).unwrap(),
        education: PerSpouse::new(u(rng, 6.0, 16.0), u(rng, 6.0, 16.0)),
        mincer: MincerCoeffs {
            intercept: u(rng, -1.0, 0.0),
            schooling: u(rng, 0.0, 0.1),
            experience: u(rng, 0.0, 0.2),
            experience_sq: u(rng, -0.01, 0.0),
        },
        health: Default::default(),
        household,
        terminal: if rng.random::<bool>() {
            Terminal::Zero
        } else {
            Terminal::Bequest {
                weight: u(rng, 0.0, 1.0),
            }
        },
    };
    (cfg, health)
}

/// Largest value discrepancy and the number of policy disagreements between
/// the tensor solver and the tree oracle over every decision state.
pub fn compare(cfg: &DynamicConfig, health: &HealthTransition) -> (f64, usize) {
    use carelab::dynamic::{solve_bellman, DynamicState};
    use carelab::model::PerSpouse;

    let params = cfg.build_with_health(health.clone()).unwrap();
    let vf = solve_bellman(&params).unwrap();
    let oracle = TreeOracle { cfg, health };
    let (mut worst, mut disagreements) = (0.0f64, 0);
    for t in 0..=cfg.horizon {
        for z in 0..2 {
            for a in 0..2 {
                for xi in 0..2 {
                    for xj in 0..2 {
                        let s =
                            DynamicState::new(t, Health::from_index(z), a, PerSpouse::new(xi, xj));
                        let (v, arg) = oracle.solve(t, z, a, xi, xj);
                        worst = worst.max((vf.value(&s).unwrap() - v).abs());
                        if t < cfg.horizon && vf.solution(&s).unwrap().probabilities[arg] != 1.0 {
                            disagreements += 1;
                        }
                    }
                }
            }
        }
    }
    (worst, disagreements)
}
