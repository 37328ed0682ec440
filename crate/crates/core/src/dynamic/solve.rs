//! Backward induction over `(t, z, A, X_i, X_j)`.

use rayon::prelude::*;
use serde::Serialize;

use super::params::{transition_experience, DynamicParams};
use crate::error::{Error, Result};
use crate::model::{integrate_choice, Health, PerSpouse, Spouse, WorkChoice};

/// Grid indices of a decision state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DynamicState {
    pub t: usize,
    pub health: Health,
    pub assets: usize,
    pub experience: PerSpouse<usize>,
}

impl DynamicState {
    pub fn new(t: usize, health: Health, assets: usize, experience: PerSpouse<usize>) -> Self {
        DynamicState {
            t,
            health,
            assets,
            experience,
        }
    }
}

impl std::fmt::Display for DynamicState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(t={}, z={}, a={}, x_i={}, x_j={})",
            self.t,
            self.health.index(),
            self.assets,
            self.experience.husband,
            self.experience.wife
        )
    }
}

/// Solution at one decision state. Per-alternative arrays follow
/// [`WorkChoice::ALL`]; infeasible alternatives carry `-inf` values, zero
/// probability and no savings choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateSolution {
    pub value: f64,
    pub probabilities: [f64; 4],
    pub choice_values: [f64; 4],
    pub savings: [Option<usize>; 4],
    pub consumption: [f64; 4],
    /// `ρ E[V_{t+1} | alternative, savings]`.
    pub continuation: [f64; 4],
}

/// Value and policy tensors of the solved problem.
#[derive(Debug, Clone)]
pub struct ValueFunction {
    horizon: usize,
    n_assets: usize,
    n_experience: usize,
    /// `V_t` for `t = 0..=horizon`; `t = horizon` is the terminal value.
    values: Vec<f64>,
    policy: Vec<StateSolution>,
    max_snap_error: f64,
}

impl ValueFunction {
    fn layer_size(&self) -> usize {
        2 * self.n_assets * self.n_experience * self.n_experience
    }

    fn offset(&self, s: &DynamicState) -> Result<usize> {
        let n = self.n_experience;
        if s.assets >= self.n_assets || s.experience.husband >= n || s.experience.wife >= n {
            return Err(Error::OffGrid(s.to_string()));
        }
        Ok(
            ((s.health.index() * self.n_assets + s.assets) * n + s.experience.husband) * n
                + s.experience.wife,
        )
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `V_t(state)`, including the terminal layer `t = horizon`.
    pub fn value(&self, s: &DynamicState) -> Result<f64> {
        if s.t > self.horizon {
            return Err(Error::OffGrid(s.to_string()));
        }
        Ok(self.values[s.t * self.layer_size() + self.offset(s)?])
    }

    pub fn solution(&self, s: &DynamicState) -> Result<&StateSolution> {
        if s.t >= self.horizon {
            return Err(Error::OffGrid(format!(
                "{s}: no decision at or after the horizon"
            )));
        }
        Ok(&self.policy[s.t * self.layer_size() + self.offset(s)?])
    }

    /// Largest distance between an experience transition and the grid point
    /// it was snapped to.
    pub fn max_snap_error(&self) -> f64 {
        self.max_snap_error
    }

    pub fn states(&self) -> impl Iterator<Item = DynamicState> + '_ {
        let (na, nx) = (self.n_assets, self.n_experience);
        (0..self.horizon).flat_map(move |t| {
            Health::BOTH.into_iter().flat_map(move |z| {
                (0..na).flat_map(move |a| {
                    (0..nx).flat_map(move |xi| {
                        (0..nx).map(move |xj| DynamicState::new(t, z, a, PerSpouse::new(xi, xj)))
                    })
                })
            })
        })
    }

    /// Long-format CSV `t,z,a_idx,xi_idx,xj_idx,value,p_ww,p_wc,p_cw,p_cc`;
    /// the terminal layer has empty probability columns.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t", "z", "a_idx", "xi_idx", "xj_idx", "value", "p_ww", "p_wc", "p_cw", "p_cc",
        ])?;
        let (na, nx) = (self.n_assets, self.n_experience);
        for t in 0..=self.horizon {
            for z in Health::BOTH {
                for a in 0..na {
                    for xi in 0..nx {
                        for xj in 0..nx {
                            let s = DynamicState::new(t, z, a, PerSpouse::new(xi, xj));
                            let mut rec = vec![
                                t.to_string(),
                                z.index().to_string(),
                                a.to_string(),
                                xi.to_string(),
                                xj.to_string(),
                                self.value(&s)?.to_string(),
                            ];
                            if t < self.horizon {
                                rec.extend(
                                    self.solution(&s)?
                                        .probabilities
                                        .iter()
                                        .map(|p| p.to_string()),
                                );
                            } else {
                                rec.extend(std::iter::repeat_n(String::new(), 4));
                            }
                            w.write_record(&rec)?;
                        }
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Snapped next-period experience index per `(t, x, worked)`.
struct ExperienceLaw {
    next: Vec<[usize; 2]>,
    n_experience: usize,
    max_error: f64,
}

impl ExperienceLaw {
    fn new(p: &DynamicParams) -> Self {
        let grid = p.experience_grid();
        let mut next = Vec::with_capacity(p.horizon() * grid.len());
        let mut max_error = 0.0f64;
        for t in 0..p.horizon() {
            for &x in grid.points() {
                let mut cell = [0; 2];
                for worked in [false, true] {
                    let (idx, err) = grid.snap(transition_experience(
                        x,
                        worked,
                        p.accrual(),
                        p.depreciation(t),
                    ));
                    max_error = max_error.max(err);
                    cell[worked as usize] = idx;
                }
                next.push(cell);
            }
        }
        ExperienceLaw {
            next,
            n_experience: grid.len(),
            max_error,
        }
    }

    fn next(&self, t: usize, x: usize, worked: bool) -> usize {
        self.next[t * self.n_experience + x][worked as usize]
    }
}

/// Solves the finite-horizon problem by backward induction. States within a
/// period are solved in parallel; the result does not depend on the thread
/// count.
pub fn solve_bellman(params: &DynamicParams) -> Result<ValueFunction> {
    let (na, nx, horizon) = (
        params.asset_grid().len(),
        params.experience_grid().len(),
        params.horizon(),
    );
    let layer = 2 * na * nx * nx;
    let law = ExperienceLaw::new(params);

    let mut values = vec![0.0; (horizon + 1) * layer];
    for (k, v) in values[horizon * layer..].iter_mut().enumerate() {
        let a = (k / (nx * nx)) % na;
        *v = params.terminal().value(params.asset_grid().get(a));
    }
    let mut policy = vec![None; horizon * layer];

    for t in (0..horizon).rev() {
        let (head, tail) = values.split_at_mut((t + 1) * layer);
        let next = &tail[..layer];
        let solved: Vec<StateSolution> = (0..layer)
            .into_par_iter()
            .map(|k| {
                let xj = k % nx;
                let xi = (k / nx) % nx;
                let a = (k / (nx * nx)) % na;
                let z = Health::from_index(k / (na * nx * nx));
                solve_state(
                    params,
                    &law,
                    next,
                    DynamicState::new(t, z, a, PerSpouse::new(xi, xj)),
                )
            })
            .collect::<Result<_>>()?;
        for (k, sol) in solved.into_iter().enumerate() {
            head[t * layer + k] = sol.value;
            policy[t * layer + k] = Some(sol);
        }
    }

    Ok(ValueFunction {
        horizon,
        n_assets: na,
        n_experience: nx,
        values,
        policy: policy
            .into_iter()
            .map(|s| s.expect("every state solved"))
            .collect(),
        max_snap_error: law.max_error,
    })
}

fn solve_state(
    p: &DynamicParams,
    law: &ExperienceLaw,
    next: &[f64],
    s: DynamicState,
) -> Result<StateSolution> {
    let hh = p.household();
    let assets = p.asset_grid();
    let (na, nx) = (assets.len(), p.experience_grid().len());
    let wages = p.wages(s.experience);
    let care_time = hh.care_time();
    let time = hh.time();
    let cash = wages.husband * time.husband
        + wages.wife * time.wife
        + hh.non_labor_income()
        + (1.0 + p.interest()) * assets.get(s.assets)
        - hh.medical_cost(s.health);
    let u = hh.consumption_utility();
    let sick = s.health.is_poor();

    let mut out = StateSolution {
        value: f64::NEG_INFINITY,
        probabilities: [0.0; 4],
        choice_values: [f64::NEG_INFINITY; 4],
        savings: [None; 4],
        consumption: [f64::NAN; 4],
        continuation: [f64::NAN; 4],
    };
    for (k, choice) in WorkChoice::ALL.into_iter().enumerate() {
        let mut income = cash;
        for sp in [Spouse::Husband, Spouse::Wife] {
            if !choice.works(sp) {
                income -= wages.get(sp) * care_time.get(sp);
            }
        }
        let care = choice.household_care();
        let flow_care = hh.altruism() * hh.care_utility().value(s.health, care);
        let p_sick = p.health().prob_sick(s.t, sick, care);
        let xi = law.next(s.t, s.experience.husband, choice.husband);
        let xj = law.next(s.t, s.experience.wife, choice.wife);
        for a_next in 0..na {
            let c = income - assets.get(a_next);
            if c <= 0.0 {
                break;
            }
            let at = |z: usize| next[((z * na + a_next) * nx + xi) * nx + xj];
            let cont = p.discount() * ((1.0 - p_sick) * at(0) + p_sick * at(1));
            let v = u.value(c)? + flow_care + cont;
            if v > out.choice_values[k] {
                out.choice_values[k] = v;
                out.savings[k] = Some(a_next);
                out.consumption[k] = c;
                out.continuation[k] = cont;
            }
        }
    }
    if out.savings.iter().all(Option::is_none) {
        return Err(Error::EmptyFeasibleSet {
            state: format!("{s}: cash on hand {cash}"),
        });
    }
    let integral = integrate_choice(out.choice_values, &hh.disutility())?;
    out.value = integral.expected_max;
    out.probabilities = integral.probabilities;
    Ok(out)
}

/// Dynamic return to work of one spouse at a state: the static channels plus
/// the discounted change in the continuation value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicWorkReturn {
    pub consumption_gain: f64,
    pub altruism_loss: f64,
    pub future_value: f64,
}

impl DynamicWorkReturn {
    pub fn total(&self) -> f64 {
        self.consumption_gain - self.altruism_loss + self.future_value
    }
}

/// Decomposes `v(work) - v(care)` for `spouse` holding the other spouse's
/// decision fixed, each side evaluated at its optimal savings.
pub fn dynamic_return_to_work(
    params: &DynamicParams,
    vf: &ValueFunction,
    state: &DynamicState,
    spouse: Spouse,
    other_works: bool,
) -> Result<DynamicWorkReturn> {
    let sol = vf.solution(state)?;
    let base = WorkChoice::new(true, true).with(spouse.other(), other_works);
    let (work, care) = (base.with(spouse, true), base.with(spouse, false));
    for ch in [work, care] {
        if sol.savings[ch.index()].is_none() {
            return Err(Error::Infeasible {
                choice: ch.to_string(),
                consumption: sol.consumption[ch.index()],
            });
        }
    }
    let hh = params.household();
    let u = hh.consumption_utility();
    let cu = hh.care_utility();
    let (w, c) = (work.index(), care.index());
    Ok(DynamicWorkReturn {
        consumption_gain: u.value(sol.consumption[w])? - u.value(sol.consumption[c])?,
        altruism_loss: hh.altruism()
            * (cu.value(state.health, care.household_care())
                - cu.value(state.health, work.household_care())),
        future_value: sol.continuation[w] - sol.continuation[c],
    })
}
