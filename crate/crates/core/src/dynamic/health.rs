//! Simulated parental health histories under an exogenous care rule.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::HealthTransition;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CarePolicy {
    Never,
    Always,
    /// Care is provided with this probability whenever the parent is sick.
    WhenSick {
        probability: f64,
    },
}

impl Default for CarePolicy {
    fn default() -> Self {
        CarePolicy::WhenSick { probability: 0.5 }
    }
}

impl CarePolicy {
    fn draw<R: Rng + ?Sized>(&self, sick: bool, rng: &mut R) -> bool {
        match *self {
            CarePolicy::Never => false,
            CarePolicy::Always => true,
            CarePolicy::WhenSick { probability } => sick && rng.random::<f64>() < probability,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CarePolicy::WhenSick { probability } if !(0.0..=1.0).contains(probability) => Err(
                Error::param("care_policy.probability", "must lie in [0, 1]"),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HealthPath {
    pub sick: Vec<bool>,
    pub care: Vec<bool>,
}

pub fn simulate_health_path(
    chain: &HealthTransition,
    policy: CarePolicy,
    periods: usize,
    seed: u64,
) -> Result<HealthPath> {
    policy.validate()?;
    Ok(path(chain, policy, periods, &mut rng_from(seed)))
}

fn path<R: Rng + ?Sized>(
    chain: &HealthTransition,
    policy: CarePolicy,
    periods: usize,
    rng: &mut R,
) -> HealthPath {
    let mut sick = Vec::with_capacity(periods);
    let mut care = Vec::with_capacity(periods);
    let mut z = rng.random::<f64>() < chain.initial_sick();
    for t in 0..periods {
        let d = policy.draw(z, rng);
        sick.push(z);
        care.push(d);
        z = rng.random::<f64>() < chain.prob_sick(t, z, d);
    }
    HealthPath { sick, care }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HealthRate {
    pub age: f64,
    /// Share sick.
    pub unconditional: f64,
    /// Share sick among those sick in the previous period; `None` in the
    /// first period or when nobody was sick.
    pub conditional: Option<f64>,
}

/// Per-period hospitalization rates over `n_paths` independent histories.
/// Path `k` uses seed `derive_seed(seed, k)`.
pub fn health_rates(
    chain: &HealthTransition,
    policy: CarePolicy,
    periods: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<HealthRate>> {
    policy.validate()?;
    if n_paths == 0 {
        return Err(Error::param("n_paths", "must be positive"));
    }
    // (sick, previously sick, sick and previously sick) counts per period
    let zero = || vec![[0u64; 3]; periods];
    let counts = (0..n_paths)
        .into_par_iter()
        .fold(zero, |mut acc, k| {
            let h = path(
                chain,
                policy,
                periods,
                &mut rng_from(derive_seed(seed, k as u64)),
            );
            for (t, c) in acc.iter_mut().enumerate() {
                c[0] += h.sick[t] as u64;
                if t > 0 && h.sick[t - 1] {
                    c[1] += 1;
                    c[2] += h.sick[t] as u64;
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for i in 0..3 {
                    x[i] += y[i];
                }
            }
            a
        });
    Ok(counts
        .iter()
        .enumerate()
        .map(|(t, c)| HealthRate {
            age: chain.age_at(t),
            unconditional: c[0] as f64 / n_paths as f64,
            conditional: (c[1] > 0).then(|| c[2] as f64 / c[1] as f64),
        })
        .collect())
}

/// CSV with header `age,uncond_rate,cond_rate`.
pub fn write_health_rates<W: std::io::Write>(rates: &[HealthRate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["age", "uncond_rate", "cond_rate"])?;
    for r in rates {
        w.write_record([
            r.age.to_string(),
            r.unconditional.to_string(),
            r.conditional.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::AgeProfile;

    #[test]
    fn stationary_share_of_two_state_chain() {
        // p01 = 0.1, p11 = 0.6: stationary share 0.1 / (1 - 0.6 + 0.1) = 0.2
        let chain = HealthTransition::constant([[0.1, 0.1], [0.6, 0.5]], 0.2).unwrap();
        let rates = health_rates(&chain, CarePolicy::Never, 30, 40_000, 3).unwrap();
        let last = rates.last().unwrap();
        assert!((last.unconditional - 0.2).abs() < 0.01, "{last:?}");
        assert!((last.conditional.unwrap() - 0.6).abs() < 0.02);
    }

    #[test]
    fn care_lowers_persistence() {
        let chain = AgeProfile::default().build().unwrap();
        let never = health_rates(&chain, CarePolicy::Never, 21, 20_000, 5).unwrap();
        let always = health_rates(&chain, CarePolicy::Always, 21, 20_000, 5).unwrap();
        assert!(always[20].unconditional < never[20].unconditional);
    }

    #[test]
    fn rates_do_not_depend_on_thread_count() {
        let chain = AgeProfile::default().build().unwrap();
        let a = health_rates(&chain, CarePolicy::default(), 21, 2_000, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| health_rates(&chain, CarePolicy::default(), 21, 2_000, 9).unwrap());
        assert_eq!(a, b);
    }
}
