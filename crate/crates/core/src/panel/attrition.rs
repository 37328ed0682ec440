use rand::seq::SliceRandom;
use rand::Rng;

use super::Panel;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, rng_from};

/// Drops each individual-wave independently with probability `rate`
/// (missing at random). Individuals left with fewer than two waves get
/// randomly chosen dropped waves back until they have two.
pub fn apply_attrition(panel: &Panel, rate: f64, seed: u64) -> Result<Panel> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::param(
            "attrition_rate",
            format!("must lie in [0, 1), got {rate}"),
        ));
    }
    if rate == 0.0 {
        return Ok(panel.clone());
    }
    let rows = panel.rows();
    let mut keep = vec![true; rows.len()];
    let mut start = 0;
    while start < rows.len() {
        let id = rows[start].id;
        let end = start + rows[start..].iter().take_while(|r| r.id == id).count();
        let mut rng = rng_from(derive_seed(seed, id));
        for k in &mut keep[start..end] {
            *k = rng.random::<f64>() >= rate;
        }
        let kept = keep[start..end].iter().filter(|&&k| k).count();
        if kept < 2 {
            let mut dropped: Vec<usize> = (start..end).filter(|&k| !keep[k]).collect();
            dropped.shuffle(&mut rng);
            for k in dropped.into_iter().take(2usize.saturating_sub(kept)) {
                keep[k] = true;
            }
        }
        start = end;
    }
    Panel::new(
        rows.iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(r, _)| r.clone())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{generate_reduced_form, DgpSpec};

    #[test]
    fn zero_rate_is_identity() {
        let (p, _) = generate_reduced_form(&DgpSpec {
            n_individuals: 50,
            ..DgpSpec::default()
        })
        .unwrap();
        assert_eq!(apply_attrition(&p, 0.0, 1).unwrap(), p);
    }

    #[test]
    fn every_id_keeps_two_waves() {
        let (p, _) = generate_reduced_form(&DgpSpec {
            n_individuals: 500,
            ..DgpSpec::default()
        })
        .unwrap();
        let a = apply_attrition(&p, 0.3, 1).unwrap();
        assert!(a.len() < p.len());
        let mut counts = std::collections::BTreeMap::new();
        for r in a.rows() {
            *counts.entry(r.id).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 500);
        assert!(counts.values().all(|&c| c >= 2));
        let heavy = apply_attrition(&p, 0.95, 2).unwrap();
        assert_eq!(heavy.n_ids(), 500);
        assert!(heavy.len() >= 1000 && heavy.len() < 1050);
    }
}
