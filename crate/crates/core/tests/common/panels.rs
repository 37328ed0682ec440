//! Hand-built panels for integration tests.

use carelab::panel::{Gender, Panel, PanelObservation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Row with `weekly_hours = y` and neutral covariates.
pub fn obs(id: u64, wave: i64, event_wave: Option<i64>, y: f64) -> PanelObservation {
    PanelObservation {
        id,
        wave,
        gender: if id.is_multiple_of(2) {
            Gender::Female
        } else {
            Gender::Male
        },
        event_wave,
        treated_ever: event_wave.is_some(),
        d_it: event_wave.is_some_and(|e| wave >= e),
        event_time: event_wave.map(|e| wave - e),
        employment: true,
        weekly_hours: Some(y),
        age: 40.0,
        married: true,
        school_years: 9.0,
        self_rated_health: 3.0,
        log_assets: 1.0,
        child_under6: false,
        urban: true,
        father_age: Some(70.0),
        mother_age: Some(68.0),
        true_y0: None,
    }
}

/// Small unbalanced staggered panel with a continuous covariate in
/// `log_assets`; about one id in eight is a singleton.
pub fn random_unbalanced(rng: &mut ChaCha8Rng) -> Panel {
    let n_ids = rng.random_range(8..30u64);
    let n_waves = rng.random_range(3..6i64);
    let waves: Vec<i64> = (0..n_waves).map(|k| 2012 + 2 * k).collect();
    let mut rows = Vec::new();
    for id in 0..n_ids {
        let event = if rng.random_bool(0.4) {
            None
        } else {
            Some(waves[rng.random_range(1..waves.len())])
        };
        let alpha: f64 = rng.random_range(-2.0..2.0);
        let singleton = rng.random_bool(0.125);
        let mut kept = 0;
        for (k, &w) in waves.iter().enumerate() {
            let last = k + 1 == waves.len();
            let keep = if singleton {
                kept == 0 && (last || rng.random_bool(0.4))
            } else {
                rng.random_bool(0.8) || (last && kept < 2)
            };
            if !keep {
                continue;
            }
            kept += 1;
            let d = event.is_some_and(|e| w >= e) as u8 as f64;
            let x: f64 = rng.random_range(0.0..3.0);
            let y = alpha + 0.3 * k as f64 - 0.5 * d + 0.4 * x + rng.random_range(-1.0..1.0);
            let mut r = obs(id, w, event, y);
            r.log_assets = x;
            rows.push(r);
        }
    }
    Panel::new(rows).expect("valid panel")
}
