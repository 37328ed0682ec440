mod common;

use carelab::model::{expected_choice, optimal_choice, return_to_work, Health, Spouse, WorkChoice};
use carelab::numerics::rng_from;
use common::static_oracle::{enumerate_best, random_config, random_shocks};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimal_choice_is_the_enumerated_argmax(seed in any::<u64>(), poor in any::<bool>()) {
        let mut rng = rng_from(seed);
        let cfg = random_config(&mut rng);
        let p = cfg.build().unwrap();
        let z = if poor { Health::Poor } else { Health::Good };
        let shocks = random_shocks(&mut rng, &p);
        let got = optimal_choice(&p, z, shocks).map(|o| o.work).ok();
        prop_assert_eq!(got, enumerate_best(&cfg, z, shocks));
    }

    #[test]
    fn relabelling_spouses_relabels_the_choice(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let p = random_config(&mut rng).build().unwrap();
        let shocks = random_shocks(&mut rng, &p);
        let swapped_shocks = carelab::model::ShockDraw::new(shocks.wife, shocks.husband).unwrap();
        for z in [Health::Good, Health::Poor] {
            let a = optimal_choice(&p, z, shocks).unwrap();
            let b = optimal_choice(&p.swapped_spouses(), z, swapped_shocks).unwrap();
            prop_assert!((a.utility - b.utility).abs() < 1e-12);
            // ties may resolve differently, so compare the utility of the relabelled choice
            let alt = carelab::model::household_utility(&p, z, b.work.swapped(), shocks).unwrap();
            prop_assert!((alt.utility - a.utility).abs() < 1e-12);
        }
    }

    #[test]
    fn choice_probabilities_form_a_distribution(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let p = random_config(&mut rng).build().unwrap();
        for z in [Health::Good, Health::Poor] {
            let ci = expected_choice(&p, z).unwrap();
            let total: f64 = WorkChoice::ALL.iter().map(|&w| ci.probability(w)).sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "{total}");
            prop_assert!(WorkChoice::ALL.iter().all(|&w| (0.0..=1.0).contains(&ci.probability(w))));
        }
    }

    #[test]
    fn care_is_worth_more_when_parents_are_sick(seed in any::<u64>(), other_works in any::<bool>()) {
        let mut rng = rng_from(seed);
        let mut cfg = random_config(&mut rng);
        cfg.medical_cost = 0.0;
        let p = cfg.build().unwrap();
        for s in [Spouse::Husband, Spouse::Wife] {
            let sick = return_to_work(&p, Health::Poor, s, other_works).unwrap();
            let healthy = return_to_work(&p, Health::Good, s, other_works).unwrap();
            prop_assert_eq!(sick.consumption_gain, healthy.consumption_gain);
            prop_assert!(sick.total() <= healthy.total());
        }
    }
}

/// Simulated choice frequencies agree with the integrated probabilities.
#[test]
fn simulated_frequencies_match_choice_probabilities() {
    let mut rng = rng_from(31);
    for _ in 0..5 {
        let cfg = random_config(&mut rng);
        let p = cfg.build().unwrap();
        let ci = expected_choice(&p, Health::Poor).unwrap();
        let n = 40_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let shocks = random_shocks(&mut rng, &p);
            counts[optimal_choice(&p, Health::Poor, shocks)
                .unwrap()
                .work
                .index()] += 1;
        }
        for w in WorkChoice::ALL {
            let freq = counts[w.index()] as f64 / n as f64;
            let prob = ci.probability(w);
            let tol = 4.5 * (prob * (1.0 - prob) / n as f64).sqrt() + 1e-3;
            assert!((freq - prob).abs() < tol, "{w}: simulated {freq} vs {prob}");
        }
    }
}
