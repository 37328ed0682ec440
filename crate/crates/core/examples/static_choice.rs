// The static household problem: the best work/care allocation for given
// disutility draws, the choice probabilities with the draws integrated out,
// and the worker-type partition of the wife's disutility axis.
//
// `cargo run --example static_choice`

use carelab::model::{
    classify_types, expected_choice, optimal_choice, return_to_work, Health, HouseholdConfig,
    ShockDraw, Spouse, WorkChoice,
};

pub fn run() -> carelab::Result<()> {
    let params = HouseholdConfig::default().build()?;

    for z in [Health::Good, Health::Poor] {
        let best = optimal_choice(&params, z, ShockDraw::new(0.2, 0.4)?)?;
        println!(
            "{z:?} health, shocks (0.2, 0.4): {} with consumption {:.3}",
            best.work, best.consumption
        );

        let probs = expected_choice(&params, z)?;
        for w in WorkChoice::ALL {
            println!("  P{w} = {:.4}", probs.probability(w));
        }
        let s = return_to_work(&params, z, Spouse::Wife, true)?;
        println!(
            "  wife's return to work: consumption gain {:.4}, altruism loss {:.4}, net {:.4}",
            s.consumption_gain,
            s.altruism_loss,
            s.total()
        );
    }

    let types = classify_types(&params)?;
    for (kind, lo, hi) in types.intervals() {
        println!("{kind:?}: disutility in ({lo:.4}, {hi:.4}]");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
