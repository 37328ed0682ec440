// Solves the life-cycle model by backward induction and decomposes the
// wife's return to work into its consumption, altruism and human-capital
// parts.
//
// `cargo run --release --example dynamic_solve`

use carelab::dynamic::{dynamic_return_to_work, solve_bellman, DynamicConfig, DynamicState};
use carelab::model::{Health, PerSpouse, Spouse};

pub fn run() -> carelab::Result<()> {
    let cfg = DynamicConfig {
        horizon: 4,
        ..DynamicConfig::default()
    };
    let params = cfg.build()?;
    let vf = solve_bellman(&params)?;
    // transitions past the top of the experience grid are clipped to it
    println!(
        "solved {} periods; largest experience snap {:.2} years",
        vf.horizon(),
        vf.max_snap_error()
    );

    let experience = PerSpouse::new(10, 5);
    for t in 0..vf.horizon() {
        for z in [Health::Good, Health::Poor] {
            let state = DynamicState::new(t, z, 2, experience);
            let sol = vf.solution(&state)?;
            let r = dynamic_return_to_work(&params, &vf, &state, Spouse::Wife, true)?;
            println!(
                "t={t} {z:?}: V={:.3}, P(both work)={:.3}; wife's return {:+.4} = {:+.4} - {:.4} + {:+.4}",
                sol.value,
                sol.probabilities[0],
                r.total(),
                r.consumption_gain,
                r.altruism_loss,
                r.future_value
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
