// Simulates children's labor supply from the solved life-cycle model. The
// ground truth comes from re-simulating every household with parental
// health held good.
//
// `cargo run --release --example structural_panel`

use carelab::dynamic::{solve_bellman, DynamicConfig};
use carelab::panel::{generate_structural, DgpMode, DgpSpec, Gender};

pub fn run() -> carelab::Result<()> {
    let params = DynamicConfig::default().build()?;
    let vf = solve_bellman(&params)?;
    let spec = DgpSpec {
        mode: DgpMode::Structural,
        n_individuals: 1500,
        seed: 8,
        ..DgpSpec::default()
    };
    let (panel, truth) = generate_structural(&spec, &params, &vf)?;
    println!(
        "{} rows; true overall employment effect {:?}",
        panel.len(),
        truth.overall
    );
    for g in [Gender::Female, Gender::Male] {
        let t = truth.restrict_to(&panel.by_gender(g));
        println!("  {}: {:?}", g.as_str(), t.overall);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
