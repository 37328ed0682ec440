// Draws a staggered-adoption panel with a dynamic treatment effect and
// prints its ground truth and first rows.
//
// `cargo run --example reduced_form_panel`

use carelab::panel::{generate_reduced_form, write_panel_csv, DgpSpec, EffectProfile};

pub fn run() -> carelab::Result<()> {
    let spec = DgpSpec {
        n_individuals: 500,
        effect: EffectProfile::Dynamic {
            tau: vec![-0.02, -0.04, -0.06],
            cohort_slope: 0.0,
        },
        attrition_rate: 0.1,
        seed: 2024,
        ..DgpSpec::default()
    };
    let (panel, truth) = generate_reduced_form(&spec)?;
    println!(
        "{} rows, {} individuals, waves {:?}",
        panel.len(),
        panel.n_ids(),
        panel.waves()
    );
    println!("true overall ATT {:?}", truth.overall);
    for (e, tau) in &truth.by_event_time {
        println!("  event time {e:>2}: {tau:+.3} ({} obs)", truth.counts[e]);
    }

    let mut buf = Vec::new();
    write_panel_csv(&panel, &mut buf)?;
    for line in String::from_utf8_lossy(&buf).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
