// Group-time average treatment effects with never-treated and
// not-yet-treated comparison groups, next to the static TWFE estimate that
// dynamic effects bias.
//
// `cargo run --release --example group_time`

use carelab::estimators::{
    fit_group_time, fit_twfe, ControlGroup, GroupTimeSpec, Inference, RegressionSpec,
    TreatmentTerms,
};
use carelab::panel::{generate_reduced_form, Column, DgpSpec, EffectProfile};

pub fn run() -> carelab::Result<()> {
    let (panel, truth) = generate_reduced_form(&DgpSpec {
        n_individuals: 3000,
        effect: EffectProfile::Dynamic {
            tau: vec![-0.02, -0.06, -0.10, -0.14],
            cohort_slope: 0.0,
        },
        seed: 9,
        ..DgpSpec::default()
    })?;
    println!("true overall ATT {:.4}", truth.overall.unwrap_or(f64::NAN));

    let twfe = fit_twfe(
        &panel,
        &RegressionSpec::new(Column::Employment, TreatmentTerms::Static),
    )?;
    println!(
        "static TWFE        {:+.4}",
        twfe.estimate("d_it").unwrap_or(f64::NAN)
    );

    for (label, control, inference) in [
        (
            "never treated",
            ControlGroup::NeverTreated,
            Inference::InfluenceFunction,
        ),
        (
            "not yet treated",
            ControlGroup::NotYetTreated,
            Inference::Bootstrap {
                draws: 199,
                seed: 1,
            },
        ),
    ] {
        let spec = GroupTimeSpec {
            control,
            inference,
            ..GroupTimeSpec::new(Column::Employment)
        };
        let g = fit_group_time(&panel, &spec)?;
        println!(
            "group-time, {label:<16} {:+.4} ({:.4})",
            g.overall.att, g.overall.se
        );
        for a in &g.by_event_time {
            println!(
                "    e={:>3}: {:+.4} ({:.4}) from {} cells",
                a.event_time.unwrap_or_default(),
                a.att,
                a.se,
                a.n_cells
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
