// Static two-way fixed effects, the event study and the moderated
// specification on one simulated panel.
//
// `cargo run --example twfe_event_study`

use carelab::estimators::{fit, ModeratorForm, ModeratorSource, RegressionSpec, TreatmentTerms};
use carelab::panel::{generate_reduced_form, Column, DgpSpec, EffectProfile};

pub fn run() -> carelab::Result<()> {
    let spec = DgpSpec {
        n_individuals: 2000,
        effect: EffectProfile::Moderated {
            below: -0.08,
            above: -0.02,
            moderator: Column::LogAssets,
        },
        seed: 1,
        ..DgpSpec::default()
    };
    let (panel, truth) = generate_reduced_form(&spec)?;
    println!("true overall effect {:?}\n", truth.overall);

    let specs = [
        ("static", TreatmentTerms::Static),
        ("event study", TreatmentTerms::event_time()),
        (
            "by wealth",
            TreatmentTerms::Interacted {
                source: ModeratorSource::IdMean(Column::LogAssets),
                form: ModeratorForm::AboveMedianIndicator,
            },
        ),
    ];
    for (label, treatment) in specs {
        let spec = RegressionSpec::new(Column::Employment, treatment)
            .with_covariates(vec![Column::ChildUnder6, Column::SelfRatedHealth]);
        let r = fit(&panel, &spec)?;
        println!("{label}: {} obs, {} clusters", r.n_obs, r.n_clusters);
        for c in &r.coefficients {
            println!(
                "  {:<20} {:+.4} ({:.4}) p={:.3}",
                c.name,
                c.estimate,
                c.se,
                c.p.unwrap_or(f64::NAN)
            );
        }
        for d in &r.dropped {
            println!("  {:<20} dropped: {:?}", d.name, d.reason);
        }
        if let Some(w) = r.pre_trend_test() {
            println!(
                "  joint pre-trend F({}, {}) = {:.3}, p = {:.3}",
                w.df1, w.df2, w.statistic, w.p
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
