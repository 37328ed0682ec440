mod common;

use carelab::estimators::{
    fit_group_time, fit_twfe, GroupTimeSpec, Inference, RegressionSpec, TreatmentTerms,
};
use carelab::harness::{
    estimate_panel, read_group_time_csv, read_results_csv, run_montecarlo, run_simulate, run_sweep,
    EstimateOutput, ExperimentConfig, MonteCarloReport, Pipeline,
};
use carelab::model::HouseholdConfig;
use carelab::panel::{
    generate_reduced_form, read_panel_csv, write_panel_csv, Column, DgpSpec, Panel,
    PanelObservation,
};
use common::panels::obs;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text, "test.toml").unwrap()
}

#[test]
fn panel_csv_round_trip_is_lossless() {
    let spec = DgpSpec {
        n_individuals: 200,
        attrition_rate: 0.2,
        seed: 3,
        ..DgpSpec::default()
    };
    let (panel, _) = generate_reduced_form(&spec).unwrap();
    let mut buf = Vec::new();
    write_panel_csv(&panel, &mut buf).unwrap();
    let back = read_panel_csv(buf.as_slice()).unwrap();
    assert_eq!(back, panel);
    let mut again = Vec::new();
    write_panel_csv(&back, &mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn result_csvs_round_trip() {
    let (panel, _) = generate_reduced_form(&DgpSpec {
        n_individuals: 400,
        seed: 8,
        ..DgpSpec::default()
    })
    .unwrap();
    let spec = RegressionSpec::new(Column::Employment, TreatmentTerms::event_time());
    let fit = carelab::estimators::fit(&panel, &spec).unwrap();
    let mut buf = Vec::new();
    fit.write_csv(&mut buf).unwrap();
    let rows = read_results_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), fit.coefficients.len() + fit.dropped.len());
    for c in &fit.coefficients {
        let r = rows.iter().find(|r| r.term == c.name).unwrap();
        assert_eq!(r.estimate, Some(c.estimate));
        assert_eq!(r.se, Some(c.se));
        assert_eq!(r.p, c.p);
        assert_eq!((r.n_obs, r.n_clusters), (fit.n_obs, fit.n_clusters));
    }

    let gt = fit_group_time(
        &panel,
        &GroupTimeSpec {
            inference: Inference::InfluenceFunction,
            ..GroupTimeSpec::new(Column::Employment)
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    gt.write_csv(&mut buf).unwrap();
    let rows = read_group_time_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), gt.cells.len());
    for (r, c) in rows.iter().zip(&gt.cells) {
        assert_eq!(
            (r.g, r.t, r.event_time, r.att, r.se, r.weight),
            (c.g, c.t, c.event_time, c.att, c.se, c.weight)
        );
    }

    let report = run_montecarlo(&config(
        r#"
seed = 4
replications = 3
[dgp]
n_individuals = 300
[[estimator]]
name = "es"
regression = { outcome = "employment", treatment = { kind = "event_time" } }
"#,
    ))
    .unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    assert_eq!(MonteCarloReport::read_csv(buf.as_slice()).unwrap(), report);
}

#[test]
fn employment_without_variation_is_degenerate() {
    let rows: Vec<PanelObservation> = (0..6u64)
        .flat_map(|id| {
            let e = (id < 3).then_some(2014);
            [2012, 2014, 2016].map(|w| obs(id, w, e, 30.0 + id as f64))
        })
        .collect();
    let panel = Panel::new(rows).unwrap();
    let fit = fit_twfe(
        &panel,
        &RegressionSpec::new(Column::Employment, TreatmentTerms::Static),
    )
    .unwrap();
    assert!(fit.degenerate);
    let d = fit.coef("d_it").unwrap();
    assert_eq!((d.estimate, d.se, d.t, d.p), (0.0, 0.0, None, None));
}

#[test]
fn sweep_shapes_and_pure_substitution() {
    let cfg = config("seed = 1\n[sweep]\nwealth_points = 2\nwage_points = 2\n");
    let surface = run_sweep(&cfg).unwrap();
    assert_eq!(surface.cells.len(), 4);

    let cfg = ExperimentConfig {
        model: Some(HouseholdConfig {
            medical_cost: 0.0,
            ..HouseholdConfig::default()
        }),
        ..config("seed = 1\n[sweep]\n")
    };
    let surface = run_sweep(&cfg).unwrap();
    assert_eq!(surface.cells.len(), 121);
    assert!(surface
        .cells
        .iter()
        .all(|c| c.delta_work_prob.unwrap() <= 0.0));
}

#[test]
fn gender_strata_and_winsorizing() {
    let cfg = config(
        r#"
seed = 9
[dgp]
n_individuals = 600
outcome = { kind = "hours", level = 40.0 }
noise_sd = 5.0
[estimate]
stratify_by_gender = true
winsorize_hours = 95
[[estimator]]
name = "twfe"
regression = { outcome = "weekly_hours", treatment = { kind = "static" } }
"#,
    );
    let sim = run_simulate(&ExperimentConfig {
        pipeline: Some(Pipeline::Simulate),
        ..cfg.clone()
    })
    .unwrap();
    let outputs = estimate_panel(&cfg, &sim.panel).unwrap();
    let stems: Vec<String> = outputs.iter().map(|o| o.file_stem()).collect();
    assert_eq!(stems, ["twfe", "twfe_male", "twfe_female"]);
    let n = |k: usize| match &outputs[k].output {
        EstimateOutput::Regression(r) => r.n_obs,
        EstimateOutput::GroupTime(_) => unreachable!(),
    };
    assert_eq!(n(0), n(1) + n(2));
}

/// Under a zero effect the static estimator's 95% intervals cover zero at
/// close to the nominal rate.
#[test]
fn null_effect_coverage_is_nominal() {
    let report = run_montecarlo(&config(
        r#"
seed = 600
replications = 400
[dgp]
n_individuals = 1000
effect = { kind = "constant", tau = 0.0 }
[[estimator]]
name = "twfe"
regression = { outcome = "employment", treatment = { kind = "static" } }
[[estimator]]
name = "cs"
group_time = { outcome = "employment", inference = { kind = "influence_function" } }
"#,
    ))
    .unwrap();
    for (est, term) in [("twfe", "d_it"), ("cs", "overall")] {
        let row = report.row(est, term).unwrap();
        let coverage = row.coverage.unwrap();
        assert!(
            (0.92..=0.98).contains(&coverage),
            "{est}: coverage {coverage}"
        );
        assert!((row.rejection_rate.unwrap() - (1.0 - coverage)).abs() < 1e-12);
    }
}

/// Waves dropped at random leave both estimators centred on the truth.
#[test]
fn attrition_at_random_keeps_estimates_unbiased() {
    let report = run_montecarlo(&config(
        r#"
seed = 700
replications = 100
[dgp]
n_individuals = 2000
attrition_rate = 0.3
effect = { kind = "constant", tau = -0.04 }
[[estimator]]
name = "twfe"
regression = { outcome = "employment", treatment = { kind = "static" } }
[[estimator]]
name = "cs"
group_time = { outcome = "employment", control = "not_yet_treated", inference = { kind = "influence_function" } }
"#,
    ))
    .unwrap();
    for (est, term) in [("twfe", "d_it"), ("cs", "overall")] {
        let row = report.row(est, term).unwrap();
        let mc_se = row.mc_sd.unwrap() / (row.replications as f64).sqrt();
        assert!(
            row.bias.unwrap().abs() < 3.5 * mc_se + 1e-3,
            "{est}: bias {:?}, mc se {mc_se}",
            row.bias
        );
        assert!(
            (0.88..=1.0).contains(&row.coverage.unwrap()),
            "{est}: {:?}",
            row.coverage
        );
    }
}

#[test]
fn structural_monte_carlo_runs_end_to_end() {
    let report = run_montecarlo(&config(
        r#"
seed = 12
replications = 2
[dgp]
mode = "structural"
n_individuals = 300
n_waves = 4
[dynamic]
horizon = 5
[[estimator]]
name = "twfe"
regression = { outcome = "employment", treatment = { kind = "static" } }
"#,
    ))
    .unwrap();
    let row = report.row("twfe", "d_it").unwrap();
    assert_eq!(row.replications, 2);
    assert!(row.mean_estimate.unwrap().is_finite());
}
