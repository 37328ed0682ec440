use super::*;
use crate::panel::fixtures::row;
use crate::panel::{Column, Panel};

/// Two treated (first treated 2014) and two never-treated individuals over
/// 2012 and 2014. Treated changes are 3 and 4, control changes 1 and 2.
fn two_by_two() -> Panel {
    Panel::new(vec![
        row(1, 2012, Some(2014), 1.0),
        row(1, 2014, Some(2014), 4.0),
        row(2, 2012, Some(2014), 2.0),
        row(2, 2014, Some(2014), 6.0),
        row(3, 2012, None, 0.0),
        row(3, 2014, None, 1.0),
        row(4, 2012, None, 3.0),
        row(4, 2014, None, 5.0),
    ])
    .unwrap()
}

fn hours(t: TreatmentTerms) -> RegressionSpec {
    RegressionSpec::new(Column::WeeklyHours, t)
}

#[test]
fn two_by_two_matches_hand_computation() {
    let r = fit_twfe(&two_by_two(), &hours(TreatmentTerms::Static)).unwrap();
    let c = r.coef("d_it").unwrap();
    // 3.5 - 1.5
    assert!((c.estimate - 2.0).abs() < 1e-12);
    // demeaned d = ±1/4, residuals ±1/4, scores ±1/8:
    // V = (4/64) / (1/2)^2 * [4/3 * 7/6]
    assert!((c.se - (7.0f64 / 18.0).sqrt()).abs() < 1e-12);
    assert_eq!(r.k, 2);
    assert_eq!((r.n_obs, r.n_clusters), (8, 4));
    let t = c.t.unwrap();
    assert!((t - 2.0 / (7.0f64 / 18.0).sqrt()).abs() < 1e-10);
    let p = c.p.unwrap();
    // two-sided p from t(3)
    assert!(p > 0.02 && p < 0.05, "{p}");
}

#[test]
fn single_term_wald_test_is_the_squared_t() {
    let r = fit_twfe(&two_by_two(), &hours(TreatmentTerms::Static)).unwrap();
    let c = r.coef("d_it").unwrap();
    let w = r.wald_test(&["d_it"]).unwrap();
    assert!((w.statistic - c.t.unwrap().powi(2)).abs() < 1e-10);
    assert!((w.p - c.p.unwrap()).abs() < 1e-10);
    assert_eq!((w.df1, w.df2), (1, 3));
    assert!(r.wald_test(&["nothing"]).is_none());
    assert!(r.pre_trend_test().is_none());
}

#[test]
fn group_time_on_two_by_two() {
    let spec = GroupTimeSpec {
        inference: Inference::InfluenceFunction,
        ..GroupTimeSpec::new(Column::WeeklyHours)
    };
    let g = fit_group_time(&two_by_two(), &spec).unwrap();
    assert_eq!(g.cells.len(), 1);
    assert!((g.overall.att - 2.0).abs() < 1e-12);
    // sqrt(0.25/2 + 0.25/2)
    assert!((g.overall.se - 0.5).abs() < 1e-12);
    assert_eq!(g.cells[0].weight, 1.0);
    assert_eq!(g.cells[0].event_time, 0);
}

#[test]
fn constant_covariate_is_dropped_as_collinear() {
    let spec = hours(TreatmentTerms::Static).with_covariates(vec![Column::SchoolYears]);
    let r = fit_twfe(&two_by_two(), &spec).unwrap();
    assert_eq!(
        r.dropped,
        vec![DroppedColumn {
            name: "school_years".into(),
            reason: DropReason::Collinear
        }]
    );
    assert!((r.estimate("d_it").unwrap() - 2.0).abs() < 1e-12);
    assert!(r.coef("school_years").is_none());
}

#[test]
fn event_study_omits_reference_and_flags_empty_bins() {
    let mut rows = Vec::new();
    for (id, e) in [(1, Some(2014)), (2, Some(2016)), (3, None), (4, None)] {
        for (k, w) in [2012, 2014, 2016].into_iter().enumerate() {
            rows.push(row(
                id,
                w,
                e,
                (id * 3 + k as u64) as f64 + e.map_or(0.0, |e| (w >= e) as u8 as f64),
            ));
        }
    }
    let panel = Panel::new(rows).unwrap();
    let r = fit_event_study(&panel, &hours(TreatmentTerms::event_time())).unwrap();
    let names: Vec<&str> = r.coefficients.iter().map(|c| c.name.as_str()).collect();
    assert!(!names.contains(&"event_-2"));
    assert!(!r.dropped.iter().any(|d| d.name == "event_-2"));
    assert!(names.contains(&"event_0"));
    let empty: Vec<&str> = r
        .dropped
        .iter()
        .filter(|d| d.reason == DropReason::EmptyCell)
        .map(|d| d.name.as_str())
        .collect();
    for q in ["event_-8", "event_-6", "event_6", "event_8"] {
        assert!(empty.contains(&q), "{q} should be an empty cell");
    }
    assert!((r.estimate("event_0").unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn zero_within_variation_is_degenerate() {
    let panel = two_by_two();
    let r = fit_twfe(
        &panel,
        &RegressionSpec::new(Column::Employment, TreatmentTerms::Static),
    )
    .unwrap();
    assert!(r.degenerate);
    let c = r.coef("d_it").unwrap();
    assert_eq!((c.estimate, c.se, c.t), (0.0, 0.0, None));
}

#[test]
fn time_varying_moderator_is_rejected() {
    let mut rows = two_by_two().into_rows();
    rows[1].log_assets = 2.0;
    let panel = Panel::new(rows).unwrap();
    let spec = hours(TreatmentTerms::Interacted {
        source: ModeratorSource::Column(Column::LogAssets),
        form: ModeratorForm::AboveMedianIndicator,
    });
    assert!(matches!(
        fit_interacted(&panel, &spec),
        Err(Error::TimeVaryingModerator { id: 1, .. })
    ));
    let spec = hours(TreatmentTerms::Interacted {
        source: ModeratorSource::IdMean(Column::LogAssets),
        form: ModeratorForm::AboveMedianIndicator,
    });
    assert!(fit_interacted(&panel, &spec).is_ok());
}

fn moderated_panel() -> Panel {
    let mut rows = Vec::new();
    for id in 0..12u64 {
        let e = match id % 3 {
            0 => None,
            1 => Some(2014),
            _ => Some(2016),
        };
        let urban = id % 2 == 0;
        for (k, w) in [2012, 2014, 2016].into_iter().enumerate() {
            let d = e.is_some_and(|e| w >= e) as u8 as f64;
            let y = id as f64
                + 0.7 * k as f64
                + d * (1.0 + 2.0 * urban as u8 as f64)
                + ((id * 7 + k as u64) % 5) as f64 * 0.1;
            let mut r = row(id, w, e, y);
            r.urban = urban;
            rows.push(r);
        }
    }
    Panel::new(rows).unwrap()
}

#[test]
fn binary_moderator_parameterizations_agree() {
    let panel = moderated_panel();
    let fit_form = |form| {
        fit_interacted(
            &panel,
            &hours(TreatmentTerms::Interacted {
                source: ModeratorSource::Column(Column::Urban),
                form,
            }),
        )
        .unwrap()
    };
    let raw = fit_form(ModeratorForm::Raw);
    let centered = fit_form(ModeratorForm::CenteredAtMedian);
    // median of a balanced 0/1 moderator is 0.5
    let (a, b) = (
        raw.estimate("d_it").unwrap(),
        raw.estimate("d_it_x_urban").unwrap(),
    );
    let (a2, b2) = (
        centered.estimate("d_it").unwrap(),
        centered.estimate("d_it_x_urban").unwrap(),
    );
    assert!((b - b2).abs() < 1e-10);
    assert!((a + 0.5 * b - a2).abs() < 1e-10);
    assert!((raw.r2_within - centered.r2_within).abs() < 1e-12);
    let ind = fit_form(ModeratorForm::AboveMedianIndicator);
    assert!((ind.estimate("d_it_x_urban").unwrap() - b).abs() < 1e-10);
}

#[test]
fn relabeling_waves_preserves_estimates() {
    let panel = moderated_panel();
    let relabeled = Panel::new(
        panel
            .rows()
            .iter()
            .map(|r| {
                let map = |w: i64| (w - 2010) / 2 * 5 + 1;
                row(
                    r.id,
                    map(r.wave),
                    r.event_wave.map(map),
                    r.weekly_hours.unwrap(),
                )
            })
            .collect(),
    )
    .unwrap();
    for t in [TreatmentTerms::Static, TreatmentTerms::event_time()] {
        let a = fit(&panel, &hours(t.clone())).unwrap();
        let b = fit(&relabeled, &hours(t)).unwrap();
        assert_eq!(a.coefficients.len(), b.coefficients.len());
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert_eq!(x.name, y.name);
            assert!((x.estimate - y.estimate).abs() < 1e-10);
            assert!((x.se - y.se).abs() < 1e-10);
        }
    }
}

#[test]
fn singletons_are_kept_and_counted() {
    let mut rows = two_by_two().into_rows();
    rows.push(row(9, 2014, None, 11.0));
    let panel = Panel::new(rows).unwrap();
    let r = fit_twfe(&panel, &hours(TreatmentTerms::Static)).unwrap();
    assert_eq!(r.n_singletons, 1);
    assert_eq!(r.n_obs, 9);
    assert!((r.estimate("d_it").unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn group_time_not_yet_treated_uses_later_cohorts() {
    let panel = moderated_panel();
    let never = fit_group_time(&panel, &GroupTimeSpec::new(Column::WeeklyHours)).unwrap();
    let nyt = fit_group_time(
        &panel,
        &GroupTimeSpec {
            control: ControlGroup::NotYetTreated,
            ..GroupTimeSpec::new(Column::WeeklyHours)
        },
    )
    .unwrap();
    let cell = |g: &GroupTimeATT| {
        g.cells
            .iter()
            .find(|c| c.g == 2014 && c.t == 2014)
            .unwrap()
            .n_control
    };
    assert_eq!(cell(&never), 4);
    // cohort 2016 is still untreated in 2014
    assert_eq!(cell(&nyt), 8);
    let weights: f64 = nyt.cells.iter().map(|c| c.weight).sum();
    assert!((weights - 1.0).abs() < 1e-12);
}

#[test]
fn bootstrap_is_seeded() {
    let panel = moderated_panel();
    let spec = GroupTimeSpec {
        inference: Inference::Bootstrap { draws: 99, seed: 5 },
        ..GroupTimeSpec::new(Column::WeeklyHours)
    };
    let a = fit_group_time(&panel, &spec).unwrap();
    let b = fit_group_time(&panel, &spec).unwrap();
    assert_eq!(a, b);
    assert!(a.overall.se > 0.0);
}

#[test]
fn csv_layout() {
    let r = fit_twfe(
        &two_by_two(),
        &hours(TreatmentTerms::Static).with_covariates(vec![Column::SchoolYears]),
    )
    .unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "term,estimate,se,t,p,n_obs,n_clusters");
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "d_it");
    assert!((first[1].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(lines[2], "school_years,,,,,8,4");
}

#[test]
fn zero_moderator_reduces_to_twfe() {
    let panel = moderated_panel();
    let spec = hours(TreatmentTerms::Interacted {
        source: ModeratorSource::Column(Column::ChildUnder6),
        form: ModeratorForm::Raw,
    });
    let r = fit_interacted(&panel, &spec).unwrap();
    assert_eq!(r.dropped.len(), 1);
    assert_eq!(r.dropped[0].reason, DropReason::Collinear);
    let twfe = fit_twfe(&panel, &hours(TreatmentTerms::Static)).unwrap();
    assert!((r.estimate("d_it").unwrap() - twfe.estimate("d_it").unwrap()).abs() < 1e-12);
}
