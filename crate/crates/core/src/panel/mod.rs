//! Synthetic child-by-wave panels with staggered first parental
//! hospitalization and known treatment effects.

mod attrition;
mod io;
mod reduced_form;
mod structural;
mod truth;

use serde::{Deserialize, Serialize};

pub use attrition::apply_attrition;
pub use io::{read_panel, read_panel_csv, write_panel, write_panel_csv, PANEL_HEADER};
pub use reduced_form::{
    generate_reduced_form, DgpMode, DgpSpec, EffectProfile, OutcomeKind, TrendSpec,
};
pub use structural::generate_structural;
pub use truth::GroundTruth;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl std::str::FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "male" => Ok(Gender::Male),
            "female" => Ok(Gender::Female),
            other => Err(format!("expected `male` or `female`, got `{other}`")),
        }
    }
}

/// One child-by-wave row. Waves are survey years; `event_time` is in years.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelObservation {
    pub id: u64,
    pub wave: i64,
    pub gender: Gender,
    /// Wave of the first parental hospitalization, if any.
    pub event_wave: Option<i64>,
    pub treated_ever: bool,
    pub d_it: bool,
    pub event_time: Option<i64>,
    pub employment: bool,
    /// Present iff employed.
    pub weekly_hours: Option<f64>,
    pub age: f64,
    pub married: bool,
    pub school_years: f64,
    /// 1 (poor) to 5 (excellent).
    pub self_rated_health: f64,
    pub log_assets: f64,
    pub child_under6: bool,
    pub urban: bool,
    pub father_age: Option<f64>,
    pub mother_age: Option<f64>,
    /// Untreated potential outcome; known only for simulated panels.
    pub true_y0: Option<f64>,
}

/// Numeric view of a panel column for use as outcome, covariate or
/// moderator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Employment,
    WeeklyHours,
    Age,
    AgeSq,
    Married,
    SchoolYears,
    SelfRatedHealth,
    LogAssets,
    ChildUnder6,
    Urban,
    FatherAge,
    FatherAgeSq,
    MotherAge,
    MotherAgeSq,
    Female,
    TrueY0,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Employment => "employment",
            Column::WeeklyHours => "weekly_hours",
            Column::Age => "age",
            Column::AgeSq => "age_sq",
            Column::Married => "married",
            Column::SchoolYears => "school_years",
            Column::SelfRatedHealth => "self_rated_health",
            Column::LogAssets => "log_assets",
            Column::ChildUnder6 => "child_under6",
            Column::Urban => "urban",
            Column::FatherAge => "father_age",
            Column::FatherAgeSq => "father_age_sq",
            Column::MotherAge => "mother_age",
            Column::MotherAgeSq => "mother_age_sq",
            Column::Female => "female",
            Column::TrueY0 => "true_y0",
        }
    }

    /// `None` when the value is missing on this row.
    pub fn value(self, o: &PanelObservation) -> Option<f64> {
        let b = |x: bool| x as u8 as f64;
        match self {
            Column::Employment => Some(b(o.employment)),
            Column::WeeklyHours => o.weekly_hours,
            Column::Age => Some(o.age),
            Column::AgeSq => Some(o.age * o.age),
            Column::Married => Some(b(o.married)),
            Column::SchoolYears => Some(o.school_years),
            Column::SelfRatedHealth => Some(o.self_rated_health),
            Column::LogAssets => Some(o.log_assets),
            Column::ChildUnder6 => Some(b(o.child_under6)),
            Column::Urban => Some(b(o.urban)),
            Column::FatherAge => o.father_age,
            Column::FatherAgeSq => o.father_age.map(|a| a * a),
            Column::MotherAge => o.mother_age,
            Column::MotherAgeSq => o.mother_age.map(|a| a * a),
            Column::Female => Some(b(o.gender == Gender::Female)),
            Column::TrueY0 => o.true_y0,
        }
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows sorted by `(id, wave)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    rows: Vec<PanelObservation>,
}

impl Panel {
    /// Sorts rows and validates the schema invariants.
    pub fn new(rows: Vec<PanelObservation>) -> Result<Self> {
        Panel::with_row_offset(rows, 0)
    }

    /// As [`Panel::new`]; schema errors report `input index + offset`.
    pub(crate) fn with_row_offset(rows: Vec<PanelObservation>, offset: usize) -> Result<Self> {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&k| (rows[k].id, rows[k].wave));
        validate(&rows, &order, offset)?;
        let mut slots: Vec<Option<PanelObservation>> = rows.into_iter().map(Some).collect();
        let rows = order
            .iter()
            .map(|&k| slots[k].take().expect("permutation"))
            .collect();
        Ok(Panel { rows })
    }

    pub fn rows(&self) -> &[PanelObservation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct waves in increasing order.
    pub fn waves(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.rows.iter().map(|r| r.wave).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn n_ids(&self) -> usize {
        let mut last = None;
        let mut n = 0;
        for r in &self.rows {
            if last != Some(r.id) {
                n += 1;
                last = Some(r.id);
            }
        }
        n
    }

    /// Rows satisfying `keep`, preserving order.
    pub fn filter(&self, keep: impl Fn(&PanelObservation) -> bool) -> Panel {
        Panel {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn by_gender(&self, gender: Gender) -> Panel {
        self.filter(|r| r.gender == gender)
    }

    pub fn into_rows(self) -> Vec<PanelObservation> {
        self.rows
    }
}

fn validate(rows: &[PanelObservation], order: &[usize], offset: usize) -> Result<()> {
    let fail = |k: usize, column: &str, reason: String| Error::Schema {
        row: k + offset,
        column: column.to_string(),
        reason,
    };
    for (k, r) in rows.iter().enumerate() {
        if r.treated_ever != r.event_wave.is_some() {
            return Err(fail(
                k,
                "treated_ever",
                "must equal presence of event_wave".into(),
            ));
        }
        let expect_d = r.event_wave.is_some_and(|e| r.wave >= e);
        if r.d_it != expect_d {
            return Err(fail(
                k,
                "d_it",
                format!("must equal 1{{wave >= event_wave}} = {}", expect_d as u8),
            ));
        }
        if r.event_time != r.event_wave.map(|e| r.wave - e) {
            return Err(fail(k, "event_time", "must equal wave - event_wave".into()));
        }
        if r.employment != r.weekly_hours.is_some() {
            return Err(fail(
                k,
                "weekly_hours",
                "must be present exactly when employed".into(),
            ));
        }
    }
    for w in order.windows(2) {
        let (prev, r) = (&rows[w[0]], &rows[w[1]]);
        if prev.id != r.id {
            continue;
        }
        if prev.wave == r.wave {
            return Err(fail(
                w[1],
                "wave",
                format!("duplicate (id, wave) = ({}, {})", r.id, r.wave),
            ));
        }
        if prev.event_wave != r.event_wave {
            return Err(fail(
                w[1],
                "event_wave",
                format!("must be constant within id {}", r.id),
            ));
        }
        if prev.gender != r.gender {
            return Err(fail(
                w[1],
                "gender",
                format!("must be constant within id {}", r.id),
            ));
        }
    }
    Ok(())
}
