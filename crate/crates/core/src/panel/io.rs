use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Gender, Panel, PanelObservation};
use crate::error::{Error, Result};

pub const PANEL_HEADER: [&str; 19] = [
    "id",
    "wave",
    "gender",
    "event_wave",
    "treated_ever",
    "d_it",
    "event_time",
    "employment",
    "weekly_hours",
    "age",
    "married",
    "school_years",
    "self_rated_health",
    "log_assets",
    "child_under6",
    "urban",
    "father_age",
    "mother_age",
    "true_y0",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> String {
    (b as u8).to_string()
}

pub fn write_panel_csv<W: Write>(panel: &Panel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PANEL_HEADER)?;
    for r in panel.rows() {
        w.write_record([
            r.id.to_string(),
            r.wave.to_string(),
            r.gender.as_str().to_string(),
            opt(r.event_wave),
            flag(r.treated_ever),
            flag(r.d_it),
            opt(r.event_time),
            flag(r.employment),
            opt(r.weekly_hours),
            r.age.to_string(),
            flag(r.married),
            r.school_years.to_string(),
            r.self_rated_health.to_string(),
            r.log_assets.to_string(),
            flag(r.child_under6),
            flag(r.urban),
            opt(r.father_age),
            opt(r.mother_age),
            opt(r.true_y0),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_panel(panel: &Panel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_panel_csv(panel, std::io::BufWriter::new(file))
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    row: usize,
}

impl Fields<'_> {
    fn raw(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("")
    }

    fn err(&self, col: usize, reason: impl Into<String>) -> Error {
        Error::Schema {
            row: self.row,
            column: PANEL_HEADER[col].to_string(),
            reason: reason.into(),
        }
    }

    fn opt<T: std::str::FromStr>(&self, col: usize) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.raw(col);
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|e| self.err(col, format!("cannot parse `{s}`: {e}")))
    }

    fn req<T: std::str::FromStr>(&self, col: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(col)?
            .ok_or_else(|| self.err(col, "required value is missing"))
    }

    fn real(&self, col: usize) -> Result<f64> {
        let v: f64 = self.req(col)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(col, "must be finite"))
        }
    }

    fn opt_real(&self, col: usize) -> Result<Option<f64>> {
        match self.opt::<f64>(col)? {
            Some(v) if !v.is_finite() => Err(self.err(col, "must be finite")),
            v => Ok(v),
        }
    }

    fn flag(&self, col: usize) -> Result<bool> {
        match self.raw(col) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(self.err(col, format!("expected 0 or 1, got `{other}`"))),
        }
    }
}

/// Parses a panel CSV. Rows are numbered from 1 (the first data row);
/// `true_y0` may be absent from the file entirely.
pub fn read_panel_csv<R: Read>(input: R) -> Result<Panel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    let expected_short = &PANEL_HEADER[..PANEL_HEADER.len() - 1];
    let names: Vec<&str> = header.iter().collect();
    if names != PANEL_HEADER && names != expected_short {
        let bad = names
            .iter()
            .zip(PANEL_HEADER.iter())
            .position(|(a, b)| a != b)
            .unwrap_or(names.len().min(PANEL_HEADER.len()));
        return Err(Error::Schema {
            row: 0,
            column: names.get(bad).unwrap_or(&"<missing>").to_string(),
            reason: format!("header must be `{}`", PANEL_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let f = Fields {
            rec: &rec,
            row: k + 1,
        };
        let gender: Gender = f.req(2)?;
        rows.push(PanelObservation {
            id: f.req(0)?,
            wave: f.req(1)?,
            gender,
            event_wave: f.opt(3)?,
            treated_ever: f.flag(4)?,
            d_it: f.flag(5)?,
            event_time: f.opt(6)?,
            employment: f.flag(7)?,
            weekly_hours: f.opt_real(8)?,
            age: f.real(9)?,
            married: f.flag(10)?,
            school_years: f.real(11)?,
            self_rated_health: f.real(12)?,
            log_assets: f.real(13)?,
            child_under6: f.flag(14)?,
            urban: f.flag(15)?,
            father_age: f.opt_real(16)?,
            mother_age: f.opt_real(17)?,
            true_y0: if rec.len() > 18 {
                f.opt_real(18)?
            } else {
                None
            },
        });
    }
    Panel::with_row_offset(rows, 1)
}

pub fn read_panel(path: &Path) -> Result<Panel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel_csv(std::io::BufReader::new(file))
}
