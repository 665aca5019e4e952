//! Occasion table: `t,day_offset` or `t,date` (ISO `YYYY-MM-DD`), with an
//! optional `period` column naming the reporting period of each occasion.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};
use crate::model::{Calendar, TimeGrid, TimeUnit};

/// Occasion timing and reporting periods read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Occasions {
    /// Days since the first occasion.
    pub day_offsets: Vec<f64>,
    pub calendar: Calendar,
}

impl Occasions {
    pub fn len(&self) -> usize {
        self.day_offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.day_offsets.is_empty()
    }

    pub fn grid(&self, unit: TimeUnit) -> Result<TimeGrid> {
        TimeGrid::new(self.day_offsets.clone(), unit)
    }
}

enum Timing {
    Offset,
    Date,
}

pub fn parse_occasions_csv<R: Read>(input: R, source: &str) -> Result<Occasions> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let (timing, has_period) = match cols.as_slice() {
        ["t", "day_offset"] => (Timing::Offset, false),
        ["t", "day_offset", "period"] => (Timing::Offset, true),
        ["t", "date"] => (Timing::Date, false),
        ["t", "date", "period"] => (Timing::Date, true),
        _ => {
            return Err(Error::invalid(format!(
                "{source}: header must be `t,day_offset` or `t,date`, optionally followed by `period`; found `{}`",
                cols.join(",")
            )))
        }
    };
    // (index, offset or date ordinal, period label)
    let mut entries: Vec<(usize, f64, String)> = Vec::new();
    let mut first_date: Option<NaiveDate> = None;
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k as u64 + 2, |p| p.line());
        let t: usize = record[0].parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
            Error::invalid(format!("{source}, line {line}: bad occasion index `{}`", &record[0]))
        })?;
        if entries.iter().any(|e| e.0 == t) {
            return Err(Error::invalid(format!("{source}, line {line}: duplicate occasion index {t}")));
        }
        let (value, default_period) = match timing {
            Timing::Offset => {
                let v: f64 = record[1].parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                    Error::invalid(format!("{source}, line {line}: bad day offset `{}`", &record[1]))
                })?;
                (v, "all".to_string())
            }
            Timing::Date => {
                let d = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|e| {
                    Error::invalid(format!("{source}, line {line}: bad date `{}`: {e}", &record[1]))
                })?;
                let origin = *first_date.get_or_insert(d);
                ((d - origin).num_days() as f64, d.year().to_string())
            }
        };
        let period = if has_period {
            let p = record[2].to_string();
            if p.is_empty() {
                return Err(Error::invalid(format!("{source}, line {line}: empty period")));
            }
            p
        } else {
            default_period
        };
        entries.push((t, value, period));
    }
    if entries.is_empty() {
        return Err(Error::invalid(format!("{source}: no occasions")));
    }
    entries.sort_by_key(|e| e.0);
    if let Some((k, e)) = entries.iter().enumerate().find(|(k, e)| e.0 != k + 1) {
        return Err(Error::invalid(format!(
            "{source}: occasion indices must run 1..{}; index {} is missing",
            entries.len(),
            if e.0 > k + 1 { k + 1 } else { e.0 }
        )));
    }
    for w in entries.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::invalid(format!(
                "{source}: occasion {} is not later than occasion {}",
                w[1].0, w[0].0
            )));
        }
    }
    let origin = entries[0].1;
    let labels: Vec<String> = entries.iter().map(|e| e.2.clone()).collect();
    Ok(Occasions {
        day_offsets: entries.iter().map(|e| e.1 - origin).collect(),
        calendar: Calendar::from_occasion_labels(&labels),
    })
}

pub fn read_occasions_csv(path: &Path) -> Result<Occasions> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_occasions_csv(file, &path.display().to_string())
}

pub fn write_occasions_csv<W: Write>(occasions: &Occasions, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,day_offset,period")?;
    for (t, (d, p)) in occasions.day_offsets.iter().zip(&occasions.calendar.period_of).enumerate() {
        writeln!(out, "{},{},{}", t + 1, d, occasions.calendar.labels[*p])?;
    }
    Ok(())
}
