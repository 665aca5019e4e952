//! Occasion timestamps and inter-occasion lags.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Days in one month: a twelfth of the Julian year.
pub const MONTH_DAYS: f64 = 365.25 / 12.0;
pub const YEAR_DAYS: f64 = 365.25;

/// Time unit in which survival probabilities are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Day,
    Week,
    #[default]
    Month,
    Year,
}

impl TimeUnit {
    pub fn days(self) -> f64 {
        match self {
            TimeUnit::Day => 1.0,
            TimeUnit::Week => 7.0,
            TimeUnit::Month => MONTH_DAYS,
            TimeUnit::Year => YEAR_DAYS,
        }
    }
}

impl std::str::FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "day" | "days" => Ok(TimeUnit::Day),
            "week" | "weeks" => Ok(TimeUnit::Week),
            "month" | "months" => Ok(TimeUnit::Month),
            "year" | "years" => Ok(TimeUnit::Year),
            other => Err(Error::invalid(format!("unknown time unit `{other}`"))),
        }
    }
}

/// Capture occasions on a (possibly irregular) calendar.
///
/// `lags[0]` is always zero: survival only acts between occasions, so the
/// first occasion carries no compounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    occasion_times: Vec<f64>,
    unit: TimeUnit,
    unit_days: f64,
    lags: Vec<f64>,
}

impl TimeGrid {
    /// Builds a grid from day offsets. Needs at least two strictly increasing offsets.
    pub fn new(occasion_times: Vec<f64>, unit: TimeUnit) -> Result<Self> {
        Self::with_unit_length(occasion_times, unit, unit.days())
    }

    /// Same as [`TimeGrid::new`] with an explicit unit length in days.
    pub fn with_unit_length(occasion_times: Vec<f64>, unit: TimeUnit, unit_days: f64) -> Result<Self> {
        if occasion_times.len() < 2 {
            return Err(Error::invalid(format!(
                "a time grid needs at least 2 occasions, got {}",
                occasion_times.len()
            )));
        }
        if !(unit_days.is_finite() && unit_days > 0.0) {
            return Err(Error::invalid(format!("unit length must be positive, got {unit_days}")));
        }
        if let Some(t) = occasion_times.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("occasion {} has a non-finite offset", t + 1)));
        }
        for (t, w) in occasion_times.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::invalid(format!(
                    "occasion offsets must be strictly increasing: occasion {} ({}) <= occasion {} ({})",
                    t + 2,
                    w[1],
                    t + 1,
                    w[0]
                )));
            }
        }
        let mut lags = Vec::with_capacity(occasion_times.len());
        lags.push(0.0);
        lags.extend(occasion_times.windows(2).map(|w| (w[1] - w[0]) / unit_days));
        Ok(Self { occasion_times, unit, unit_days, lags })
    }

    /// Builds a grid from day lags between consecutive occasions (first occasion at day 0).
    pub fn from_day_lags(day_lags: &[f64], unit: TimeUnit) -> Result<Self> {
        let mut times = Vec::with_capacity(day_lags.len() + 1);
        let mut acc = 0.0;
        times.push(acc);
        for &lag in day_lags {
            acc += lag;
            times.push(acc);
        }
        Self::new(times, unit)
    }

    /// A one-occasion grid. Only useful for toy models; user input always goes
    /// through [`TimeGrid::new`].
    pub fn single_occasion(unit: TimeUnit) -> Self {
        Self { occasion_times: vec![0.0], unit, unit_days: unit.days(), lags: vec![0.0] }
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn lag(&self, t: usize) -> f64 {
        self.lags[t]
    }

    pub fn occasion_times(&self) -> &[f64] {
        &self.occasion_times
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    pub fn unit_days(&self) -> f64 {
        self.unit_days
    }

    /// Lags between consecutive occasions in days.
    pub fn day_lags(&self) -> Vec<f64> {
        self.occasion_times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Assignment of occasions to reporting periods (usually calendar years).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calendar {
    pub labels: Vec<String>,
    /// Period index of each occasion.
    pub period_of: Vec<usize>,
}

impl Calendar {
    /// Every occasion in one period.
    pub fn single(occasions: usize) -> Self {
        Self { labels: vec!["all".into()], period_of: vec![0; occasions] }
    }

    /// Builds a mapping from one label per occasion; periods are numbered by
    /// first appearance.
    pub fn from_occasion_labels(per_occasion: &[String]) -> Self {
        let mut labels: Vec<String> = Vec::new();
        let period_of = per_occasion
            .iter()
            .map(|l| match labels.iter().position(|x| x == l) {
                Some(p) => p,
                None => {
                    labels.push(l.clone());
                    labels.len() - 1
                }
            })
            .collect();
        Self { labels, period_of }
    }

    /// Checks that every one of `occasions` occasions maps to a known period.
    pub fn validate(&self, occasions: usize) -> Result<()> {
        if self.period_of.len() != occasions {
            return Err(Error::invalid(format!(
                "calendar maps {} occasions, the data have {occasions}",
                self.period_of.len()
            )));
        }
        if let Some(t) = self.period_of.iter().position(|&p| p >= self.labels.len()) {
            return Err(Error::invalid(format!("occasion {} maps to an unknown period", t + 1)));
        }
        Ok(())
    }

    pub fn periods(&self) -> usize {
        self.labels.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar_from_labels() {
        let labels: Vec<String> =
            ["2018", "2018", "2019", "2020", "2020"].iter().map(|s| s.to_string()).collect();
        let c = Calendar::from_occasion_labels(&labels);
        assert_eq!(c.labels, vec!["2018", "2019", "2020"]);
        assert_eq!(c.period_of, vec![0, 0, 1, 2, 2]);
        c.validate(5).unwrap();
        assert!(c.validate(4).is_err());
        let bad = Calendar { labels: vec!["a".into()], period_of: vec![0, 1] };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn one_month_is_one_unit() {
        let g = TimeGrid::new(vec![0.0, 30.4375], TimeUnit::Month).unwrap();
        assert_eq!(g.lags(), &[0.0, 1.0]);
    }

    #[test]
    fn appendix_lags_in_months() {
        let days = [20.0, 1.0, 12.0, 15.0, 56.0, 9.0, 9.0, 12.0, 10.0];
        let g = TimeGrid::from_day_lags(&days, TimeUnit::Month).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g.lag(0), 0.0);
        for (t, d) in days.iter().enumerate() {
            assert!((g.lag(t + 1) - d / 30.4375).abs() < 1e-15);
        }
        assert!((g.lag(1) - 0.657).abs() < 1e-3);
        assert!((g.lag(2) - 0.0329).abs() < 1e-4);
        assert!((g.lag(3) - 0.394).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_offsets() {
        assert!(TimeGrid::new(vec![0.0, 0.0], TimeUnit::Month).is_err());
        assert!(TimeGrid::new(vec![0.0, 5.0, 3.0], TimeUnit::Day).is_err());
        assert!(TimeGrid::new(vec![0.0], TimeUnit::Day).is_err());
        assert!(TimeGrid::new(vec![], TimeUnit::Day).is_err());
    }

    #[test]
    fn parses_units() {
        assert_eq!("Month".parse::<TimeUnit>().unwrap(), TimeUnit::Month);
        assert_eq!("weeks".parse::<TimeUnit>().unwrap(), TimeUnit::Week);
        assert!("fortnight".parse::<TimeUnit>().is_err());
    }
}
