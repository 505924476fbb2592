//! Calendar-indexed monthly series and the transformations applied to every
//! input before it enters the accounting: smoothing, interpolation, splicing
//! and share normalization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A Gregorian calendar month.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthDate {
    year: i32,
    month: u8,
}

impl MonthDate {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidArgument(format!("month {month} not in 1..=12")));
        }
        Ok(Self { year, month })
    }

    /// Panicking constructor for literals in code and tests.
    pub const fn ym(year: i32, month: u8) -> Self {
        assert!(month >= 1 && month <= 12, "month out of range");
        Self { year, month }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(n: i64) -> Self {
        Self { year: n.div_euclid(12) as i32, month: (n.rem_euclid(12) + 1) as u8 }
    }

    pub fn succ(self) -> Self {
        self.add_months(1)
    }

    pub fn pred(self) -> Self {
        self.add_months(-1)
    }

    pub fn add_months(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    /// Signed number of months from `earlier` to `self`.
    pub fn months_since(self, earlier: MonthDate) -> i64 {
        self.ordinal() - earlier.ordinal()
    }
}

impl fmt::Display for MonthDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl fmt::Debug for MonthDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for MonthDate {
    type Err = Error;

    /// Parses `YYYY-MM`. A trailing day (`YYYY-MM-DD`) is accepted and ignored.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad month {s:?}, expected YYYY-MM"));
        let mut parts = s.trim().split('-');
        let year = parts.next().and_then(|y| y.parse::<i32>().ok()).ok_or_else(bad)?;
        let month = parts.next().and_then(|m| m.parse::<u8>().ok()).ok_or_else(bad)?;
        if let Some(day) = parts.next() {
            day.parse::<u8>().map_err(|_| bad())?;
        }
        if parts.next().is_some() {
            return Err(bad());
        }
        MonthDate::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for MonthDate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthDate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive month range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: MonthDate,
    pub end: MonthDate,
}

impl MonthRange {
    pub fn new(start: MonthDate, end: MonthDate) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidArgument(format!("range end {end} precedes start {start}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, m: MonthDate) -> bool {
        self.start <= m && m <= self.end
    }

    pub fn months(&self) -> impl Iterator<Item = MonthDate> {
        let start = self.start;
        (0..=self.end.months_since(self.start)).map(move |k| start.add_months(k))
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = Error;

    /// Parses `YYYY-MM:YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("bad range {s:?}, expected START:END")))?;
        MonthRange::new(a.parse()?, b.parse()?)
    }
}

/// Contiguous monthly series. Index `t` is month `start + t`; `None` marks a
/// missing observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries<T> {
    start: MonthDate,
    values: Vec<Option<T>>,
}

impl<T: Scalar> MonthlySeries<T> {
    pub fn new(start: MonthDate, values: Vec<Option<T>>) -> Self {
        Self { start, values }
    }

    pub fn from_values(start: MonthDate, values: impl IntoIterator<Item = T>) -> Self {
        Self { start, values: values.into_iter().map(Some).collect() }
    }

    pub fn constant(start: MonthDate, len: usize, value: T) -> Self {
        Self { start, values: vec![Some(value); len] }
    }

    pub fn missing(start: MonthDate, len: usize) -> Self {
        Self { start, values: vec![None; len] }
    }

    pub fn start(&self) -> MonthDate {
        self.start
    }

    /// Last month covered. For an empty series this is the month before `start`.
    pub fn end(&self) -> MonthDate {
        self.start.add_months(self.values.len() as i64 - 1)
    }

    pub fn range(&self) -> Option<MonthRange> {
        (!self.is_empty()).then(|| MonthRange { start: self.start, end: self.end() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn date_at(&self, index: usize) -> MonthDate {
        self.start.add_months(index as i64)
    }

    pub fn index_of(&self, month: MonthDate) -> Option<usize> {
        let k = month.months_since(self.start);
        (k >= 0 && (k as usize) < self.values.len()).then_some(k as usize)
    }

    pub fn get(&self, month: MonthDate) -> Option<T> {
        self.index_of(month).and_then(|i| self.values[i])
    }

    pub fn require(&self, month: MonthDate, series: &'static str) -> Result<T> {
        self.get(month).ok_or(Error::MissingValue { series, month })
    }

    pub fn iter(&self) -> impl Iterator<Item = (MonthDate, Option<T>)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.date_at(i), *v))
    }

    /// Observed (non-missing) points only.
    pub fn observed(&self) -> impl Iterator<Item = (MonthDate, T)> + '_ {
        self.iter().filter_map(|(m, v)| v.map(|v| (m, v)))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { start: self.start, values: self.values.iter().map(|v| v.map(&f)).collect() }
    }

    /// Pointwise combination over `self`'s calendar range; months `other`
    /// lacks come out missing.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        self.tabulate(|m| Some(f(self.get(m)?, other.get(m)?)))
    }

    /// Builds a series over `self`'s range from a per-month closure.
    pub fn tabulate(&self, f: impl Fn(MonthDate) -> Option<T>) -> Self {
        Self {
            start: self.start,
            values: (0..self.values.len()).map(|i| f(self.date_at(i))).collect(),
        }
    }

    /// Series over an explicit range from a per-month closure.
    pub fn from_fn(range: MonthRange, f: impl Fn(MonthDate) -> Option<T>) -> Self {
        Self { start: range.start, values: range.months().map(f).collect() }
    }

    /// Restricts to `range`, padding with missing where `self` does not reach.
    pub fn window(&self, range: MonthRange) -> Self {
        Self::from_fn(range, |m| self.get(m))
    }

    pub fn ln(&self) -> Self {
        self.map(|x| x.ln())
    }

    /// Mean of the observed values inside `range`, `None` if there are none.
    pub fn mean_over(&self, range: MonthRange) -> Option<T> {
        let (sum, n) = self
            .observed()
            .filter(|(m, _)| range.contains(*m))
            .fold((T::zero(), 0usize), |(s, n), (_, v)| (s + v, n + 1));
        (n > 0).then(|| sum / T::count(n))
    }

    pub fn observed_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Window straddles the month. Even windows put the extra month before.
    #[default]
    Centered,
    /// Window ends at the month.
    Trailing,
}

impl FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(Alignment::Centered),
            "trailing" => Ok(Alignment::Trailing),
            other => Err(Error::InvalidArgument(format!("unknown alignment {other:?}"))),
        }
    }
}

/// Arithmetic moving average. Months without a full window of observed
/// values come out missing.
pub fn moving_average<T: Scalar>(
    s: &MonthlySeries<T>,
    window: usize,
    alignment: Alignment,
) -> Result<MonthlySeries<T>> {
    if s.is_empty() {
        return Err(Error::EmptyInput);
    }
    if window == 0 {
        return Err(Error::InvalidArgument("moving-average window must be at least 1".into()));
    }
    if s.len() < window {
        return Err(Error::InvalidArgument(format!(
            "series of length {} shorter than window {window}",
            s.len()
        )));
    }
    let lead = match alignment {
        Alignment::Centered => window / 2,
        Alignment::Trailing => window - 1,
    };
    let n = T::count(window);
    let values = (0..s.len())
        .map(|t| {
            let first = t.checked_sub(lead)?;
            let last = first + window - 1;
            if last >= s.len() {
                return None;
            }
            let mut sum = T::zero();
            for v in &s.values[first..=last] {
                sum = sum + (*v)?;
            }
            Some(sum / n)
        })
        .collect();
    Ok(MonthlySeries { start: s.start, values })
}

/// Locates `x0` on the polyline through `x`: returns the index `k` of the
/// first consecutive pair `(x[k], x[k+1])` that brackets `x0`, and the weight
/// `w` such that `x0 = (1-w)·x[k] + w·x[k+1]`.
pub fn first_bracket<T: Scalar>(x: &[T], x0: T) -> Option<(usize, T)> {
    if x.len() == 1 && x[0] == x0 {
        return Some((0, T::zero()));
    }
    x.windows(2).enumerate().find_map(|(k, pair)| {
        let (a, b) = (pair[0], pair[1]);
        if a.min(b) <= x0 && x0 <= a.max(b) {
            let w = if a == b { T::zero() } else { (x0 - a) / (b - a) };
            Some((k, w))
        } else {
            None
        }
    })
}

/// Piecewise-linear interpolation at `x0` using the first bracketing pair in
/// list order.
pub fn interpolate_at<T: Scalar>(x: &[T], y: &[T], x0: T) -> Result<T> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "x has {} points but y has {}",
            x.len(),
            y.len()
        )));
    }
    let (k, w) = first_bracket(x, x0).ok_or_else(|| {
        let min = x.iter().copied().fold(T::infinity(), T::min);
        let max = x.iter().copied().fold(T::neg_infinity(), T::max);
        Error::ExtrapolationRefused { x0: x0.as_f64(), min: min.as_f64(), max: max.as_f64() }
    })?;
    if w == T::zero() {
        return Ok(y[k]);
    }
    if w == T::one() {
        return Ok(y[k + 1]);
    }
    Ok(y[k] + w * (y[k + 1] - y[k]))
}

/// Continues `base` with `extension` rescaled so the two agree at
/// `splice_month`.
pub fn splice<T: Scalar>(
    base: &MonthlySeries<T>,
    extension: &MonthlySeries<T>,
    splice_month: MonthDate,
) -> Result<MonthlySeries<T>> {
    let b = base.require(splice_month, "base")?;
    let e = extension.require(splice_month, "extension")?;
    if e == T::zero() {
        return Err(Error::DegenerateSpliceRatio(splice_month));
    }
    let ratio = b / e;
    let start = base.start().min(splice_month);
    let end = base.end().max(extension.end()).max(splice_month);
    let range = MonthRange::new(start, end)?;
    Ok(MonthlySeries::from_fn(range, |m| {
        if m < splice_month {
            base.get(m)
        } else if m == splice_month {
            Some(b)
        } else {
            extension.get(m).map(|v| v * ratio)
        }
    }))
}

/// Divides every stock by the month's total so shares sum to one. Output
/// series cover the first stock's range.
pub fn normalize_shares<T: Scalar>(stocks: &[MonthlySeries<T>]) -> Result<Vec<MonthlySeries<T>>> {
    let first = stocks.first().ok_or(Error::EmptyInput)?;
    let mut out: Vec<Vec<Option<T>>> = vec![Vec::with_capacity(first.len()); stocks.len()];
    for i in 0..first.len() {
        let m = first.date_at(i);
        let row: Option<Vec<T>> = stocks.iter().map(|s| s.get(m)).collect();
        match row {
            None => out.iter_mut().for_each(|col| col.push(None)),
            Some(row) => {
                if row.iter().any(|v| *v < T::zero()) {
                    return Err(Error::InvalidArgument(format!("negative stock at {m}")));
                }
                let total: T = row.iter().copied().sum();
                if total <= T::zero() {
                    return Err(Error::EmptyPopulationMonth(m));
                }
                for (col, v) in out.iter_mut().zip(&row) {
                    col.push(Some(*v / total));
                }
            }
        }
    }
    Ok(out.into_iter().map(|values| MonthlySeries::new(first.start(), values)).collect())
}
