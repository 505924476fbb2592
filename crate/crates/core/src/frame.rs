//! CSV ingestion and emission.
//!
//! One row per month: a `date` column (`YYYY-MM`) followed by named value
//! columns. Empty cells are missing values. Gaps between rows are filled with
//! missing months so every column is a contiguous [`MonthlySeries`].

use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::series::{moving_average, Alignment, MonthDate, MonthRange, MonthlySeries};

/// Named monthly columns sharing one calendar range.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    columns: IndexMap<String, MonthlySeries<f64>>,
}

impl Frame {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds (or replaces) a column.
    pub fn insert(&mut self, name: impl Into<String>, series: MonthlySeries<f64>) {
        self.columns.insert(name.into(), series);
    }

    pub fn with(mut self, name: impl Into<String>, series: MonthlySeries<f64>) -> Self {
        self.insert(name, series);
        self
    }

    pub fn get(&self, name: &str) -> Option<&MonthlySeries<f64>> {
        self.columns.get(name)
    }

    pub fn column(&self, name: &str) -> Result<&MonthlySeries<f64>> {
        self.get(name).ok_or_else(|| Error::MissingColumns(name.to_string()))
    }

    /// Fails naming every absent column at once.
    pub fn require(&self, names: &[&str]) -> Result<()> {
        let missing: Vec<&str> = names.iter().copied().filter(|n| !self.columns.contains_key(*n)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingColumns(missing.join(", ")))
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Union of the columns' calendar ranges.
    pub fn range(&self) -> Option<MonthRange> {
        let mut ranges = self.columns.values().filter_map(MonthlySeries::range);
        let first = ranges.next()?;
        Some(ranges.fold(first, |acc, r| MonthRange { start: acc.start.min(r.start), end: acc.end.max(r.end) }))
    }

    pub fn map_columns(&self, mut f: impl FnMut(&str, &MonthlySeries<f64>) -> Result<MonthlySeries<f64>>) -> Result<Frame> {
        let mut out = Frame::new();
        for (name, s) in &self.columns {
            out.insert(name.clone(), f(name, s)?);
        }
        Ok(out)
    }

    /// Moving average of every column; months lacking a full window go
    /// missing.
    pub fn smoothed(&self, window: usize, alignment: Alignment) -> Result<Frame> {
        self.map_columns(|_, s| moving_average(s, window, alignment))
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read(file)
    }

    pub fn read(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let date_idx = headers
            .iter()
            .position(|h| h == "date")
            .ok_or_else(|| Error::MissingColumns("date".into()))?;
        let names: Vec<(usize, String)> =
            headers.iter().enumerate().filter(|(i, _)| *i != date_idx).map(|(i, h)| (i, h.to_string())).collect();

        let mut rows: Vec<(MonthDate, Vec<Option<f64>>)> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let date: MonthDate = record
                .get(date_idx)
                .unwrap_or_default()
                .parse()
                .map_err(|e| Error::Csv(format!("row {}: {e}", line + 2)))?;
            let mut values = Vec::with_capacity(names.len());
            for (idx, name) in &names {
                let cell = record.get(*idx).unwrap_or("");
                if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
                    values.push(None);
                } else {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| Error::Csv(format!("row {}: column {name}: bad number {cell:?}", line + 2)))?;
                    values.push(Some(v));
                }
            }
            rows.push((date, values));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        rows.sort_by_key(|(d, _)| *d);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Csv(format!("duplicate month {}", w[0].0)));
        }
        let range = MonthRange::new(rows[0].0, rows[rows.len() - 1].0)?;
        let len = range.months().count();
        let mut frame = Frame::new();
        for (j, (_, name)) in names.iter().enumerate() {
            let mut values = vec![None; len];
            for (d, row) in &rows {
                values[d.months_since(range.start) as usize] = row[j];
            }
            frame.insert(name.clone(), MonthlySeries::new(range.start, values));
        }
        Ok(frame)
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        self.write(std::io::BufWriter::new(file))
    }

    /// Writes every month of the union range. Numbers use the shortest
    /// round-trip form, so output is deterministic and re-readable without
    /// loss.
    pub fn write(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.columns.keys().cloned());
        w.write_record(&header)?;
        if let Some(range) = self.range() {
            for m in range.months() {
                let mut record = vec![m.to_string()];
                record.extend(self.columns.values().map(|s| s.get(m).map(|v| format!("{v:?}")).unwrap_or_default()));
                w.write_record(&record)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Number of months with at least one observed value.
    pub fn row_count(&self) -> usize {
        self.range()
            .map(|r| r.months().filter(|m| self.columns.values().any(|s| s.get(*m).is_some())).count())
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_gaps_and_missing_cells() {
        let csv = "date,u_rate,v_rate\n2000-01,0.04,0.03\n2000-02,,0.031\n2000-04,0.05,0.02\n";
        let f = Frame::read(csv.as_bytes()).unwrap();
        let u = f.column("u_rate").unwrap();
        assert_eq!(u.start(), MonthDate::ym(2000, 1));
        assert_eq!(u.values(), &[Some(0.04), None, None, Some(0.05)]);
        assert_eq!(f.column("v_rate").unwrap().get(MonthDate::ym(2000, 2)), Some(0.031));
    }

    #[test]
    fn smoothing_applies_per_column() {
        let csv = "date,a,b\n2000-01,1,10\n2000-02,2,20\n2000-03,3,\n2000-04,4,40\n";
        let f = Frame::read(csv.as_bytes()).unwrap().smoothed(3, Alignment::Trailing).unwrap();
        assert_eq!(f.column("a").unwrap().values(), &[None, None, Some(2.0), Some(3.0)]);
        assert_eq!(f.column("b").unwrap().values(), &[None, None, None, None]);
    }

    #[test]
    fn missing_columns_are_named() {
        let f = Frame::read("date,u_rate\n2000-01,0.04\n".as_bytes()).unwrap();
        assert_eq!(
            f.require(&["u_rate", "v_rate", "u_short"]),
            Err(Error::MissingColumns("v_rate, u_short".into()))
        );
        assert!(matches!(Frame::read("month,u\n2000-01,1\n".as_bytes()), Err(Error::MissingColumns(_))));
    }

    #[test]
    fn rejects_duplicates_and_bad_numbers() {
        assert!(Frame::read("date,u\n2000-01,1\n2000-01,2\n".as_bytes()).is_err());
        assert!(Frame::read("date,u\n2000-01,abc\n".as_bytes()).is_err());
        assert_eq!(Frame::read("date,u\n".as_bytes()), Err(Error::EmptyInput));
    }

    #[test]
    fn write_then_read_is_lossless() {
        let start = MonthDate::ym(1999, 11);
        let f = Frame::new()
            .with("a", MonthlySeries::new(start, vec![Some(0.1 + 0.2), None, Some(1e-17)]))
            .with("b", MonthlySeries::from_values(start.succ(), [std::f64::consts::PI, -2.5]));
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        let back = Frame::read(buf.as_slice()).unwrap();
        for name in ["a", "b"] {
            let (x, y) = (f.column(name).unwrap(), back.column(name).unwrap());
            for m in f.range().unwrap().months() {
                assert_eq!(x.get(m), y.get(m));
            }
        }
    }
}
