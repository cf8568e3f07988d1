//! Contingency-table ingestion and normalization.
//!
//! A [`ContingencyTable`] cross-tabulates an *ordered* set of observations
//! (rows, whose order is the timeline order and is preserved by every
//! operation) against a set of attributes (columns) with non-negative real
//! counts. Construction validates and normalizes the data: zero rows and
//! zero columns are removed, because a row profile is undefined when the
//! row has no mass. Every drop is recorded in a [`PruneLog`] so callers can
//! surface `WARN dropped row <label>` diagnostics.
//!
//! Raw inputs arrive either as a counts CSV (first row attribute names,
//! first column observation labels) or as a timestamped [`EventLog`] that
//! is summed into calendar bins by [`EventLog::aggregate`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Calendar granularity for [`EventLog::aggregate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeBin {
    Month,
    Year,
}

impl FromStr for TimeBin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "month" => Ok(TimeBin::Month),
            "year" => Ok(TimeBin::Year),
            other => Err(Error::usage(format!(
                "unknown time bin {other:?} (expected \"month\" or \"year\")"
            ))),
        }
    }
}

impl fmt::Display for TimeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBin::Month => f.write_str("month"),
            TimeBin::Year => f.write_str("year"),
        }
    }
}

/// Labels removed while normalizing a table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneLog {
    /// Row labels dropped because the row summed to zero, in input order.
    pub dropped_rows: Vec<String>,
    /// Column labels dropped because the column summed to zero, in input order.
    pub dropped_cols: Vec<String>,
}

impl PruneLog {
    pub fn is_empty(&self) -> bool {
        self.dropped_rows.is_empty() && self.dropped_cols.is_empty()
    }

    /// Diagnostic lines in the `WARN dropped row <label>` format, rows first.
    pub fn warnings(&self) -> Vec<String> {
        let rows = self
            .dropped_rows
            .iter()
            .map(|l| format!("WARN dropped row {l}"));
        let cols = self
            .dropped_cols
            .iter()
            .map(|l| format!("WARN dropped column {l}"));
        rows.chain(cols).collect()
    }
}

/// An ordered observations × attributes table of non-negative counts.
///
/// Invariants held after construction: all counts are finite and
/// non-negative, every row and column sum is strictly positive, and the
/// grand total is strictly positive. Row order is significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: DMatrix<f64>,
}

impl ContingencyTable {
    /// Validates and normalizes raw counts into a table.
    ///
    /// Zero rows/columns are pruned (recorded in the returned [`PruneLog`]);
    /// negative or non-finite cells and an empty table after pruning are
    /// domain errors.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: DMatrix<f64>,
    ) -> Result<(Self, PruneLog)> {
        if row_labels.len() != counts.nrows() || col_labels.len() != counts.ncols() {
            return Err(Error::usage(format!(
                "label/matrix shape mismatch: {} row labels and {} column labels for a {}x{} matrix",
                row_labels.len(),
                col_labels.len(),
                counts.nrows(),
                counts.ncols()
            )));
        }
        for i in 0..counts.nrows() {
            for j in 0..counts.ncols() {
                let v = counts[(i, j)];
                if !v.is_finite() {
                    return Err(Error::domain(format!(
                        "non-finite count {v} at row {:?}, column {:?}",
                        row_labels[i], col_labels[j]
                    )));
                }
                if v < 0.0 {
                    return Err(Error::domain(format!(
                        "negative count {v} at row {:?}, column {:?}",
                        row_labels[i], col_labels[j]
                    )));
                }
            }
        }

        // Zero columns carry no mass, so dropping them never zeroes a row
        // (and vice versa); one pass over each axis suffices.
        let keep_rows: Vec<usize> = (0..counts.nrows())
            .filter(|&i| counts.row(i).sum() > 0.0)
            .collect();
        let keep_cols: Vec<usize> = (0..counts.ncols())
            .filter(|&j| counts.column(j).sum() > 0.0)
            .collect();

        let mut log = PruneLog::default();
        for i in 0..counts.nrows() {
            if counts.row(i).sum() == 0.0 {
                log.dropped_rows.push(row_labels[i].clone());
            }
        }
        for j in 0..counts.ncols() {
            if counts.column(j).sum() == 0.0 {
                log.dropped_cols.push(col_labels[j].clone());
            }
        }

        if keep_rows.is_empty() || keep_cols.is_empty() {
            return Err(Error::domain("empty table after pruning"));
        }

        let pruned = DMatrix::from_fn(keep_rows.len(), keep_cols.len(), |i, j| {
            counts[(keep_rows[i], keep_cols[j])]
        });
        let table = ContingencyTable {
            row_labels: keep_rows.iter().map(|&i| row_labels[i].clone()).collect(),
            col_labels: keep_cols.iter().map(|&j| col_labels[j].clone()).collect(),
            counts: pruned,
        };
        Ok((table, log))
    }

    /// Reads a counts CSV: first row attribute names, first column
    /// observation labels, remaining cells numeric. Comma separator, UTF-8,
    /// `.` decimal point.
    pub fn from_csv<R: Read>(reader: R) -> Result<(Self, PruneLog)> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::parse(
                "header must name at least one attribute column",
            ));
        }
        let col_labels: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();

        let mut row_labels = Vec::new();
        let mut cells: Vec<f64> = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = idx + 2; // 1-based, counting the header line
            let label = record
                .get(0)
                .ok_or_else(|| Error::parse(format!("row {line}: missing observation label")))?
                .to_owned();
            for (j, field) in record.iter().enumerate().skip(1) {
                let value: f64 = field.parse().map_err(|_| {
                    Error::parse(format!(
                        "row {line} ({label:?}), column {j} ({:?}): invalid number {field:?}",
                        col_labels[j - 1]
                    ))
                })?;
                cells.push(value);
            }
            row_labels.push(label);
        }

        let n_rows = row_labels.len();
        let n_cols = col_labels.len();
        let counts = DMatrix::from_row_slice(n_rows, n_cols, &cells);
        Self::new(row_labels, col_labels, counts)
    }

    /// Writes the table back out in the same CSV dialect accepted by
    /// [`ContingencyTable::from_csv`].
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["obs".to_owned()];
        header.extend(self.col_labels.iter().cloned());
        wtr.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = vec![self.row_labels[i].clone()];
            record.extend((0..self.n_cols()).map(|j| format!("{}", self.counts[(i, j)])));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.counts.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.counts.ncols()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn counts(&self) -> &DMatrix<f64> {
        &self.counts
    }

    /// Sum of all cells.
    pub fn grand_total(&self) -> f64 {
        self.counts.sum()
    }

    /// Conditional frequency distribution of row `i` over the attributes,
    /// together with the row's mass.
    ///
    /// Panics if `i` is out of range.
    pub fn row_profile(&self, i: usize) -> Profile {
        let total = self.grand_total();
        let row_sum: f64 = self.counts.row(i).sum();
        let coords = DVector::from_fn(self.n_cols(), |j, _| self.counts[(i, j)] / row_sum);
        Profile {
            coords,
            mass: row_sum / total,
        }
    }

    /// Replaces every cell by 1 if it exceeds `threshold`, else 0, then
    /// re-normalizes (pruning can fire again).
    pub fn binarize(&self, threshold: f64) -> Result<(Self, PruneLog)> {
        if threshold < 0.0 || threshold.is_nan() {
            return Err(Error::usage(format!(
                "binarize threshold must be >= 0, got {threshold}"
            )));
        }
        let binary = self.counts.map(|v| if v > threshold { 1.0 } else { 0.0 });
        Self::new(self.row_labels.clone(), self.col_labels.clone(), binary)
    }

    /// Sums every column whose total is below `min_total` into a single
    /// appended column named `other_label`. A table where no column
    /// qualifies is returned unchanged; a single qualifying column is
    /// renamed (and moved to the end), not duplicated.
    pub fn merge_rare_columns(&self, min_total: f64, other_label: &str) -> Result<Self> {
        if min_total < 0.0 || min_total.is_nan() {
            return Err(Error::usage(format!(
                "merge threshold must be >= 0, got {min_total}"
            )));
        }
        let totals: Vec<f64> = (0..self.n_cols()).map(|j| self.counts.column(j).sum()).collect();
        let rare: Vec<usize> = (0..self.n_cols()).filter(|&j| totals[j] < min_total).collect();
        if rare.is_empty() {
            return Ok(self.clone());
        }
        let surviving: Vec<usize> = (0..self.n_cols()).filter(|&j| totals[j] >= min_total).collect();
        if surviving.iter().any(|&j| self.col_labels[j] == other_label) {
            return Err(Error::domain(format!(
                "merged column label {other_label:?} collides with an existing column"
            )));
        }

        let n_out = surviving.len() + 1;
        let merged = DMatrix::from_fn(self.n_rows(), n_out, |i, j| {
            if j < surviving.len() {
                self.counts[(i, surviving[j])]
            } else {
                rare.iter().map(|&r| self.counts[(i, r)]).sum()
            }
        });
        let mut labels: Vec<String> = surviving
            .iter()
            .map(|&j| self.col_labels[j].clone())
            .collect();
        labels.push(other_label.to_owned());

        // Column totals were positive before the merge, so the merged
        // column is positive and no pruning can fire.
        let (table, log) = Self::new(self.row_labels.clone(), labels, merged)?;
        debug_assert!(log.is_empty());
        Ok(table)
    }
}

/// Relative-frequency view of a table: `f[i][j] = count[i][j] / total`
/// with the row and column masses (marginals).
#[derive(Clone, Debug)]
pub struct FrequencyView {
    f: DMatrix<f64>,
    row_masses: DVector<f64>,
    col_masses: DVector<f64>,
}

impl FrequencyView {
    pub fn new(table: &ContingencyTable) -> Self {
        let total = table.grand_total();
        let f = table.counts() / total;
        let row_masses = DVector::from_fn(f.nrows(), |i, _| f.row(i).sum());
        let col_masses = DVector::from_fn(f.ncols(), |j, _| f.column(j).sum());
        FrequencyView {
            f,
            row_masses,
            col_masses,
        }
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn row_masses(&self) -> &DVector<f64> {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &DVector<f64> {
        &self.col_masses
    }
}

/// A row's conditional distribution over the attributes plus its mass.
#[derive(Clone, Debug)]
pub struct Profile {
    pub coords: DVector<f64>,
    pub mass: f64,
}

/// One timestamped measurement vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub date: NaiveDate,
    pub values: Vec<f64>,
}

/// A list of dated events, each carrying the same attribute vector layout.
#[derive(Clone, Debug, PartialEq)]
pub struct EventLog {
    attr_labels: Vec<String>,
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new(attr_labels: Vec<String>, records: Vec<EventRecord>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            if rec.values.len() != attr_labels.len() {
                return Err(Error::usage(format!(
                    "record {} has {} values but {} attributes are declared",
                    i + 1,
                    rec.values.len(),
                    attr_labels.len()
                )));
            }
        }
        Ok(EventLog {
            attr_labels,
            records,
        })
    }

    /// Reads an event-log CSV with header `date,<attr1>,<attr2>,...` and
    /// ISO-8601 (`YYYY-MM-DD`) dates.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("date") {
            return Err(Error::parse(format!(
                "event log header must start with \"date\", got {:?}",
                headers.get(0).unwrap_or("")
            )));
        }
        let attr_labels: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();

        let mut records = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = idx + 2;
            let raw_date = record
                .get(0)
                .ok_or_else(|| Error::parse(format!("record at line {line}: missing date")))?;
            let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
                Error::parse(format!(
                    "record at line {line}: unparseable timestamp {raw_date:?} (expected YYYY-MM-DD)"
                ))
            })?;
            let mut values = Vec::with_capacity(attr_labels.len());
            for (j, field) in record.iter().enumerate().skip(1) {
                let value: f64 = field.parse().map_err(|_| {
                    Error::parse(format!(
                        "record at line {line}: invalid number {field:?} in column {:?}",
                        attr_labels[j - 1]
                    ))
                })?;
                values.push(value);
            }
            records.push(EventRecord { date, values });
        }
        EventLog::new(attr_labels, records)
    }

    pub fn attr_labels(&self) -> &[String] {
        &self.attr_labels
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    /// Sums the events into one row per calendar bin between the earliest
    /// and latest timestamp inclusive, in chronological order. Bins with no
    /// events yield zero rows, which construction prunes with a warning.
    pub fn aggregate(&self, bin: TimeBin) -> Result<(ContingencyTable, PruneLog)> {
        if self.records.is_empty() {
            return Err(Error::domain("cannot aggregate an empty event log"));
        }

        let key = |d: &NaiveDate| -> i64 {
            match bin {
                TimeBin::Month => i64::from(d.year()) * 12 + i64::from(d.month0()),
                TimeBin::Year => i64::from(d.year()),
            }
        };
        let label = |k: i64| -> String {
            match bin {
                TimeBin::Month => {
                    let (y, m0) = (k.div_euclid(12), k.rem_euclid(12));
                    format!("{y:04}-{:02}", m0 + 1)
                }
                TimeBin::Year => format!("{k:04}"),
            }
        };

        let mut sums: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for rec in &self.records {
            let row = sums
                .entry(key(&rec.date))
                .or_insert_with(|| vec![0.0; self.attr_labels.len()]);
            for (acc, v) in row.iter_mut().zip(&rec.values) {
                *acc += v;
            }
        }

        let first = *sums.keys().next().expect("non-empty");
        let last = *sums.keys().next_back().expect("non-empty");
        let n_cols = self.attr_labels.len();
        let mut row_labels = Vec::new();
        let mut cells = Vec::new();
        for k in first..=last {
            row_labels.push(label(k));
            match sums.get(&k) {
                Some(row) => cells.extend_from_slice(row),
                None => cells.extend(std::iter::repeat_n(0.0, n_cols)),
            }
        }

        let counts = DMatrix::from_row_slice(row_labels.len(), n_cols, &cells);
        ContingencyTable::new(row_labels, self.attr_labels.clone(), counts)
    }
}
