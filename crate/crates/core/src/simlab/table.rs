use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One `(x, metric)` cell of a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub x: f64,
    pub metric: String,
    pub value: f64,
    pub std_error: f64,
    /// Samples behind the value; 0 for analytic curves.
    pub trials: u64,
}

/// Long-format experiment output: one row per (x, metric), sorted by x.
///
/// The x column is the SNR in dB except for condition-number densities,
/// where it is the bin center of `ln cond`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub x_label: String,
    rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(x_label: &str) -> Self {
        Self { x_label: x_label.to_string(), rows: Vec::new() }
    }

    /// Adds a row, rejecting NaN or infinite cells.
    pub fn push(&mut self, x: f64, metric: impl Into<String>, value: f64, std_error: f64, trials: u64) -> Result<()> {
        let metric = metric.into();
        if !(x.is_finite() && value.is_finite() && std_error.is_finite()) {
            return Err(Error::Domain(format!("non-finite cell for '{metric}' at {x}: {value} +/- {std_error}")));
        }
        if metric.contains([',', '"', '\n']) {
            return Err(Error::Domain(format!("metric name '{metric}' needs quoting")));
        }
        self.rows.push(ResultRow { x, metric, value, std_error, trials });
        Ok(())
    }

    /// Rows ordered by x; rows sharing an x keep insertion order.
    pub fn rows(&self) -> Vec<&ResultRow> {
        let mut v: Vec<&ResultRow> = self.rows.iter().collect();
        v.sort_by(|a, b| a.x.total_cmp(&b.x));
        v
    }

    pub fn metric(&self, name: &str) -> Vec<&ResultRow> {
        self.rows().into_iter().filter(|r| r.metric == name).collect()
    }

    pub fn metrics(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.metric.as_str()) {
                names.push(&r.metric);
            }
        }
        names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        out.write_record([self.x_label.as_str(), "metric", "value", "std_error", "trials"]).map_err(csv_err)?;
        for r in self.rows() {
            // `{:?}` prints the shortest text that parses back to the same f64
            out.write_record([format!("{:?}", r.x), r.metric.clone(), format!("{:?}", r.value), format!("{:?}", r.std_error), r.trials.to_string()])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a table written by [`ResultTable::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
        if header.len() != 5 || &header[1] != "metric" {
            return Err(Error::Parse { line: 1, message: "unexpected CSV header".into() });
        }
        let mut table = Self::new(&header[0]);
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let err = |m: String| Error::Parse { line, message: m };
            let rec = rec.map_err(|e| err(e.to_string()))?;
            let num = |k: usize| rec[k].parse::<f64>().map_err(|_| err(format!("bad number '{}'", &rec[k])));
            let trials = rec[4].parse::<u64>().map_err(|_| err(format!("bad trial count '{}'", &rec[4])))?;
            table.push(num(0)?, &rec[1], num(2)?, num(3)?, trials).map_err(|e| err(e.to_string()))?;
        }
        Ok(table)
    }
}

/// Writes `table` as CSV to `path`, creating parent directories.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    table.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn load_csv(path: &Path) -> Result<ResultTable> {
    ResultTable::read_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("snr_db");
        t.push(2.0, "c_mc/4x2", 3.1, 0.01, 10000).unwrap();
        t.push(0.0, "c_mc/4x2", 1.0 / 3.0, 0.002, 10000).unwrap();
        t.push(0.0, "c_ub/4x2", 0.1 + 0.2, 0.0, 0).unwrap();
        t
    }

    #[test]
    fn rows_sorted_and_header_present() {
        let s = sample().to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "snr_db,metric,value,std_error,trials");
        assert!(lines[1].starts_with("0.0,c_mc/4x2,"));
        assert!(lines[2].starts_with("0.0,c_ub/4x2,"));
        assert!(lines[3].starts_with("2.0,"));
    }

    #[test]
    fn round_trip_is_exact() {
        let t = sample();
        let back = ResultTable::read_csv(t.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.rows(), t.rows());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/t.csv");
        emit_csv(&t, &path).unwrap();
        assert_eq!(load_csv(&path).unwrap().to_csv_string(), t.to_csv_string());
    }

    #[test]
    fn rejects_nan() {
        let mut t = ResultTable::new("snr_db");
        assert!(t.push(0.0, "m", f64::NAN, 0.0, 1).is_err());
        assert!(t.push(0.0, "a,b", 1.0, 0.0, 1).is_err());
        assert!(t.is_empty());
    }
}
