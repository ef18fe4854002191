//! From multivariate time series to a per-window randomness index.
//!
//! The chain is: log returns, AR prewhitening, partition into contiguous
//! windows, one permutation-tested correlation network per window, and the
//! randomness index of each network.

use std::io::Read;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod network;
mod pipeline;
mod prewhiten;

pub use network::{pearson, significance_network, significance_networks, SignificanceNetwork};
pub use pipeline::{partition, ri_series, Partition, RiConfig, RiPoint, RiSeries, WindowReport};
pub use prewhiten::{prewhiten, Prewhitened, RIDGE_JITTER};

/// Default AR order for prewhitening.
pub const DEFAULT_AR_ORDER: usize = 20;
/// Default number of permutation surrogates per node pair.
pub const DEFAULT_SURROGATES: usize = 1000;

/// `T × N` observations: rows are time points, columns are variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMatrix {
    pub values: Array2<f64>,
    pub timestamps: Vec<String>,
    pub names: Vec<String>,
}

impl SeriesMatrix {
    pub fn new(values: Array2<f64>, timestamps: Vec<String>, names: Vec<String>) -> Result<Self> {
        let (t, n) = values.dim();
        if timestamps.len() != t || names.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{t}x{n} matrix with {} timestamps and {} names",
                timestamps.len(),
                names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix contains non-finite values".into()));
        }
        Ok(SeriesMatrix { values, timestamps, names })
    }

    /// Matrix with integer timestamps `0..T` and names `s0..s{N-1}`.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let (t, n) = values.dim();
        let timestamps = (0..t).map(|i| i.to_string()).collect();
        let names = (0..n).map(|j| format!("s{j}")).collect();
        SeriesMatrix::new(values, timestamps, names)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    /// Reads `timestamp,name1,...,nameN` CSV. Rows with a missing value are
    /// rejected, as are non-increasing timestamps. Timestamps compare as
    /// integers when every one parses as an integer, else as strings (which
    /// orders ISO dates correctly).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                msg: "header needs a timestamp column and at least one series".into(),
            });
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let n = names.len();
        let mut timestamps = Vec::new();
        let mut flat = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            if record.len() != n + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", n + 1, record.len()),
                });
            }
            timestamps.push(record[0].to_string());
            for (col, field) in record.iter().skip(1).enumerate() {
                let missing = field.is_empty() || matches!(field.to_ascii_lowercase().as_str(), "na" | "nan" | "null");
                if missing {
                    return Err(Error::Parse {
                        line,
                        msg: format!("missing value in column `{}`", names[col]),
                    });
                }
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{field}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, msg: format!("non-finite value `{field}`") });
                }
                flat.push(v);
            }
        }
        check_increasing(&timestamps)?;
        let values = Array2::from_shape_vec((timestamps.len(), n), flat)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        SeriesMatrix::new(values, timestamps, names)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["timestamp".to_string()];
        header.extend(self.names.iter().cloned());
        wtr.write_record(&header)?;
        for (t, row) in self.values.rows().into_iter().enumerate() {
            let mut rec = vec![self.timestamps[t].clone()];
            rec.extend(row.iter().map(|v| format!("{v}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_increasing(timestamps: &[String]) -> Result<()> {
    let ints: Option<Vec<i64>> = timestamps.iter().map(|t| t.parse().ok()).collect();
    let bad = match ints {
        Some(v) => v.windows(2).position(|w| w[0] >= w[1]),
        None => timestamps.windows(2).position(|w| w[0] >= w[1]),
    };
    match bad {
        Some(i) => Err(Error::Parse {
            line: i + 3,
            msg: format!(
                "timestamp `{}` does not increase over `{}`",
                timestamps[i + 1],
                timestamps[i]
            ),
        }),
        None => Ok(()),
    }
}

/// First differences of logarithms. Row `t − 1` of the output holds
/// `log x(t) − log x(t − 1)` and carries the timestamp of `t`.
pub fn log_returns(x: &SeriesMatrix) -> Result<SeriesMatrix> {
    let (t, n) = x.values.dim();
    if t < 2 {
        return Err(Error::InsufficientData { rows: t, needed: 1 });
    }
    if let Some(((row, series), _)) = x.values.indexed_iter().find(|(_, &v)| v <= 0.0) {
        return Err(Error::NonPositiveInput { series, row });
    }
    let logs = x.values.mapv(f64::ln);
    let mut out = Array2::zeros((t - 1, n));
    for r in 1..t {
        for c in 0..n {
            out[[r - 1, c]] = logs[[r, c]] - logs[[r - 1, c]];
        }
    }
    SeriesMatrix::new(out, x.timestamps[1..].to_vec(), x.names.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn log_return_examples() {
        let x = SeriesMatrix::from_values(array![[5.0], [5.0], [5.0]]).unwrap();
        assert_eq!(log_returns(&x).unwrap().values, array![[0.0], [0.0]]);

        let e = std::f64::consts::E;
        let x = SeriesMatrix::from_values(array![[1.0], [e], [e * e]]).unwrap();
        let y = log_returns(&x).unwrap();
        assert!((y.values[[0, 0]] - 1.0).abs() < 1e-15);
        assert!((y.values[[1, 0]] - 1.0).abs() < 1e-15);
        assert_eq!(y.timestamps, vec!["1", "2"]);

        let x = SeriesMatrix::from_values(array![[100.0], [110.0]]).unwrap();
        let y = log_returns(&x).unwrap();
        assert!((y.values[[0, 0]] - 0.09531).abs() < 1e-5);
    }

    #[test]
    fn log_returns_reject_nonpositive() {
        let x = SeriesMatrix::from_values(array![[1.0, 2.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            log_returns(&x),
            Err(Error::NonPositiveInput { series: 1, row: 1 })
        ));
    }

    #[test]
    fn csv_ingest() {
        let text = "timestamp,a,b\n2004-03-05,1.0,2\n2004-03-08,1.5,2.5\n";
        let m = SeriesMatrix::read_csv(text.as_bytes()).unwrap();
        assert_eq!(m.names, vec!["a", "b"]);
        assert_eq!(m.values, array![[1.0, 2.0], [1.5, 2.5]]);

        let missing = "timestamp,a,b\n1,1.0,\n2,1.0,2.0\n";
        assert!(matches!(
            SeriesMatrix::read_csv(missing.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let na = "timestamp,a\n1,NA\n";
        assert!(SeriesMatrix::read_csv(na.as_bytes()).is_err());
        // integer comparison, not lexicographic: 9 < 10
        let ok = "timestamp,a\n9,1\n10,2\n";
        assert!(SeriesMatrix::read_csv(ok.as_bytes()).is_ok());
        let back = "timestamp,a\n1,1\n3,2\n2,3\n";
        assert!(matches!(
            SeriesMatrix::read_csv(back.as_bytes()),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let m = SeriesMatrix::from_values(array![[1.25, 3.0], [0.5, 7.125]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(SeriesMatrix::read_csv(buf.as_slice()).unwrap(), m);
    }
}
