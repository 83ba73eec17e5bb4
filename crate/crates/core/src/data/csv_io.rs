//! Comma-separated series I/O: header row of channel names, one row per
//! timestep.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::data::TimeSeries;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Reads a series, keeping the first `channel_limit` columns.
pub fn load_csv(
    path: impl AsRef<Path>,
    channel_limit: usize,
    domain_max: f64,
) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, channel_limit, domain_max)
}

pub fn read_csv(
    reader: impl std::io::Read,
    channel_limit: usize,
    domain_max: f64,
) -> Result<TimeSeries> {
    if channel_limit == 0 {
        return Err(Error::Config("channel_limit must be >= 1".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(format!("header row: {e}")))?
        .clone();
    let width = headers.len();
    if width == 0 {
        return Err(Error::Format("empty header row".into()));
    }
    let keep = channel_limit.min(width);
    let names: Vec<String> = headers.iter().take(keep).map(str::to_string).collect();

    let mut data = Vec::new();
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        // 1-based file line: header is line 1
        let line = i + 2;
        let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if record.len() != width {
            return Err(Error::Format(format!(
                "line {line} has {} fields, header has {width}",
                record.len()
            )));
        }
        for (c, cell) in record.iter().take(keep).enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: c + 1,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            data.push(v);
        }
        rows += 1;
    }
    TimeSeries::new(Matrix::from_vec(rows, keep, data)?, names, domain_max)
}

/// Writes a series in the same layout [`load_csv`] reads. Values use the
/// shortest representation that round-trips exactly.
pub fn write_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&series.channel_names().join(","));
    out.push('\n');
    for t in 0..series.len() {
        let row: Vec<String> = series
            .values()
            .row(t)
            .iter()
            .map(|v| format!("{v:?}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crops_channels() {
        let text = "a,b,c\n1,2,3\n4,5,6\n";
        let s = read_csv(text.as_bytes(), 2, 10.0).unwrap();
        assert_eq!(s.channels(), 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s.channel_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(s.values().as_slice(), &[1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn parse_error_names_location() {
        let text = "a,b\n1,2\n3,abc\n";
        match read_csv(text.as_bytes(), 2, 1.0) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let text = "a,b,c\n1,2,3\n4,5\n";
        assert!(matches!(
            read_csv(text.as_bytes(), 3, 1.0),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn beam_layout() {
        let names: Vec<String> = (0..100).map(|b| format!("beam{b}")).collect();
        let mut text = names.join(",");
        text.push('\n');
        for t in 0..1025 {
            let row: Vec<String> = (0..100).map(|b| ((t * b) % 97).to_string()).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let s = read_csv(text.as_bytes(), 100, 100.0).unwrap();
        assert_eq!((s.len(), s.channels()), (1025, 100));
    }

    #[test]
    fn write_then_load_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = TimeSeries::new(
            Matrix::from_vec(3, 2, vec![0.1, 1.0 / 3.0, 2.5e-17, 7.0, 0.0, 0.9999999999]).unwrap(),
            vec!["x".into(), "y".into()],
            10.0,
        )
        .unwrap();
        write_csv(&s, &path).unwrap();
        let back = load_csv(&path, 2, 10.0).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/nonexistent/x.csv", 1, 1.0),
            Err(Error::Io { .. })
        ));
    }
}
