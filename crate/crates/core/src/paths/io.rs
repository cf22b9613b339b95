//! Plain-text serialization of paths.
//!
//! One row per knot: `t, left_1..left_d, value_1..value_d, right_1..right_d`.
//! A header row is written and accepted on input; lines starting with `#`
//! are comments.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{Knot, PathError, PiecewisePath, Vector};

#[derive(Debug, Error)]
pub enum PathIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error(transparent)]
    Path(#[from] PathError),
}

fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for part in ["left", "value", "right"] {
        h.extend((1..=dim).map(|i| format!("{part}_{i}")));
    }
    h
}

pub fn write_path<W: Write>(path: &PiecewisePath, writer: W) -> Result<(), PathIoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(path.dim()))?;
    for k in path.knots() {
        let mut row = vec![format!("{:e}", k.t)];
        for v in [&k.left, &k.value, &k.right] {
            row.extend(v.iter().map(|x| format!("{x:e}")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_path<R: Read>(reader: R) -> Result<PiecewisePath, PathIoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut knots = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.get(0) == Some("t") {
            continue;
        }
        let numbers = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| PathIoError::Format {
                line,
                message: e.to_string(),
            })?;
        if numbers.len() < 4 || (numbers.len() - 1) % 3 != 0 {
            return Err(PathIoError::Format {
                line,
                message: format!("expected 1 + 3d columns, found {}", numbers.len()),
            });
        }
        let d = (numbers.len() - 1) / 3;
        let part = |i: usize| Vector::from_column_slice(&numbers[1 + i * d..1 + (i + 1) * d]);
        knots.push(Knot::jump(numbers[0], part(0), part(1), part(2)));
    }
    Ok(PiecewisePath::new(knots)?)
}

pub fn save_path(path: &PiecewisePath, file: impl AsRef<Path>) -> Result<(), PathIoError> {
    write_path(path, File::create(file)?)
}

pub fn load_path(file: impl AsRef<Path>) -> Result<PiecewisePath, PathIoError> {
    read_path(File::open(file)?)
}

/// Writes `samples + 1` equispaced point values of several paths sharing a
/// domain, one column per component, for plotting.
pub fn write_samples<W: Write>(
    columns: &[(&str, &PiecewisePath)],
    samples: usize,
    writer: W,
) -> Result<(), PathIoError> {
    let Some((_, first)) = columns.first() else {
        return Ok(());
    };
    let mut w = csv::Writer::from_writer(writer);
    let mut head = vec!["t".to_string()];
    for (name, p) in columns {
        if p.dim() == 1 {
            head.push(name.to_string());
        } else {
            head.extend((1..=p.dim()).map(|i| format!("{name}_{i}")));
        }
    }
    w.write_record(&head)?;
    for (t, _) in first.sample(samples) {
        let mut row = vec![format!("{t}")];
        for (_, p) in columns {
            row.extend(p.value(t)?.iter().map(|x| format!("{x}")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_text() {
        let p = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(1.0, 0.5, 0.0, 0.0),
            Knot::scalar(2.0, 0.0, 0.0, 0.0),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_path(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,left_1,value_1,right_1"));
        assert_eq!(read_path(text.as_bytes()).unwrap(), p);
    }

    #[test]
    fn accepts_comments_and_reports_bad_rows() {
        let text = "# z tilde\n0,0,0,0\n1,0,0,0.5\n2,0.5,0.5,0.5\n";
        let p = read_path(text.as_bytes()).unwrap();
        assert_eq!(p.jump_times(), vec![1.0]);
        let bad = "0,0,0\n";
        assert!(matches!(
            read_path(bad.as_bytes()),
            Err(PathIoError::Format { .. })
        ));
    }
}
