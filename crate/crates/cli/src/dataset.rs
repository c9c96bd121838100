//! CSV tables in and out.

use std::io::{Read, Write};
use std::path::Path;

use classicml::Matrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub x: Matrix,
    pub label_name: Option<String>,
    /// Raw label cells, present when a label column was requested.
    pub labels: Option<Vec<String>>,
    /// 1-based file line of each data row.
    pub lines: Vec<u64>,
}

pub fn load_csv(path: &Path, label: Option<&str>) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    read_csv(file, label)
}

/// Features are every non-label column in header order. A missing label column
/// is a configuration error; unparsable or non-finite feature cells are data errors.
pub fn read_csv<R: Read>(reader: R, label: Option<&str>) -> CliResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::data(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = match label {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::config(format!("label column '{name}' not found in header")))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != label_idx).collect();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::data(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(CliError::data(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        for &c in &feature_cols {
            data.push(parse_cell(&record[c], line, c + 1, &header[c])?);
        }
        if let Some(l) = label_idx {
            labels.push(record[l].trim().to_string());
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(CliError::data("no data rows"));
    }
    if feature_cols.is_empty() {
        return Err(CliError::data("no feature columns"));
    }
    let x = Matrix::new(lines.len(), feature_cols.len(), data)?;
    Ok(Dataset {
        feature_names: feature_cols.iter().map(|&c| header[c].clone()).collect(),
        x,
        label_name: label.map(str::to_string),
        labels: label_idx.map(|_| labels),
        lines,
    })
}

fn parse_cell(cell: &str, line: u64, column: usize, name: &str) -> CliResult<f64> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::data(format!(
            "line {line}, column {column} ({name}): '{cell}' is not a finite number"
        ))),
    }
}

impl Dataset {
    /// Label cells as strings; configuration error when no label column was read.
    pub fn require_labels(&self) -> CliResult<&[String]> {
        self.labels
            .as_deref()
            .ok_or_else(|| CliError::config("this model needs a label column (--label)"))
    }

    /// Label cells parsed as real-valued targets.
    pub fn targets(&self) -> CliResult<Vec<f64>> {
        let raw = self.require_labels()?;
        let column = self.label_name.as_deref().unwrap_or("label");
        raw.iter()
            .zip(&self.lines)
            .map(|(cell, &line)| {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(CliError::data(format!(
                        "line {line}, column {column}: '{cell}' is not a finite number"
                    ))),
                }
            })
            .collect()
    }
}

/// Shortest decimal form of `v` rounded to 12 significant digits.
pub fn format_number(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap();
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::data(format!("cannot write CSV: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::data(format!("cannot write CSV: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_features_and_labels() {
        let d = read_csv("a,b,y\n1,2,x\n3,4,z\n5,6,x\n".as_bytes(), Some("y")).unwrap();
        assert_eq!(d.x.shape(), (3, 2));
        assert_eq!(d.labels.unwrap(), vec!["x", "z", "x"]);
        assert_eq!(d.feature_names, vec!["a", "b"]);
        let u = read_csv("a,b,y\n1,2,3\n".as_bytes(), None).unwrap();
        assert_eq!(u.x.shape(), (1, 3));
        assert!(u.labels.is_none());
    }

    #[test]
    fn rejects_bad_cells() {
        let e = read_csv("a,b\n1,2\n3,NaN\n".as_bytes(), None).unwrap_err();
        assert_eq!(e.code, 3);
        assert!(e.message.contains("line 3, column 2"), "{}", e.message);
        let e = read_csv("a,b\n1,2\n3\n".as_bytes(), None).unwrap_err();
        assert_eq!(e.code, 3);
        assert!(e.message.contains("line 3"), "{}", e.message);
        let e = read_csv("a,b\n1,2\n".as_bytes(), Some("y")).unwrap_err();
        assert_eq!(e.code, 2);
        let e = read_csv("a,y\n1,q\n".as_bytes(), Some("y")).unwrap().targets().unwrap_err();
        assert_eq!(e.code, 3);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-2.0), "-2");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(123456789.123456789), "123456789.123");
    }
}
