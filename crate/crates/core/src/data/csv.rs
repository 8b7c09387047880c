//! Results and model serialization.
//!
//! Results use one fixed long-format schema (`experiment,algo,seed,
//! iteration,metric,value`) with values written to full double precision,
//! so rewriting identical rows is byte-identical. Model files are flat
//! `kind,i,j,value` tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::DataError;
use crate::rbm::RbmParams;

pub const RESULTS_HEADER: &str = "experiment,algo,seed,iteration,metric,value";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub algo: String,
    pub seed: u64,
    pub iteration: u64,
    pub metric: String,
    pub value: f64,
}

impl ResultRow {
    pub fn new(
        experiment: impl Into<String>,
        algo: impl Into<String>,
        seed: u64,
        iteration: u64,
        metric: impl Into<String>,
        value: f64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            algo: algo.into(),
            seed,
            iteration,
            metric: metric.into(),
            value,
        }
    }
}

fn check_field(field: &'static str, value: &str) -> Result<(), DataError> {
    if value.contains([',', '\n', '\r', '"']) {
        return Err(DataError::CsvField {
            field,
            value: value.to_string(),
        });
    }
    Ok(())
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn format_value(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn results_to_string(rows: &[ResultRow]) -> Result<String, DataError> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for row in rows {
        check_field("experiment", &row.experiment)?;
        check_field("algo", &row.algo)?;
        check_field("metric", &row.metric)?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.experiment,
            row.algo,
            row.seed,
            row.iteration,
            row.metric,
            format_value(row.value)
        )
        .expect("writing to string");
    }
    Ok(out)
}

pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<(), DataError> {
    let path = path.as_ref();
    let text = results_to_string(rows)?;
    fs::write(path, text).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let err = |line: usize, message: String| DataError::Csv {
        path: path.display().to_string(),
        message,
        line,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == RESULTS_HEADER => {}
        Some((_, header)) => {
            return Err(err(1, format!("unexpected header {header:?}")));
        }
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (index, line) in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(err(index + 1, format!("expected 6 fields, got {}", parts.len())));
        }
        rows.push(ResultRow {
            experiment: parts[0].to_string(),
            algo: parts[1].to_string(),
            seed: parts[2]
                .parse()
                .map_err(|e| err(index + 1, format!("bad seed: {e}")))?,
            iteration: parts[3]
                .parse()
                .map_err(|e| err(index + 1, format!("bad iteration: {e}")))?,
            metric: parts[4].to_string(),
            value: parts[5]
                .parse()
                .map_err(|e| err(index + 1, format!("bad value: {e}")))?,
        });
    }
    Ok(rows)
}

pub fn write_params(path: impl AsRef<Path>, params: &RbmParams) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut out = String::from("kind,i,j,value\n");
    let (m, n) = params.weights.dim();
    writeln!(out, "shape,{m},{n},0").expect("writing to string");
    for i in 0..m {
        for j in 0..n {
            writeln!(out, "w,{i},{j},{}", format_value(params.weights[[i, j]]))
                .expect("writing to string");
        }
    }
    for (i, &b) in params.visible_bias.iter().enumerate() {
        writeln!(out, "bv,{i},0,{}", format_value(b)).expect("writing to string");
    }
    for (j, &b) in params.hidden_bias.iter().enumerate() {
        writeln!(out, "bh,{j},0,{}", format_value(b)).expect("writing to string");
    }
    fs::write(path, out).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_params(path: impl AsRef<Path>) -> Result<RbmParams, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let err = |line: usize, message: String| DataError::Csv {
        path: path.display().to_string(),
        message,
        line,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "kind,i,j,value")) => {}
        _ => return Err(err(1, "expected model header kind,i,j,value".into())),
    }
    let mut weights: Option<Array2<f64>> = None;
    let mut visible_bias: Option<Array1<f64>> = None;
    let mut hidden_bias: Option<Array1<f64>> = None;
    for (index, line) in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(err(index + 1, format!("expected 4 fields, got {}", parts.len())));
        }
        let i: usize = parts[1]
            .parse()
            .map_err(|e| err(index + 1, format!("bad index: {e}")))?;
        let j: usize = parts[2]
            .parse()
            .map_err(|e| err(index + 1, format!("bad index: {e}")))?;
        match parts[0] {
            "shape" => {
                weights = Some(Array2::zeros((i, j)));
                visible_bias = Some(Array1::zeros(i));
                hidden_bias = Some(Array1::zeros(j));
            }
            kind => {
                let value: f64 = parts[3]
                    .parse()
                    .map_err(|e| err(index + 1, format!("bad value: {e}")))?;
                match (kind, weights.as_mut(), visible_bias.as_mut(), hidden_bias.as_mut()) {
                    ("w", Some(w), _, _) => w[[i, j]] = value,
                    ("bv", _, Some(bv), _) => bv[i] = value,
                    ("bh", _, _, Some(bh)) => bh[i] = value,
                    _ => {
                        return Err(err(
                            index + 1,
                            format!("unknown kind {kind:?} or missing shape row"),
                        ))
                    }
                }
            }
        }
    }
    match (weights, visible_bias, hidden_bias) {
        (Some(w), Some(bv), Some(bh)) => RbmParams::new(w, bv, bh)
            .map_err(|e| err(0, format!("invalid model: {e}"))),
        _ => Err(err(0, "model file has no shape row".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn empty_table_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_results(&path, &[]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{RESULTS_HEADER}\n"));
        assert!(read_results(&path).unwrap().is_empty());
    }

    #[test]
    fn rows_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            ResultRow::new("bias-bench", "cd1", 7, 1000, "kl", 0.12345678901234567),
            ResultRow::new("bias-bench", "bgf", 7, 1000, "kl", 1.0 / 3.0),
            ResultRow::new("sweep", "bgf", 8, 10, "avg_log_prob", -4.75e-2),
        ];
        write_results(&path, &rows).unwrap();
        assert_eq!(read_results(&path).unwrap(), rows);
    }

    #[test]
    fn fields_with_separators_are_rejected() {
        let rows = vec![ResultRow::new("a,b", "cd", 0, 0, "kl", 1.0)];
        assert!(matches!(
            results_to_string(&rows).unwrap_err(),
            DataError::CsvField { field: "experiment", .. }
        ));
    }

    #[test]
    fn params_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.csv");
        let mut r = rng::stream(5, 0);
        let params = RbmParams::random_init(6, 4, 1.3, &mut r);
        write_params(&path, &params).unwrap();
        assert_eq!(read_params(&path).unwrap(), params);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, format!("{RESULTS_HEADER}\nx,y,z\n")).unwrap();
        let err = read_results(&path).unwrap_err();
        assert!(matches!(err, DataError::Csv { line: 2, .. }));
    }
}
