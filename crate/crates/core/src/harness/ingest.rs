//! CSV ingestion and emission for trajectory data.
//!
//! On disk, rows are time steps: the state file has `T+1` rows of `n`
//! columns (row `k` is `x(k)` transposed), the output file `T` rows of `q`
//! columns. In memory the matrices are transposed to the column-per-step
//! layout the analysis works in. Values are written in shortest
//! round-trip decimal form, so write-then-read reproduces matrices exactly.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::HarnessError;

/// Parse a numeric CSV. A first row with any non-numeric token is treated as
/// a header and skipped; every later row must be fully numeric and all rows
/// must have equal length.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, HarnessError> {
    let content = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut first_data_row = true;
    for (line_no, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let mut parsed = Vec::with_capacity(tokens.len());
        let mut bad: Option<(usize, String)> = None;
        for (col, tok) in tokens.iter().enumerate() {
            match tok.parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    bad = Some((col, tok.to_string()));
                    break;
                }
            }
        }
        if let Some((col, token)) = bad {
            if first_data_row {
                // Header row; skip it.
                first_data_row = false;
                continue;
            }
            return Err(HarnessError::NonNumericCell {
                path: path.to_path_buf(),
                row: line_no + 1,
                col: col + 1,
                token,
            });
        }
        first_data_row = false;
        match width {
            None => width = Some(parsed.len()),
            Some(w) if w != parsed.len() => {
                return Err(HarnessError::MalformedCsv {
                    path: path.to_path_buf(),
                    detail: format!(
                        "row {} has {} columns, expected {}",
                        line_no + 1,
                        parsed.len(),
                        w
                    ),
                });
            }
            Some(_) => {}
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(HarnessError::MalformedCsv {
            path: path.to_path_buf(),
            detail: "no data rows".to_string(),
        });
    }
    Ok(rows)
}

fn rows_to_matrix_transposed(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let time_steps = rows.len();
    let width = rows[0].len();
    DMatrix::from_fn(width, time_steps, |i, k| rows[k][i])
}

/// Load a state file and an output file into `(states, outputs)` matrices of
/// shape `n x (T+1)` and `q x T`. The state file must have exactly one more
/// row than the output file.
pub fn ingest_trajectory(
    x_path: &Path,
    y_path: &Path,
) -> Result<(DMatrix<f64>, DMatrix<f64>), HarnessError> {
    let x_rows = read_numeric_csv(x_path)?;
    let y_rows = read_numeric_csv(y_path)?;
    if x_rows.len() != y_rows.len() + 1 {
        return Err(HarnessError::DimensionMismatch {
            detail: format!(
                "state file has {} rows, output file {} rows; expected states = outputs + 1",
                x_rows.len(),
                y_rows.len()
            ),
        });
    }
    Ok((
        rows_to_matrix_transposed(&x_rows),
        rows_to_matrix_transposed(&y_rows),
    ))
}

/// Write a column-per-step matrix as CSV with one row per time step.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), HarnessError> {
    let mut out = String::new();
    for k in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m[(i, k)]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
