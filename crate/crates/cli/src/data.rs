//! CSV ingestion for `rankscreen screen`.
//!
//! Comma-separated, UTF-8, header row required. Empty cells and `NA` are
//! missing; rows with a missing value in any used column are dropped.

use std::path::Path;

use rankscreen::{DataMatrix, SurvivalResponse};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DataMatrix,
    pub response: SurvivalResponse,
    /// Whether an event column was supplied.
    pub censored: bool,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

pub fn load_csv(path: &Path, response: &str, event: Option<&str>) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    load_reader(file, response, event)
}

pub fn load_reader<R: std::io::Read>(reader: R, response: &str, event: Option<&str>) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("header row: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("column `{name}` not found; header has {}", headers.join(", "))))
    };
    let y_col = find(response)?;
    let e_col = event.map(find).transpose()?;
    if e_col == Some(y_col) {
        return Err(CliError::Usage("response and event columns must differ".into()));
    }
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != y_col && Some(c) != e_col).collect();
    if feature_cols.is_empty() {
        return Err(CliError::Data("no feature columns besides the response".into()));
    }

    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len()];
    let mut rows_read = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(rows_read + 2, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(CliError::Data(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        for (c, raw) in record.iter().enumerate() {
            let value = if is_missing(raw) {
                None
            } else {
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        return Err(CliError::Data(format!(
                            "line {line}, column `{}`: non-numeric value `{raw}`",
                            headers[c]
                        )))
                    }
                }
            };
            if Some(c) == e_col {
                if let Some(v) = value {
                    if v != 0.0 && v != 1.0 {
                        return Err(CliError::Data(format!(
                            "line {line}, column `{}`: event indicator must be 0 or 1, found `{raw}`",
                            headers[c]
                        )));
                    }
                }
            }
            cells[c].push(value);
        }
        rows_read += 1;
    }

    let used: Vec<usize> = feature_cols.iter().copied().chain([y_col]).chain(e_col).collect();
    for &c in &used {
        if cells[c].iter().all(Option::is_none) {
            return Err(CliError::Data(format!("column `{}` has no observed values", headers[c])));
        }
    }
    let keep: Vec<usize> = (0..rows_read).filter(|&i| used.iter().all(|&c| cells[c][i].is_some())).collect();
    if keep.len() < 2 {
        return Err(CliError::Data(format!(
            "only {} complete row(s) out of {rows_read}; need at least 2",
            keep.len()
        )));
    }
    let take = |c: usize| -> Vec<f64> { keep.iter().map(|&i| cells[c][i].unwrap()).collect() };

    let columns = feature_cols.iter().map(|&c| take(c)).collect();
    let names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    let x = DataMatrix::new(columns, names).map_err(|e| CliError::Data(e.to_string()))?;
    let times = take(y_col);
    let events = match e_col {
        Some(c) => take(c).into_iter().map(|v| v == 1.0).collect(),
        None => vec![true; times.len()],
    };
    let response = SurvivalResponse::new(times, events).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(Dataset {
        x,
        response,
        censored: e_col.is_some(),
        rows_read,
        rows_dropped: rows_read - keep.len(),
    })
}
