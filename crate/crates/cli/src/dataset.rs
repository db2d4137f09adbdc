//! CSV ingestion.

use std::path::Path;

use ewpo_core::multivariate::DesignMatrix;
use ewpo_core::Sample;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Which file and columns a command reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSelection {
    pub path: String,
    pub y: String,
    pub x: Vec<String>,
}

/// Response and regressor columns, in file row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub x_names: Vec<String>,
}

impl Dataset {
    /// Single-regressor view; fails when more than one x column was selected.
    pub fn sample(&self) -> CliResult<Sample> {
        match self.x.as_slice() {
            [x] => Ok(Sample::new(x.clone(), self.y.clone())?),
            _ => Err(CliError::Usage(format!(
                "this command takes exactly one regressor, got {} ({})",
                self.x.len(),
                self.x_names.join(", ")
            ))),
        }
    }

    pub fn design(&self) -> CliResult<DesignMatrix> {
        Ok(DesignMatrix::from_columns(&self.x, self.y.clone())?)
    }
}

/// Reads the named columns of a CSV file with a header row.
///
/// Every selected cell must parse as a finite real; errors name the column and
/// the 1-based data row.
pub fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: bad header: {e}", path.display())))?
        .clone();
    let positions = names
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: no column `{name}` (columns: {})",
                    path.display(),
                    headers.iter().collect::<Vec<_>>().join(", ")
                ))
            })
        })
        .collect::<CliResult<Vec<usize>>>()?;

    let mut columns = vec![Vec::new(); names.len()];
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::Data(format!("{}: row {row}: {e}", path.display())))?;
        for (c, &pos) in positions.iter().enumerate() {
            let cell = record.get(pos).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {row}, column `{}`: cannot parse `{cell}` as a number",
                    path.display(),
                    names[c]
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: row {row}, column `{}`: non-finite value `{cell}`",
                    path.display(),
                    names[c]
                )));
            }
            columns[c].push(value);
        }
    }
    let rows = columns.first().map_or(0, Vec::len);
    if rows < 2 {
        return Err(CliError::Data(format!(
            "{}: need at least 2 data rows, found {rows}",
            path.display()
        )));
    }
    Ok(columns)
}

pub fn parse_dataset(sel: &DataSelection) -> CliResult<Dataset> {
    if sel.x.is_empty() {
        return Err(CliError::Usage("at least one x column is required".into()));
    }
    let mut names = vec![sel.y.as_str()];
    names.extend(sel.x.iter().map(String::as_str));
    let mut columns = read_columns(Path::new(&sel.path), &names)?;
    let y = columns.remove(0);
    Ok(Dataset {
        y,
        x: columns,
        x_names: sel.x.clone(),
    })
}
