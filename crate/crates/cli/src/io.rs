//! Matrix file format: a JSON document `{"n": <half-dim>, "data": [[...]]}`
//! with `data` square of size `2n`. Numbers round-trip exactly through
//! serde_json's shortest-decimal serialization.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sympl_core::SquareMatrix;

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_square(m: &SquareMatrix) -> CliResult<Self> {
        if !m.dim().is_multiple_of(2) {
            return Err(CliError::usage(format!(
                "matrix dimension {} is odd; the file format stores 2n x 2n matrices",
                m.dim()
            )));
        }
        let data = (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m[(i, j)]).collect())
            .collect();
        Ok(Self {
            n: m.dim() / 2,
            data,
        })
    }

    pub fn into_square(self) -> CliResult<SquareMatrix> {
        let dim = 2 * self.n;
        if self.n == 0 || self.data.len() != dim || self.data.iter().any(|r| r.len() != dim) {
            return Err(CliError::usage(format!(
                "matrix file declares n = {} but data is not {dim} x {dim}",
                self.n
            )));
        }
        SquareMatrix::from_rows(&self.data)
            .map_err(|e| CliError::usage(format!("invalid matrix data: {e}")))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_matrix(path: &Path) -> CliResult<SquareMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse {}: {e}", path.display())))?;
    file.into_square()
}

pub fn write_matrix(path: &Path, m: &SquareMatrix) -> CliResult<()> {
    let file = MatrixFile::from_square(m)?;
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| CliError::usage(format!("serialization failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}
