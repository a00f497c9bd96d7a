//! On-disk channel and state files.
//!
//! Both are JSON objects; matrices are row-major nested arrays whose entries are
//! `[re, im]` pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use qecverify::{CMatrix, KrausChannel, SpaceDecomposition};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::json;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    #[serde(rename = "dim_A")]
    pub dim_a: usize,
    #[serde(rename = "dim_B")]
    pub dim_b: usize,
    #[serde(rename = "dim_B1")]
    pub dim_b1: usize,
    pub dim_perp: usize,
    pub kraus: Vec<MatrixRows>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
    B1,
    H,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub factor: Factor,
    pub matrix: MatrixRows,
}

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows, what: &str) -> Result<CMatrix, CliError> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if n == 0 || cols == 0 {
        return Err(CliError::input(format!("{what}: empty matrix")));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::input(format!("{what}: ragged rows")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::input(format!("{what}: non-finite entry")));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl ChannelFile {
    pub fn from_channel(channel: &KrausChannel, decomp: &SpaceDecomposition) -> Self {
        Self {
            dim_a: decomp.dim_a(),
            dim_b: decomp.dim_b(),
            dim_b1: decomp.dim_b1(),
            dim_perp: decomp.dim_perp(),
            kraus: channel.operators().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn decomposition(&self) -> Result<SpaceDecomposition, CliError> {
        Ok(SpaceDecomposition::new(
            self.dim_a,
            self.dim_b,
            self.dim_b1,
            self.dim_perp,
        )?)
    }

    /// Checks shapes and trace preservation at `tol`.
    pub fn to_channel(&self, tol: f64) -> Result<(KrausChannel, SpaceDecomposition), CliError> {
        let decomp = self.decomposition()?;
        if self.kraus.is_empty() {
            return Err(CliError::input("kraus: at least one operator is required"));
        }
        let n = decomp.total_dim();
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (a, rows) in self.kraus.iter().enumerate() {
            let m = rows_to_matrix(rows, &format!("kraus[{a}]"))?;
            if m.shape() != (n, n) {
                return Err(CliError::input(format!(
                    "kraus[{a}] is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            ops.push(m);
        }
        let channel = KrausChannel::new(ops, tol)?;
        Ok((channel, decomp))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}

impl StateFile {
    pub fn new(factor: Factor, m: &CMatrix) -> Self {
        Self {
            factor,
            matrix: matrix_to_rows(m),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }

    /// The matrix, validated as a density operator at `tol`.
    pub fn density(&self, tol: f64) -> Result<CMatrix, CliError> {
        let m = rows_to_matrix(&self.matrix, "matrix")?;
        qecverify::states::validate_density(&m, tol)?;
        Ok(m)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let value = serde_json::to_value(value).expect("file types serialize");
    fs::write(path, json::canonical(&value) + "\n")
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
