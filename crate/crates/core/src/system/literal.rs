//! Structured matrix literals used in JSON config, system and estimate files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{matrix_from_row_major, row_major, Matrix};

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixLiteral {
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    Identity {
        dim: usize,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// `scale · [[0, 1], [I_{dim-1}, 0]]`: ones on the subdiagonal and in the
    /// top-right corner.
    CyclicShift {
        dim: usize,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// `scale · [I_cols; 0]` for `rows ≥ cols`, or its transpose-like
    /// truncation otherwise.
    StackedIdentity {
        rows: usize,
        cols: usize,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Zero {
        rows: usize,
        cols: usize,
    },
}

impl MatrixLiteral {
    pub fn to_matrix(&self) -> Result<Matrix> {
        let check_scale = |scale: f64| {
            if scale.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput("matrix literal scale must be finite".into()))
            }
        };
        let m = match *self {
            MatrixLiteral::Dense { rows, cols, ref data } => matrix_from_row_major(rows, cols, data)?,
            MatrixLiteral::Identity { dim, scale } => {
                check_scale(scale)?;
                Matrix::identity(dim, dim) * scale
            }
            MatrixLiteral::CyclicShift { dim, scale } => {
                check_scale(scale)?;
                cyclic_shift(dim) * scale
            }
            MatrixLiteral::StackedIdentity { rows, cols, scale } => {
                check_scale(scale)?;
                Matrix::identity(rows, cols) * scale
            }
            MatrixLiteral::Zero { rows, cols } => Matrix::zeros(rows, cols),
        };
        if m.is_empty() {
            return Err(Error::InvalidInput("matrix literal has a zero dimension".into()));
        }
        Ok(m)
    }

    pub fn dense(m: &Matrix) -> Self {
        MatrixLiteral::Dense { rows: m.nrows(), cols: m.ncols(), data: row_major(m) }
    }
}

/// Permutation matrix with ones at `(i, i-1)` and `(0, dim-1)`.
pub fn cyclic_shift(dim: usize) -> Matrix {
    let mut s = Matrix::zeros(dim, dim);
    if dim == 0 {
        return s;
    }
    s[(0, dim - 1)] = 1.0;
    for i in 1..dim {
        s[(i, i - 1)] = 1.0;
    }
    s
}

/// `#[serde(with = "dense_matrix")]` adapter: writes the dense literal,
/// reads any literal form.
pub mod dense_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixLiteral::dense(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Matrix, D::Error> {
        MatrixLiteral::deserialize(d)?.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// Optional variant of [`dense_matrix`].
pub mod opt_dense_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Matrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixLiteral::dense).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Matrix>, D::Error> {
        Option::<MatrixLiteral>::deserialize(d)?
            .map(|lit| lit.to_matrix())
            .transpose()
            .map_err(serde::de::Error::custom)
    }
}
