// Copyright contributors to the qmaxwell project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! CSS codes: the `(H_X, H_Z)` pair, the two decoding sectors, validation
//! and logical operator bases.

mod families;
mod io;

pub use families::{build_bb, build_repetition, build_steane, build_toric, Monomial};
pub use io::{
    load_alist, load_matrix, load_matrix_text, parse_alist, parse_matrix_text, write_alist,
    write_matrix_text, CodeConfig, LoadedCode,
};

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector, RowBasis};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid CSS code: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid code parameter: {0}")]
    Parameter(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("code config: {0}")]
    Config(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `H_X` and `H_Z` disagree on the number of qubits.
    ColumnMismatch { hx_cols: usize, hz_cols: usize },
    /// Row `x_row` of `H_X` and row `z_row` of `H_Z` overlap on an odd
    /// number of qubits.
    NonOrthogonal { x_row: usize, z_row: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColumnMismatch { hx_cols, hz_cols } => {
                write!(f, "H_X has {hx_cols} columns but H_Z has {hz_cols}")
            }
            Violation::NonOrthogonal { x_row, z_row } => {
                write!(f, "H_X row {x_row} and H_Z row {z_row} anticommute")
            }
        }
    }
}

/// Checks `H_X · H_Zᵀ = 0` and dimension consistency, reporting every
/// offending row pair.
pub fn validate_pair(hx: &BitMatrix, hz: &BitMatrix) -> Result<(), Vec<Violation>> {
    if hx.n_cols() != hz.n_cols() {
        return Err(vec![Violation::ColumnMismatch {
            hx_cols: hx.n_cols(),
            hz_cols: hz.n_cols(),
        }]);
    }
    let product = hx.mul_transpose(hz);
    let violations: Vec<Violation> = (0..product.n_rows())
        .flat_map(|x_row| {
            product
                .row(x_row)
                .ones()
                .into_iter()
                .map(move |z_row| Violation::NonOrthogonal { x_row, z_row })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// One of the two binary decoding problems of a CSS code.
///
/// `X` recovers the X part of the error: it is decoded against `H_Z` and
/// judged modulo the row space of `H_X`. `Z` is the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    X,
    Z,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::X, Sector::Z];

    pub fn label(self) -> &'static str {
        match self {
            Sector::X => "x",
            Sector::Z => "z",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssCode {
    name: String,
    hx: BitMatrix,
    hz: BitMatrix,
    k: usize,
}

impl CssCode {
    /// Builds a code from its two check matrices. Redundant rows are allowed.
    pub fn new(name: impl Into<String>, hx: BitMatrix, hz: BitMatrix) -> Result<Self, CodeError> {
        validate_pair(&hx, &hz).map_err(CodeError::Invalid)?;
        let n = hx.n_cols();
        let k = n - hx.rank() - hz.rank();
        Ok(Self {
            name: name.into(),
            hx,
            hz,
            k,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.hx.n_cols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn hx(&self) -> &BitMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BitMatrix {
        &self.hz
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_pair(&self.hx, &self.hz)
    }

    /// The matrix whose syndrome the sector decodes.
    pub fn decoding_matrix(&self, sector: Sector) -> &BitMatrix {
        match sector {
            Sector::X => &self.hz,
            Sector::Z => &self.hx,
        }
    }

    /// The matrix whose row space is the sector's stabilizer equivalence.
    pub fn stabilizer_matrix(&self, sector: Sector) -> &BitMatrix {
        match sector {
            Sector::X => &self.hx,
            Sector::Z => &self.hz,
        }
    }
}

/// Representatives of the `k` independent logical classes of a sector:
/// vectors in the kernel of the decoding matrix that are independent modulo
/// the stabilizer row space.
pub fn logical_basis(code: &CssCode, sector: Sector) -> Vec<BitVector> {
    let mut span = RowBasis::new(code.stabilizer_matrix(sector));
    code.decoding_matrix(sector)
        .nullspace()
        .into_iter()
        .filter(|v| span.insert(v))
        .collect()
}
