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

//! Parity-check file formats and JSON code configs.
//!
//! Two matrix formats are understood:
//!
//! * MacKay alist: `n_cols n_rows`, the two maximum degrees, the column
//!   degree list, the row degree list, then one line per column and one
//!   line per row of 1-indexed neighbours. Zero padding is ignored.
//! * Plain text: one row per line of `0`/`1` entries, either contiguous or
//!   whitespace separated. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{build_bb, build_repetition, build_steane, build_toric, CodeError, CssCode};
use crate::gf2::BitMatrix;

fn read(path: &Path) -> Result<String, CodeError> {
    fs::read_to_string(path).map_err(|source| CodeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct LineReader<'a> {
    source: &'a str,
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> LineReader<'a> {
    fn new(source: &'a str, text: &'a str) -> Self {
        Self {
            source,
            lines: text.lines().enumerate().peekable(),
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> CodeError {
        CodeError::Parse {
            path: self.source.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Next non-blank line as a list of integers, with its 1-based number.
    fn numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>), CodeError> {
        loop {
            let Some((idx, line)) = self.lines.next() else {
                return Err(self.error(0, format!("unexpected end of file, expected {what}")));
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| self.error(idx + 1, format!("bad integer {t:?} in {what}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((idx + 1, nums));
        }
    }

    fn trailing(&mut self) -> Option<usize> {
        self.lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .map(|(i, _)| i + 1)
    }
}

/// Reads one adjacency block of an alist file: one line per entry of
/// `degrees`, each listing up to `degrees[k]` 1-indexed neighbours in `1..=bound`.
fn read_adjacency(
    reader: &mut LineReader<'_>,
    degrees: &[usize],
    bound: usize,
    what: &str,
) -> Result<Vec<Vec<usize>>, CodeError> {
    let mut out = Vec::with_capacity(degrees.len());
    for (k, &degree) in degrees.iter().enumerate() {
        let (line, nums) = reader.numbers(what)?;
        let mut seen = BTreeSet::new();
        for &x in nums.iter().filter(|&&x| x != 0) {
            if x > bound {
                return Err(reader.error(line, format!("index {x} out of range 1..={bound}")));
            }
            if !seen.insert(x - 1) {
                return Err(reader.error(line, format!("duplicate entry {x}")));
            }
        }
        if seen.len() != degree {
            return Err(reader.error(
                line,
                format!("{what} {} lists {} entries, header says {}", k + 1, seen.len(), degree),
            ));
        }
        out.push(seen.into_iter().collect());
    }
    Ok(out)
}

/// Parses an alist document. `source` names the input in error messages.
pub fn parse_alist(source: &str, text: &str) -> Result<BitMatrix, CodeError> {
    let mut reader = LineReader::new(source, text);
    let (line, dims) = reader.numbers("dimensions")?;
    let [n_cols, n_rows] = dims[..] else {
        return Err(reader.error(line, "expected `n_cols n_rows`"));
    };
    let (line, maxes) = reader.numbers("maximum degrees")?;
    if maxes.len() != 2 {
        return Err(reader.error(line, "expected two maximum degrees"));
    }
    let (line, col_deg) = reader.numbers("column degrees")?;
    if col_deg.len() != n_cols {
        return Err(reader.error(line, format!("expected {n_cols} column degrees, found {}", col_deg.len())));
    }
    let (line, row_deg) = reader.numbers("row degrees")?;
    if row_deg.len() != n_rows {
        return Err(reader.error(line, format!("expected {n_rows} row degrees, found {}", row_deg.len())));
    }
    let cols = read_adjacency(&mut reader, &col_deg, n_rows, "column")?;
    let rows = read_adjacency(&mut reader, &row_deg, n_cols, "row")?;
    if let Some(line) = reader.trailing() {
        return Err(reader.error(line, "trailing data after the row lists"));
    }
    let m = BitMatrix::from_sparse(n_cols, &rows);
    for (c, list) in cols.iter().enumerate() {
        for &r in list {
            if !m.get(r, c) {
                return Err(reader.error(0, format!(
                    "column {} lists row {} but that row does not list the column",
                    c + 1,
                    r + 1
                )));
            }
        }
    }
    let listed: usize = cols.iter().map(Vec::len).sum();
    let stored: usize = rows.iter().map(Vec::len).sum();
    if listed != stored {
        return Err(reader.error(0, "column and row lists describe different matrices"));
    }
    Ok(m)
}

pub fn load_alist(path: &Path) -> Result<BitMatrix, CodeError> {
    parse_alist(&path.display().to_string(), &read(path)?)
}

/// Renders a matrix in alist form, zero-padding each list to the maximum degree.
pub fn write_alist(m: &BitMatrix) -> String {
    let rows = m.to_sparse_rows();
    let mut cols = vec![Vec::new(); m.n_cols()];
    for (r, list) in rows.iter().enumerate() {
        for &c in list {
            cols[c].push(r);
        }
    }
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: Vec<String>| v.join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.n_cols(), m.n_rows());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(cols.iter().map(|c| c.len().to_string()).collect()));
    let _ = writeln!(out, "{}", join(rows.iter().map(|r| r.len().to_string()).collect()));
    for (lists, width) in [(&cols, max_col), (&rows, max_row)] {
        for list in lists.iter() {
            let mut entries: Vec<String> = list.iter().map(|x| (x + 1).to_string()).collect();
            entries.resize(width.max(1), "0".to_string());
            let _ = writeln!(out, "{}", join(entries));
        }
    }
    out
}

/// Parses a plain 0/1 matrix.
pub fn parse_matrix_text(source: &str, text: &str) -> Result<BitMatrix, CodeError> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for ch in line.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '0' => row.push(0),
                '1' => row.push(1),
                other => {
                    return Err(CodeError::Parse {
                        path: source.to_string(),
                        line: idx + 1,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CodeError::Parse {
                    path: source.to_string(),
                    line: idx + 1,
                    message: format!("row has {} entries, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(BitMatrix::from_dense(&rows))
}

pub fn load_matrix_text(path: &Path) -> Result<BitMatrix, CodeError> {
    parse_matrix_text(&path.display().to_string(), &read(path)?)
}

pub fn write_matrix_text(m: &BitMatrix) -> String {
    let mut out = String::new();
    for r in m.rows() {
        out.push_str(&r.to_bit_string());
        out.push('\n');
    }
    out
}

/// Loads a matrix, choosing the format from the extension (`.alist` or text).
pub fn load_matrix(path: &Path) -> Result<BitMatrix, CodeError> {
    if path.extension().is_some_and(|e| e == "alist") {
        load_alist(path)
    } else {
        load_matrix_text(path)
    }
}

/// JSON description of a code, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeConfig {
    Bb {
        l: usize,
        m: usize,
        a: Vec<[usize; 2]>,
        b: Vec<[usize; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    CssFiles {
        hx: PathBuf,
        hz: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Toric {
        #[serde(alias = "L")]
        size: usize,
    },
    Steane,
    Repetition {
        n: usize,
    },
}

/// A built code together with every file that went into it.
#[derive(Debug, Clone)]
pub struct LoadedCode {
    pub code: CssCode,
    pub inputs: Vec<PathBuf>,
}

impl CodeConfig {
    pub fn from_json(text: &str) -> Result<Self, CodeError> {
        serde_json::from_str(text).map_err(|e| CodeError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, CodeError> {
        Self::from_json(&read(path)?)
    }

    /// Loads the raw `(name, H_X, H_Z)` triple without validating it.
    /// Relative matrix paths are resolved against `base`.
    pub fn matrices(&self, base: &Path) -> Result<(String, BitMatrix, BitMatrix, Vec<PathBuf>), CodeError> {
        match self {
            CodeConfig::CssFiles { hx, hz, name } => {
                let hx_path = base.join(hx);
                let hz_path = base.join(hz);
                let mx = load_matrix(&hx_path)?;
                let mz = load_matrix(&hz_path)?;
                let name = name.clone().unwrap_or_else(|| {
                    hx.file_stem()
                        .map_or("css".to_string(), |s| s.to_string_lossy().into_owned())
                });
                Ok((name, mx, mz, vec![hx_path, hz_path]))
            }
            _ => {
                let code = self.build(base)?.code;
                Ok((code.name().to_string(), code.hx().clone(), code.hz().clone(), Vec::new()))
            }
        }
    }

    pub fn build(&self, base: &Path) -> Result<LoadedCode, CodeError> {
        let as_pairs = |v: &[[usize; 2]]| v.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>();
        let code = match self {
            CodeConfig::Bb { l, m, a, b, name } => {
                let code = build_bb(*l, *m, &as_pairs(a), &as_pairs(b))?;
                match name {
                    Some(n) => CssCode::new(n.clone(), code.hx().clone(), code.hz().clone())?,
                    None => code,
                }
            }
            CodeConfig::CssFiles { .. } => {
                let (name, hx, hz, inputs) = self.matrices(base)?;
                return Ok(LoadedCode {
                    code: CssCode::new(name, hx, hz)?,
                    inputs,
                });
            }
            CodeConfig::Toric { size } => build_toric(*size)?,
            CodeConfig::Steane => build_steane(),
            CodeConfig::Repetition { n } => build_repetition(*n)?,
        };
        Ok(LoadedCode {
            code,
            inputs: Vec::new(),
        })
    }

    /// Reads a config file and builds its code; the config file itself is
    /// the first entry of `inputs`.
    pub fn load(path: &Path) -> Result<LoadedCode, CodeError> {
        let config = Self::from_path(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut loaded = config.build(base)?;
        loaded.inputs.insert(0, path.to_path_buf());
        Ok(loaded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitVector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SMALL_ALIST: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    #[test]
    fn alist_small_matrix() {
        let m = parse_alist("small", SMALL_ALIST).unwrap();
        assert_eq!(m, BitMatrix::from_dense(&[[1, 1, 0], [0, 1, 1]]));
        assert_eq!(write_alist(&m), SMALL_ALIST);
    }

    #[test]
    fn alist_tolerates_unpadded_lists() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n";
        assert_eq!(parse_alist("x", text).unwrap(), parse_alist("y", SMALL_ALIST).unwrap());
    }

    #[test]
    fn alist_rejects_row_count_mismatch() {
        // header claims three rows, body has two
        let text = "3 3\n2 2\n1 2 1\n2 2 0\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        assert!(matches!(parse_alist("bad", text), Err(CodeError::Parse { .. })));
        let missing_row = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n";
        assert!(parse_alist("bad", missing_row).is_err());
    }

    #[test]
    fn alist_rejects_bad_entries() {
        let out_of_range = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 4\n2 3\n";
        assert!(parse_alist("bad", out_of_range).is_err());
        let duplicate = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 1\n2 3\n";
        assert!(parse_alist("bad", duplicate).is_err());
        let inconsistent = "3 2\n2 2\n1 2 1\n2 2\n2 0\n1 2\n2 0\n1 2\n2 3\n";
        assert!(parse_alist("bad", inconsistent).is_err());
        assert!(parse_alist("bad", "3\n").is_err());
    }

    #[test]
    fn matrix_text_parsing() {
        let m = parse_matrix_text("t", "# comment\n1 1 0\n\n011\n").unwrap();
        assert_eq!(m, BitMatrix::from_dense(&[[1, 1, 0], [0, 1, 1]]));
        assert_eq!(parse_matrix_text("t", &write_matrix_text(&m)).unwrap(), m);
        assert!(parse_matrix_text("t", "10\n1\n").is_err());
        assert!(parse_matrix_text("t", "12\n").is_err());
    }

    #[test]
    fn config_parsing_and_building() {
        let cfg = CodeConfig::from_json(r#"{"family":"bb","l":6,"m":6,"a":[[3,0],[0,1],[0,2]],"b":[[0,3],[1,0],[2,0]],"name":"bb72"}"#).unwrap();
        let loaded = cfg.build(Path::new(".")).unwrap();
        assert_eq!(loaded.code.name(), "bb72");
        assert_eq!(loaded.code.k(), 12);
        let toric = CodeConfig::from_json(r#"{"family":"toric","L":3}"#).unwrap();
        assert_eq!(toric, CodeConfig::Toric { size: 3 });
        assert!(CodeConfig::from_json(r#"{"family":"nope"}"#).is_err());
    }

    #[test]
    fn css_files_config_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let code = build_toric(2).unwrap();
        fs::write(dir.path().join("hx.alist"), write_alist(code.hx())).unwrap();
        fs::write(dir.path().join("hz.txt"), write_matrix_text(code.hz())).unwrap();
        fs::write(
            dir.path().join("code.json"),
            r#"{"family":"css_files","hx":"hx.alist","hz":"hz.txt","name":"t2"}"#,
        )
        .unwrap();
        let loaded = CodeConfig::load(&dir.path().join("code.json")).unwrap();
        assert_eq!(loaded.code.hx(), code.hx());
        assert_eq!(loaded.code.hz(), code.hz());
        assert_eq!(loaded.inputs.len(), 3);
        let missing = CodeConfig::load(&dir.path().join("absent.json"));
        assert!(matches!(missing, Err(CodeError::Io { .. })));
    }

    proptest! {
        #[test]
        fn alist_round_trip(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = BitMatrix::from_rows(
                cols,
                (0..rows).map(|_| BitVector::from_bools((0..cols).map(|_| rng.gen_bool(0.3)))).collect(),
            ).unwrap();
            prop_assert_eq!(parse_alist("rt", &write_alist(&m)).unwrap(), m);
        }
    }
}
