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

//! Constructors for the code families used in tests and benchmarks.

use std::collections::HashSet;

use super::{CodeError, CssCode};
use crate::gf2::BitMatrix;

/// Exponent pair `(i, j)` of the monomial `x^i y^j`.
pub type Monomial = (usize, usize);

/// Sum of monomials `Σ x^i y^j` as an `lm × lm` matrix, where
/// `x = S_l ⊗ I_m` and `y = I_l ⊗ S_m` are cyclic shifts.
fn monomial_sum(l: usize, m: usize, terms: &[Monomial]) -> BitMatrix {
    let size = l * m;
    let mut out = BitMatrix::zeros(size, size);
    for &(a, b) in terms {
        for i in 0..l {
            for j in 0..m {
                let row = i * m + j;
                let col = ((i + a) % l) * m + (j + b) % m;
                let cur = out.get(row, col);
                out.set(row, col, !cur);
            }
        }
    }
    out
}

fn reduce_terms(l: usize, m: usize, terms: &[Monomial], label: &str) -> Result<Vec<Monomial>, CodeError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(terms.len());
    for &(i, j) in terms {
        let t = (i % l, j % m);
        if !seen.insert(t) {
            return Err(CodeError::Parameter(format!(
                "duplicate monomial x^{} y^{} in {label} (terms cancel over GF(2))",
                t.0, t.1
            )));
        }
        out.push(t);
    }
    Ok(out)
}

/// Bivariate bicycle code with `H_X = [A | B]` and `H_Z = [Bᵀ | Aᵀ]`.
pub fn build_bb(
    l: usize,
    m: usize,
    a_terms: &[Monomial],
    b_terms: &[Monomial],
) -> Result<CssCode, CodeError> {
    if l == 0 || m == 0 {
        return Err(CodeError::Parameter("l and m must be at least 1".into()));
    }
    let a = monomial_sum(l, m, &reduce_terms(l, m, a_terms, "A")?);
    let b = monomial_sum(l, m, &reduce_terms(l, m, b_terms, "B")?);
    let hx = a.hstack(&b);
    let hz = b.transpose().hstack(&a.transpose());
    CssCode::new(format!("bb_{l}x{m}"), hx, hz)
}

/// Toric code on an `L × L` periodic lattice: qubits on edges, X checks on
/// vertices, Z checks on plaquettes. Parameters `[[2L², 2, L]]`.
pub fn build_toric(size: usize) -> Result<CssCode, CodeError> {
    if size < 2 {
        return Err(CodeError::Parameter("toric lattice size must be at least 2".into()));
    }
    let l = size;
    let h = |i: usize, j: usize| (i % l) * l + (j % l);
    let v = |i: usize, j: usize| l * l + (i % l) * l + (j % l);
    let mut stars = Vec::with_capacity(l * l);
    let mut plaquettes = Vec::with_capacity(l * l);
    for i in 0..l {
        for j in 0..l {
            let mut s = vec![h(i, j), h(i, j + l - 1), v(i, j), v(i + l - 1, j)];
            s.sort_unstable();
            stars.push(s);
            let mut p = vec![h(i, j), h(i + 1, j), v(i, j), v(i, j + 1)];
            p.sort_unstable();
            plaquettes.push(p);
        }
    }
    let n = 2 * l * l;
    CssCode::new(
        format!("toric_{l}"),
        BitMatrix::from_sparse(n, &stars),
        BitMatrix::from_sparse(n, &plaquettes),
    )
}

/// The `[[7,1,3]]` Steane code: both check matrices are the Hamming(7,4)
/// parity checks.
pub fn build_steane() -> CssCode {
    let h = BitMatrix::from_dense(&[
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ]);
    CssCode::new("steane", h.clone(), h).expect("Steane checks are self-orthogonal")
}

/// Bit-flip repetition code on `n` qubits: nearest-neighbour Z checks and no
/// X checks, so `k = 1`.
pub fn build_repetition(n: usize) -> Result<CssCode, CodeError> {
    if n < 2 {
        return Err(CodeError::Parameter("repetition code needs at least 2 qubits".into()));
    }
    let rows: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
    CssCode::new(
        format!("repetition_{n}"),
        BitMatrix::zeros(0, n),
        BitMatrix::from_sparse(n, &rows),
    )
}
