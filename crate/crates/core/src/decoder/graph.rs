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

use crate::gf2::BitMatrix;

/// Bipartite check/variable adjacency of a parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    check_adj: Vec<Vec<usize>>,
    var_adj: Vec<Vec<usize>>,
    max_var_degree: usize,
    max_check_degree: usize,
}

impl TannerGraph {
    pub fn from_matrix(h: &BitMatrix) -> Self {
        let check_adj = h.to_sparse_rows();
        let mut var_adj = vec![Vec::new(); h.n_cols()];
        for (c, vars) in check_adj.iter().enumerate() {
            for &v in vars {
                var_adj[v].push(c);
            }
        }
        let max_var_degree = var_adj.iter().map(Vec::len).max().unwrap_or(0);
        let max_check_degree = check_adj.iter().map(Vec::len).max().unwrap_or(0);
        Self {
            check_adj,
            var_adj,
            max_var_degree,
            max_check_degree,
        }
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.var_adj.len()
    }

    #[inline]
    pub fn n_checks(&self) -> usize {
        self.check_adj.len()
    }

    /// Variables of check `c`, sorted.
    #[inline]
    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.check_adj[c]
    }

    /// Checks of variable `v`, sorted.
    #[inline]
    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    /// `d_v`: the largest column weight.
    pub fn max_var_degree(&self) -> usize {
        self.max_var_degree
    }

    /// `d_c`: the largest row weight.
    pub fn max_check_degree(&self) -> usize {
        self.max_check_degree
    }
}

/// Stabilizer generator supports, indexed both ways, for depth-1 pruning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    supports: Vec<Vec<usize>>,
    by_var: Vec<Vec<usize>>,
}

impl GeneratorSet {
    pub fn from_matrix(stabilizers: &BitMatrix) -> Self {
        let supports = stabilizers.to_sparse_rows();
        let mut by_var = vec![Vec::new(); stabilizers.n_cols()];
        for (g, support) in supports.iter().enumerate() {
            for &v in support {
                by_var[v].push(g);
            }
        }
        Self { supports, by_var }
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn n_vars(&self) -> usize {
        self.by_var.len()
    }

    pub fn support(&self, g: usize) -> &[usize] {
        &self.supports[g]
    }

    pub fn containing(&self, v: usize) -> &[usize] {
        &self.by_var[v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_and_degrees() {
        let h = BitMatrix::from_dense(&[[1, 1, 0, 1], [0, 1, 1, 0]]);
        let g = TannerGraph::from_matrix(&h);
        assert_eq!(g.n_checks(), 2);
        assert_eq!(g.n_vars(), 4);
        assert_eq!(g.check_neighbors(0), &[0, 1, 3]);
        assert_eq!(g.var_neighbors(1), &[0, 1]);
        assert_eq!(g.max_var_degree(), 2);
        assert_eq!(g.max_check_degree(), 3);
    }
}
