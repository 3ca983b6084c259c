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

use std::collections::BTreeSet;

/// Erased variables grouped by guess score.
///
/// Scores are bounded by `d_v`, so there are `d_v + 1` buckets. Each bucket
/// is ordered so the lowest variable index wins ties.
#[derive(Debug, Clone)]
pub struct ScoreBuckets {
    score: Vec<usize>,
    member: Vec<bool>,
    buckets: Vec<BTreeSet<usize>>,
}

impl ScoreBuckets {
    pub fn new(n_vars: usize, max_score: usize) -> Self {
        Self {
            score: vec![0; n_vars],
            member: vec![false; n_vars],
            buckets: vec![BTreeSet::new(); max_score + 1],
        }
    }

    pub fn insert(&mut self, v: usize, score: usize) {
        debug_assert!(!self.member[v]);
        self.member[v] = true;
        self.score[v] = score;
        self.buckets[score].insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        if self.member[v] {
            self.member[v] = false;
            self.buckets[self.score[v]].remove(&v);
        }
    }

    pub fn increment(&mut self, v: usize) {
        self.move_to(v, self.score[v] + 1);
    }

    pub fn decrement(&mut self, v: usize) {
        self.move_to(v, self.score[v] - 1);
    }

    fn move_to(&mut self, v: usize, score: usize) {
        debug_assert!(self.member[v]);
        self.buckets[self.score[v]].remove(&v);
        self.score[v] = score;
        self.buckets[score].insert(v);
    }

    pub fn score(&self, v: usize) -> Option<usize> {
        self.member[v].then_some(self.score[v])
    }

    /// Highest-scoring member, lowest index among ties.
    pub fn best(&self) -> Option<usize> {
        self.buckets
            .iter()
            .rev()
            .find_map(|b| b.first().copied())
    }
}
