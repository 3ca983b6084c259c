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

//! Peeling and quantum Maxwell decoding of one binary erasure problem
//! `H·w = σ`, `supp(w) ⊆ E0`.
//!
//! The Maxwell decoder peels dangling checks; when it stalls on a stopping
//! set it guesses an erased variable as a fresh symbolic pivot and resumes.
//! Checks that end up with no erased neighbour but a nonzero affine
//! syndrome are restrictive: each one eliminates the newest pivot in its
//! support, giving the guess back. At most `max_guesses` pivots may be alive
//! at once; plain peeling is the special case `max_guesses = 0`.

mod buckets;
mod graph;
mod state;
mod trace;

pub use buckets::ScoreBuckets;
pub use graph::{GeneratorSet, TannerGraph};
pub use state::ResidualState;
pub use trace::{write_jsonl, TraceEvent};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{AffineForm, PivotAssignment, PivotRecord, PivotSlot};
use crate::gf2::BitVector;

/// Rule for choosing which erased variable to guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotStrategy {
    /// Uniform over the residual erased set, from the caller's generator.
    Random,
    /// Highest guess score (residual degree-2 neighbours), lowest index on ties.
    #[serde(rename = "score")]
    ScoreBuckets,
}

impl PivotStrategy {
    pub fn label(self) -> &'static str {
        match self {
            PivotStrategy::Random => "random",
            PivotStrategy::ScoreBuckets => "score",
        }
    }
}

impl fmt::Display for PivotStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PivotStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(PivotStrategy::Random),
            "score" => Ok(PivotStrategy::ScoreBuckets),
            _ => Err(format!("unknown strategy {s:?} (expected random or score)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxwellOptions {
    pub max_guesses: usize,
    pub strategy: PivotStrategy,
    /// Depth-1 pruning with the same-sector stabilizer generators.
    pub prune: bool,
    pub record_trace: bool,
}

impl MaxwellOptions {
    pub fn new(max_guesses: usize) -> Self {
        Self {
            max_guesses,
            strategy: PivotStrategy::ScoreBuckets,
            prune: false,
            record_trace: false,
        }
    }

    pub fn peeling() -> Self {
        Self::new(0)
    }

    pub fn with_strategy(mut self, strategy: PivotStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_pruning(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }
}

/// Instrumented work counters for one decoding run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DecodeStats {
    pub peels: u64,
    pub guesses: u64,
    pub demotions: u64,
    pub prunes: u64,
    pub degree_updates: u64,
    /// Affine additions into check forms when a variable leaves the erasure.
    pub propagations: u64,
    /// Affine substitutions performed by demotions.
    pub substitutions: u64,
    pub bucket_updates: u64,
    /// Width in bits of one affine form (`budget + 1`).
    pub form_bits: u64,
    /// Largest number of simultaneously active pivots.
    pub peak_pivots: usize,
    /// Variable forms touched by a demotion of a pivot younger than the
    /// variable's final assignment. Always zero under newest-pivot demotion.
    pub late_substitutions: u64,
}

impl DecodeStats {
    /// Bit-operation count: unit cost for degree and bucket bookkeeping,
    /// `form_bits` for every affine addition or substitution.
    pub fn bit_ops(&self) -> u64 {
        self.degree_updates
            + self.bucket_updates
            + (self.propagations + self.substitutions) * self.form_bits
    }

    pub fn accumulate(&mut self, other: &DecodeStats) {
        self.peels += other.peels;
        self.guesses += other.guesses;
        self.demotions += other.demotions;
        self.prunes += other.prunes;
        self.degree_updates += other.degree_updates;
        self.propagations += other.propagations;
        self.substitutions += other.substitutions;
        self.bucket_updates += other.bucket_updates;
        self.form_bits = self.form_bits.max(other.form_bits);
        self.peak_pivots = self.peak_pivots.max(other.peak_pivots);
        self.late_substitutions += other.late_substitutions;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Demotion {
    pub check: usize,
    pub pivot: PivotSlot,
    /// The variable whose guess created the pivot.
    pub variable: usize,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("guess budget exhausted after {guesses} guesses ({reimbursements} reimbursed)")]
    BudgetExhausted {
        guesses: usize,
        reimbursements: usize,
        stats: DecodeStats,
    },
    #[error("check {check} demands a nonzero constant: syndrome and erasure are inconsistent")]
    InconsistentInstance { check: usize },
    #[error("syndrome has length {found}, expected {expected}")]
    SyndromeLength { expected: usize, found: usize },
    #[error("erased variable {index} out of range for {n} variables")]
    ErasureOutOfRange { index: usize, n: usize },
    #[error("variable {index} listed twice in the erasure")]
    DuplicateErasure { index: usize },
    #[error("guess budget {budget} exceeds the supported pivot capacity")]
    BudgetTooLarge { budget: usize },
    #[error("pruning requested without stabilizer generators")]
    MissingGenerators,
}

/// Decoder output: one affine correction per variable over the surviving
/// pivots.
#[derive(Debug, Clone)]
pub struct SymbolicSolution {
    corrections: Vec<AffineForm>,
    erasure: Vec<usize>,
    pivots: Vec<(PivotSlot, PivotRecord)>,
    guesses: Vec<usize>,
    demotions: Vec<Demotion>,
    stats: DecodeStats,
    trace: Vec<TraceEvent>,
}

impl SymbolicSolution {
    pub fn n_vars(&self) -> usize {
        self.corrections.len()
    }

    pub fn correction(&self, v: usize) -> AffineForm {
        self.corrections[v]
    }

    pub fn corrections(&self) -> &[AffineForm] {
        &self.corrections
    }

    /// The original erasure, sorted.
    pub fn erasure(&self) -> &[usize] {
        &self.erasure
    }

    /// Pivots still active at the end, in creation order.
    pub fn surviving_pivots(&self) -> Vec<PivotSlot> {
        self.pivots.iter().map(|(s, _)| *s).collect()
    }

    pub fn pivot_records(&self) -> &[(PivotSlot, PivotRecord)] {
        &self.pivots
    }

    pub fn guess_count(&self) -> usize {
        self.guesses.len()
    }

    pub fn reimbursement_count(&self) -> usize {
        self.demotions.len()
    }

    pub fn guess_trace(&self) -> &[usize] {
        &self.guesses
    }

    pub fn demotion_trace(&self) -> &[Demotion] {
        &self.demotions
    }

    pub fn stats(&self) -> &DecodeStats {
        &self.stats
    }

    /// Recorded events; empty unless tracing was requested.
    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn evaluate(&self, assignment: &PivotAssignment) -> BitVector {
        let mut w = BitVector::zeros(self.corrections.len());
        for &v in &self.erasure {
            if self.corrections[v].evaluate(assignment) {
                w.set(v, true);
            }
        }
        w
    }

    /// The correction at the all-zero pivot assignment.
    pub fn at_zero(&self) -> BitVector {
        self.evaluate(&PivotAssignment::zero())
    }

    /// `w(e_p) + w(0)`: the coefficient column of pivot `p`.
    pub fn direction(&self, slot: PivotSlot) -> BitVector {
        let mut d = BitVector::zeros(self.corrections.len());
        for &v in &self.erasure {
            if self.corrections[v].coefficient(slot) {
                d.set(v, true);
            }
        }
        d
    }
}

/// Symbolic Maxwell decoding of `H·w = σ` on erasure `erasure`.
///
/// `generators` must be the same-sector stabilizer rows when pruning is
/// enabled. Returns `BudgetExhausted` exactly when a guess is needed while
/// `max_guesses` pivots are already active.
pub fn maxwell_peel<R: Rng + ?Sized>(
    graph: &TannerGraph,
    syndrome: &BitVector,
    erasure: &[usize],
    options: &MaxwellOptions,
    generators: Option<&GeneratorSet>,
    rng: &mut R,
) -> Result<SymbolicSolution, DecodeError> {
    let prune_with = match (options.prune, generators) {
        (true, None) => return Err(DecodeError::MissingGenerators),
        (true, Some(g)) => Some(g),
        (false, _) => None,
    };
    let mut state = ResidualState::new(
        graph,
        syndrome,
        erasure,
        options.max_guesses,
        options.strategy,
        options.record_trace,
    )?;
    if let Some(g) = prune_with {
        state.prune_depth1(g);
    }
    loop {
        state.run_peeling();
        state.drain_restrictive()?;
        if state.erased_count() == 0 {
            break;
        }
        if let Some(g) = prune_with {
            if state.prune_depth1(g) > 0 {
                continue;
            }
        }
        if state.registry().is_full() {
            return Err(state.budget_exhausted());
        }
        let v = state.select_pivot(rng).expect("erased set is nonempty");
        state.guess(v)?;
    }
    Ok(state.into_solution())
}

#[cfg(test)]
mod tests;
