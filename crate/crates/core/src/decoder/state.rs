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

//! Residual decoding state: the erased set, residual check degrees, the
//! symbolic forms, and the dangling/restrictive work queues.

use std::collections::VecDeque;

use rand::Rng;

use super::buckets::ScoreBuckets;
use super::graph::{GeneratorSet, TannerGraph};
use super::trace::TraceEvent;
use super::{DecodeError, DecodeStats, Demotion, PivotStrategy, SymbolicSolution};
use crate::affine::{AffineForm, PivotRegistry, PivotSlot, MAX_PIVOTS};
use crate::gf2::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FormRef {
    Var(usize),
    Check(usize),
}

const NOT_ERASED: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct ResidualState<'g> {
    graph: &'g TannerGraph,
    strategy: PivotStrategy,
    erasure: Vec<usize>,
    // membership and O(1) removal for uniform sampling
    erased_list: Vec<usize>,
    erased_pos: Vec<usize>,
    degree: Vec<usize>,
    check_forms: Vec<AffineForm>,
    var_forms: Vec<AffineForm>,
    dangling: VecDeque<usize>,
    restrictive: VecDeque<usize>,
    queued_restrictive: Vec<bool>,
    registry: PivotRegistry,
    // superset of the forms mentioning each pivot slot
    occurrences: Vec<Vec<FormRef>>,
    clock: u64,
    assigned_at: Vec<u64>,
    buckets: Option<ScoreBuckets>,
    prune_candidates: Option<Vec<usize>>,
    guess_trace: Vec<usize>,
    demotions: Vec<Demotion>,
    trace: Option<Vec<TraceEvent>>,
    stats: DecodeStats,
}

impl<'g> ResidualState<'g> {
    /// Sets up the state for erasure `erasure` and syndrome `syndrome`.
    ///
    /// A budget larger than the erasure is clamped to it: the active pivot
    /// count can never reach `|E0|` while a guess is still needed.
    pub fn new(
        graph: &'g TannerGraph,
        syndrome: &BitVector,
        erasure: &[usize],
        max_guesses: usize,
        strategy: PivotStrategy,
        record_trace: bool,
    ) -> Result<Self, DecodeError> {
        let (n, m) = (graph.n_vars(), graph.n_checks());
        if syndrome.len() != m {
            return Err(DecodeError::SyndromeLength {
                expected: m,
                found: syndrome.len(),
            });
        }
        let mut erasure = erasure.to_vec();
        erasure.sort_unstable();
        if let Some(&bad) = erasure.iter().find(|&&v| v >= n) {
            return Err(DecodeError::ErasureOutOfRange { index: bad, n });
        }
        if let Some(w) = erasure.windows(2).find(|w| w[0] == w[1]) {
            return Err(DecodeError::DuplicateErasure { index: w[0] });
        }
        let budget = max_guesses.min(erasure.len());
        if budget > MAX_PIVOTS {
            return Err(DecodeError::BudgetTooLarge { budget });
        }

        let mut erased_pos = vec![NOT_ERASED; n];
        for (i, &v) in erasure.iter().enumerate() {
            erased_pos[v] = i;
        }
        let mut stats = DecodeStats {
            form_bits: budget as u64 + 1,
            ..DecodeStats::default()
        };
        let mut degree = vec![0; m];
        for &v in &erasure {
            for &c in graph.var_neighbors(v) {
                degree[c] += 1;
                stats.degree_updates += 1;
            }
        }
        let check_forms = (0..m).map(|c| AffineForm::constant(syndrome.get(c))).collect();

        let mut dangling: Vec<usize> = erasure
            .iter()
            .flat_map(|&v| graph.var_neighbors(v).iter().copied())
            .filter(|&c| degree[c] == 1)
            .collect();
        dangling.sort_unstable();

        let mut queued_restrictive = vec![false; m];
        let mut restrictive = VecDeque::new();
        for c in syndrome.iter_ones() {
            if degree[c] == 0 {
                queued_restrictive[c] = true;
                restrictive.push_back(c);
            }
        }

        let buckets = match strategy {
            PivotStrategy::ScoreBuckets => {
                let mut b = ScoreBuckets::new(n, graph.max_var_degree());
                for &v in &erasure {
                    let s = graph
                        .var_neighbors(v)
                        .iter()
                        .filter(|&&c| degree[c] == 2)
                        .count();
                    stats.bucket_updates += graph.var_neighbors(v).len() as u64;
                    b.insert(v, s);
                }
                Some(b)
            }
            PivotStrategy::Random => None,
        };

        Ok(Self {
            graph,
            strategy,
            erased_list: erasure.clone(),
            erasure,
            erased_pos,
            degree,
            check_forms,
            var_forms: vec![AffineForm::ZERO; n],
            dangling: dangling.into(),
            restrictive,
            queued_restrictive,
            registry: PivotRegistry::new(budget),
            occurrences: vec![Vec::new(); budget],
            clock: 0,
            assigned_at: vec![0; n],
            buckets,
            prune_candidates: None,
            guess_trace: Vec::new(),
            demotions: Vec::new(),
            trace: record_trace.then(Vec::new),
            stats,
        })
    }

    pub fn graph(&self) -> &TannerGraph {
        self.graph
    }

    pub fn is_erased(&self, v: usize) -> bool {
        self.erased_pos[v] != NOT_ERASED
    }

    pub fn erased_count(&self) -> usize {
        self.erased_list.len()
    }

    /// The residual erased set, sorted.
    pub fn erased(&self) -> Vec<usize> {
        let mut e = self.erased_list.clone();
        e.sort_unstable();
        e
    }

    pub fn residual_degree(&self, c: usize) -> usize {
        self.degree[c]
    }

    pub fn check_form(&self, c: usize) -> AffineForm {
        self.check_forms[c]
    }

    pub fn correction(&self, v: usize) -> AffineForm {
        self.var_forms[v]
    }

    /// Checks currently of residual degree one that are queued for peeling.
    pub fn dangling_checks(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .dangling
            .iter()
            .copied()
            .filter(|&c| self.degree[c] == 1)
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Queued checks of residual degree zero with a nonzero form.
    pub fn restrictive_checks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self
            .restrictive
            .iter()
            .copied()
            .filter(|&c| self.degree[c] == 0 && !self.check_forms[c].is_zero())
            .collect();
        r.sort_unstable();
        r
    }

    pub fn registry(&self) -> &PivotRegistry {
        &self.registry
    }

    pub fn active_pivots(&self) -> usize {
        self.registry.len()
    }

    pub fn budget(&self) -> usize {
        self.registry.capacity()
    }

    pub fn stats(&self) -> &DecodeStats {
        &self.stats
    }

    pub fn guess_trace(&self) -> &[usize] {
        &self.guess_trace
    }

    pub fn demotion_trace(&self) -> &[Demotion] {
        &self.demotions
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    fn record(&mut self, event: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event);
        }
    }

    fn form_mut(&mut self, r: FormRef) -> &mut AffineForm {
        match r {
            FormRef::Var(v) => &mut self.var_forms[v],
            FormRef::Check(c) => &mut self.check_forms[c],
        }
    }

    fn track(&mut self, form: AffineForm, r: FormRef) {
        for s in form.slots() {
            self.occurrences[s.0].push(r);
        }
    }

    fn queue_if_restrictive(&mut self, c: usize) {
        if self.degree[c] == 0 && !self.queued_restrictive[c] && !self.check_forms[c].is_zero() {
            self.queued_restrictive[c] = true;
            self.restrictive.push_back(c);
        }
    }

    fn remove_erased(&mut self, v: usize) {
        let pos = self.erased_pos[v];
        assert!(pos != NOT_ERASED, "variable {v} is not erased");
        let last = *self.erased_list.last().unwrap();
        self.erased_list.swap_remove(pos);
        if last != v {
            self.erased_pos[last] = pos;
        }
        self.erased_pos[v] = NOT_ERASED;
        if let Some(b) = self.buckets.as_mut() {
            b.remove(v);
            self.stats.bucket_updates += 1;
        }
    }

    /// Fixes `w_v := form`, removes `v` from the erased set and pushes the
    /// value into every neighbouring check.
    fn resolve(&mut self, v: usize, form: AffineForm, at: u64) {
        self.var_forms[v] = form;
        self.assigned_at[v] = at;
        self.track(form, FormRef::Var(v));
        self.remove_erased(v);
        let graph = self.graph;
        for &c in graph.var_neighbors(v) {
            self.check_forms[c] += form;
            self.stats.propagations += 1;
            self.track(form, FormRef::Check(c));
            let old = self.degree[c];
            self.degree[c] -= 1;
            self.stats.degree_updates += 1;
            if let Some(b) = self.buckets.as_mut() {
                if old == 3 || old == 2 {
                    for &u in graph.check_neighbors(c) {
                        if self.erased_pos[u] != NOT_ERASED {
                            if old == 3 {
                                b.increment(u);
                            } else {
                                b.decrement(u);
                            }
                            self.stats.bucket_updates += 1;
                        }
                    }
                }
            }
            match self.degree[c] {
                1 => self.dangling.push_back(c),
                0 => self.queue_if_restrictive(c),
                _ => {}
            }
        }
    }

    /// Resolves dangling checks until none is left.
    pub fn run_peeling(&mut self) {
        while let Some(c) = self.dangling.pop_front() {
            if self.degree[c] != 1 {
                continue;
            }
            let v = self
                .graph
                .check_neighbors(c)
                .iter()
                .copied()
                .find(|&u| self.erased_pos[u] != NOT_ERASED)
                .expect("degree-one check has an erased neighbour");
            let form = self.check_forms[c];
            let at = self.tick();
            self.stats.peels += 1;
            self.record(TraceEvent::Peel { check: c, var: v });
            self.resolve(v, form, at);
        }
    }

    /// Enforces the constraint `s_c(x) = 0` of a restrictive check by
    /// demoting the newest pivot in its support. Returns false for a stale
    /// queue entry (the check is no longer restrictive).
    pub fn handle_restrictive(&mut self, c: usize) -> Result<bool, DecodeError> {
        let s = self.check_forms[c];
        if self.degree[c] != 0 || s.is_zero() {
            return Ok(false);
        }
        let Some(p) = self.registry.newest_in(&s) else {
            return Err(DecodeError::InconsistentInstance { check: c });
        };
        // s = x_p + r = 0  ⇒  x_p := r, with r over strictly older pivots
        let mut replacement = s;
        replacement.toggle_coefficient(p);
        let created = self.registry.get(p).expect("active pivot").created;
        let refs = std::mem::take(&mut self.occurrences[p.0]);
        for r in refs {
            let form = self.form_mut(r);
            if !form.coefficient(p) {
                continue;
            }
            *form = form.substitute(p, &replacement);
            self.stats.substitutions += 1;
            self.track(replacement, r);
            match r {
                FormRef::Var(v) => {
                    if created > self.assigned_at[v] {
                        self.stats.late_substitutions += 1;
                    }
                }
                FormRef::Check(c2) => self.queue_if_restrictive(c2),
            }
        }
        debug_assert!(self.check_forms[c].is_zero());
        let record = self.registry.demote(p);
        self.stats.demotions += 1;
        let demotion = Demotion {
            check: c,
            pivot: p,
            variable: record.variable,
        };
        self.demotions.push(demotion);
        self.record(TraceEvent::Demote {
            check: c,
            pivot: p.0,
            var: record.variable,
        });
        Ok(true)
    }

    /// Processes the restrictive queue until it is empty.
    pub fn drain_restrictive(&mut self) -> Result<(), DecodeError> {
        while let Some(c) = self.restrictive.pop_front() {
            self.queued_restrictive[c] = false;
            self.handle_restrictive(c)?;
        }
        Ok(())
    }

    /// Number of neighbouring checks of residual degree exactly two,
    /// computed from scratch.
    pub fn guess_score(&self, v: usize) -> usize {
        self.graph
            .var_neighbors(v)
            .iter()
            .filter(|&&c| self.degree[c] == 2)
            .count()
    }

    /// The incrementally maintained score, when buckets are in use.
    pub fn bucket_score(&self, v: usize) -> Option<usize> {
        self.buckets.as_ref().and_then(|b| b.score(v))
    }

    /// Chooses the next variable to guess, or `None` if nothing is erased.
    pub fn select_pivot<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.erased_list.is_empty() {
            return None;
        }
        match self.strategy {
            PivotStrategy::Random => Some(self.erased_list[rng.gen_range(0..self.erased_list.len())]),
            PivotStrategy::ScoreBuckets => self.buckets.as_ref().and_then(ScoreBuckets::best),
        }
    }

    /// Turns erased variable `v` into a fresh pivot and propagates it.
    pub fn guess(&mut self, v: usize) -> Result<PivotSlot, DecodeError> {
        assert!(self.is_erased(v), "guessing non-erased variable {v}");
        if self.registry.is_full() {
            return Err(self.budget_exhausted());
        }
        let at = self.tick();
        let slot = self.registry.create(v, at).expect("registry has room");
        self.guess_trace.push(v);
        self.stats.guesses += 1;
        self.stats.peak_pivots = self.stats.peak_pivots.max(self.registry.len());
        self.record(TraceEvent::Guess { var: v, pivot: slot.0 });
        self.resolve(v, AffineForm::pivot(slot), at);
        Ok(slot)
    }

    pub(super) fn budget_exhausted(&self) -> DecodeError {
        DecodeError::BudgetExhausted {
            guesses: self.guess_trace.len(),
            reimbursements: self.demotions.len(),
            stats: self.stats,
        }
    }

    /// Depth-1 pruning: every generator whose support is entirely erased
    /// has its lowest-index variable gauge-fixed to zero. Returns the number
    /// of variables fixed.
    ///
    /// The erased set only shrinks, so a generator that is not fully erased
    /// now never will be; the candidate list is therefore built once and a
    /// single pass reaches the fixpoint.
    pub fn prune_depth1(&mut self, generators: &GeneratorSet) -> usize {
        assert_eq!(generators.n_vars(), self.graph.n_vars(), "generator width mismatch");
        let candidates = match self.prune_candidates.take() {
            Some(c) => c,
            None => {
                let mut hits = vec![0usize; generators.len()];
                let mut full = Vec::new();
                for &v in &self.erased_list {
                    for &g in generators.containing(v) {
                        hits[g] += 1;
                        if hits[g] == generators.support(g).len() {
                            full.push(g);
                        }
                    }
                }
                full.sort_unstable();
                full
            }
        };
        let mut pruned = 0;
        for g in candidates {
            let support = generators.support(g);
            if support.iter().all(|&v| self.erased_pos[v] != NOT_ERASED) {
                let v = support[0];
                let at = self.tick();
                self.stats.prunes += 1;
                self.record(TraceEvent::Prune { generator: g, var: v });
                self.resolve(v, AffineForm::ZERO, at);
                pruned += 1;
            }
        }
        self.prune_candidates = Some(Vec::new());
        pruned
    }

    pub fn into_solution(self) -> SymbolicSolution {
        SymbolicSolution {
            corrections: self.var_forms,
            erasure: self.erasure,
            pivots: self.registry.active(),
            guesses: self.guess_trace,
            demotions: self.demotions,
            stats: self.stats,
            trace: self.trace.unwrap_or_default(),
        }
    }
}
