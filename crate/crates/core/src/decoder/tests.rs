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

use super::*;
use crate::affine::PivotAssignment;
use crate::codes::{build_toric, Sector};
use crate::gf2::BitMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

fn graph(n: usize, checks: &[Vec<usize>]) -> TannerGraph {
    TannerGraph::from_matrix(&BitMatrix::from_sparse(n, checks))
}

fn bits(b: &[u8]) -> BitVector {
    BitVector::from_bits(b)
}

fn state<'g>(g: &'g TannerGraph, sigma: &[u8], e0: &[usize], budget: usize) -> ResidualState<'g> {
    ResidualState::new(g, &bits(sigma), e0, budget, PivotStrategy::ScoreBuckets, false).unwrap()
}

fn decode(
    g: &TannerGraph,
    sigma: &BitVector,
    e0: &[usize],
    opts: &MaxwellOptions,
    gens: Option<&GeneratorSet>,
) -> Result<SymbolicSolution, DecodeError> {
    maxwell_peel(g, sigma, e0, opts, gens, &mut rng())
}

fn four_cycle() -> TannerGraph {
    graph(2, &[vec![0, 1], vec![0, 1]])
}

#[test]
fn init_empty_erasure_flags_unsatisfied_checks() {
    let g = graph(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
    let s = state(&g, &[1, 0, 1], &[], 0);
    assert!(s.dangling_checks().is_empty());
    assert_eq!(s.restrictive_checks(), vec![0, 2]);
    let err = decode(&g, &bits(&[1, 0, 1]), &[], &MaxwellOptions::peeling(), None).unwrap_err();
    assert_eq!(err, DecodeError::InconsistentInstance { check: 0 });
}

#[test]
fn init_single_dangling_check() {
    let g = graph(3, &[vec![1], vec![0, 2]]);
    let s = state(&g, &[0, 0], &[1], 0);
    assert_eq!(s.dangling_checks(), vec![0]);
    assert_eq!(s.residual_degree(1), 0);
}

#[test]
fn init_four_cycle_is_stopped() {
    let g = four_cycle();
    let mut s = state(&g, &[0, 0], &[0, 1], 1);
    assert!(s.dangling_checks().is_empty());
    assert!(s.restrictive_checks().is_empty());
    s.run_peeling();
    assert_eq!(s.erased_count(), 2);
    assert_eq!(s.guess_score(0), 2);
    assert_eq!(s.bucket_score(0), Some(2));
    assert_eq!(s.select_pivot(&mut rng()), Some(0));
}

#[test]
fn init_rejects_bad_input() {
    let g = four_cycle();
    let sigma = bits(&[0, 0]);
    let mk = |e0: &[usize], budget| {
        ResidualState::new(&g, &sigma, e0, budget, PivotStrategy::Random, false).map(|_| ())
    };
    assert_eq!(mk(&[0, 2], 0), Err(DecodeError::ErasureOutOfRange { index: 2, n: 2 }));
    assert_eq!(mk(&[1, 1], 0), Err(DecodeError::DuplicateErasure { index: 1 }));
    assert_eq!(
        ResidualState::new(&g, &bits(&[0]), &[0], 0, PivotStrategy::Random, false).map(|_| ()),
        Err(DecodeError::SyndromeLength { expected: 2, found: 1 })
    );
    // clamped to |E0| before the capacity check
    assert!(mk(&[0, 1], 10_000).is_ok());
    let big = graph(300, &[]);
    let all: Vec<usize> = (0..300).collect();
    let r = ResidualState::new(&big, &BitVector::zeros(0), &all, 256, PivotStrategy::Random, false);
    assert_eq!(r.map(|_| ()), Err(DecodeError::BudgetTooLarge { budget: 256 }));
}

#[test]
fn chain_peels_in_forced_order() {
    let g = graph(2, &[vec![0, 1], vec![1]]);
    let opts = MaxwellOptions::peeling().with_trace(true);
    let sol = decode(&g, &bits(&[1, 1]), &[0, 1], &opts, None).unwrap();
    assert_eq!(sol.at_zero(), bits(&[0, 1]));
    assert_eq!(
        sol.trace(),
        &[TraceEvent::Peel { check: 1, var: 1 }, TraceEvent::Peel { check: 0, var: 0 }]
    );
    assert_eq!(sol.guess_count(), 0);
}

#[test]
fn restrictive_demotes_newest_pivot() {
    let g = graph(2, &[vec![0, 1]]);
    let mut s = state(&g, &[1], &[0, 1], 2);
    let x0 = s.guess(0).unwrap();
    let x1 = s.guess(1).unwrap();
    assert_eq!(s.check_form(0), AffineForm::from_terms(true, &[x0.0, x1.0]));
    assert_eq!(s.restrictive_checks(), vec![0]);
    assert!(s.handle_restrictive(0).unwrap());
    assert_eq!(s.active_pivots(), 1);
    assert_eq!(s.correction(1), AffineForm::from_terms(true, &[x0.0]));
    assert_eq!(s.check_form(0), AffineForm::ZERO);
    assert_eq!(
        s.demotion_trace(),
        &[Demotion { check: 0, pivot: x1, variable: 1 }]
    );
}

#[test]
fn restrictive_single_pivot_becomes_zero() {
    let g = graph(1, &[vec![0]]);
    let mut s = state(&g, &[0], &[0], 1);
    s.guess(0).unwrap();
    s.drain_restrictive().unwrap();
    assert_eq!(s.correction(0), AffineForm::ZERO);
    assert_eq!(s.active_pivots(), 0);
}

#[test]
fn four_cycle_needs_one_guess() {
    let g = four_cycle();
    let sol = decode(&g, &bits(&[0, 0]), &[0, 1], &MaxwellOptions::new(1), None).unwrap();
    let p = sol.surviving_pivots();
    assert_eq!(p.len(), 1);
    assert_eq!(sol.correction(0), AffineForm::pivot(p[0]));
    assert_eq!(sol.correction(1), AffineForm::pivot(p[0]));
    assert_eq!((sol.guess_count(), sol.reimbursement_count()), (1, 0));
    assert_eq!(sol.direction(p[0]), bits(&[1, 1]));

    let err = decode(&g, &bits(&[0, 0]), &[0, 1], &MaxwellOptions::peeling(), None).unwrap_err();
    assert!(matches!(err, DecodeError::BudgetExhausted { guesses: 0, reimbursements: 0, .. }));
}

#[test]
fn reimbursement_fixture() {
    let g = graph(3, &[vec![0, 1], vec![0, 2], vec![0, 1, 2]]);
    for code in 0u8..8 {
        let sigma = [code & 1, (code >> 1) & 1, (code >> 2) & 1];
        let total = sigma.iter().fold(0, |a, b| a ^ b) == 1;
        let opts = MaxwellOptions::new(1).with_trace(true);
        let sol = decode(&g, &bits(&sigma), &[0, 1, 2], &opts, None).unwrap();
        assert_eq!(sol.guess_trace(), &[0]);
        assert_eq!(sol.reimbursement_count(), 1);
        assert!(sol.surviving_pivots().is_empty());
        assert_eq!(sol.correction(0), AffineForm::constant(total));
        let w = sol.at_zero();
        assert_eq!(g_matrix(&g).mul_vec(&w), bits(&sigma));
        assert!(sol
            .trace()
            .iter()
            .any(|e| matches!(e, TraceEvent::Demote { check: 2, var: 0, .. })));
    }
}

fn g_matrix(g: &TannerGraph) -> BitMatrix {
    let rows: Vec<Vec<usize>> = (0..g.n_checks()).map(|c| g.check_neighbors(c).to_vec()).collect();
    BitMatrix::from_sparse(g.n_vars(), &rows)
}

#[test]
fn pruning_requires_generators() {
    let g = four_cycle();
    let opts = MaxwellOptions::new(1).with_pruning(true);
    assert_eq!(
        decode(&g, &bits(&[0, 0]), &[0, 1], &opts, None).unwrap_err(),
        DecodeError::MissingGenerators
    );
}

#[test]
fn pruning_without_full_generator_does_nothing() {
    let code = build_toric(3).unwrap();
    let h = code.decoding_matrix(Sector::X);
    let g = TannerGraph::from_matrix(h);
    let gens = GeneratorSet::from_matrix(code.stabilizer_matrix(Sector::X));
    let mut s = ResidualState::new(
        &g,
        &BitVector::zeros(h.n_rows()),
        &[0, 1],
        0,
        PivotStrategy::ScoreBuckets,
        false,
    )
    .unwrap();
    assert_eq!(s.prune_depth1(&gens), 0);
    assert_eq!(s.erased_count(), 2);
}

#[test]
fn pruning_clears_an_erased_generator() {
    let code = build_toric(4).unwrap();
    for sector in Sector::BOTH {
        let h = code.decoding_matrix(sector);
        let stab = code.stabilizer_matrix(sector);
        let g = TannerGraph::from_matrix(h);
        let gens = GeneratorSet::from_matrix(stab);
        let e0 = gens.support(5).to_vec();
        assert_eq!(e0.len(), 4);
        let sigma = BitVector::zeros(h.n_rows());
        assert!(decode(&g, &sigma, &e0, &MaxwellOptions::peeling(), None).is_err());

        let mut s =
            ResidualState::new(&g, &sigma, &e0, 0, PivotStrategy::ScoreBuckets, false).unwrap();
        assert_eq!(s.prune_depth1(&gens), 1);
        s.run_peeling();
        assert_eq!(s.erased_count(), 0);

        let opts = MaxwellOptions::peeling().with_pruning(true);
        let sol = decode(&g, &sigma, &e0, &opts, Some(&gens)).unwrap();
        assert_eq!(sol.stats().prunes, 1);
        assert!(stab.in_row_space(&sol.at_zero()));
    }
}

// ---- randomized properties ----

#[derive(Debug, Clone)]
struct Instance {
    h: BitMatrix,
    e0: Vec<usize>,
    error: BitVector,
    alt_error: BitVector,
}

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (3..=max_n, 2usize..=4, any::<u64>()).prop_map(|(n, col_w, seed)| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let m = (n * 3 / 4).max(2);
        let mut h = BitMatrix::zeros(m, n);
        for v in 0..n {
            for _ in 0..col_w {
                h.set(r.gen_range(0..m), v, true);
            }
        }
        let e0: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.6)).collect();
        let sample = |r: &mut ChaCha8Rng| {
            let mut e = BitVector::zeros(n);
            for &v in &e0 {
                e.set(v, r.gen_bool(0.5));
            }
            e
        };
        let error = sample(&mut r);
        let alt_error = sample(&mut r);
        Instance { h, e0, error, alt_error }
    })
}

fn all_assignments(p: &[PivotSlot], r: &mut ChaCha8Rng) -> Vec<PivotAssignment> {
    if p.len() <= 10 {
        (0u32..1 << p.len())
            .map(|mask| {
                let ones: Vec<PivotSlot> =
                    p.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| *s).collect();
                PivotAssignment::from_slots(&ones)
            })
            .collect()
    } else {
        (0..16)
            .map(|_| {
                let ones: Vec<PivotSlot> = p.iter().copied().filter(|_| r.gen_bool(0.5)).collect();
                PivotAssignment::from_slots(&ones)
            })
            .collect()
    }
}

/// Plain peeling written directly over the matrix.
fn naive_peeling_clears(h: &BitMatrix, e0: &[usize]) -> bool {
    let mut erased = BitVector::from_indices(h.n_cols(), e0);
    loop {
        let mut progress = false;
        for r in h.rows() {
            let left = (r & &erased).ones();
            if left.len() == 1 {
                erased.set(left[0], false);
                progress = true;
            }
        }
        if !progress {
            return erased.is_zero();
        }
    }
}

fn full_opts(budget: usize, strategy: PivotStrategy) -> MaxwellOptions {
    MaxwellOptions::new(budget).with_strategy(strategy).with_trace(true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn syndrome_identity_and_support(inst in instance(14), budget in 0usize..5, random in any::<bool>()) {
        let g = TannerGraph::from_matrix(&inst.h);
        let sigma = inst.h.mul_vec(&inst.error);
        let strategy = if random { PivotStrategy::Random } else { PivotStrategy::ScoreBuckets };
        match decode(&g, &sigma, &inst.e0, &full_opts(budget, strategy), None) {
            Ok(sol) => {
                let support = BitVector::from_indices(inst.h.n_cols(), &inst.e0);
                for v in 0..inst.h.n_cols() {
                    if !support.get(v) {
                        prop_assert_eq!(sol.correction(v), AffineForm::ZERO);
                    }
                }
                let p = sol.surviving_pivots();
                prop_assert!(p.len() <= budget);
                prop_assert_eq!(sol.guess_count() - sol.reimbursement_count(), p.len());
                let mut r = rng();
                for a in all_assignments(&p, &mut r) {
                    prop_assert_eq!(inst.h.mul_vec(&sol.evaluate(&a)), sigma.clone());
                }
                prop_assert_eq!(sol.stats().late_substitutions, 0);
            }
            Err(DecodeError::BudgetExhausted { guesses, reimbursements, stats }) => {
                let budget = budget.min(inst.e0.len());
                prop_assert_eq!(guesses - reimbursements, budget);
                prop_assert_eq!(stats.late_substitutions, 0);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn zero_budget_matches_plain_peeling(inst in instance(16)) {
        let g = TannerGraph::from_matrix(&inst.h);
        let sigma = inst.h.mul_vec(&inst.error);
        let ok = decode(&g, &sigma, &inst.e0, &MaxwellOptions::peeling(), None).is_ok();
        prop_assert_eq!(ok, naive_peeling_clears(&inst.h, &inst.e0));
    }

    #[test]
    fn trajectory_ignores_syndrome_values(inst in instance(14), budget in 0usize..5, random in any::<bool>()) {
        let g = TannerGraph::from_matrix(&inst.h);
        let strategy = if random { PivotStrategy::Random } else { PivotStrategy::ScoreBuckets };
        let opts = full_opts(budget, strategy);
        let a = decode(&g, &inst.h.mul_vec(&inst.error), &inst.e0, &opts, None);
        let b = decode(&g, &inst.h.mul_vec(&inst.alt_error), &inst.e0, &opts, None);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.trace(), b.trace());
                prop_assert_eq!(a.surviving_pivots(), b.surviving_pivots());
            }
            (Err(DecodeError::BudgetExhausted { guesses: ga, .. }),
             Err(DecodeError::BudgetExhausted { guesses: gb, .. })) => prop_assert_eq!(ga, gb),
            (a, b) => prop_assert!(false, "outcomes differ: {:?} / {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn larger_budget_extends_the_trace(inst in instance(14), budget in 0usize..4) {
        let g = TannerGraph::from_matrix(&inst.h);
        let sigma = inst.h.mul_vec(&inst.error);
        let run = |b| decode(&g, &sigma, &inst.e0, &full_opts(b, PivotStrategy::ScoreBuckets), None);
        if let Ok(small) = run(budget) {
            let large = run(budget + 1);
            let large = large.expect("success lost with a larger budget");
            prop_assert_eq!(small.trace(), large.trace());
        }
    }

    #[test]
    fn operation_count_is_linear(inst in instance(24), budget in 0usize..6) {
        let g = TannerGraph::from_matrix(&inst.h);
        let sigma = inst.h.mul_vec(&inst.error);
        let stats = match decode(&g, &sigma, &inst.e0, &MaxwellOptions::new(budget), None) {
            Ok(sol) => *sol.stats(),
            Err(DecodeError::BudgetExhausted { stats, .. }) => stats,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let bound = 2 * inst.e0.len() * g.max_var_degree() * g.max_check_degree() * (budget + 1);
        prop_assert!((stats.propagations + stats.substitutions) as usize <= bound);
    }

    #[test]
    fn bucket_scores_track_rescans(inst in instance(20), seed in any::<u64>()) {
        let g = TannerGraph::from_matrix(&inst.h);
        let sigma = inst.h.mul_vec(&inst.error);
        let mut s = ResidualState::new(&g, &sigma, &inst.e0, inst.e0.len(), PivotStrategy::ScoreBuckets, false).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        loop {
            for v in s.erased() {
                prop_assert_eq!(s.bucket_score(v), Some(s.guess_score(v)));
            }
            let Some(best) = s.select_pivot(&mut r) else { break };
            let top = s.erased().into_iter().map(|v| s.guess_score(v)).max().unwrap();
            prop_assert_eq!(s.guess_score(best), top);
            prop_assert!(s.erased().iter().all(|&v| s.guess_score(v) < top || v >= best));
            // advance one step: either a peeling round or a random guess
            if r.gen_bool(0.5) && !s.dangling_checks().is_empty() {
                s.run_peeling();
                s.drain_restrictive().unwrap();
            } else {
                let e = s.erased();
                s.guess(e[r.gen_range(0..e.len())]).unwrap();
                s.drain_restrictive().unwrap();
            }
        }
    }
}
