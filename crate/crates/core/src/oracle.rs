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

//! Exhaustive structural analysis for small codes: stopping sets, weight
//! profiles, distribution gaps, exact failure polynomials and the
//! budget-exhaustion bound.
//!
//! Every routine enumerates all erasure sets up to a weight `t` and refuses
//! when that exceeds [`ENUMERATION_LIMIT`] sets.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{logical_basis, Sector};
use crate::gf2::{BitMatrix, BitVector};
use crate::mlref::{PreparedCode, SectorData};
use crate::sim::DecoderConfig;

pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// Kernel dimension above which exact-support tests give up.
const MAX_LOCAL_KERNEL: usize = 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumerating {count} erasure sets (n={n}, t={t}) exceeds the limit of {ENUMERATION_LIMIT}")]
    Guard { n: usize, t: usize, count: u128 },
    #[error("no stopping set of weight at most {w_max}")]
    AboveCutoff { w_max: usize },
    #[error("weight {t} exceeds the block length {n}")]
    WeightTooLarge { n: usize, t: usize },
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of erasure sets of weight at most `t` (including the empty set).
pub fn enumeration_cost(n: usize, t: usize) -> u128 {
    (0..=t.min(n)).map(|w| binomial(n, w)).sum()
}

pub fn check_guard(n: usize, t: usize) -> Result<(), OracleError> {
    if t > n {
        return Err(OracleError::WeightTooLarge { n, t });
    }
    let count = enumeration_cost(n, t);
    if count > ENUMERATION_LIMIT {
        return Err(OracleError::Guard { n, t, count });
    }
    Ok(())
}

/// Calls `visit` on every subset of `[n]` of weight exactly `w`, in
/// parallel over the smallest element; partial results are merged with
/// `merge`.
fn fold_subsets<A, I, F, M>(n: usize, w: usize, init: I, visit: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &[usize]) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    if w == 0 {
        let mut acc = init();
        visit(&mut acc, &[]);
        return acc;
    }
    if w > n {
        return init();
    }
    (0..=n - w)
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut set: Vec<usize> = (first..first + w).collect();
            loop {
                visit(&mut acc, &set);
                // advance the tail (positions 1..w) to the next combination
                let mut i = w - 1;
                while i >= 1 && set[i] == n - w + i {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                set[i] += 1;
                for j in i + 1..w {
                    set[j] = set[j - 1] + 1;
                }
            }
            acc
        })
        .reduce(&init, &merge)
}

fn count_by_weight<F>(n: usize, t: usize, pred: F) -> Vec<u64>
where
    F: Fn(&[usize]) -> bool + Sync + Send,
{
    (0..=t)
        .map(|w| fold_subsets(n, w, || 0u64, |c, s| *c += u64::from(pred(s)), |a, b| a + b))
        .collect()
}

/// All subsets of weight at most `t` satisfying `pred`, sorted by weight
/// and then lexicographically.
pub fn collect_sets<F>(n: usize, t: usize, pred: F) -> Result<Vec<Vec<usize>>, OracleError>
where
    F: Fn(&[usize]) -> bool + Sync + Send,
{
    check_guard(n, t)?;
    let mut out = Vec::new();
    for w in 0..=t {
        let mut sets = fold_subsets(
            n,
            w,
            Vec::new,
            |acc: &mut Vec<Vec<usize>>, s| {
                if pred(s) {
                    acc.push(s.to_vec());
                }
            },
            |mut a, mut b| {
                a.append(&mut b);
                a
            },
        );
        sets.sort_unstable();
        out.extend(sets);
    }
    Ok(out)
}

/// Every check touching `set` touches it at least twice. The empty set
/// qualifies trivially.
pub fn is_stopping_set(h: &BitMatrix, set: &[usize]) -> bool {
    let s = BitVector::from_indices(h.n_cols(), set);
    h.rows().iter().all(|r| (r & &s).count_ones() != 1)
}

/// Smallest nonempty stopping set weight, searched up to `w_max`.
///
/// Depth-first: a set that is not yet stopping has a check seeing it once,
/// and any stopping superset must add one more neighbour of that check.
pub fn stopping_distance(h: &BitMatrix, w_max: usize) -> Result<usize, OracleError> {
    let n = h.n_cols();
    let rows = h.to_sparse_rows();
    let mut var_checks = vec![Vec::new(); n];
    for (c, r) in rows.iter().enumerate() {
        for &v in r {
            var_checks[v].push(c);
        }
    }
    let search = Search { rows: &rows, var_checks: &var_checks };
    for k in 1..=w_max.min(n) {
        let found = (0..n).into_par_iter().any(|v0| {
            let mut count = vec![0usize; rows.len()];
            let mut in_set = vec![false; n];
            search.add(v0, &mut count, &mut in_set);
            search.dfs(v0, k - 1, &mut count, &mut in_set)
        });
        if found {
            return Ok(k);
        }
    }
    Err(OracleError::AboveCutoff { w_max })
}

struct Search<'a> {
    rows: &'a [Vec<usize>],
    var_checks: &'a [Vec<usize>],
}

impl Search<'_> {
    fn add(&self, v: usize, count: &mut [usize], in_set: &mut [bool]) {
        in_set[v] = true;
        for &c in &self.var_checks[v] {
            count[c] += 1;
        }
    }

    fn remove(&self, v: usize, count: &mut [usize], in_set: &mut [bool]) {
        in_set[v] = false;
        for &c in &self.var_checks[v] {
            count[c] -= 1;
        }
    }

    /// Can the current set (minimum element `v0`) grow into a stopping set
    /// with at most `budget` more elements, all larger than `v0`?
    fn dfs(&self, v0: usize, budget: usize, count: &mut [usize], in_set: &mut [bool]) -> bool {
        let Some(c) = (0..count.len()).find(|&c| count[c] == 1) else {
            return true;
        };
        if budget == 0 {
            return false;
        }
        for &v in &self.rows[c] {
            if v > v0 && !in_set[v] {
                self.add(v, count, in_set);
                let ok = self.dfs(v0, budget - 1, count, in_set);
                self.remove(v, count, in_set);
                if ok {
                    return true;
                }
            }
        }
        false
    }
}

/// `set` is exactly the support of a kernel vector of the decoding matrix
/// that is not a stabilizer.
pub fn is_exact_logical_support(data: &SectorData, set: &[usize]) -> bool {
    if set.is_empty() || !is_stopping_set(data.decoding_matrix(), set) {
        return false;
    }
    let basis = data.erased_kernel(set);
    if basis.iter().all(|k| data.stabilizers().contains(k)) {
        return false;
    }
    assert!(
        basis.len() <= MAX_LOCAL_KERNEL,
        "kernel of dimension {} on a {}-set is too large to enumerate",
        basis.len(),
        set.len()
    );
    let mut v = BitVector::zeros(data.n());
    for i in 1u64..1 << basis.len() {
        v.xor_assign(&basis[i.trailing_zeros() as usize]);
        if v.count_ones() == set.len() && !data.stabilizers().contains(&v) {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightProfile {
    pub code: String,
    pub sector: Sector,
    pub t: usize,
    /// Stopping sets of the decoding matrix, indexed by weight.
    pub a_ss: Vec<u64>,
    /// Sets that are exactly the support of a nontrivial logical operator.
    pub a_ntlo: Vec<u64>,
    /// Sets containing the support of a nontrivial logical operator.
    pub a_ntlo_containing: Vec<u64>,
}

impl WeightProfile {
    /// `{0 < w ≤ t : A_SS(w) > A_NTLO(w)}` with exact logical supports.
    pub fn w0(&self) -> Vec<usize> {
        Self::gap_weights(&self.a_ss, &self.a_ntlo)
    }

    /// The same set with the containing reading of `A_NTLO`.
    pub fn w0_containing(&self) -> Vec<usize> {
        Self::gap_weights(&self.a_ss, &self.a_ntlo_containing)
    }

    fn gap_weights(ss: &[u64], ntlo: &[u64]) -> Vec<usize> {
        (1..ss.len()).filter(|&w| ss[w] > ntlo[w]).collect()
    }

    /// Smallest stopping set weight, if one exists within `t`.
    pub fn stopping_distance(&self) -> Option<usize> {
        (1..self.a_ss.len()).find(|&w| self.a_ss[w] > 0)
    }

    /// Smallest logical support weight, if one exists within `t`.
    pub fn distance(&self) -> Option<usize> {
        (1..self.a_ntlo.len()).find(|&w| self.a_ntlo[w] > 0)
    }
}

pub fn weight_profile(code: &PreparedCode, sector: Sector, t: usize) -> Result<WeightProfile, OracleError> {
    let n = code.n();
    check_guard(n, t)?;
    let data = code.sector(sector);
    let h = data.decoding_matrix();
    let a_ss = count_by_weight(n, t, |s| !s.is_empty() && is_stopping_set(h, s));
    let a_ntlo_containing = count_by_weight(n, t, |s| !data.ml_correctable(s));
    let a_ntlo = count_by_weight(n, t, |s| is_exact_logical_support(data, s));
    Ok(WeightProfile {
        code: code.code().name().to_string(),
        sector,
        t,
        a_ss,
        a_ntlo,
        a_ntlo_containing,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorGap {
    pub sector: Sector,
    pub w0: Vec<usize>,
    pub gamma: usize,
    pub w0_containing: Vec<usize>,
    pub gamma_containing: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionGap {
    pub t: usize,
    /// Union of the sector witness sets.
    pub w0: Vec<usize>,
    pub gamma: usize,
    pub sectors: Vec<SectorGap>,
}

impl DistributionGap {
    pub fn from_profiles(t: usize, profiles: &[WeightProfile]) -> Self {
        let sectors: Vec<SectorGap> = profiles
            .iter()
            .map(|p| {
                let (w0, wc) = (p.w0(), p.w0_containing());
                SectorGap {
                    sector: p.sector,
                    gamma: w0.len(),
                    gamma_containing: wc.len(),
                    w0,
                    w0_containing: wc,
                }
            })
            .collect();
        let union: BTreeSet<usize> = sectors.iter().flat_map(|s| s.w0.iter().copied()).collect();
        Self {
            t,
            gamma: union.len(),
            w0: union.into_iter().collect(),
            sectors,
        }
    }

    pub fn sector(&self, sector: Sector) -> &SectorGap {
        self.sectors.iter().find(|s| s.sector == sector).expect("both sectors present")
    }
}

pub fn distribution_gap(code: &PreparedCode, t: usize) -> Result<DistributionGap, OracleError> {
    let profiles = Sector::BOTH
        .iter()
        .map(|&s| weight_profile(code, s, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DistributionGap::from_profiles(t, &profiles))
}

/// Whether a single sector fails on `erasure`, judged on the zero error.
/// The verdict depends only on the erasure set.
pub fn sector_fails(data: &SectorData, config: &DecoderConfig, erasure: &[usize]) -> bool {
    let zero = BitVector::zeros(data.n());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let outcome = data
        .decode(config, erasure, &zero, &mut rng)
        .expect("zero error is consistent with every erasure");
    !outcome.verdict.success()
}

/// Whether the CSS trial (both sectors) fails on `erasure`.
pub fn trial_fails(code: &PreparedCode, config: &DecoderConfig, erasure: &[usize]) -> bool {
    Sector::BOTH
        .iter()
        .any(|&s| sector_fails(code.sector(s), config, erasure))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailurePolynomial {
    pub decoder: String,
    pub n: usize,
    pub t: usize,
    /// Failing erasure sets per weight `0..=t`.
    pub counts: Vec<u64>,
    /// True when `t = n`, so the polynomial is complete.
    pub exact: bool,
}

impl FailurePolynomial {
    /// `Σ_w f(w) ε^w (1-ε)^{n-w}` over the enumerated weights.
    pub fn evaluate(&self, eps: f64) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(w, &f)| f as f64 * eps.powi(w as i32) * (1.0 - eps).powi((self.n - w) as i32))
            .sum()
    }

    pub fn lowest_weight(&self) -> Option<usize> {
        self.counts.iter().position(|&f| f > 0)
    }
}

pub fn exact_failure_polynomial(
    code: &PreparedCode,
    config: &DecoderConfig,
    t: usize,
) -> Result<FailurePolynomial, OracleError> {
    let n = code.n();
    check_guard(n, t)?;
    Ok(FailurePolynomial {
        decoder: config.tag(),
        n,
        t,
        counts: count_by_weight(n, t, |s| trial_fails(code, config, s)),
        exact: t == n,
    })
}

/// The CSS failure set of `config` up to weight `t`.
pub fn failure_sets(code: &PreparedCode, config: &DecoderConfig, t: usize) -> Result<Vec<Vec<usize>>, OracleError> {
    collect_sets(code.n(), t, |s| trial_fails(code, config, s))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetBoundCheck {
    pub t: usize,
    pub gmax: usize,
    pub holds: bool,
    /// An ML-correctable erasure that still fails, with its sector.
    pub counterexample: Option<(Sector, Vec<usize>)>,
}

/// Looks for an ML-correctable erasure of weight at most `t` on which
/// Maxwell decoding with budget `gmax` fails, sector by sector.
pub fn check_budget_bound(code: &PreparedCode, t: usize, gmax: usize) -> Result<BudgetBoundCheck, OracleError> {
    check_guard(code.n(), t)?;
    let config = DecoderConfig::maxwell(gmax);
    let mut counterexample = None;
    'sectors: for sector in Sector::BOTH {
        let data = code.sector(sector);
        for w in 0..=t {
            let bad = fold_subsets(
                code.n(),
                w,
                || None,
                |acc: &mut Option<Vec<usize>>, s| {
                    if acc.is_none() && data.ml_correctable(s) && sector_fails(data, &config, s) {
                        *acc = Some(s.to_vec());
                    }
                },
                |a, b| match (a, b) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                },
            );
            if let Some(s) = bad {
                counterexample = Some((sector, s));
                break 'sectors;
            }
        }
    }
    Ok(BudgetBoundCheck {
        t,
        gmax,
        holds: counterexample.is_none(),
        counterexample,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapPolynomial {
    pub gmax: usize,
    pub t: usize,
    pub f_qm: Vec<u64>,
    pub f_ml: Vec<u64>,
    /// `f_QM(w) - f_ML(w)`.
    pub delta: Vec<i64>,
}

impl GapPolynomial {
    /// Lowest weight with a nonzero gap.
    pub fn lowest_gap_weight(&self) -> Option<usize> {
        self.delta.iter().position(|&d| d != 0)
    }

    pub fn vanishes_through(&self, w: usize) -> bool {
        self.delta.iter().take(w + 1).all(|&d| d == 0)
    }
}

pub fn gap_polynomial(code: &PreparedCode, config: &DecoderConfig, t: usize) -> Result<GapPolynomial, OracleError> {
    let qm = exact_failure_polynomial(code, config, t)?;
    let ml = exact_failure_polynomial(code, &DecoderConfig::ml(), t)?;
    Ok(GapPolynomial {
        gmax: config.gmax,
        t,
        delta: qm.counts.iter().zip(&ml.counts).map(|(&a, &b)| a as i64 - b as i64).collect(),
        f_qm: qm.counts,
        f_ml: ml.counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub sector: Sector,
    #[serde(rename = "A_SS")]
    pub a_ss: Vec<u64>,
    #[serde(rename = "A_NTLO")]
    pub a_ntlo: Vec<u64>,
    #[serde(rename = "A_NTLO_containing")]
    pub a_ntlo_containing: Vec<u64>,
    pub w0: Vec<usize>,
    pub gamma: usize,
    pub w0_containing: Vec<usize>,
    pub gamma_containing: usize,
    /// Stopping distance, or `null` when above `t`.
    pub s: Option<usize>,
    pub d_upper: usize,
    pub d_exact: bool,
    #[serde(rename = "f_ML")]
    pub f_ml: Vec<u64>,
    #[serde(rename = "f_QM")]
    pub f_qm: Vec<u64>,
    pub delta: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub code: String,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub decoder: DecoderConfig,
    pub w0: Vec<usize>,
    pub gamma: usize,
    pub sectors: Vec<SectorReport>,
    #[serde(rename = "f_ML")]
    pub f_ml: Vec<u64>,
    #[serde(rename = "f_QM")]
    pub f_qm: Vec<u64>,
    pub delta: Vec<i64>,
}

fn sector_counts(code: &PreparedCode, sector: Sector, config: &DecoderConfig, t: usize) -> Vec<u64> {
    let data = code.sector(sector);
    count_by_weight(code.n(), t, |s| sector_fails(data, config, s))
}

fn diff(a: &[u64], b: &[u64]) -> Vec<i64> {
    a.iter().zip(b).map(|(&x, &y)| x as i64 - y as i64).collect()
}

/// Full oracle report for `code` up to weight `t`, comparing `config`
/// against ML.
pub fn analyze(code: &PreparedCode, config: &DecoderConfig, t: usize) -> Result<AnalysisReport, OracleError> {
    check_guard(code.n(), t)?;
    let ml = DecoderConfig::ml();
    let profiles = Sector::BOTH
        .iter()
        .map(|&s| weight_profile(code, s, t))
        .collect::<Result<Vec<_>, _>>()?;
    let gap = DistributionGap::from_profiles(t, &profiles);
    let sectors = profiles
        .iter()
        .map(|p| {
            let g = gap.sector(p.sector);
            let (f_ml, f_qm) = (
                sector_counts(code, p.sector, &ml, t),
                sector_counts(code, p.sector, config, t),
            );
            let (d_upper, d_exact) = match p.distance() {
                Some(d) => (d, true),
                None => {
                    let logicals = logical_basis(code.code(), p.sector);
                    (logicals.iter().map(|l| l.count_ones()).min().unwrap_or(0), false)
                }
            };
            SectorReport {
                sector: p.sector,
                a_ss: p.a_ss.clone(),
                a_ntlo: p.a_ntlo.clone(),
                a_ntlo_containing: p.a_ntlo_containing.clone(),
                w0: g.w0.clone(),
                gamma: g.gamma,
                w0_containing: g.w0_containing.clone(),
                gamma_containing: g.gamma_containing,
                s: p.stopping_distance(),
                d_upper,
                d_exact,
                delta: diff(&f_qm, &f_ml),
                f_ml,
                f_qm,
            }
        })
        .collect();
    let f_ml = exact_failure_polynomial(code, &ml, t)?.counts;
    let f_qm = exact_failure_polynomial(code, config, t)?.counts;
    Ok(AnalysisReport {
        code: code.code().name().to_string(),
        n: code.n(),
        k: code.code().k(),
        t,
        decoder: *config,
        w0: gap.w0,
        gamma: gap.gamma,
        sectors,
        delta: diff(&f_qm, &f_ml),
        f_ml,
        f_qm,
    })
}
