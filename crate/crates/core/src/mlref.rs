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

//! Maximum-likelihood erasure decoding by Gaussian elimination, and the
//! verdicts that decide whether a correction is right modulo the stabilizer
//! group.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{CssCode, Sector};
use crate::decoder::{maxwell_peel, DecodeError, DecodeStats, GeneratorSet, SymbolicSolution, TannerGraph};
use crate::gf2::{BitMatrix, BitVector, Gf2Error, RowBasis};
use crate::sim::{DecoderConfig, DecoderKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MlError {
    #[error("syndrome is not reachable from any error on the erasure")]
    Inconsistent,
    #[error("syndrome has length {found}, expected {expected}")]
    SyndromeLength { expected: usize, found: usize },
    #[error("{sector} error has a nonzero bit at {index}, outside the erasure")]
    ErrorOutsideErasure { sector: Sector, index: usize },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Everything needed to decode and judge one sector, built once per code.
#[derive(Debug, Clone)]
pub struct SectorData {
    sector: Sector,
    decoding: BitMatrix,
    graph: TannerGraph,
    stabilizers: RowBasis,
    generators: GeneratorSet,
}

impl SectorData {
    pub fn new(code: &CssCode, sector: Sector) -> Self {
        let decoding = code.decoding_matrix(sector).clone();
        let stab = code.stabilizer_matrix(sector);
        Self {
            sector,
            graph: TannerGraph::from_matrix(&decoding),
            decoding,
            stabilizers: RowBasis::new(stab),
            generators: GeneratorSet::from_matrix(stab),
        }
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn n(&self) -> usize {
        self.decoding.n_cols()
    }

    pub fn decoding_matrix(&self) -> &BitMatrix {
        &self.decoding
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn stabilizers(&self) -> &RowBasis {
        &self.stabilizers
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn syndrome(&self, error: &BitVector) -> BitVector {
        self.decoding.mul_vec(error)
    }

    /// Kernel vectors of the decoding matrix supported inside `erasure`,
    /// as a basis lifted back to length `n`.
    pub fn erased_kernel(&self, erasure: &[usize]) -> Vec<BitVector> {
        let n = self.n();
        self.decoding
            .select_columns(erasure)
            .nullspace()
            .into_iter()
            .map(|k| lift(n, erasure, &k))
            .collect()
    }

    /// True iff every kernel vector supported on `erasure` is a stabilizer,
    /// i.e. the erasure contains no nontrivial logical support.
    pub fn ml_correctable(&self, erasure: &[usize]) -> bool {
        self.erased_kernel(erasure)
            .iter()
            .all(|k| self.stabilizers.contains(k))
    }

    /// A particular solution of `H·w = σ` with `supp(w) ⊆ erasure`.
    pub fn ml_decode(&self, syndrome: &BitVector, erasure: &[usize]) -> Result<BitVector, MlError> {
        if syndrome.len() != self.decoding.n_rows() {
            return Err(MlError::SyndromeLength {
                expected: self.decoding.n_rows(),
                found: syndrome.len(),
            });
        }
        let restricted = self.decoding.select_columns(erasure);
        match restricted.solve(syndrome) {
            Ok(sol) => Ok(lift(self.n(), erasure, &sol.particular)),
            Err(Gf2Error::Inconsistent) => Err(MlError::Inconsistent),
            Err(e) => unreachable!("restricted system has matching shape: {e}"),
        }
    }

    pub fn check_vector_success(&self, true_error: &BitVector, w: &BitVector) -> bool {
        self.stabilizers.contains(&(true_error ^ w))
    }

    pub fn check_symbolic_success(&self, true_error: &BitVector, sol: &SymbolicSolution) -> SectorVerdict {
        let unique = sol
            .surviving_pivots()
            .into_iter()
            .all(|p| self.stabilizers.contains(&sol.direction(p)));
        SectorVerdict {
            decoded: true,
            unique_mod_stabilizer: unique,
            matches_truth_mod_stabilizer: self.check_vector_success(true_error, &sol.at_zero()),
        }
    }

    /// Runs `config` on this sector for `error` restricted to `erasure`.
    pub fn decode<R: Rng + ?Sized>(
        &self,
        config: &DecoderConfig,
        erasure: &[usize],
        error: &BitVector,
        rng: &mut R,
    ) -> Result<SectorOutcome, MlError> {
        let support = BitVector::from_indices(self.n(), erasure);
        if let Some(index) = error.iter_ones().find(|&i| !support.get(i)) {
            return Err(MlError::ErrorOutsideErasure { sector: self.sector, index });
        }
        let syndrome = self.syndrome(error);
        match config.maxwell_options() {
            None => {
                debug_assert_eq!(config.kind, DecoderKind::Ml);
                let w = self.ml_decode(&syndrome, erasure)?;
                Ok(SectorOutcome {
                    verdict: SectorVerdict {
                        decoded: true,
                        unique_mod_stabilizer: self.ml_correctable(erasure),
                        matches_truth_mod_stabilizer: self.check_vector_success(error, &w),
                    },
                    stats: DecodeStats::default(),
                })
            }
            Some(opts) => {
                let gens = opts.prune.then_some(&self.generators);
                match maxwell_peel(&self.graph, &syndrome, erasure, &opts, gens, rng) {
                    Ok(sol) => Ok(SectorOutcome {
                        verdict: self.check_symbolic_success(error, &sol),
                        stats: *sol.stats(),
                    }),
                    Err(DecodeError::BudgetExhausted { stats, .. }) => Ok(SectorOutcome {
                        verdict: SectorVerdict::FAILED,
                        stats,
                    }),
                    Err(e) => Err(e.into()),
                }
            }
        }
    }
}

fn lift(n: usize, erasure: &[usize], local: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(n);
    for i in local.iter_ones() {
        out.set(erasure[i], true);
    }
    out
}

/// A code with both sectors prepared for repeated decoding.
#[derive(Debug, Clone)]
pub struct PreparedCode {
    code: CssCode,
    x: SectorData,
    z: SectorData,
}

impl PreparedCode {
    pub fn new(code: CssCode) -> Self {
        let x = SectorData::new(&code, Sector::X);
        let z = SectorData::new(&code, Sector::Z);
        Self { code, x, z }
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn sector(&self, sector: Sector) -> &SectorData {
        match sector {
            Sector::X => &self.x,
            Sector::Z => &self.z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SectorVerdict {
    /// A solution was produced (false on budget exhaustion).
    pub decoded: bool,
    pub unique_mod_stabilizer: bool,
    pub matches_truth_mod_stabilizer: bool,
}

impl SectorVerdict {
    pub const FAILED: SectorVerdict = SectorVerdict {
        decoded: false,
        unique_mod_stabilizer: false,
        matches_truth_mod_stabilizer: false,
    };

    pub fn success(&self) -> bool {
        self.decoded && self.unique_mod_stabilizer && self.matches_truth_mod_stabilizer
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorOutcome {
    pub verdict: SectorVerdict,
    pub stats: DecodeStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub x: SectorOutcome,
    pub z: SectorOutcome,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.x.verdict.success() && self.z.verdict.success()
    }

    /// Work summed over both sectors.
    pub fn stats(&self) -> DecodeStats {
        let mut s = self.x.stats;
        s.accumulate(&self.z.stats);
        s
    }
}

pub fn ml_correctable(code: &PreparedCode, sector: Sector, erasure: &[usize]) -> bool {
    code.sector(sector).ml_correctable(erasure)
}

pub fn ml_decode(
    code: &PreparedCode,
    sector: Sector,
    syndrome: &BitVector,
    erasure: &[usize],
) -> Result<BitVector, MlError> {
    code.sector(sector).ml_decode(syndrome, erasure)
}

/// Decodes both sectors on the same erasure: `e_x` against `H_Z`, then
/// `e_z` against `H_X`, drawing any random choices from `rng` in that order.
pub fn decode_trial_css_detailed<R: Rng + ?Sized>(
    code: &PreparedCode,
    config: &DecoderConfig,
    erasure: &[usize],
    e_x: &BitVector,
    e_z: &BitVector,
    rng: &mut R,
) -> Result<TrialOutcome, MlError> {
    let x = code.x.decode(config, erasure, e_x, rng)?;
    let z = code.z.decode(config, erasure, e_z, rng)?;
    Ok(TrialOutcome { x, z })
}

pub fn decode_trial_css<R: Rng + ?Sized>(
    code: &PreparedCode,
    config: &DecoderConfig,
    erasure: &[usize],
    e_x: &BitVector,
    e_z: &BitVector,
    rng: &mut R,
) -> Result<bool, MlError> {
    decode_trial_css_detailed(code, config, erasure, e_x, e_z, rng).map(|o| o.success())
}
