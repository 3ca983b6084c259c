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

//! Seeded Monte Carlo estimation of the logical error rate on the erasure
//! channel, and the runtime-scaling benchmark.
//!
//! Every trial draws from its own generator, seeded from the master seed,
//! the point index and the trial index, so results do not depend on how
//! trials are spread over worker threads. Early stopping scans committed
//! trials in index order.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::CssCode;
use crate::decoder::{DecodeStats, MaxwellOptions, PivotStrategy};
use crate::gf2::BitVector;
use crate::mlref::{decode_trial_css_detailed, MlError, PreparedCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Peeling,
    Maxwell,
    Ml,
}

impl DecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            DecoderKind::Peeling => "peeling",
            DecoderKind::Maxwell => "maxwell",
            DecoderKind::Ml => "ml",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DecoderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "peeling" => Ok(DecoderKind::Peeling),
            "maxwell" => Ok(DecoderKind::Maxwell),
            "ml" => Ok(DecoderKind::Ml),
            _ => Err(format!("unknown decoder {s:?} (expected peeling, maxwell or ml)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    /// Guess budget; ignored by `ml`, zero for `peeling`.
    pub gmax: usize,
    pub strategy: PivotStrategy,
    pub prune: bool,
}

impl DecoderConfig {
    pub fn peeling() -> Self {
        Self {
            kind: DecoderKind::Peeling,
            gmax: 0,
            strategy: PivotStrategy::ScoreBuckets,
            prune: false,
        }
    }

    pub fn maxwell(gmax: usize) -> Self {
        Self {
            kind: DecoderKind::Maxwell,
            gmax,
            ..Self::peeling()
        }
    }

    pub fn ml() -> Self {
        Self {
            kind: DecoderKind::Ml,
            ..Self::peeling()
        }
    }

    pub fn with_strategy(mut self, strategy: PivotStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_prune(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    /// Symbolic decoder options, or `None` for ML.
    pub fn maxwell_options(&self) -> Option<MaxwellOptions> {
        let budget = match self.kind {
            DecoderKind::Ml => return None,
            DecoderKind::Peeling => 0,
            DecoderKind::Maxwell => self.gmax,
        };
        Some(
            MaxwellOptions::new(budget)
                .with_strategy(self.strategy)
                .with_pruning(self.prune),
        )
    }

    fn gmax_column(&self) -> String {
        match self.kind {
            DecoderKind::Ml => "-".into(),
            DecoderKind::Peeling => "0".into(),
            DecoderKind::Maxwell => self.gmax.to_string(),
        }
    }

    fn strategy_column(&self) -> &'static str {
        match self.kind {
            DecoderKind::Maxwell => self.strategy.label(),
            _ => "-",
        }
    }

    /// Short tag usable in file names, e.g. `maxwell_g4_score_p1`.
    pub fn tag(&self) -> String {
        let mut s = self.kind.label().to_string();
        if self.kind == DecoderKind::Maxwell {
            write!(s, "_g{}_{}", self.gmax, self.strategy).unwrap();
        }
        if self.kind != DecoderKind::Ml && self.prune {
            s.push_str("_p1");
        }
        s
    }
}

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point) ^ trial)
}

pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub erasure: Vec<usize>,
    pub e_x: BitVector,
    pub e_z: BitVector,
}

/// Erases each qubit with probability `eps`, then draws uniform X and Z
/// error bits on the erased qubits.
pub fn sample_trial<R: Rng + ?Sized>(n: usize, eps: f64, rng: &mut R) -> Trial {
    let erasure: Vec<usize> = (0..n).filter(|_| rng.gen_bool(eps)).collect();
    let mut e_x = BitVector::zeros(n);
    let mut e_z = BitVector::zeros(n);
    for &q in &erasure {
        e_x.set(q, rng.gen());
        e_z.set(q, rng.gen());
    }
    Trial { erasure, e_x, e_z }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub erased: usize,
    pub success: bool,
    pub stats: DecodeStats,
}

/// Samples and decodes one trial from its own seed.
pub fn run_trial(code: &PreparedCode, config: &DecoderConfig, eps: f64, seed: u64) -> TrialRecord {
    let mut rng = trial_rng(seed);
    let trial = sample_trial(code.n(), eps, &mut rng);
    let outcome = decode_trial_css_detailed(code, config, &trial.erasure, &trial.e_x, &trial.e_z, &mut rng)
        .unwrap_or_else(|e: MlError| panic!("sampled trial rejected: {e}"));
    TrialRecord {
        erased: trial.erasure.len(),
        success: outcome.success(),
        stats: outcome.stats(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimLimits {
    pub max_trials: u64,
    pub max_failures: u64,
}

impl Default for SimLimits {
    fn default() -> Self {
        Self {
            max_trials: 100_000,
            max_failures: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointStats {
    pub epsilon: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_log: f64,
    pub stderr: f64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl PointStats {
    fn new(epsilon: f64, trials: u64, failures: u64, wall_seconds: f64) -> Self {
        let p = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() };
        Self {
            epsilon,
            trials,
            failures,
            p_log: p,
            stderr,
            wall_seconds,
        }
    }
}

const BATCH: u64 = 512;

/// Runs trials until `max_failures` failures or `max_trials` trials,
/// whichever index comes first. Parallelism comes from the ambient rayon
/// pool; the result is independent of its size.
pub fn run_point(
    code: &PreparedCode,
    config: &DecoderConfig,
    eps: f64,
    point: u64,
    limits: SimLimits,
    master_seed: u64,
) -> PointStats {
    assert!((0.0..=1.0).contains(&eps), "erasure rate {eps} outside [0, 1]");
    assert!(limits.max_trials >= 1 && limits.max_failures >= 1, "limits must be positive");
    let start = Instant::now();
    let mut trials = 0u64;
    let mut failures = 0u64;
    'outer: while trials < limits.max_trials {
        let end = (trials + BATCH).min(limits.max_trials);
        let outcomes: Vec<bool> = (trials..end)
            .into_par_iter()
            .map(|t| run_trial(code, config, eps, trial_seed(master_seed, point, t)).success)
            .collect();
        for ok in outcomes {
            trials += 1;
            if !ok {
                failures += 1;
                if failures >= limits.max_failures {
                    break 'outer;
                }
            }
        }
    }
    PointStats::new(eps, trials, failures, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStats {
    pub code: String,
    pub decoder: DecoderConfig,
    pub seed: u64,
    pub limits: SimLimits,
    pub points: Vec<PointStats>,
}

pub const CSV_HEADER: &str = "code,decoder,gmax,strategy,prune,epsilon,trials,failures,p_log,stderr,seed";

#[derive(Serialize)]
struct CsvRow<'a> {
    code: &'a str,
    decoder: &'static str,
    gmax: String,
    strategy: &'static str,
    prune: u8,
    epsilon: f64,
    trials: u64,
    failures: u64,
    p_log: f64,
    stderr: f64,
    seed: u64,
}

impl SweepStats {
    fn rows(&self) -> impl Iterator<Item = CsvRow<'_>> {
        self.points.iter().map(move |p| CsvRow {
            code: &self.code,
            decoder: self.decoder.kind.label(),
            gmax: self.decoder.gmax_column(),
            strategy: self.decoder.strategy_column(),
            prune: u8::from(self.decoder.prune && self.decoder.kind != DecoderKind::Ml),
            epsilon: p.epsilon,
            trials: p.trials,
            failures: p.failures,
            p_log: p.p_log,
            stderr: p.stderr,
            seed: self.seed,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in self.rows() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.code, r.decoder, r.gmax, r.strategy, r.prune, r.epsilon, r.trials, r.failures, r.p_log, r.stderr, r.seed
            )
            .unwrap();
        }
        out
    }

    /// The CSV rows as a JSON array of objects.
    pub fn to_json(&self) -> String {
        let rows: Vec<CsvRow<'_>> = self.rows().collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
        s.push('\n');
        s
    }
}

/// Runs every erasure rate in `eps` on `workers` threads (0 = all cores).
pub fn run_sweep(
    code: &PreparedCode,
    config: &DecoderConfig,
    eps: &[f64],
    limits: SimLimits,
    seed: u64,
    workers: usize,
) -> SweepStats {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let points = pool.install(|| {
        eps.iter()
            .enumerate()
            .map(|(i, &e)| run_point(code, config, e, i as u64, limits, seed))
            .collect()
    });
    SweepStats {
        code: code.code().name().to_string(),
        decoder: *config,
        seed,
        limits,
        points,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    pub mean_erasure: f64,
    pub mean_bit_ops: f64,
    pub ops_per_erasure: f64,
    pub mean_decode_us: f64,
}

/// Decodes `trials` sampled trials per size, single-threaded, reporting
/// mean erasure size, instrumented bit operations and wall time.
pub fn bench_runtime<F>(
    build: F,
    sizes: &[usize],
    config: &DecoderConfig,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<BenchRow>, crate::codes::CodeError>
where
    F: Fn(usize) -> Result<CssCode, crate::codes::CodeError>,
{
    sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let code = PreparedCode::new(build(size)?);
            let mut erased = 0u64;
            let mut ops = 0u64;
            let mut failures = 0u64;
            let start = Instant::now();
            for t in 0..trials {
                let r = run_trial(&code, config, eps, trial_seed(seed, i as u64, t));
                erased += r.erased as u64;
                ops += r.stats.bit_ops();
                failures += u64::from(!r.success);
            }
            let elapsed = start.elapsed().as_secs_f64();
            let denom = trials.max(1) as f64;
            let mean_erasure = erased as f64 / denom;
            let mean_bit_ops = ops as f64 / denom;
            Ok(BenchRow {
                size,
                n: code.n(),
                trials,
                failures,
                mean_erasure,
                mean_bit_ops,
                ops_per_erasure: if erased == 0 { 0.0 } else { ops as f64 / erased as f64 },
                mean_decode_us: elapsed * 1e6 / denom,
            })
        })
        .collect()
}
