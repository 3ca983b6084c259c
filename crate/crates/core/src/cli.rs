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

//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::affine::MAX_PIVOTS;
use crate::codes::{build_repetition, build_toric, CodeConfig, CodeError, CssCode, LoadedCode, Sector};
use crate::decoder::{maxwell_peel, write_jsonl, DecodeError, PivotStrategy};
use crate::gf2::BitVector;
use crate::mlref::{MlError, PreparedCode};
use crate::oracle::{analyze, OracleError};
use crate::sim::{bench_runtime, run_sweep, trial_rng, DecoderConfig, SimLimits};

pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Code(CodeError::Io { .. }) => EXIT_IO,
            CliError::Decode(DecodeError::BudgetExhausted { .. }) => EXIT_BUDGET,
            CliError::Oracle(OracleError::Guard { .. }) => EXIT_GUARD,
            _ => EXIT_INVALID,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "qmaxwell", version, about = "Erasure decoding for CSS quantum LDPC codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Load a code and check H_X·H_Zᵀ = 0.
    Validate {
        #[arg(long)]
        code: PathBuf,
    },
    /// Decode one sector for a given syndrome and erasure.
    Decode(DecodeArgs),
    /// Exhaustive oracle report up to erasure weight t.
    Analyze(AnalyzeArgs),
    /// Monte Carlo sweep over erasure rates.
    Simulate(SimulateArgs),
    /// Runtime and operation-count scaling over code sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SectorArg {
    X,
    Z,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Self {
        match s {
            SectorArg::X => Sector::X,
            SectorArg::Z => Sector::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum StrategyArg {
    Random,
    Score,
}

impl From<StrategyArg> for PivotStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => PivotStrategy::Random,
            StrategyArg::Score => PivotStrategy::ScoreBuckets,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum DecoderArg {
    Peeling,
    Maxwell,
    Ml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FamilyArg {
    Toric,
    Repetition,
}

fn parse_prune(s: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("prune depth must be 0 or 1, got {s:?}")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long, value_enum)]
    pub sector: SectorArg,
    #[arg(long)]
    pub syndrome: PathBuf,
    #[arg(long)]
    pub erasure: PathBuf,
    /// Optional true error, to report whether the correction matches it.
    #[arg(long)]
    pub error: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "maxwell")]
    pub decoder: DecoderArg,
    /// Guess budget; defaults to the erasure size (capped at the pivot capacity).
    #[arg(long)]
    pub gmax: Option<usize>,
    #[arg(long, value_enum, default_value = "score")]
    pub strategy: StrategyArg,
    #[arg(long, value_parser = parse_prune, default_value = "0", action = clap::ArgAction::Set)]
    pub prune: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write decoder events as JSON lines ("-" for stdout).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub gmax: usize,
    #[arg(long, value_enum, default_value = "score")]
    pub strategy: StrategyArg,
    #[arg(long, value_parser = parse_prune, default_value = "0", action = clap::ArgAction::Set)]
    pub prune: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "maxwell")]
    pub decoder: Vec<DecoderArg>,
    /// Budgets for the maxwell decoder, one output file each.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub gmax: Vec<usize>,
    #[arg(long, value_enum, default_value = "score")]
    pub strategy: StrategyArg,
    #[arg(long, value_parser = parse_prune, default_value = "0", action = clap::ArgAction::Set)]
    pub prune: bool,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_trials: u64,
    #[arg(long, default_value_t = 100)]
    pub max_failures: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "toric")]
    pub family: FamilyArg,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value = "maxwell")]
    pub decoder: DecoderArg,
    #[arg(long, default_value_t = 4)]
    pub gmax: usize,
    #[arg(long, value_enum, default_value = "score")]
    pub strategy: StrategyArg,
    #[arg(long, value_parser = parse_prune, default_value = "0", action = clap::ArgAction::Set)]
    pub prune: bool,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON output path; the table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn decoder_config(kind: DecoderArg, gmax: usize, strategy: StrategyArg, prune: bool) -> DecoderConfig {
    let base = match kind {
        DecoderArg::Peeling => DecoderConfig::peeling(),
        DecoderArg::Maxwell => DecoderConfig::maxwell(gmax),
        DecoderArg::Ml => DecoderConfig::ml(),
    };
    base.with_strategy(strategy.into()).with_prune(prune)
}

/// Erasure and syndrome files: a header line `bits <len>` or
/// `indices <len>`, then whitespace-separated 0/1 values or indices.
/// `#` starts a comment.
pub fn parse_vector_file(source: &str, text: &str) -> Result<BitVector, CliError> {
    let bad = |msg: String| CliError::Input(format!("{source}: {msg}"));
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let kind = tokens.next().ok_or_else(|| bad("empty file".into()))?;
    let len: usize = tokens
        .next()
        .ok_or_else(|| bad("missing length in header".into()))?
        .parse()
        .map_err(|_| bad("length is not a number".into()))?;
    let mut v = BitVector::zeros(len);
    match kind {
        "bits" => {
            let mut count = 0;
            for tok in tokens {
                for ch in tok.chars() {
                    if count >= len {
                        return Err(bad(format!("more than {len} bits")));
                    }
                    match ch {
                        '0' => {}
                        '1' => v.set(count, true),
                        _ => return Err(bad(format!("unexpected character {ch:?}"))),
                    }
                    count += 1;
                }
            }
            if count != len {
                return Err(bad(format!("expected {len} bits, found {count}")));
            }
        }
        "indices" => {
            for tok in tokens {
                let i: usize = tok.parse().map_err(|_| bad(format!("bad index {tok:?}")))?;
                if i >= len {
                    return Err(bad(format!("index {i} out of range for length {len}")));
                }
                if v.get(i) {
                    return Err(bad(format!("index {i} repeated")));
                }
                v.set(i, true);
            }
        }
        other => return Err(bad(format!("unknown header {other:?} (expected bits or indices)"))),
    }
    Ok(v)
}

pub fn load_vector_file(path: &Path) -> Result<BitVector, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_vector_file(&path.display().to_string(), &text)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub argv: Vec<String>,
    pub config: &'a Command,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<PathBuf>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

fn hash_inputs(paths: &[PathBuf]) -> Result<Vec<InputHash>, CliError> {
    paths
        .iter()
        .map(|p| {
            Ok(InputHash {
                path: p.clone(),
                sha256: sha256_hex(p)?,
            })
        })
        .collect()
}

struct ManifestBuilder<'a> {
    command: &'a Command,
    name: &'a str,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: u64,
}

impl<'a> ManifestBuilder<'a> {
    fn new(command: &'a Command, name: &'a str, seed: Option<u64>) -> Self {
        Self {
            command,
            name,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: unix_now(),
        }
    }

    fn write(self, path: &Path) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: self.name,
            argv: std::env::args().collect(),
            config: self.command,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            inputs: hash_inputs(&self.inputs)?,
            outputs: self.outputs,
            started_unix: self.started,
            finished_unix: unix_now(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_file(path, &text)
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |e: std::io::Error| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match &cli.command {
        Command::Validate { code } => cmd_validate(code, out),
        Command::Decode(args) => cmd_decode(args, out),
        Command::Analyze(args) => cmd_analyze(&cli.command, args, out),
        Command::Simulate(args) => cmd_simulate(&cli.command, args, out),
        Command::Bench(args) => cmd_bench(&cli.command, args, out),
    }
    .and_then(|()| out.flush().map_err(stdout_err))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    })
}

fn weights_summary(label: &str, m: &crate::gf2::BitMatrix) -> String {
    let rows: Vec<usize> = (0..m.n_rows()).map(|r| m.row_weight(r)).collect();
    let cols = m.col_weights();
    let range = |v: &[usize]| match (v.iter().min(), v.iter().max()) {
        (Some(a), Some(b)) => format!("{a}..{b}"),
        _ => "-".into(),
    };
    format!(
        "{label}: {}x{}, row weights {}, column weights {}\n",
        m.n_rows(),
        m.n_cols(),
        range(&rows),
        range(&cols)
    )
}

fn load_code(path: &Path) -> Result<LoadedCode, CliError> {
    Ok(CodeConfig::load(path)?)
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let config = CodeConfig::from_path(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (name, hx, hz, _) = config.matrices(base)?;
    let code = CssCode::new(name, hx, hz)?;
    let mut text = format!("ok, n={}, k={}\n", code.n(), code.k());
    text += &weights_summary("H_X", code.hx());
    text += &weights_summary("H_Z", code.hz());
    emit(out, &text)
}

fn cmd_decode(args: &DecodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_code(&args.code)?;
    let code = PreparedCode::new(loaded.code);
    let sector: Sector = args.sector.into();
    let data = code.sector(sector);
    let syndrome = load_vector_file(&args.syndrome)?;
    let erasure_vec = load_vector_file(&args.erasure)?;
    if erasure_vec.len() != code.n() {
        return Err(CliError::Input(format!(
            "erasure has length {}, code has {} qubits",
            erasure_vec.len(),
            code.n()
        )));
    }
    let erasure = erasure_vec.ones();
    let truth = args.error.as_deref().map(load_vector_file).transpose()?;
    if let Some(e) = &truth {
        if e.len() != code.n() {
            return Err(CliError::Input(format!("error has length {}, code has {} qubits", e.len(), code.n())));
        }
    }
    let gmax = args.gmax.unwrap_or(erasure.len().min(MAX_PIVOTS));
    let config = decoder_config(args.decoder, gmax, args.strategy, args.prune);
    let mut text = format!("sector: {sector}\n");
    let Some(opts) = config.maxwell_options() else {
        let w = data.ml_decode(&syndrome, &erasure)?;
        text += &format!("correction: {}\n", w.to_bit_string());
        text += &format!("unique_mod_stabilizer: {}\n", data.ml_correctable(&erasure));
        if let Some(e) = &truth {
            text += &format!("matches_truth: {}\n", data.check_vector_success(e, &w));
        }
        return emit(out, &text);
    };
    let opts = opts.with_trace(args.trace.is_some());
    let mut rng = trial_rng(args.seed);
    let result = maxwell_peel(data.graph(), &syndrome, &erasure, &opts, Some(data.generators()), &mut rng);
    let sol = match result {
        Ok(sol) => sol,
        Err(e @ DecodeError::BudgetExhausted { .. }) => {
            emit(out, &format!("{text}status: budget exhausted\n"))?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.trace {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, sol.trace()).expect("in-memory write");
        let s = String::from_utf8(buf).expect("json is utf-8");
        if path.as_os_str() == "-" {
            emit(out, &s)?;
        } else {
            write_file(path, &s)?;
        }
    }
    let verdict = data.check_symbolic_success(truth.as_ref().unwrap_or(&sol.at_zero()), &sol);
    text += "status: decoded\n";
    text += &format!("correction: {}\n", sol.at_zero().to_bit_string());
    text += &format!("surviving_pivots: {}\n", sol.surviving_pivots().len());
    text += &format!("guesses: {}\n", sol.guess_count());
    text += &format!("reimbursements: {}\n", sol.reimbursement_count());
    text += &format!("unique_mod_stabilizer: {}\n", verdict.unique_mod_stabilizer);
    if truth.is_some() {
        text += &format!("matches_truth: {}\n", verdict.matches_truth_mod_stabilizer);
    }
    emit(out, &text)
}

fn cmd_analyze(command: &Command, args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new(command, "analyze", None);
    let loaded = load_code(&args.code)?;
    manifest.inputs = loaded.inputs.clone();
    let code = PreparedCode::new(loaded.code);
    let config = decoder_config(DecoderArg::Maxwell, args.gmax, args.strategy, args.prune);
    let report = analyze(&code, &config, args.t)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    match &args.out {
        Some(path) => {
            write_file(path, &json)?;
            manifest.outputs.push(path.clone());
            manifest.write(&sidecar(path))?;
            emit(out, &format!("gamma({}) = {}, wrote {}\n", args.t, report.gamma, path.display()))
        }
        None => emit(out, &json),
    }
}

fn cmd_simulate(command: &Command, args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.max_trials == 0 || args.max_failures == 0 {
        return Err(CliError::Input("--max-trials and --max-failures must be positive".into()));
    }
    if let Some(e) = args.eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(CliError::Input(format!("erasure rate {e} outside [0, 1]")));
    }
    let mut manifest = ManifestBuilder::new(command, "simulate", Some(args.seed));
    let loaded = load_code(&args.code)?;
    manifest.inputs = loaded.inputs.clone();
    let code = PreparedCode::new(loaded.code);
    let limits = SimLimits {
        max_trials: args.max_trials,
        max_failures: args.max_failures,
    };
    let mut configs = Vec::new();
    for &kind in &args.decoder {
        if kind == DecoderArg::Maxwell {
            configs.extend(args.gmax.iter().map(|&g| decoder_config(kind, g, args.strategy, args.prune)));
        } else {
            configs.push(decoder_config(kind, 0, args.strategy, args.prune));
        }
    }
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    for config in &configs {
        let stats = run_sweep(&code, config, &args.eps, limits, args.seed, args.workers);
        let stem = format!("{}_{}", code.code().name(), config.tag());
        let csv = args.out.join(format!("{stem}.csv"));
        let json = args.out.join(format!("{stem}.json"));
        write_file(&csv, &stats.to_csv())?;
        write_file(&json, &stats.to_json())?;
        let wall: f64 = stats.points.iter().map(|p| p.wall_seconds).sum();
        emit(out, &format!("{} ({:.2}s)\n", csv.display(), wall))?;
        manifest.outputs.extend([csv, json]);
    }
    manifest.write(&args.out.join("manifest.json"))
}

fn cmd_bench(command: &Command, args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !args.sizes.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Input("--sizes must be strictly increasing".into()));
    }
    if !(0.0..=1.0).contains(&args.eps) {
        return Err(CliError::Input(format!("erasure rate {} outside [0, 1]", args.eps)));
    }
    let config = decoder_config(args.decoder, args.gmax, args.strategy, args.prune);
    let build: fn(usize) -> Result<CssCode, CodeError> = match args.family {
        FamilyArg::Toric => build_toric,
        FamilyArg::Repetition => build_repetition,
    };
    let rows = bench_runtime(build, &args.sizes, &config, args.eps, args.trials, args.seed)?;
    let mut text = String::from("size\tn\ttrials\tfailures\tmean_erasure\tmean_bit_ops\tops_per_erasure\tmean_decode_us\n");
    for r in &rows {
        text += &format!(
            "{}\t{}\t{}\t{}\t{:.3}\t{:.1}\t{:.3}\t{:.2}\n",
            r.size, r.n, r.trials, r.failures, r.mean_erasure, r.mean_bit_ops, r.ops_per_erasure, r.mean_decode_us
        );
    }
    emit(out, &text)?;
    if let Some(path) = &args.out {
        let mut json = serde_json::to_string_pretty(&rows).expect("rows serialize");
        json.push('\n');
        write_file(path, &json)?;
        let mut manifest = ManifestBuilder::new(command, "bench", Some(args.seed));
        manifest.outputs.push(path.clone());
        manifest.write(&sidecar(path))?;
    }
    Ok(())
}
