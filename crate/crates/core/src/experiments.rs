//! Monte Carlo evaluation: realization-wise reliability and leakage
//! bounds, end-to-end bit error rates, and parameter sweeps.
//!
//! Every trial draws from its own generator, seeded by
//! [`derive_seed`]`(base_seed, cell, trial)`, so results do not depend on
//! scheduling and parallel sweeps reproduce serial ones exactly.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{apply_read, apply_write, sample_action, AdversaryAction, AdversaryError, Strategy};
use crate::codec::{
    decode_session, decode_session_with, encode_session, ChainState, CodecError, CoinFlip, MessageBlock,
    ObservationSymbol,
};
use crate::construct::{build_partition, rate_report, CodeConfig, ConstructError, IndexClass, IndexPartition, RateReport};
use crate::polar::realize_profile;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrialKind {
    /// Realization-wise bound values from one adversary draw.
    Bounds,
    /// Full encode / attack / decode of `T` chained blocks.
    Simulate,
}

impl TrialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialKind::Bounds => "bounds",
            TrialKind::Simulate => "simulate",
        }
    }
}

impl fmt::Display for TrialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bounds" => Ok(TrialKind::Bounds),
            "simulate" => Ok(TrialKind::Simulate),
            other => Err(format!("unknown trial kind {other:?}")),
        }
    }
}

/// Outcome of a single Monte Carlo trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub kind: TrialKind,
    pub trial: usize,
    pub seed: u64,
    pub ber_bound: f64,
    pub leak_bound: f64,
    pub bob_bit_errors: u64,
    pub eve_bit_errors: u64,
    pub message_bits: u64,
    pub erased_decisions: u64,
    /// Total `|S_w|` and `|S_r|` over the actions drawn.
    pub written_positions: u64,
    pub read_positions: u64,
}

impl TrialResult {
    pub fn bob_ber(&self) -> Option<f64> {
        (self.message_bits > 0).then(|| self.bob_bit_errors as f64 / self.message_bits as f64)
    }

    pub fn eve_ber(&self) -> Option<f64> {
        (self.message_bits > 0).then(|| self.eve_bit_errors as f64 / self.message_bits as f64)
    }
}

fn count_where(z: &[bool], partition: &IndexPartition, pred: impl Fn(IndexClass) -> bool, value: bool) -> u64 {
    z.iter()
        .zip(partition.classes())
        .filter(|&(&zi, &c)| zi == value && pred(c))
        .count() as u64
}

/// Full-noise count on `I ∪ R` (with `E ⊆ I`) and on `E` for Bob's
/// realization of `action`.
fn reliability_counts(partition: &IndexPartition, action: &AdversaryAction) -> (u64, u64) {
    let z = realize_profile(&action.write_mask());
    let decided = count_where(&z, partition, IndexClass::is_channel_decision, true);
    let chain = count_where(&z, partition, |c| c == IndexClass::ChainSource, true);
    (decided, chain)
}

/// Noiseless-for-Eve count on `I ∪ F` (with `E ⊆ I`).
fn leakage_count(partition: &IndexPartition, action: &AdversaryAction) -> u64 {
    let z = realize_profile(&action.read_mask());
    count_where(
        &z,
        partition,
        |c| matches!(c, IndexClass::Info | IndexClass::ChainSource | IndexClass::Frozen),
        false,
    )
}

/// Reliability bound for `T` blocks sharing one realization:
/// `T · Σ_{I∪R} Z + (T − 1) · Σ_E Z`.
pub fn ber_bound_trial(config: &CodeConfig, partition: &IndexPartition, action: &AdversaryAction) -> f64 {
    let (decided, chain) = reliability_counts(partition, action);
    let t = config.blocks as u64;
    (t * decided + (t - 1) * chain) as f64
}

/// Leakage bound for `T` blocks sharing one realization:
/// `T · Σ_{I∪F} (1 − Z)` on the reading-equivalent block.
pub fn leak_bound_trial(config: &CodeConfig, partition: &IndexPartition, action: &AdversaryAction) -> f64 {
    (config.blocks as u64 * leakage_count(partition, action)) as f64
}

/// Independent generator streams of one trial.
struct TrialStreams {
    encoder: ChaCha8Rng,
    preshared: ChaCha8Rng,
    adversary: ChaCha8Rng,
    eavesdropper: ChaCha8Rng,
}

impl TrialStreams {
    fn new(seed: u64) -> Self {
        let stream = |id| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        TrialStreams {
            encoder: stream(0),
            preshared: stream(1),
            adversary: stream(2),
            eavesdropper: stream(3),
        }
    }
}

/// One draw of the adversary, scored with both bounds.
pub fn bounds_trial(
    config: &CodeConfig,
    partition: &IndexPartition,
    strategy: Strategy,
    trial: usize,
    seed: u64,
) -> Result<TrialResult, ExperimentError> {
    let mut streams = TrialStreams::new(seed);
    let action = sample_action(partition.block_len(), config.rho_w, config.rho_r, strategy, &mut streams.adversary)?;
    Ok(TrialResult {
        kind: TrialKind::Bounds,
        trial,
        seed,
        ber_bound: ber_bound_trial(config, partition, &action),
        leak_bound: leak_bound_trial(config, partition, &action),
        bob_bit_errors: 0,
        eve_bit_errors: 0,
        message_bits: (config.blocks * partition.info().len()) as u64,
        erased_decisions: 0,
        written_positions: action.write_set.len() as u64,
        read_positions: action.read_set.len() as u64,
    })
}

fn bit_errors(sent: &[MessageBlock], decoded: &[MessageBlock]) -> u64 {
    sent.iter()
        .zip(decoded)
        .map(|(a, b)| a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count() as u64)
        .sum()
}

/// Encodes `T` chained blocks of uniform message bits, attacks each block
/// with a fresh action, and decodes at both receivers.
///
/// Bob uses the pre-shared bits and resolves erased decisions to zero. Eve
/// knows the code and frozen values but not the pre-shared bits, and
/// resolves her undetermined decisions with her own coin flips. The bound
/// fields sum the per-block realization counts of each block's own action.
pub fn end_to_end_trial(
    config: &CodeConfig,
    partition: &IndexPartition,
    strategy: Strategy,
    trial: usize,
    seed: u64,
) -> Result<TrialResult, ExperimentError> {
    let mut streams = TrialStreams::new(seed);
    let len = partition.block_len();
    let blocks = config.blocks;

    let preshared = ChainState::random(partition.chain_sink().len(), &mut streams.preshared);
    let messages: Vec<MessageBlock> = (0..blocks)
        .map(|_| MessageBlock::random(partition.info().len(), &mut streams.encoder))
        .collect();
    let encoded = encode_session(&messages, partition, &preshared, &mut streams.encoder)?;

    let mut bob_obs: Vec<Vec<ObservationSymbol>> = Vec::with_capacity(blocks);
    let mut eve_obs: Vec<Vec<ObservationSymbol>> = Vec::with_capacity(blocks);
    let (mut ber_bound, mut leak_bound) = (0u64, 0u64);
    let (mut written, mut read) = (0u64, 0u64);
    for (t, block) in encoded.iter().enumerate() {
        let action = sample_action(len, config.rho_w, config.rho_r, strategy, &mut streams.adversary)?;
        let (decided, chain) = reliability_counts(partition, &action);
        ber_bound += decided + if t + 1 < blocks { chain } else { 0 };
        leak_bound += leakage_count(partition, &action);
        written += action.write_set.len() as u64;
        read += action.read_set.len() as u64;
        bob_obs.push(apply_write(&block.codeword, &action.write_set));
        eve_obs.push(apply_read(&block.codeword, &action.read_set));
    }

    let bob = decode_session(&bob_obs, partition, &preshared)?;
    let mut coins = CoinFlip(streams.eavesdropper);
    let eve = decode_session_with(&eve_obs, partition, None, &mut coins)?;

    Ok(TrialResult {
        kind: TrialKind::Simulate,
        trial,
        seed,
        ber_bound: ber_bound as f64,
        leak_bound: leak_bound as f64,
        bob_bit_errors: bit_errors(&messages, &bob.messages),
        eve_bit_errors: bit_errors(&messages, &eve.messages),
        message_bits: (blocks * partition.info().len()) as u64,
        erased_decisions: bob.erasure_counts.iter().sum::<usize>() as u64,
        written_positions: written,
        read_positions: read,
    })
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in grid cell `cell`.
pub fn derive_seed(base_seed: u64, cell: usize, trial: usize) -> u64 {
    mix64(mix64(mix64(base_seed) ^ cell as u64) ^ trial as u64)
}

/// Parameter grid: every `(n, beta)` pair at fixed fractions and `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub stages: Vec<u32>,
    pub betas: Vec<f64>,
    pub rho_w: f64,
    pub rho_r: f64,
    pub blocks: usize,
    pub strategy: Strategy,
}

impl SweepGrid {
    /// Cell configurations in row-major `(n, beta)` order.
    pub fn configs(&self) -> Result<Vec<CodeConfig>, ConstructError> {
        self.stages
            .iter()
            .flat_map(|&n| self.betas.iter().map(move |&beta| (n, beta)))
            .map(|(n, beta)| CodeConfig::new(n, beta, self.rho_w, self.rho_r, self.blocks))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub grid: SweepGrid,
    pub kind: TrialKind,
    pub trials: usize,
    pub base_seed: u64,
    pub parallelism: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellOutcome {
    Feasible { rate: RateReport, trials: Vec<TrialResult> },
    Infeasible { info: usize, sink: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub cell: usize,
    pub config: CodeConfig,
    pub outcome: CellOutcome,
}

impl CellResult {
    pub fn trials(&self) -> &[TrialResult] {
        match &self.outcome {
            CellOutcome::Feasible { trials, .. } => trials,
            CellOutcome::Infeasible { .. } => &[],
        }
    }

    /// Aggregated metrics of this cell, in a fixed order.
    pub fn summaries(&self, kind: TrialKind) -> Vec<(&'static str, Summary)> {
        let CellOutcome::Feasible { rate, trials } = &self.outcome else {
            return Vec::new();
        };
        let pick = |f: &dyn Fn(&TrialResult) -> Option<f64>| Summary::of(trials.iter().filter_map(f));
        let mut out = vec![
            ("ber_bound", pick(&|t| Some(t.ber_bound))),
            ("leak_bound", pick(&|t| Some(t.leak_bound))),
        ];
        if kind == TrialKind::Simulate {
            out.push(("bob_ber", pick(&|t| t.bob_ber())));
            out.push(("eve_ber", pick(&|t| t.eve_ber())));
            out.push(("erased_decisions", pick(&|t| Some(t.erased_decisions as f64))));
        }
        out.push((
            "secrecy_rate",
            Summary {
                mean: rate.secrecy_rate,
                stderr: 0.0,
                trials: trials.len(),
            },
        ));
        out.retain(|(_, s)| s.trials > 0);
        out
    }

    pub fn summary(&self, kind: TrialKind, metric: &str) -> Option<Summary> {
        self.summaries(kind).into_iter().find(|(m, _)| *m == metric).map(|(_, s)| s)
    }
}

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: 0.0,
                stderr: 0.0,
                trials: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, stderr, trials: n }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub kind: TrialKind,
    pub strategy: Strategy,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub cells: Vec<CellResult>,
}

/// Runs every cell of the grid; infeasible cells are recorded, not fatal.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, ExperimentError> {
    if spec.trials == 0 {
        return Err(ExperimentError::InvalidSweep("trials must be at least 1".into()));
    }
    if spec.grid.stages.is_empty() || spec.grid.betas.is_empty() {
        return Err(ExperimentError::InvalidSweep("grid lists must be non-empty".into()));
    }
    if spec.parallelism == 0 {
        return Err(ExperimentError::InvalidSweep("parallelism must be at least 1".into()));
    }
    let configs = spec.grid.configs()?;
    let mut partitions = Vec::with_capacity(configs.len());
    for config in &configs {
        partitions.push(match build_partition(config) {
            Ok(p) => Ok(p),
            Err(ConstructError::Infeasible { info, sink }) => Err((info, sink)),
            Err(e) => return Err(e.into()),
        });
    }

    let jobs: Vec<(usize, usize)> = partitions
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_ok())
        .flat_map(|(cell, _)| (0..spec.trials).map(move |trial| (cell, trial)))
        .collect();

    let run_job = |&(cell, trial): &(usize, usize)| {
        let config = &configs[cell];
        let partition = partitions[cell].as_ref().expect("feasible cell");
        let seed = derive_seed(spec.base_seed, cell, trial);
        match spec.kind {
            TrialKind::Bounds => bounds_trial(config, partition, spec.grid.strategy, trial, seed),
            TrialKind::Simulate => end_to_end_trial(config, partition, spec.grid.strategy, trial, seed),
        }
    };

    let results: Vec<TrialResult> = if spec.parallelism == 1 {
        jobs.iter().map(run_job).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.parallelism)
            .build()
            .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_job).collect::<Result<_, _>>())?
    };

    let mut results = results.into_iter();
    let cells = configs
        .iter()
        .zip(&partitions)
        .enumerate()
        .map(|(cell, (config, partition))| {
            let outcome = match partition {
                Ok(p) => CellOutcome::Feasible {
                    rate: rate_report(p, config),
                    trials: results.by_ref().take(spec.trials).collect(),
                },
                Err((info, sink)) => CellOutcome::Infeasible {
                    info: *info,
                    sink: *sink,
                },
            };
            CellResult {
                cell,
                config: *config,
                outcome,
            }
        })
        .collect();

    Ok(SweepResult {
        kind: spec.kind,
        strategy: spec.grid.strategy,
        trials_per_cell: spec.trials,
        base_seed: spec.base_seed,
        cells,
    })
}

/// One row of the per-trial CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub kind: String,
    #[serde(rename = "N")]
    pub block_len: usize,
    pub n: u32,
    pub beta: f64,
    pub rho_w: f64,
    pub rho_r: f64,
    #[serde(rename = "T")]
    pub blocks: usize,
    pub strategy: String,
    pub trial: usize,
    pub seed: u64,
    pub ber_bound: f64,
    pub leak_bound: f64,
    pub bob_bit_errors: u64,
    pub eve_bit_errors: u64,
    pub message_bits: u64,
    pub erased_decisions: u64,
}

/// One row of the aggregate CSV. Infeasible cells carry a single row with
/// metric `infeasible` and zero trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub kind: String,
    #[serde(rename = "N")]
    pub block_len: usize,
    pub n: u32,
    pub beta: f64,
    pub rho_w: f64,
    pub rho_r: f64,
    #[serde(rename = "T")]
    pub blocks: usize,
    pub strategy: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl SweepResult {
    pub fn trial_rows(&self) -> Vec<TrialRow> {
        let mut rows = Vec::new();
        for cell in &self.cells {
            let c = &cell.config;
            for t in cell.trials() {
                rows.push(TrialRow {
                    kind: t.kind.to_string(),
                    block_len: c.block_len(),
                    n: c.stages,
                    beta: c.beta,
                    rho_w: c.rho_w,
                    rho_r: c.rho_r,
                    blocks: c.blocks,
                    strategy: self.strategy.to_string(),
                    trial: t.trial,
                    seed: t.seed,
                    ber_bound: t.ber_bound,
                    leak_bound: t.leak_bound,
                    bob_bit_errors: t.bob_bit_errors,
                    eve_bit_errors: t.eve_bit_errors,
                    message_bits: t.message_bits,
                    erased_decisions: t.erased_decisions,
                });
            }
        }
        rows
    }

    pub fn aggregate_rows(&self) -> Vec<AggregateRow> {
        let mut rows = Vec::new();
        for cell in &self.cells {
            let c = &cell.config;
            let row = |metric: &str, s: Summary| AggregateRow {
                kind: self.kind.to_string(),
                block_len: c.block_len(),
                n: c.stages,
                beta: c.beta,
                rho_w: c.rho_w,
                rho_r: c.rho_r,
                blocks: c.blocks,
                strategy: self.strategy.to_string(),
                metric: metric.to_string(),
                mean: s.mean,
                stderr: s.stderr,
                trials: s.trials,
            };
            match &cell.outcome {
                CellOutcome::Feasible { .. } => {
                    rows.extend(cell.summaries(self.kind).into_iter().map(|(m, s)| row(m, s)));
                }
                CellOutcome::Infeasible { .. } => rows.push(row("infeasible", Summary::of([]))),
            }
        }
        rows
    }

    pub fn infeasible_cells(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c.outcome, CellOutcome::Infeasible { .. }))
            .count()
    }
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}
