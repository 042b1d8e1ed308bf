//! Index partition of a secure polar code with multi-block chaining.
//!
//! The writing-equivalent block is polarized with `ρ_w` and the
//! reading-equivalent block with `1 − ρ_r`. Thresholding both at `δ_N`
//! gives the good/bad sets from which the five classes are formed:
//!
//! | class      | writing profile | reading profile |
//! |------------|-----------------|-----------------|
//! | info / E   | `≤ δ`           | `≥ 1 − δ`       |
//! | random     | `≤ δ`           | not `≥ 1 − δ`   |
//! | frozen     | not `≤ δ`       | `≥ 1 − δ`       |
//! | chain sink | not `≤ δ`       | not `≥ 1 − δ`   |

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::logprob::LogProb;
use crate::polar::{bec_profile, delta_threshold, PolarError, PolarizationProfile, MAX_STAGES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("invalid code configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "infeasible construction: only {info} good-and-secure indices for {sink} chain-sink indices; \
         increase N or relax beta"
    )]
    Infeasible { info: usize, sink: usize },
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// Parameters of one code: `N = 2^stages`, threshold exponent, adversary
/// fractions and the number of chained blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodeConfig {
    pub stages: u32,
    pub beta: f64,
    pub rho_w: f64,
    pub rho_r: f64,
    pub blocks: usize,
}

impl CodeConfig {
    pub fn new(stages: u32, beta: f64, rho_w: f64, rho_r: f64, blocks: usize) -> Result<Self, ConstructError> {
        let config = CodeConfig {
            stages,
            beta,
            rho_w,
            rho_r,
            blocks,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConstructError> {
        let bad = |msg: String| Err(ConstructError::InvalidConfig(msg));
        if self.stages > MAX_STAGES {
            return bad(format!("n = {} exceeds {MAX_STAGES}", self.stages));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return bad(format!("beta = {} must lie in (0, 0.5)", self.beta));
        }
        if !(self.rho_w >= 0.0 && self.rho_r >= 0.0) {
            return bad(format!("fractions must be non-negative (rho_w = {}, rho_r = {})", self.rho_w, self.rho_r));
        }
        if self.rho_w + self.rho_r >= 1.0 {
            return bad(format!("rho_w + rho_r = {} must be below 1", self.rho_w + self.rho_r));
        }
        if self.blocks == 0 {
            return bad("block count T must be at least 1".to_string());
        }
        Ok(())
    }

    pub fn block_len(&self) -> usize {
        1 << self.stages
    }

    /// `C_s = 1 − ρ_w − ρ_r`.
    pub fn secrecy_capacity(&self) -> f64 {
        1.0 - self.rho_w - self.rho_r
    }
}

/// Role of a synthesized-channel index within a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexClass {
    /// Message bits (`I ∖ E`).
    Info,
    /// Fresh random bits handed to the next block's chain sink (`E`).
    ChainSource,
    /// Fresh random bits (`R`).
    Random,
    /// Publicly known bits (`F`), always zero here.
    Frozen,
    /// Bits received from the previous block or pre-shared (`B`).
    ChainSink,
}

impl IndexClass {
    pub fn label(self) -> &'static str {
        match self {
            IndexClass::Info => "INFO",
            IndexClass::ChainSource => "CHAIN_E",
            IndexClass::Random => "RANDOM",
            IndexClass::Frozen => "FROZEN",
            IndexClass::ChainSink => "CHAIN_B",
        }
    }

    /// Indices decided from the channel by an SC decoder.
    pub fn is_channel_decision(self) -> bool {
        matches!(self, IndexClass::Info | IndexClass::ChainSource | IndexClass::Random)
    }
}

impl fmt::Display for IndexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IndexClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "INFO" => IndexClass::Info,
            "CHAIN_E" => IndexClass::ChainSource,
            "RANDOM" => IndexClass::Random,
            "FROZEN" => IndexClass::Frozen,
            "CHAIN_B" => IndexClass::ChainSink,
            other => return Err(format!("unknown index class {other:?}")),
        })
    }
}

/// The five disjoint index classes covering `0..N`. All lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPartition {
    classes: Vec<IndexClass>,
    info: Vec<usize>,
    chain_source: Vec<usize>,
    random: Vec<usize>,
    frozen: Vec<usize>,
    chain_sink: Vec<usize>,
}

impl IndexPartition {
    /// Builds a partition from a per-index class vector.
    ///
    /// Fails if the length is not a power of two or `|E| ≠ |B|`.
    pub fn from_classes(classes: Vec<IndexClass>) -> Result<Self, ConstructError> {
        if classes.is_empty() || !classes.len().is_power_of_two() {
            return Err(PolarError::NotPowerOfTwo(classes.len()).into());
        }
        let collect = |c: IndexClass| -> Vec<usize> {
            classes
                .iter()
                .enumerate()
                .filter_map(|(i, &k)| (k == c).then_some(i))
                .collect()
        };
        let partition = IndexPartition {
            info: collect(IndexClass::Info),
            chain_source: collect(IndexClass::ChainSource),
            random: collect(IndexClass::Random),
            frozen: collect(IndexClass::Frozen),
            chain_sink: collect(IndexClass::ChainSink),
            classes,
        };
        if partition.chain_source.len() != partition.chain_sink.len() {
            return Err(ConstructError::InvalidConfig(format!(
                "|E| = {} differs from |B| = {}",
                partition.chain_source.len(),
                partition.chain_sink.len()
            )));
        }
        Ok(partition)
    }

    pub fn block_len(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[IndexClass] {
        &self.classes
    }

    pub fn class_of(&self, index: usize) -> IndexClass {
        self.classes[index]
    }

    /// `I ∖ E`, the message positions.
    pub fn info(&self) -> &[usize] {
        &self.info
    }

    /// `E`.
    pub fn chain_source(&self) -> &[usize] {
        &self.chain_source
    }

    /// `R`.
    pub fn random(&self) -> &[usize] {
        &self.random
    }

    /// `F`.
    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    /// `B`.
    pub fn chain_sink(&self) -> &[usize] {
        &self.chain_sink
    }

    /// The full good-and-secure set `I = (I ∖ E) ∪ E`, sorted.
    pub fn good_secure(&self) -> Vec<usize> {
        self.indices_where(|c| matches!(c, IndexClass::Info | IndexClass::ChainSource))
    }

    pub fn indices_where(&self, pred: impl Fn(IndexClass) -> bool) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| pred(c).then_some(i))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "class"])?;
        for (i, c) in self.classes.iter().enumerate() {
            w.write_record([i.to_string().as_str(), c.label()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self, ConstructError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut classes = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record.map_err(|e| ConstructError::InvalidConfig(e.to_string()))?;
            let index: usize = record
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ConstructError::InvalidConfig(format!("row {row}: bad index")))?;
            if index != row {
                return Err(ConstructError::InvalidConfig(format!("row {row}: index {index} out of order")));
            }
            let class = record
                .get(1)
                .ok_or_else(|| ConstructError::InvalidConfig(format!("row {row}: missing class")))?
                .parse()
                .map_err(ConstructError::InvalidConfig)?;
            classes.push(class);
        }
        Self::from_classes(classes)
    }
}

/// `(H, L)`: indices whose erasure probability is at least `1 − δ` and at
/// most `δ` respectively. Both comparisons run in the log domain.
pub fn polarized_sets(profile: &PolarizationProfile, delta: LogProb) -> (Vec<usize>, Vec<usize>) {
    let log_delta = delta.log_eps();
    let mut high = Vec::new();
    let mut low = Vec::new();
    for (i, p) in profile.values().iter().enumerate() {
        if p.log_one_minus_eps() <= log_delta {
            high.push(i);
        }
        if p.log_eps() <= log_delta {
            low.push(i);
        }
    }
    (high, low)
}

/// Builds the index partition for `config`.
///
/// `E` takes the `|B|` entries of `I` that are most reliable for Bob under
/// the writing profile, ties broken by ascending index.
pub fn build_partition(config: &CodeConfig) -> Result<IndexPartition, ConstructError> {
    config.validate()?;
    let len = config.block_len();
    let delta = delta_threshold(len, config.beta)?;
    let writing = bec_profile(config.rho_w, config.stages)?;
    let reading = bec_profile(1.0 - config.rho_r, config.stages)?;

    let (_, low_w) = polarized_sets(&writing, delta);
    let (high_r, _) = polarized_sets(&reading, delta);
    let mut in_low_w = vec![false; len];
    low_w.iter().for_each(|&i| in_low_w[i] = true);
    let mut in_high_r = vec![false; len];
    high_r.iter().for_each(|&i| in_high_r[i] = true);

    let mut classes: Vec<IndexClass> = (0..len)
        .map(|i| match (in_low_w[i], in_high_r[i]) {
            (true, true) => IndexClass::Info,
            (true, false) => IndexClass::Random,
            (false, true) => IndexClass::Frozen,
            (false, false) => IndexClass::ChainSink,
        })
        .collect();

    let sink = classes.iter().filter(|&&c| c == IndexClass::ChainSink).count();
    let mut good: Vec<usize> = (0..len).filter(|&i| classes[i] == IndexClass::Info).collect();
    if good.len() < sink {
        return Err(ConstructError::Infeasible {
            info: good.len(),
            sink,
        });
    }
    good.sort_by(|&a, &b| match writing.get(a).cmp_prob(writing.get(b)) {
        Ordering::Equal => a.cmp(&b),
        other => other,
    });
    for &i in &good[..sink] {
        classes[i] = IndexClass::ChainSource;
    }
    IndexPartition::from_classes(classes)
}

/// Secrecy rate of a partition against the capacity of its configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub block_len: usize,
    pub secrecy_rate: f64,
    pub capacity: f64,
    pub gap: f64,
    pub info: usize,
    pub chain_source: usize,
    pub random: usize,
    pub frozen: usize,
    pub chain_sink: usize,
}

pub fn rate_report(partition: &IndexPartition, config: &CodeConfig) -> RateReport {
    let block_len = partition.block_len();
    let secrecy_rate = partition.info().len() as f64 / block_len as f64;
    let capacity = config.secrecy_capacity();
    RateReport {
        block_len,
        secrecy_rate,
        capacity,
        gap: capacity - secrecy_rate,
        info: partition.info().len(),
        chain_source: partition.chain_source().len(),
        random: partition.random().len(),
        frozen: partition.frozen().len(),
        chain_sink: partition.chain_sink().len(),
    }
}

impl RateReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "N",
            "secrecy_rate",
            "capacity",
            "gap",
            "info",
            "chain_e",
            "random",
            "frozen",
            "chain_b",
        ])?;
        w.write_record([
            self.block_len.to_string(),
            self.secrecy_rate.to_string(),
            self.capacity.to_string(),
            self.gap.to_string(),
            self.info.to_string(),
            self.chain_source.to_string(),
            self.random.to_string(),
            self.frozen.to_string(),
            self.chain_sink.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for RateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N                = {}", self.block_len)?;
        writeln!(f, "secrecy rate R_s = {:.6}", self.secrecy_rate)?;
        writeln!(f, "capacity C_s     = {:.6}", self.capacity)?;
        writeln!(f, "gap C_s - R_s    = {:.6}", self.gap)?;
        write!(
            f,
            "|I\\E| = {}  |E| = {}  |R| = {}  |F| = {}  |B| = {}",
            self.info, self.chain_source, self.random, self.frozen, self.chain_sink
        )
    }
}
