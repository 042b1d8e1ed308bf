//! Polarization of erasure channel blocks.
//!
//! Index convention, shared with [`crate::codec`]: at stage `q` (`Q = 2^q`)
//! every aligned block of `2Q` entries pairs position `j` of its first half
//! with position `j` of its second half, and writes the `(minus, plus)`
//! outputs to positions `(2j, 2j + 1)` of the block. Stage 0 therefore
//! combines adjacent physical channels, and after `n` stages entry `i` is
//! the synthesized channel that the SC decoder resolves as its `i`-th
//! decision.

use std::io::Write;

use thiserror::Error;

use crate::logprob::LogProb;

/// Largest supported stage count (`N = 2^30`).
pub const MAX_STAGES: u32 = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    #[error("erasure probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("stage count {0} exceeds the supported maximum of {MAX_STAGES}")]
    TooManyStages(u32),
    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("threshold exponent beta = {0} must lie in (0, 0.5)")]
    InvalidBeta(f64),
}

/// One Arikan kernel step on a pair of erasure channels.
///
/// Returns `(minus, plus)` with `minus = ε1 + ε2 − ε1ε2` and `plus = ε1ε2`.
/// Each output is formed on the leg where it is a plain sum of logs, so
/// neither tail loses precision, and `{0, 1}` inputs map exactly to
/// `(OR, AND)`.
pub fn kernel(e1: LogProb, e2: LogProb) -> (LogProb, LogProb) {
    let plus_log_eps = e1.log_eps() + e2.log_eps();
    let minus_log_one_minus = e1.log_one_minus_eps() + e2.log_one_minus_eps();
    let minus = LogProb::from_log_one_minus_eps(minus_log_one_minus)
        .expect("sum of non-positive logs is non-positive");
    let plus = LogProb::from_log_eps(plus_log_eps).expect("sum of non-positive logs is non-positive");
    (minus, plus)
}

/// Per-index erasure probabilities of the synthesized channels of a block.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationProfile {
    stages: u32,
    rho: f64,
    values: Vec<LogProb>,
}

impl PolarizationProfile {
    pub fn stages(&self) -> u32 {
        self.stages
    }

    pub fn block_len(&self) -> usize {
        self.values.len()
    }

    /// The initializing erasure probability.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn values(&self) -> &[LogProb] {
        &self.values
    }

    pub fn get(&self, index: usize) -> LogProb {
        self.values[index]
    }

    /// Linear-domain values (small entries underflow to zero).
    pub fn linear(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.prob()).collect()
    }

    /// Arithmetic mean of the linear-domain erasure probabilities.
    pub fn mean(&self) -> f64 {
        self.values.iter().map(|v| v.prob()).sum::<f64>() / self.values.len() as f64
    }

    /// Writes `index,log2_eps,log2_one_minus_eps`, one row per index.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "log2_eps", "log2_one_minus_eps"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([
                i.to_string(),
                csv_number(v.log2_eps()),
                csv_number(v.log2_one_minus_eps()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-tripping text, switching to exponent form for very
/// small or large magnitudes; `-0` prints as `0`.
fn csv_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Polarization profile of `2^stages` copies of a BEC with erasure
/// probability `rho`.
///
/// Built with the stationary doubling recursion: entry `i` of stage `s`
/// spawns entries `2i` (minus) and `2i + 1` (plus) of stage `s + 1`. This
/// coincides with [`polarize`] applied to a constant block.
pub fn bec_profile(rho: f64, stages: u32) -> Result<PolarizationProfile, PolarError> {
    if stages > MAX_STAGES {
        return Err(PolarError::TooManyStages(stages));
    }
    let start = LogProb::from_prob(rho).ok_or(PolarError::InvalidProbability(rho))?;
    let mut values = Vec::with_capacity(1 << stages);
    values.push(start);
    for _ in 0..stages {
        let mut next = Vec::with_capacity(values.len() * 2);
        for &v in &values {
            let (minus, plus) = kernel(v, v);
            next.push(minus);
            next.push(plus);
        }
        values = next;
    }
    Ok(PolarizationProfile {
        stages,
        rho,
        values,
    })
}

fn stage_count(len: usize) -> Result<u32, PolarError> {
    if len == 0 || !len.is_power_of_two() {
        return Err(PolarError::NotPowerOfTwo(len));
    }
    let stages = len.trailing_zeros();
    if stages > MAX_STAGES {
        return Err(PolarError::TooManyStages(stages));
    }
    Ok(stages)
}

/// Runs every butterfly stage over `values` with the module's index
/// convention, combining each pair with `combine` into `(minus, plus)`.
fn butterfly<T: Copy>(mut values: Vec<T>, combine: impl Fn(T, T) -> (T, T)) -> Vec<T> {
    let len = values.len();
    let mut scratch = values.clone();
    let mut half = 1;
    while half < len {
        for (src, dst) in values.chunks_exact(2 * half).zip(scratch.chunks_exact_mut(2 * half)) {
            let (top, bottom) = src.split_at(half);
            for (j, (&a, &b)) in top.iter().zip(bottom).enumerate() {
                let (minus, plus) = combine(a, b);
                dst[2 * j] = minus;
                dst[2 * j + 1] = plus;
            }
        }
        std::mem::swap(&mut values, &mut scratch);
        half *= 2;
    }
    values
}

/// Non-stationary polarization of an arbitrary block of erasure channels.
pub fn polarize(initial: &[LogProb]) -> Result<Vec<LogProb>, PolarError> {
    stage_count(initial.len())?;
    Ok(butterfly(initial.to_vec(), kernel))
}

/// One adversary outcome over a block: `true` marks a full-noise position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealizationMask {
    bits: Vec<bool>,
}

impl RealizationMask {
    pub fn new(bits: Vec<bool>) -> Result<Self, PolarError> {
        stage_count(bits.len())?;
        Ok(RealizationMask { bits })
    }

    /// Mask of length `block_len` that is `true` exactly on `indices`.
    pub fn from_indices(block_len: usize, indices: &[usize]) -> Result<Self, PolarError> {
        let mut bits = vec![false; block_len];
        for &i in indices {
            bits[i] = true;
        }
        Self::new(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Exact Bhattacharyya parameters (each 0 or 1) of the synthesized
/// channels for one realization: the kernel restricted to `{0, 1}` is
/// `(OR, AND)`.
pub fn realize_profile(mask: &RealizationMask) -> Vec<bool> {
    butterfly(mask.bits.clone(), |a, b| (a | b, a & b))
}

/// The polarization threshold `δ_N = 2^(−N^β)`, kept in the log domain.
pub fn delta_threshold(block_len: usize, beta: f64) -> Result<LogProb, PolarError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(PolarError::InvalidBeta(beta));
    }
    stage_count(block_len)?;
    let log_delta = -(block_len as f64).powf(beta) * std::f64::consts::LN_2;
    Ok(LogProb::from_log_eps(log_delta).expect("negative log"))
}
