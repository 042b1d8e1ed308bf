//! Adversarial reading and writing on a transmitted block.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::codec::ObservationSymbol;
use crate::polar::RealizationMask;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("invalid adversary fractions rho_w = {rho_w}, rho_r = {rho_r}: need both >= 0 and rho_w + rho_r < 1")]
    InvalidFractions { rho_w: f64, rho_r: f64 },
    #[error("unknown strategy {0:?}; expected uniform, bernoulli or prefix")]
    UnknownStrategy(String),
    #[error("index {index} outside block of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// How the adversary picks its index sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// A uniformly random subset of size `⌊ρN⌋`.
    #[default]
    Uniform,
    /// Each index independently with probability `ρ`.
    Bernoulli,
    /// The first `⌊ρN⌋` indices.
    Prefix,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Bernoulli => "bernoulli",
            Strategy::Prefix => "prefix",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Strategy::Uniform),
            "bernoulli" => Ok(Strategy::Bernoulli),
            "prefix" => Ok(Strategy::Prefix),
            _ => Err(AdversaryError::UnknownStrategy(s.to_string())),
        }
    }
}

/// Set size for a fraction `rho` of `len` positions, rounded down.
pub fn set_size(len: usize, rho: f64) -> usize {
    ((rho * len as f64).floor() as usize).min(len)
}

/// One adversary action: positions overwritten with `?` and positions read.
/// Both lists are sorted; they may overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryAction {
    pub block_len: usize,
    pub write_set: Vec<usize>,
    pub read_set: Vec<usize>,
}

impl AdversaryAction {
    pub fn new(block_len: usize, mut write_set: Vec<usize>, mut read_set: Vec<usize>) -> Result<Self, AdversaryError> {
        for &index in write_set.iter().chain(&read_set) {
            if index >= block_len {
                return Err(AdversaryError::IndexOutOfRange { index, len: block_len });
            }
        }
        write_set.sort_unstable();
        write_set.dedup();
        read_set.sort_unstable();
        read_set.dedup();
        Ok(AdversaryAction {
            block_len,
            write_set,
            read_set,
        })
    }

    /// Legitimate receiver's equivalent block: full noise on `S_w`.
    pub fn write_mask(&self) -> RealizationMask {
        RealizationMask::from_indices(self.block_len, &self.write_set).expect("power-of-two block")
    }

    /// Eavesdropper's equivalent block: full noise on the complement of `S_r`.
    pub fn read_mask(&self) -> RealizationMask {
        let mut bits = vec![true; self.block_len];
        for &i in &self.read_set {
            bits[i] = false;
        }
        RealizationMask::new(bits).expect("power-of-two block")
    }
}

pub fn validate_fractions(rho_w: f64, rho_r: f64) -> Result<(), AdversaryError> {
    if rho_w >= 0.0 && rho_r >= 0.0 && rho_w + rho_r < 1.0 {
        Ok(())
    } else {
        Err(AdversaryError::InvalidFractions { rho_w, rho_r })
    }
}

fn sample_set<R: Rng + ?Sized>(len: usize, rho: f64, strategy: Strategy, rng: &mut R) -> Vec<usize> {
    match strategy {
        Strategy::Uniform => {
            let mut all: Vec<usize> = (0..len).collect();
            let (chosen, _) = all.partial_shuffle(rng, set_size(len, rho));
            let mut chosen = chosen.to_vec();
            chosen.sort_unstable();
            chosen
        }
        Strategy::Bernoulli => (0..len).filter(|_| rng.random_bool(rho)).collect(),
        Strategy::Prefix => (0..set_size(len, rho)).collect(),
    }
}

/// Draws the write set and then, independently, the read set.
pub fn sample_action<R: Rng + ?Sized>(
    block_len: usize,
    rho_w: f64,
    rho_r: f64,
    strategy: Strategy,
    rng: &mut R,
) -> Result<AdversaryAction, AdversaryError> {
    validate_fractions(rho_w, rho_r)?;
    let write_set = sample_set(block_len, rho_w, strategy, rng);
    let read_set = sample_set(block_len, rho_r, strategy, rng);
    Ok(AdversaryAction {
        block_len,
        write_set,
        read_set,
    })
}

/// What the legitimate receiver sees: `?` on `S_w`, the codeword elsewhere.
pub fn apply_write(x: &[bool], write_set: &[usize]) -> Vec<ObservationSymbol> {
    let mut y: Vec<_> = x.iter().map(|&b| ObservationSymbol::from_bit(b)).collect();
    for &i in write_set {
        y[i] = ObservationSymbol::Erased;
    }
    y
}

/// What the eavesdropper sees: the codeword on `S_r`, `?` elsewhere.
pub fn apply_read(x: &[bool], read_set: &[usize]) -> Vec<ObservationSymbol> {
    let mut z = vec![ObservationSymbol::Erased; x.len()];
    for &i in read_set {
        z[i] = ObservationSymbol::from_bit(x[i]);
    }
    z
}
