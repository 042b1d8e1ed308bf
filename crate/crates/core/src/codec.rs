//! Multi-block chaining encoder and erasure successive-cancellation decoder.
//!
//! `x = u · G_N` with `G_N = R · F^{⊗n}` (`R` the bit-reversal permutation).
//! Since `R` commutes with `F^{⊗n}`, the transform is a plain butterfly
//! followed by a bit-reversal of the output, and the decoder undoes the
//! permutation on the observations before running SC on `F^{⊗n}`. Under
//! that schedule the first split of the decoder combines adjacent
//! physical positions, matching stage 0 of [`crate::polar::realize_profile`].

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::construct::{IndexClass, IndexPartition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid observation symbol {0:?}; expected '0', '1' or '?'")]
    InvalidSymbol(char),
    #[error("contradictory known messages at u index {index} with exact side information")]
    InternalInconsistency { index: usize },
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), CodecError> {
    if expected == got {
        Ok(())
    } else {
        Err(CodecError::LengthMismatch { what, expected, got })
    }
}

/// A received symbol over `{0, 1, ?}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObservationSymbol {
    Zero,
    One,
    Erased,
}

impl ObservationSymbol {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            ObservationSymbol::One
        } else {
            ObservationSymbol::Zero
        }
    }

    pub fn known(self) -> Option<bool> {
        match self {
            ObservationSymbol::Zero => Some(false),
            ObservationSymbol::One => Some(true),
            ObservationSymbol::Erased => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            ObservationSymbol::Zero => '0',
            ObservationSymbol::One => '1',
            ObservationSymbol::Erased => '?',
        }
    }

    pub fn from_char(c: char) -> Result<Self, CodecError> {
        match c {
            '0' => Ok(ObservationSymbol::Zero),
            '1' => Ok(ObservationSymbol::One),
            '?' => Ok(ObservationSymbol::Erased),
            other => Err(CodecError::InvalidSymbol(other)),
        }
    }
}

impl fmt::Display for ObservationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Parses an ASCII string over `{0, 1, ?}`.
pub fn parse_observations(s: &str) -> Result<Vec<ObservationSymbol>, CodecError> {
    s.chars().map(ObservationSymbol::from_char).collect()
}

pub fn format_observations(y: &[ObservationSymbol]) -> String {
    y.iter().map(|s| s.to_char()).collect()
}

/// Parses an ASCII bit string over `{0, 1}`.
pub fn parse_bits(s: &str) -> Result<Vec<bool>, CodecError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CodecError::InvalidSymbol(other)),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// The confidential bits of one block, in ascending `I ∖ E` index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageBlock {
    pub bits: Vec<bool>,
}

impl MessageBlock {
    pub fn new(bits: Vec<bool>) -> Self {
        MessageBlock { bits }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        MessageBlock {
            bits: (0..len).map(|_| rng.random()).collect(),
        }
    }
}

/// The pre-transform vector `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UVector {
    pub bits: Vec<bool>,
}

impl UVector {
    /// Collects `u` on the given indices.
    pub fn gather(&self, indices: &[usize]) -> Vec<bool> {
        indices.iter().map(|&i| self.bits[i]).collect()
    }
}

/// Bits carried into a block's chain-sink positions, `i`-th bit to the
/// `i`-th smallest index of `B`.
///
/// `exact` records whether the bits are known to equal what the encoder
/// used; decoders clear it once a guess could have crept in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainState {
    bits: Vec<bool>,
    exact: bool,
}

impl ChainState {
    /// Bits shared ahead of time between encoder and legitimate decoder.
    pub fn preshared(bits: Vec<bool>) -> Self {
        ChainState { bits, exact: true }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::preshared((0..len).map(|_| rng.random()).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }
}

fn stage_count(len: usize) -> Result<u32, CodecError> {
    if len == 0 || !len.is_power_of_two() {
        return Err(CodecError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// Reverses the low `stages` bits of `i`.
pub fn bit_reverse(i: usize, stages: u32) -> usize {
    if stages == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - stages)
    }
}

/// `x = u · G_N` over GF(2) in `O(N log N)`.
pub fn polar_transform(u: &[bool]) -> Result<Vec<bool>, CodecError> {
    let stages = stage_count(u.len())?;
    let mut v = u.to_vec();
    let mut half = 1;
    while half < v.len() {
        for block in v.chunks_exact_mut(2 * half) {
            let (top, bottom) = block.split_at_mut(half);
            for (a, &b) in top.iter_mut().zip(bottom.iter()) {
                *a ^= b;
            }
        }
        half *= 2;
    }
    Ok((0..v.len()).map(|j| v[bit_reverse(j, stages)]).collect())
}

/// Output of [`encode_block`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    pub u: UVector,
    pub codeword: Vec<bool>,
    /// This block's `E` bits, to be placed on the next block's `B`.
    pub next_chain: ChainState,
}

/// Encodes one block: message on `I ∖ E`, fresh randomness on `E ∪ R`
/// (drawn in ascending index order), zeros on `F`, and the chain bits on
/// `B`.
pub fn encode_block<R: Rng + ?Sized>(
    msg: &MessageBlock,
    partition: &IndexPartition,
    chain: &ChainState,
    rng: &mut R,
) -> Result<EncodedBlock, CodecError> {
    check_len("message", partition.info().len(), msg.bits.len())?;
    check_len("chain state", partition.chain_sink().len(), chain.bits.len())?;
    let len = partition.block_len();
    let mut u = vec![false; len];
    for (&i, &b) in partition.info().iter().zip(&msg.bits) {
        u[i] = b;
    }
    for (&i, &b) in partition.chain_sink().iter().zip(&chain.bits) {
        u[i] = b;
    }
    for (i, class) in partition.classes().iter().enumerate() {
        if matches!(class, IndexClass::ChainSource | IndexClass::Random) {
            u[i] = rng.random();
        }
    }
    let codeword = polar_transform(&u)?;
    let u = UVector { bits: u };
    let next_chain = ChainState::preshared(u.gather(partition.chain_source()));
    Ok(EncodedBlock { u, codeword, next_chain })
}

/// Encodes `T` message blocks, threading each block's `E` bits into the
/// next block's `B`.
pub fn encode_session<R: Rng + ?Sized>(
    messages: &[MessageBlock],
    partition: &IndexPartition,
    preshared: &ChainState,
    rng: &mut R,
) -> Result<Vec<EncodedBlock>, CodecError> {
    let mut chain = preshared.clone();
    let mut out = Vec::with_capacity(messages.len());
    for msg in messages {
        let block = encode_block(msg, partition, &chain, rng)?;
        chain = block.next_chain.clone();
        out.push(block);
    }
    Ok(out)
}

/// Chooses a value for a decision the observations leave undetermined.
pub trait ErasureResolver {
    fn resolve(&mut self, index: usize) -> bool;
}

/// Always decides 0; the legitimate receiver's rule.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResolveZero;

impl ErasureResolver for ResolveZero {
    fn resolve(&mut self, _index: usize) -> bool {
        false
    }
}

/// Fair coin flips from the wrapped generator.
#[derive(Debug)]
pub struct CoinFlip<R>(pub R);

impl<R: Rng> ErasureResolver for CoinFlip<R> {
    fn resolve(&mut self, _index: usize) -> bool {
        self.0.random()
    }
}

/// Output of the SC decoder for one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecode {
    pub u: UVector,
    /// Channel decisions (`I ∖ E`, `E`, `R`) that were erased and resolved.
    pub erased_decisions: usize,
    /// Their indices, ascending.
    pub guessed: Vec<usize>,
    /// Decoded `E` bits for the next block.
    pub next_chain: ChainState,
}

impl BlockDecode {
    pub fn message(&self, partition: &IndexPartition) -> MessageBlock {
        MessageBlock::new(self.u.gather(partition.info()))
    }
}

struct ScRun<'a, Z: ErasureResolver + ?Sized> {
    classes: &'a [IndexClass],
    sink_rank: Vec<usize>,
    chain: Option<&'a ChainState>,
    resolver: &'a mut Z,
    u: Vec<bool>,
    guessed: Vec<usize>,
    certain: bool,
}

impl<Z: ErasureResolver + ?Sized> ScRun<'_, Z> {
    fn decide(&mut self, index: usize, msg: Option<bool>) -> Result<bool, CodecError> {
        let side = match self.classes[index] {
            IndexClass::Frozen => Some((false, true)),
            IndexClass::ChainSink => self.chain.map(|c| (c.bits[self.sink_rank[index]], c.exact)),
            _ => None,
        };
        let bit = match (side, msg) {
            (Some((bit, exact)), known) => {
                if let Some(observed) = known {
                    if observed != bit && exact && self.certain {
                        return Err(CodecError::InternalInconsistency { index });
                    }
                }
                self.certain &= exact;
                bit
            }
            (None, Some(bit)) => bit,
            (None, None) => {
                self.certain = false;
                if self.classes[index].is_channel_decision() {
                    self.guessed.push(index);
                }
                self.resolver.resolve(index)
            }
        };
        self.u[index] = bit;
        Ok(bit)
    }

    /// Decodes the subtree over `msgs` whose first decision is `offset`;
    /// returns the subtree's re-encoded bits.
    fn node(&mut self, msgs: &[Option<bool>], offset: usize) -> Result<Vec<bool>, CodecError> {
        if msgs.len() == 1 {
            return Ok(vec![self.decide(offset, msgs[0])?]);
        }
        let half = msgs.len() / 2;
        let (top, bottom) = msgs.split_at(half);
        let upper: Vec<Option<bool>> = top
            .iter()
            .zip(bottom)
            .map(|(&a, &b)| Some(a? ^ b?))
            .collect();
        let left = self.node(&upper, offset)?;
        let mut lower = Vec::with_capacity(half);
        for (j, ((&a, &b), &s)) in top.iter().zip(bottom).zip(&left).enumerate() {
            let via_top = a.map(|a| a ^ s);
            let merged = match (via_top, b) {
                (Some(t), Some(b)) => {
                    if t != b && self.certain {
                        return Err(CodecError::InternalInconsistency { index: offset + half + j });
                    }
                    Some(b)
                }
                (_, Some(b)) => Some(b),
                (t, None) => t,
            };
            lower.push(merged);
        }
        let right = self.node(&lower, offset + half)?;
        let mut out: Vec<bool> = left.iter().zip(&right).map(|(&l, &r)| l ^ r).collect();
        out.extend_from_slice(&right);
        Ok(out)
    }
}

/// Legitimate-receiver SC decode: erased channel decisions resolve to 0.
pub fn sc_decode_block(
    y: &[ObservationSymbol],
    partition: &IndexPartition,
    chain: &ChainState,
) -> Result<BlockDecode, CodecError> {
    sc_decode_block_with(y, partition, Some(chain), &mut ResolveZero)
}

/// SC decode with three-valued messages.
///
/// Check nodes propagate `a ⊕ b` when both are known; variable nodes prefer
/// the lower branch, then the upper branch corrected by the partial sum.
/// `chain = None` marks the chain-sink bits as unknown, in which case they
/// are resolved like erasures but not counted as erased decisions.
pub fn sc_decode_block_with<Z: ErasureResolver + ?Sized>(
    y: &[ObservationSymbol],
    partition: &IndexPartition,
    chain: Option<&ChainState>,
    resolver: &mut Z,
) -> Result<BlockDecode, CodecError> {
    let len = partition.block_len();
    check_len("observation", len, y.len())?;
    if let Some(c) = chain {
        check_len("chain state", partition.chain_sink().len(), c.bits.len())?;
    }
    let stages = stage_count(len)?;
    let msgs: Vec<Option<bool>> = (0..len).map(|j| y[bit_reverse(j, stages)].known()).collect();
    let mut sink_rank = vec![usize::MAX; len];
    for (rank, &i) in partition.chain_sink().iter().enumerate() {
        sink_rank[i] = rank;
    }
    let mut run = ScRun {
        classes: partition.classes(),
        sink_rank,
        chain,
        resolver,
        u: vec![false; len],
        guessed: Vec::new(),
        certain: true,
    };
    run.node(&msgs, 0)?;
    let u = UVector { bits: run.u };
    let next_chain = ChainState {
        bits: u.gather(partition.chain_source()),
        exact: run.certain,
    };
    Ok(BlockDecode {
        erased_decisions: run.guessed.len(),
        guessed: run.guessed,
        u,
        next_chain,
    })
}

/// Decoded messages of a session plus per-block erased-decision counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionDecode {
    pub messages: Vec<MessageBlock>,
    pub erasure_counts: Vec<usize>,
    pub blocks: Vec<BlockDecode>,
}

/// Legitimate-receiver session decode starting from the pre-shared bits.
pub fn decode_session(
    observations: &[Vec<ObservationSymbol>],
    partition: &IndexPartition,
    preshared: &ChainState,
) -> Result<SessionDecode, CodecError> {
    decode_session_with(observations, partition, Some(preshared), &mut ResolveZero)
}

/// Decodes blocks in order, feeding each block's decoded `E` into the next
/// block's `B`. `preshared = None` leaves block 1's `B` unknown.
pub fn decode_session_with<Z: ErasureResolver + ?Sized>(
    observations: &[Vec<ObservationSymbol>],
    partition: &IndexPartition,
    preshared: Option<&ChainState>,
    resolver: &mut Z,
) -> Result<SessionDecode, CodecError> {
    let mut chain = preshared.cloned();
    let mut blocks = Vec::with_capacity(observations.len());
    for y in observations {
        let block = sc_decode_block_with(y, partition, chain.as_ref(), resolver)?;
        chain = Some(block.next_chain.clone());
        blocks.push(block);
    }
    Ok(SessionDecode {
        messages: blocks.iter().map(|b| b.message(partition)).collect(),
        erasure_counts: blocks.iter().map(|b| b.erased_decisions).collect(),
        blocks,
    })
}
