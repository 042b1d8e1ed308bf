//! Secure polar coding for the adversarial wiretap channel.
//!
//! An adversary erases a fraction `rho_w` of each transmitted block and
//! reads a fraction `rho_r`. The code construction polarizes the two
//! worst-case erasure profiles, splits indices into information, chaining,
//! random and frozen sets, and chains blocks so that the overall secrecy
//! rate approaches `1 - rho_w - rho_r`.

pub mod adversary;
pub mod codec;
pub mod construct;
pub mod experiments;
pub mod logprob;
pub mod polar;

pub use adversary::{apply_read, apply_write, sample_action, AdversaryAction, AdversaryError, Strategy};
pub use codec::{
    bit_reverse, decode_session, decode_session_with, encode_block, encode_session, polar_transform,
    sc_decode_block, sc_decode_block_with, BlockDecode, ChainState, CodecError, CoinFlip, EncodedBlock,
    ErasureResolver, MessageBlock, ObservationSymbol, ResolveZero, SessionDecode, UVector,
};
pub use construct::{
    build_partition, polarized_sets, rate_report, CodeConfig, ConstructError, IndexClass, IndexPartition, RateReport,
};
pub use experiments::{
    run_sweep, CellOutcome, CellResult, ExperimentError, Summary, SweepGrid, SweepResult, SweepSpec, TrialKind,
    TrialResult,
};
pub use logprob::LogProb;
pub use polar::{
    bec_profile, delta_threshold, kernel, polarize, realize_profile, PolarError, PolarizationProfile,
    RealizationMask,
};
