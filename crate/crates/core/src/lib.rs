//! Rate-distortion-perception tradeoff for binary mixed sources.
//!
//! - [`sources`]: Bernoulli mixtures, exact type-class probabilities, sampling.
//! - [`spectra`]: binary entropy, exact and asymptotic information spectra.
//! - [`tradeoff`]: closed-form `R(D, S)` evaluators and their discrepancy.
//! - [`codec`]: the two-stage lossless/lossy block code and its metrics.
//! - [`oracle`]: exhaustive `(D, σ)` frontiers at tiny block lengths.
//!
//! All logarithms are base 2 and distortion is per-symbol Hamming.

pub mod block;
pub mod codec;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod ranking;
pub mod rng;
pub mod sources;
pub mod spectra;
pub mod tradeoff;

pub use block::{Block, MAX_DENSE_LEN};
pub use codec::{
    build_codec, epsilon_exact, evaluate, sigma_exact, CodecMetrics, EvalOptions, LossyMethod,
    Measured, TwoStageCodec,
};
pub use error::{Error, Result};
pub use oracle::{enumerate_frontier, min_sigma_closed_form, Frontier, FrontierPoint, SearchMode};
pub use sources::{
    block_log_prob, build_type_table, sample_block, top_mass, Budget, Component, SourceModel,
    TypeClassTable,
};
pub use spectra::{
    asymptotic_spectral_cdf, binary_entropy, binary_entropy_inv, plimsup_estimate,
    spectral_cdf_exact, ExceedanceCurve, StepFunction,
};
pub use tradeoff::{
    discrepancy_report, perception_term, rd_term, rdp_paper_example, rdp_theorem, Discrepancy,
    RdpBreakdown, TradeoffPoint,
};
