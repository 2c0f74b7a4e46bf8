//! Independent reference machinery: closed-form bounds, brute-force decoding,
//! the conditional law of the unexplained sums and test statistics.

pub mod bounds;
pub mod exhaustive;
pub mod exponents;
pub mod ks;
pub mod montecarlo;
pub mod tails;
pub mod unexplained;

pub use bounds::{bounds, BoundsReport};
pub use exhaustive::{exhaustive_decode, ENUMERATION_CAP};
pub use exponents::{error_exponents, ErrorExponents};
pub use ks::{ks_two_sample, KsResult};
pub use montecarlo::{mean_variance, write_summaries, McSummary};
pub use unexplained::{
    conditional_moments, idealized_mean, idealized_score, idealized_scores, multinomial_counts, open_source_count,
    sample_unexplained, truth_prefix, ConditionalMoments, SamplerMode, SourceBlock,
    UnexplainedSampler,
};
