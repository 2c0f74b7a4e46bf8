//! Spatially coupled pooling designs and a threshold decoder for the pooled
//! data problem, together with reference oracles and diagnostics.

pub mod decoder;
pub mod design;
pub mod diagnostics;
pub mod error;
pub mod oracle;
pub mod rng;
pub mod signal;
pub mod simulation;

pub use decoder::{decode, DecodeReport, Decoded, Decoder, ScoreModel, Thresholds};
pub use design::{
    build_design, derive_params, DerivedParams, DesignFile, DesignParams, Overrides, PoolingDesign,
    Rate,
};
pub use error::{Error, Result};
pub use signal::{measure, sample_signal, MeasurementVector, Signal};
