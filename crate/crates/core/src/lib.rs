//! Generalized LDPC codes with subcode constraint nodes.
//!
//! The crate builds quasi-cyclic GLDPC codes from exponent matrices, decodes
//! them with flooding or layered message passing over the BEC and BI-AWGN
//! channels, orders layered updates by subcode distance properties, and
//! checks first-iteration error predictions against exact enumeration.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod code;
pub mod config;
pub mod decoder;
pub mod gf2;
pub mod graph;
pub mod scalar;
pub mod schedule;
pub mod sim;
pub mod verify;

pub use channel::{ChannelModel, ReceivedWord, Symbol};
pub use code::{CodeSpec, LinearCode};
pub use decoder::{AwgnDecoder, BecDecoder, DecodeResult, GcRule, Schedule};
pub use gf2::{BitMatrix, BitVector};
pub use graph::{ExponentMatrix, GldpcCode};
pub use scalar::Scalar;

/// Exact rational used for f-metric and coefficient comparisons.
pub type Rational = num_rational::Ratio<i128>;

/// Double-precision LLR.
pub type Llr = f64;

pub type AwgnDecoderF64 = AwgnDecoder<f64>;
pub type AwgnDecoderF32 = AwgnDecoder<f32>;
pub type ReceivedWordF64 = ReceivedWord<f64>;
