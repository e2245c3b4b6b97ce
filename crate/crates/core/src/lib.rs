//! Channel decoding as reverse diffusion.
//!
//! The AWGN channel is treated as the forward process of a variational
//! diffusion model over log-likelihood ratios. A small neural block built on
//! the Tanner graph predicts the transmitted codeword, and a sequence of
//! deterministic reverse steps walks the observation toward cleaner CSNR
//! levels until the syndrome vanishes. Belief propagation is provided as the
//! baseline.

pub mod bench;
pub mod bp;
pub mod channel;
pub mod cli;
pub mod codebook;
pub mod decoder;
pub mod diffusion;
mod error;
pub mod reference;
pub mod train;
pub mod vcdc;

pub use bp::{decode_bp, BpConfig, BpDecoder, BpVariant};
pub use channel::{noise_scale, ChannelParams, LlrWord};
pub use codebook::{GeneratorMatrix, ParityCheckMatrix, Syndrome};
pub use decoder::{DecodeResult, Decoder, HardDecisionDecoder};
pub use diffusion::DiffusionSchedule;
pub use error::{Error, Result};
pub use train::{train, TrainConfig, TrainOutcome};
pub use vcdc::{decode_vcdc, NeuralBlockWeights, VcdcDecoder};
