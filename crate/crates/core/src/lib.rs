//! Syndrome-trellis coding and joint multi-trace decoding for channels with
//! insertion, deletion, and substitution errors.
//!
//! The crate provides:
//!
//! - terminated convolutional codes described by polynomial parity-check
//!   matrices, their syndrome trellis, encoding, and per-level bit priors
//!   ([`code`]);
//! - an insertion/deletion/substitution channel simulator with reproducible
//!   sub-seeded randomness ([`channel`], [`seeds`]);
//! - drift windows, branch probabilities, and prefix/suffix receive
//!   lattices ([`lattice`]);
//! - the node metric over the joint channel-and-code tree ([`metric`]);
//! - unidirectional and bidirectional bounded-stack decoders ([`stack`]);
//! - a separate-BCJR baseline over the trellis-times-drift state space
//!   ([`bcjr`]);
//! - a Monte Carlo experiment harness with CSV/JSON output ([`harness`]).
//!
//! Probability arithmetic is generic over the scalar type through
//! [`real::Real`]; the aliases below fix `f64`, which is what the harness
//! and the bundled experiments use.

pub mod bcjr;
pub mod bits;
pub mod channel;
pub mod code;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod metric;
pub mod oracle;
pub mod real;
pub mod seeds;
pub mod stack;

pub use error::{Error, Result};

/// Channel parameters at the default `f64` scalar.
pub type Spec = channel::ChannelSpec<f64>;
/// Per-trace lattices at the default `f64` scalar.
pub type Lattices = lattice::TraceLattices<f64>;
/// Branch constants at the default `f64` scalar.
pub type Consts = lattice::BranchConsts<f64>;
/// Decoder context at the default `f64` scalar.
pub type Context<'a> = metric::DecodeContext<'a, f64>;
/// Search node at the default `f64` scalar.
pub type Node = metric::SearchNode<f64>;
