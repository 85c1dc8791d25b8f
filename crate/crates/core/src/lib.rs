//! Random regular digraph adjacency matrices and the machinery for probing
//! their smallest singular value.
//!
//! The crate is organised bottom-up:
//!
//! - [`matrix`]: exact 0/1 matrices with all row and column sums equal to `d`,
//!   switching sets and switching weights.
//! - [`sampler`]: exhaustive enumeration at tiny sizes and an edge-switch
//!   Markov chain for approximately uniform draws.
//! - [`spectral`]: smallest singular values and vectors, restriction to the
//!   sum-zero hyperplane, distances to row spans.
//! - [`vectorclass`]: compressible / incompressible / almost-constant vectors.
//! - [`arithmetic`]: difference vectors, combinatorial LCD (CLCD) and its
//!   quantile variant, the fixed-weight slice walk and Lévy concentration.
//! - [`structures`]: split/matching events, quasirandomness checks, T-sets and
//!   well-spread families.
//! - [`rerandom`]: revealed information and conditional resampling by
//!   switchings.
//! - [`harness`]: exact singularity, experiment configuration, Monte Carlo
//!   drivers and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arithmetic;
pub mod bits;
mod error;
pub mod harness;
pub mod matrix;
pub mod rerandom;
pub mod sampler;
pub mod spectral;
pub mod stats;
pub mod structures;
pub mod vectorclass;

pub use error::{Error, Result, Violation};
pub use matrix::{RegularDigraphMatrix, SwitchingSet};
pub use sampler::{Method, Sampler, SamplerConfig};
