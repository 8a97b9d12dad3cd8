//! Streaming optimization of non-decomposable classification measures.
//!
//! Two solver families cover the measure catalog:
//!
//! * [`spade`]: stochastic primal-dual ascent for concave functions of the
//!   class-conditional reward means (Min-TPR/TNR, H-mean, Q-mean, G-mean),
//!   built on the Fenchel-dual regions in [`concave`].
//! * [`stamp`]: alternating maximization for pseudo-linear (fractional)
//!   measures (F-beta, Jaccard, Gower-Legendre), in batch and streaming
//!   forms, built on the canonical fractional catalog in [`pseudolinear`].
//!
//! [`oracle`] holds brute-force reference computations that the test suite
//! uses to pin down the duality, contraction, and noise-stability claims at
//! small scale, plus an exhaustive model search for end-to-end comparisons.

pub mod baselines;
pub mod concave;
pub mod data;
pub mod error;
pub mod eval;
pub mod measure;
pub mod model;
pub mod oracle;
pub mod pseudolinear;
pub mod reward;
pub mod spade;
pub mod stamp;

pub use error::{Error, Result};
