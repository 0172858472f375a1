//! Exact-distribution bounds on restricted isometry constants of finite
//! Gaussian measurement matrices.
//!
//! The core object is the exact CDF of the extreme eigenvalues of a real
//! Wishart matrix ([`wishart`]), from which RIP satisfaction probabilities,
//! RIC thresholds ([`ric`]), recovery sparsity limits ([`recovery`]),
//! robustness constants ([`robustness`]) and their Tracy-Widom
//! approximations ([`tw`]) all follow. [`mc`] holds the Monte Carlo
//! oracles used to validate the closed forms.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the
// out-of-domain values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mc;
pub mod numerics;
pub mod recovery;
pub mod ric;
pub mod robustness;
mod solve;
pub mod tw;
pub mod wishart;

pub use error::{Error, Result};
pub use numerics::{LogProb, PrecisionConfig};
