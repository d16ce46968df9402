//! Recurrence classification and simulation of homogeneous open quantum walks on ℤ and ℤ².

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod coin;
pub mod density;
pub mod error;
pub mod expm;
pub mod linalg;
pub mod policy;
pub mod registry;
pub mod simulate;
pub mod spectral;

pub use classify::{classify_coin, Criterion, Verdict, VerdictKind};
pub use coin::{Coin, Coin1D, Coin2D, CoinCT};
pub use density::DensityOperator;
pub use error::{OqwError, Result};
pub use policy::NumericPolicy;
