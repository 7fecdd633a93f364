// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certificate;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod horseshoe;
pub mod model;
pub mod search;
pub mod symbolic;

pub use certificate::{certify_box, Certificate, CertifyOptions, Cuboid, EngineChoice, Verdict};
pub use error::{Error, Result};
pub use model::{Params, State};
