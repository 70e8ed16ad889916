//! Joint reference-frame synthesis and post-filter enhancement around a small
//! hybrid video codec.

pub mod cli;
pub mod codec;
pub mod eval;
pub mod error;
pub mod flow;
pub mod frame;
pub mod stenet;
pub mod stew;
pub mod synth;

pub use error::{Error, Result};
pub use frame::Frame;
