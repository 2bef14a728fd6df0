//! Library half of the `scaled-fields` binary: config parsing, command
//! implementations, and deterministic table rendering.

pub mod commands;
pub mod config;
pub mod output;

pub use scaled_fields::report::fmt_f64;

/// Default property-suite sampling seed when neither `--seed` nor
/// `SCALED_FIELDS_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x5eed;
