//! Campaign runner and report arithmetic behind the `sndrr` binary.

pub mod campaign;
pub mod report;
