//! Exact algebra over truncated local rings and their group rings: Howell
//! forms, Fitting ideals, exterior biduals, Kolyvagin derivatives of
//! synthetic Euler systems, and ideal comparison in truncated Iwasawa
//! algebras.

pub mod coeff;
pub mod error;
pub mod euler;
pub mod group;
pub mod iwasawa;
pub mod kolyvagin;
pub mod module;
pub mod suites;
pub mod zmod;

pub use error::{Error, Result};
