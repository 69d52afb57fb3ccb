//! Average-cost planar control by linear programming over discretized
//! occupational measures.

pub mod cheeger;
pub mod curve;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod lp;
pub mod measure;
pub mod oracle;
mod par;
pub mod ratio;
pub mod scalar;
pub mod schedule;

pub use error::{Error, Result};
