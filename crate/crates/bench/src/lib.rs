//! Command line harness for the cost-distance Steiner tree library:
//! corpus generation, four-way comparison tables, invariant suites, exact
//! oracle audits and runtime scaling sweeps. The `cdst` binary is a thin
//! argument parser over these functions.

pub mod compare;
pub mod corpus;
pub mod error;
pub mod params;
pub mod scale;
pub mod single;
pub mod verify;

pub use error::{BenchError, Result};
