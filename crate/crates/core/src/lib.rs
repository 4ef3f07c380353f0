//! Least-cost capacity transition and dispatch model for multi-node
//! electricity systems under low-carbon, electrification and emissions
//! targets.

pub mod demand;
pub mod emissions;
pub mod error;
pub mod fixture;
pub mod io;
pub mod lp;
pub mod model;
pub mod parallel;
pub mod report;
pub mod resources;
pub mod runner;
pub mod solver;
pub mod spline;

pub use error::{Error, Result};
