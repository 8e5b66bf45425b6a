//! Exact-probability toolkit for joint distributions of strictly increasing
//! integer tuples with nearly indistinguishable subsets, the Dealer/Gambler
//! betting games they induce, and the tower-growth bounds that govern them.
//!
//! All probability arithmetic is exact (big rationals); floats appear only in
//! Monte Carlo estimates and solver inner loops.

pub mod audit;
pub mod cli;
pub mod construction;
pub mod error;
pub mod exactdist;
pub mod games;
pub mod io;
pub mod rational;
pub mod sampling;
pub mod solver;
pub mod subsets;
pub mod tower;

pub use error::{Error, Result};
pub use exactdist::{ExactDist, Kind, Value};
pub use rational::Rat;
