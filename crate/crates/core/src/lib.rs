//! Simulator and protocol library for covert, verifiable quantum learning.

pub mod acquire;
pub mod adversary;
pub mod certify;
pub mod covertex;
pub mod covertsq;
pub mod error;
pub mod gf2core;
pub mod oracles;
pub mod qsim;
pub mod rng;
pub mod tasks;
pub mod expcli;

pub use error::{Error, Result};
