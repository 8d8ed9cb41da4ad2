//! Single-cell V2X spectrum sharing simulator.
//!
//! Cellular users (C-UEs) send uplink over SCMA-overloaded resource blocks;
//! V2V pairs (V-UEs) reuse those resources. V-UE pairs are grouped into
//! interference-free clusters by greedy graph colouring, then clusters are
//! matched to C-UEs in descending-SINR order subject to per-user minimum
//! SINR. The [`evaluation`] module runs Monte Carlo sweeps over user counts.

pub mod allocation;
pub mod clustering;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod oracle;
pub mod output;
pub mod par;
pub mod scenario;
pub mod scma;
pub mod units;

pub use error::{Error, Result};
