//! Reproduction tooling: storage/computation cost formulas for the proposed
//! scheme and the comparison baselines, instrumented model checks, host
//! microbenchmarks, and the concurrent-user gas/latency workload.

pub mod calibrate;
pub mod cost;
mod error;
pub mod workload;

pub use error::BenchError;
