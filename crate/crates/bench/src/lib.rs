//! Benchmark harness for the costlab model zoo: configuration, the
//! comparison run and leaderboard rendering.

pub mod bench;
pub mod config;
pub mod render;

pub use bench::{run_bench, write_outputs, BenchRun};
pub use config::{BenchConfig, Format};
pub use render::{render, Leaderboard};
