//! Experiment harness: the four learning strategies, the shared benchmark
//! and teaching set, periodic evaluation and result files.

pub mod benchmark;
pub mod config;
pub mod eval;
pub mod export;
pub mod run;
pub mod stats;

pub use benchmark::{build_benchmark, reachable_box, Benchmark};
pub use config::ExperimentConfig;
pub use eval::{evaluate, Checkpoint, Coverage};
pub use run::{run_batch, run_strategy, Event, Fixtures, Phase, RunLog, Snapshot, Strategy};
