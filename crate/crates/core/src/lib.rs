//! A bitonic sorting-network engine that exposes the launch structure of a
//! GPU-style implementation on the CPU.
//!
//! The crate is split into four parts:
//!
//! - [`schedule`]: the phase/step decomposition of the network and the
//!   closed-form round and compare-exchange counts.
//! - [`engine`]: launch planning under the `Baseline`, `Shared` and `Fused`
//!   strategies, and an instrumented data-parallel executor.
//! - [`verify`]: reference quicksort, 0-1 principle checking and output
//!   validation.
//! - [`bench`]: the size-sweep harness and its table/csv/json reports.
//!
//! With the default `parallel` feature, launches are spread over a rayon
//! thread pool. Without it every launch runs on the calling thread; outputs
//! and counters are identical either way.

pub mod bench;
pub mod engine;
mod error;
pub mod schedule;
pub mod verify;

pub use engine::{Counters, Engine, Launch, LaunchKind, LaunchPlan, Strategy};
pub use error::{Error, Result};
pub use schedule::{Schedule, StepSpec};

/// Key type sorted by the engine.
pub type Key = i32;
