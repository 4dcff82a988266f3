//! Core of the PortAgent vehicle-dispatching transfer pipeline.
//!
//! Everything here is pure and allocation-only (`no_std` + `alloc`): the
//! terminal environment model, the `vds-dsl` dispatching language, the exact
//! multi-AGV path planner with its ground-truth oracle, lexical retrieval over
//! the knowledge base, prompt assembly for the expert roles, the
//! self-correcting transfer workflow and the benchmark statistics.
//!
//! IO, HTTP and the command line live in the `portagent` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bench;
pub mod clock;
pub mod dsl;
pub mod env;
pub mod knowledge;
pub mod llm;
pub mod solver;
pub mod workflow;

pub use clock::{Clock, FrozenClock};
pub use env::{NodeId, TaskId, TerminalEnv, VehicleId};
