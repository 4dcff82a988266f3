//! Std companion of `portagent-core`: JSON inputs, knowledge-base
//! directories, the HTTP backend, parallel benchmark runs with report
//! files, shipped mock scripts and the `portagent` command line.

pub mod bench;
pub mod cli;
pub mod clock;
pub mod fixtures;
pub mod http;
pub mod io;
pub mod kb_store;
pub mod mock;

pub use clock::SystemClock;
