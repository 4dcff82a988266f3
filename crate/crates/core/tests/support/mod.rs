//! Test-only helpers shared with the acceptance suite through `#[path]`.
#![allow(dead_code)]

pub mod brute;
pub mod cases;
pub mod dsl_gen;
