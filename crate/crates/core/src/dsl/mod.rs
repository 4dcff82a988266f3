//! `vds-dsl`: the declarative dispatching language emitted by the Coder.
//!
//! ```text
//! program     := "model" IDENT objective constraints
//! objective   := "objective" "minimize" "total_travel_time"
//! constraints := "constraints" "{" stmt* "}"
//! stmt        := "flow_balance" "all"
//!              | "remove_edge" "(" INT "," INT ")"
//!              | "forbid_edge" subject "(" INT "," INT ")"
//!              | "require_subpath" subject "[" INT ("," INT)+ "]"
//!              | "require_exact_path" subject "[" INT ("," INT)+ "]"
//! subject     := "vehicle" STRING | "task" STRING
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

mod check;
mod extract;
mod lexer;
mod parser;
mod render;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::NodeId;

pub use check::static_check;
pub use extract::{extract_dsl_block, ExtractionError, FENCE_TAG};
pub use parser::parse;
pub use render::render;

/// The grammar as shown to the Coder.
pub const GRAMMAR: &str = r#"program     := "model" IDENT objective constraints
objective   := "objective" "minimize" "total_travel_time"
constraints := "constraints" "{" stmt* "}"
stmt        := "flow_balance" "all"
             | "remove_edge" "(" INT "," INT ")"
             | "forbid_edge" subject "(" INT "," INT ")"
             | "require_subpath" subject "[" INT ("," INT)+ "]"
             | "require_exact_path" subject "[" INT ("," INT)+ "]"
subject     := "vehicle" STRING | "task" STRING
"#;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelAst {
    pub name: String,
    pub objective: Objective,
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinimizeTotalTravelTime,
}

/// The vehicle a statement applies to, named directly or through its task.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VehicleRef {
    Vehicle(String),
    Task(String),
}

impl fmt::Display for VehicleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VehicleRef::Vehicle(id) => write!(f, "vehicle {}", render::quote(id)),
            VehicleRef::Task(id) => write!(f, "task {}", render::quote(id)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    FlowBalanceAll,
    RemoveEdge { from: NodeId, to: NodeId },
    ForbidEdge { subject: VehicleRef, from: NodeId, to: NodeId },
    RequireSubpath { subject: VehicleRef, nodes: Vec<NodeId> },
    RequireExactPath { subject: VehicleRef, nodes: Vec<NodeId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DslErrorKind {
    Parse,
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct DslError {
    pub kind: DslErrorKind,
    pub message: String,
    /// Always present for parse errors.
    pub location: Option<Location>,
}

impl DslError {
    pub(crate) fn parse(location: Location, message: String) -> Self {
        DslError { kind: DslErrorKind::Parse, message, location: Some(location) }
    }

    pub(crate) fn static_(message: String) -> Self {
        DslError { kind: DslErrorKind::Static, message, location: None }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.location) {
            (DslErrorKind::Parse, Some(loc)) => write!(f, "parse error at {loc}: {}", self.message),
            (DslErrorKind::Parse, None) => write!(f, "parse error: {}", self.message),
            (DslErrorKind::Static, _) => write!(f, "static check failed: {}", self.message),
        }
    }
}
