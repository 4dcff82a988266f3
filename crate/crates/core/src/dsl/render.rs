use alloc::string::String;
use core::fmt::Write as _;

use super::{ModelAst, Objective, Statement};
use crate::env::NodeId;

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_list(out: &mut String, nodes: &[NodeId]) {
    out.push('[');
    for (i, n) in nodes.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{n}");
    }
    out.push(']');
}

/// Canonical text of a program: header lines, then one statement per line.
pub fn render(ast: &ModelAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", ast.name);
    match ast.objective {
        Objective::MinimizeTotalTravelTime => out.push_str("objective minimize total_travel_time\n"),
    }
    out.push_str("constraints {\n");
    for stmt in &ast.statements {
        out.push_str("  ");
        match stmt {
            Statement::FlowBalanceAll => out.push_str("flow_balance all"),
            Statement::RemoveEdge { from, to } => {
                let _ = write!(out, "remove_edge ({from}, {to})");
            }
            Statement::ForbidEdge { subject, from, to } => {
                let _ = write!(out, "forbid_edge {subject} ({from}, {to})");
            }
            Statement::RequireSubpath { subject, nodes } => {
                let _ = write!(out, "require_subpath {subject} ");
                node_list(&mut out, nodes);
            }
            Statement::RequireExactPath { subject, nodes } => {
                let _ = write!(out, "require_exact_path {subject} ");
                node_list(&mut out, nodes);
            }
        }
        out.push('\n');
    }
    out.push_str("}\n");
    out
}
