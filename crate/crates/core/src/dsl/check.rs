use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{DslError, ModelAst, Objective, Statement, VehicleRef};

#[derive(Default)]
struct PathRequirements {
    subpaths: usize,
    exact: usize,
}

/// Structural checks that need no environment.
///
/// Reports, in order: a missing or repeated `flow_balance all`, repeated
/// `remove_edge` statements, and per subject either a subpath/exact-path
/// conflict or a repeated path requirement.
pub fn static_check(ast: &ModelAst) -> Vec<DslError> {
    let mut errors = Vec::new();
    match ast.objective {
        Objective::MinimizeTotalTravelTime => {}
    }

    let flow = ast.statements.iter().filter(|s| matches!(s, Statement::FlowBalanceAll)).count();
    match flow {
        0 => errors.push(DslError::static_(String::from("missing flow_balance"))),
        1 => {}
        n => errors.push(DslError::static_(format!("duplicate flow_balance ({n} statements)"))),
    }

    let mut removed = BTreeSet::new();
    let mut reported = BTreeSet::new();
    let mut paths: BTreeMap<&VehicleRef, PathRequirements> = BTreeMap::new();
    let mut order: Vec<&VehicleRef> = Vec::new();
    for stmt in &ast.statements {
        match stmt {
            Statement::RemoveEdge { from, to } => {
                if !removed.insert((*from, *to)) && reported.insert((*from, *to)) {
                    errors.push(DslError::static_(format!("duplicate remove_edge ({from}, {to})")));
                }
            }
            Statement::RequireSubpath { subject, .. } | Statement::RequireExactPath { subject, .. } => {
                let entry = paths.entry(subject).or_insert_with(|| {
                    order.push(subject);
                    PathRequirements::default()
                });
                if matches!(stmt, Statement::RequireSubpath { .. }) {
                    entry.subpaths += 1;
                } else {
                    entry.exact += 1;
                }
            }
            Statement::FlowBalanceAll | Statement::ForbidEdge { .. } => {}
        }
    }
    for subject in order {
        let req = &paths[subject];
        if req.subpaths > 0 && req.exact > 0 {
            errors.push(DslError::static_(format!("conflicting require_subpath and require_exact_path for {subject}")));
        } else if req.subpaths + req.exact > 1 {
            errors.push(DslError::static_(format!("duplicate path requirement for {subject}")));
        }
    }
    errors
}
