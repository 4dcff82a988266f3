//! proptest strategies for programs and for parser fuzz input.

use portagent_core::dsl::{ModelAst, Objective, Statement, VehicleRef};
use portagent_core::NodeId;
use proptest::prelude::*;

fn node() -> impl Strategy<Value = NodeId> {
    prop_oneof![0u32..40, any::<u32>()].prop_map(NodeId)
}

fn subject() -> impl Strategy<Value = VehicleRef> {
    let id = prop_oneof!["AGV-[0-9]{1,2}", "T[0-9]{1,2}", any::<String>()];
    (any::<bool>(), id).prop_map(|(v, id)| if v { VehicleRef::Vehicle(id) } else { VehicleRef::Task(id) })
}

fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        Just(Statement::FlowBalanceAll),
        (node(), node()).prop_map(|(from, to)| Statement::RemoveEdge { from, to }),
        (subject(), node(), node()).prop_map(|(subject, from, to)| Statement::ForbidEdge { subject, from, to }),
        (subject(), prop::collection::vec(node(), 2..6))
            .prop_map(|(subject, nodes)| Statement::RequireSubpath { subject, nodes }),
        (subject(), prop::collection::vec(node(), 2..6))
            .prop_map(|(subject, nodes)| Statement::RequireExactPath { subject, nodes }),
    ]
}

pub fn model_ast() -> impl Strategy<Value = ModelAst> {
    ("[A-Za-z_][A-Za-z0-9_]{0,12}", prop::collection::vec(statement(), 0..8)).prop_map(|(name, statements)| ModelAst {
        name,
        objective: Objective::MinimizeTotalTravelTime,
        statements,
    })
}

/// Text built mostly from DSL tokens, so the fuzzer reaches deep parser
/// states instead of failing on the first byte.
pub fn token_soup() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("model".to_string()),
        Just("objective".to_string()),
        Just("minimize".to_string()),
        Just("total_travel_time".to_string()),
        Just("constraints".to_string()),
        Just("flow_balance".to_string()),
        Just("all".to_string()),
        Just("remove_edge".to_string()),
        Just("forbid_edge".to_string()),
        Just("require_subpath".to_string()),
        Just("require_exact_path".to_string()),
        Just("vehicle".to_string()),
        Just("task".to_string()),
        "[{}()\\[\\],#\"\\\\\n ]",
        "[0-9]{1,11}",
        "\"[^\"]{0,4}\"?",
        "[a-z_]{1,6}",
        any::<char>().prop_map(String::from),
    ];
    prop::collection::vec(token, 0..40).prop_map(|t| t.join(" "))
}

/// Arbitrary bytes, decoded lossily.
pub fn raw_text() -> impl Strategy<Value = String> {
    prop::collection::vec(any::<u8>(), 0..200).prop_map(|b| String::from_utf8_lossy(&b).into_owned())
}
