//! Knowledge base of modeling primitives and DSL exemplars, with lexical
//! retrieval and append-only accumulation.

mod bm25;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl;
use crate::env::TerminalEnv;

pub use bm25::{tokenize, Bm25, RelevanceScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveCategory {
    VariableDefinition,
    ConstraintFormulation,
    ObjectiveFunction,
}

impl PrimitiveCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            PrimitiveCategory::VariableDefinition => "variable_definition",
            PrimitiveCategory::ConstraintFormulation => "constraint_formulation",
            PrimitiveCategory::ObjectiveFunction => "objective_function",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PrimitiveCategory::VariableDefinition,
            PrimitiveCategory::ConstraintFormulation,
            PrimitiveCategory::ObjectiveFunction,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

impl fmt::Display for PrimitiveCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Primitive {
    pub id: String,
    pub category: PrimitiveCategory,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exemplar {
    pub id: String,
    pub description: String,
    pub env_digest: String,
    pub program: String,
}

impl Exemplar {
    /// Parses and statically checks the program.
    pub fn validate(&self) -> Result<(), KnowledgeError> {
        let invalid = |reason: String| KnowledgeError::InvalidExemplar { id: self.id.clone(), reason };
        let ast = dsl::parse(&self.program).map_err(|e| invalid(format!("{e}")))?;
        if let Some(e) = dsl::static_check(&ast).into_iter().next() {
            return Err(invalid(format!("{e}")));
        }
        Ok(())
    }

    fn search_text(&self) -> String {
        format!("{}\n{}", self.description, self.program)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnowledgeError {
    #[error("exemplar {id} is invalid: {reason}")]
    InvalidExemplar { id: String, reason: String },
    #[error("duplicate knowledge id {0}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    primitives: Vec<Primitive>,
    exemplars: Vec<Exemplar>,
}

impl KnowledgeBase {
    pub fn new(primitives: Vec<Primitive>, exemplars: Vec<Exemplar>) -> Result<Self, KnowledgeError> {
        let mut ids = BTreeSet::new();
        for id in primitives.iter().map(|p| &p.id) {
            if !ids.insert(id.as_str()) {
                return Err(KnowledgeError::DuplicateId(id.clone()));
            }
        }
        let mut ids = BTreeSet::new();
        for e in &exemplars {
            if !ids.insert(e.id.as_str()) {
                return Err(KnowledgeError::DuplicateId(e.id.clone()));
            }
            e.validate()?;
        }
        Ok(KnowledgeBase { primitives, exemplars })
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn exemplars(&self) -> &[Exemplar] {
        &self.exemplars
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty() && self.exemplars.is_empty()
    }

    /// Appends a validated exemplar built from a solved run and returns it.
    /// Existing entries are never touched; on error the base is unchanged.
    pub fn accumulate(
        &mut self,
        env: &TerminalEnv,
        program: &str,
        description: &str,
    ) -> Result<&Exemplar, KnowledgeError> {
        let mut n = self.exemplars.len() + 1;
        let mut id = format!("accumulated-{n:03}");
        while self.exemplars.iter().any(|e| e.id == id) {
            n += 1;
            id = format!("accumulated-{n:03}");
        }
        let invalid = |reason: String| KnowledgeError::InvalidExemplar { id: id.clone(), reason };
        let ast = dsl::parse(program).map_err(|e| invalid(format!("{e}")))?;
        if let Some(e) = dsl::static_check(&ast).into_iter().next() {
            return Err(invalid(format!("{e}")));
        }
        self.exemplars.push(Exemplar {
            id,
            description: String::from(description),
            env_digest: env.digest(),
            program: dsl::render(&ast),
        });
        Ok(self.exemplars.last().expect("just pushed"))
    }

    /// Appends an exemplar as-is after validation.
    pub fn add_exemplar(&mut self, exemplar: Exemplar) -> Result<(), KnowledgeError> {
        if self.exemplars.iter().any(|e| e.id == exemplar.id) {
            return Err(KnowledgeError::DuplicateId(exemplar.id));
        }
        exemplar.validate()?;
        self.exemplars.push(exemplar);
        Ok(())
    }

    /// Ranks exemplars against `query` with BM25 and returns the top `k`
    /// along with every primitive.
    pub fn retrieve(&self, query: &RetrievalQuery, k: usize) -> RetrievedContext {
        self.retrieve_with(&Bm25::default(), query, k)
    }

    pub fn retrieve_with(&self, scorer: &dyn RelevanceScorer, query: &RetrievalQuery, k: usize) -> RetrievedContext {
        let mut primitives = self.primitives.clone();
        primitives.sort_by(|a, b| a.category.cmp(&b.category).then_with(|| a.id.cmp(&b.id)));

        let docs: Vec<String> = self.exemplars.iter().map(Exemplar::search_text).collect();
        let doc_refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let scores = scorer.score(&query.text(), &doc_refs);
        let mut ranked: Vec<(f64, &Exemplar)> = scores.into_iter().zip(&self.exemplars).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
        let exemplars =
            ranked.into_iter().take(k).map(|(score, e)| ScoredExemplar { score, exemplar: e.clone() }).collect();
        RetrievedContext { primitives, exemplars }
    }
}

/// Requirement texts plus the environment digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalQuery {
    pub texts: Vec<String>,
    pub env_digest: String,
}

impl RetrievalQuery {
    pub fn for_env(env: &TerminalEnv) -> Self {
        RetrievalQuery { texts: env.reqs.texts.clone(), env_digest: env.digest() }
    }

    fn text(&self) -> String {
        let mut out = self.texts.join("\n");
        out.push('\n');
        out.push_str(&self.env_digest);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExemplar {
    pub score: f64,
    pub exemplar: Exemplar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedContext {
    /// Every primitive, ordered by category then id.
    pub primitives: Vec<Primitive>,
    /// Top-ranked exemplars, scores nonincreasing.
    pub exemplars: Vec<ScoredExemplar>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_instances, ExpertiseLevel, ScenarioKind};
    use alloc::vec;

    const CLASSIC: &str = "model classic\nobjective minimize total_travel_time\nconstraints {\n  flow_balance all\n}\n";

    fn exemplar(id: &str, description: &str) -> Exemplar {
        Exemplar { id: id.into(), description: description.into(), env_digest: String::new(), program: CLASSIC.into() }
    }

    fn env() -> TerminalEnv {
        generate_instances(3, ScenarioKind::RoadClosure, 1).unwrap()[0].env(ExpertiseLevel::Technician).unwrap()
    }

    #[test]
    fn invalid_exemplar_rejected_at_construction() {
        let mut bad = exemplar("bad", "x");
        bad.program = "model m objective".into();
        assert!(matches!(KnowledgeBase::new(vec![], vec![bad]), Err(KnowledgeError::InvalidExemplar { .. })));
        let mut no_flow = exemplar("nf", "x");
        no_flow.program = "model m objective minimize total_travel_time constraints { }".into();
        assert!(KnowledgeBase::new(vec![], vec![no_flow]).is_err());
    }

    #[test]
    fn k_zero_keeps_primitives() {
        let prim = Primitive {
            id: "objective.total_travel_time".into(),
            category: PrimitiveCategory::ObjectiveFunction,
            title: "t".into(),
            body: "b".into(),
        };
        let kb = KnowledgeBase::new(vec![prim], vec![exemplar("classic", "classic")]).unwrap();
        let ctx = kb.retrieve(&RetrievalQuery::for_env(&env()), 0);
        assert!(ctx.exemplars.is_empty());
        assert_eq!(ctx.primitives.len(), 1);
        let ctx = kb.retrieve(&RetrievalQuery::for_env(&env()), 5);
        assert_eq!(ctx.exemplars.len(), 1);
    }

    #[test]
    fn accumulate_appends_canonical_program() {
        let mut kb = KnowledgeBase::new(vec![], vec![exemplar("classic", "classic")]).unwrap();
        let env = env();
        let before = kb.exemplars()[0].clone();
        let added = kb
            .accumulate(&env, "model m objective minimize total_travel_time constraints { remove_edge (6,7) remove_edge (7,6) flow_balance all }", "closure")
            .unwrap()
            .clone();
        assert_eq!(added.id, "accumulated-002");
        assert!(added.program.contains("  remove_edge (6, 7)\n"));
        assert_eq!(added.env_digest, env.digest());
        kb.accumulate(&env, CLASSIC, "again").unwrap();
        assert_eq!(kb.exemplars().len(), 3);
        assert_eq!(kb.exemplars()[0], before);
    }

    #[test]
    fn accumulate_invalid_leaves_base_unchanged() {
        let mut kb = KnowledgeBase::new(vec![], vec![exemplar("classic", "classic")]).unwrap();
        let snapshot = kb.clone();
        assert!(kb.accumulate(&env(), "model m", "broken").is_err());
        assert_eq!(kb, snapshot);
    }
}
