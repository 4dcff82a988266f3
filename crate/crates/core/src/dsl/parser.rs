use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lexer::{tokenize, Spanned, Tok};
use super::{DslError, Location, ModelAst, Objective, Statement, VehicleRef};
use crate::env::NodeId;

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: Location,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn location(&self) -> Location {
        self.peek().map_or(self.eof, |t| t.at)
    }

    fn unexpected(&self, expected: &str) -> DslError {
        let found = match self.peek() {
            Some(t) => t.tok.to_string(),
            None => String::from("end of input"),
        };
        DslError::parse(self.location(), format!("expected {expected}, found {found}"))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Word(w), .. }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn punct(&mut self, want: Tok) -> Result<(), DslError> {
        match self.peek() {
            Some(s) if s.tok == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&want.to_string())),
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Word(w), .. }) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.unexpected("model name")),
        }
    }

    fn int(&mut self) -> Result<NodeId, DslError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Int(n), .. }) => {
                let n = *n;
                self.pos += 1;
                Ok(NodeId(n))
            }
            _ => Err(self.unexpected("node id")),
        }
    }

    fn string(&mut self) -> Result<String, DslError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Str(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("quoted identifier")),
        }
    }

    fn subject(&mut self) -> Result<VehicleRef, DslError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Word(w), .. }) if w == "vehicle" => {
                self.pos += 1;
                Ok(VehicleRef::Vehicle(self.string()?))
            }
            Some(Spanned { tok: Tok::Word(w), .. }) if w == "task" => {
                self.pos += 1;
                Ok(VehicleRef::Task(self.string()?))
            }
            _ => Err(self.unexpected("`vehicle` or `task`")),
        }
    }

    fn pair(&mut self) -> Result<(NodeId, NodeId), DslError> {
        self.punct(Tok::LParen)?;
        let a = self.int()?;
        self.punct(Tok::Comma)?;
        let b = self.int()?;
        self.punct(Tok::RParen)?;
        Ok((a, b))
    }

    fn node_list(&mut self) -> Result<Vec<NodeId>, DslError> {
        self.punct(Tok::LBracket)?;
        let mut nodes = alloc::vec![self.int()?];
        loop {
            match self.peek().map(|s| &s.tok) {
                Some(Tok::Comma) => {
                    self.pos += 1;
                    nodes.push(self.int()?);
                }
                Some(Tok::RBracket) if nodes.len() >= 2 => {
                    self.pos += 1;
                    return Ok(nodes);
                }
                _ if nodes.len() < 2 => return Err(self.unexpected("`,` (at least two nodes)")),
                _ => return Err(self.unexpected("`,` or `]`")),
            }
        }
    }

    fn statement(&mut self) -> Result<Statement, DslError> {
        let word = match self.peek() {
            Some(Spanned { tok: Tok::Word(w), .. }) => w.clone(),
            _ => return Err(self.unexpected("statement or `}`")),
        };
        let stmt = match word.as_str() {
            "flow_balance" => {
                self.pos += 1;
                self.keyword("all")?;
                Statement::FlowBalanceAll
            }
            "remove_edge" => {
                self.pos += 1;
                let (from, to) = self.pair()?;
                Statement::RemoveEdge { from, to }
            }
            "forbid_edge" => {
                self.pos += 1;
                let subject = self.subject()?;
                let (from, to) = self.pair()?;
                Statement::ForbidEdge { subject, from, to }
            }
            "require_subpath" => {
                self.pos += 1;
                let subject = self.subject()?;
                Statement::RequireSubpath { subject, nodes: self.node_list()? }
            }
            "require_exact_path" => {
                self.pos += 1;
                let subject = self.subject()?;
                Statement::RequireExactPath { subject, nodes: self.node_list()? }
            }
            _ => return Err(self.unexpected("statement or `}`")),
        };
        Ok(stmt)
    }

    fn program(&mut self) -> Result<ModelAst, DslError> {
        self.keyword("model")?;
        let name = self.ident()?;
        self.keyword("objective")?;
        self.keyword("minimize")?;
        self.keyword("total_travel_time")?;
        self.keyword("constraints")?;
        self.punct(Tok::LBrace)?;
        let mut statements = Vec::new();
        loop {
            match self.peek().map(|s| &s.tok) {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                None => return Err(self.unexpected("statement or `}`")),
                _ => statements.push(self.statement()?),
            }
        }
        if self.pos < self.toks.len() {
            return Err(self.unexpected("end of input"));
        }
        Ok(ModelAst { name, objective: Objective::MinimizeTotalTravelTime, statements })
    }
}

/// Parses a `vds-dsl` program. Errors carry the location of the first
/// offending token.
pub fn parse(text: &str) -> Result<ModelAst, DslError> {
    let (toks, eof) = tokenize(text)?;
    Parser { toks, pos: 0, eof }.program()
}
