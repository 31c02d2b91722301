//! Plain-text tree descriptions.
//!
//! A tree is written as nested s-expressions, one node per list:
//!
//! ```text
//! ; comment until end of line
//! (reactive_fallback "Root"
//!   (sequence "Done?"
//!     (condition "Mission Over?")
//!     (action "Back To Station"))
//!   (parallel "Both" 2 1
//!     (action "A")
//!     (action "B")))
//! ```
//!
//! The head keyword is one of `sequence`, `reactive_sequence`, `fallback`,
//! `reactive_fallback`, `parallel`, `inverter`, `force_running`,
//! `force_failure`, `action`, `condition`. It is followed by the node name as
//! a double-quoted string (`\"` and `\\` escapes). `parallel` then takes the
//! success and failure thresholds as two positive integers. Children follow.
//! Leaves are bound to behaviors by name when instantiated.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::node::{BtNode, BuildError, Leaf, NodeKind, ParallelPolicy};

/// Structure of a tree without behaviors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSpec {
    pub name: String,
    pub kind: NodeKind,
    pub children: Vec<TreeSpec>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of input")]
    Eof,
    #[error("at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("bad parallel thresholds: {0}")]
    Policy(#[from] BuildError),
}

#[derive(Debug, Error)]
pub enum InstantiateError {
    #[error("no behavior bound for leaf `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}

fn keyword(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Sequence => "sequence",
        NodeKind::ReactiveSequence => "reactive_sequence",
        NodeKind::Fallback => "fallback",
        NodeKind::ReactiveFallback => "reactive_fallback",
        NodeKind::Parallel(_) => "parallel",
        NodeKind::Inverter => "inverter",
        NodeKind::ForceRunning => "force_running",
        NodeKind::ForceFailure => "force_failure",
        NodeKind::Action => "action",
        NodeKind::Condition => "condition",
    }
}

impl TreeSpec {
    pub fn of<B>(node: &BtNode<B>) -> Self {
        Self {
            name: node.name().to_owned(),
            kind: node.kind(),
            children: node.children().map(TreeSpec::of).collect(),
        }
    }

    /// Build a live tree, asking `bind` for the behavior of every leaf.
    pub fn instantiate<B>(
        &self,
        bind: &mut impl FnMut(&str, NodeKind) -> Option<Leaf<B>>,
    ) -> Result<BtNode<B>, InstantiateError> {
        let leaf = if self.kind.is_leaf() {
            Some(bind(&self.name, self.kind).ok_or_else(|| InstantiateError::Unbound(self.name.clone()))?)
        } else {
            None
        };
        let children = self
            .children
            .iter()
            .map(|c| c.instantiate(bind))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BtNode::from_parts(self.name.clone(), self.kind, children, leaf)?)
    }

    fn write_indented(&self, out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        let _ = write!(out, "({} \"{}\"", keyword(self.kind), escape(&self.name));
        if let NodeKind::Parallel(p) = self.kind {
            let _ = write!(out, " {} {}", p.success_threshold(), p.failure_threshold());
        }
        for c in &self.children {
            out.push('\n');
            c.write_indented(out, depth + 1);
        }
        out.push(')');
    }
}

impl fmt::Display for TreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_indented(&mut s, 0);
        f.write_str(&s)
    }
}

/// Render a live tree in the text format.
pub fn describe<B>(node: &BtNode<B>) -> String {
    TreeSpec::of(node).to_string()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn parse(input: &str) -> Result<TreeSpec, ParseError> {
    let mut p = Parser { src: input.as_bytes(), pos: 0 };
    let spec = p.node()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input after root node"));
    }
    Ok(spec)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.to_owned() }
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.src.get(self.pos) {
            if c == b';' {
                while self.src.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        match self.peek() {
            None => Err(ParseError::Eof),
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.err(&format!("expected `{}`", b as char))),
        }
    }

    fn word(&mut self) -> Result<&str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.src.len() { ParseError::Eof } else { self.err("expected a word") });
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    fn string(&mut self) -> Result<String, ParseError> {
        self.expect(b'"')?;
        let mut out = Vec::new();
        loop {
            match self.src.get(self.pos) {
                None => return Err(ParseError::Eof),
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    match self.src.get(self.pos + 1) {
                        Some(&c @ (b'"' | b'\\')) => out.push(c),
                        None => return Err(ParseError::Eof),
                        Some(_) => return Err(self.err("unknown escape")),
                    }
                    self.pos += 2;
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| self.err("name is not utf-8"))
    }

    fn number(&mut self) -> Result<usize, ParseError> {
        let w = self.word()?.to_owned();
        w.parse().map_err(|_| self.err(&format!("expected integer, got `{w}`")))
    }

    fn node(&mut self) -> Result<TreeSpec, ParseError> {
        self.expect(b'(')?;
        let head = self.word()?.to_owned();
        let name = self.string()?;
        let kind = match head.as_str() {
            "sequence" => NodeKind::Sequence,
            "reactive_sequence" => NodeKind::ReactiveSequence,
            "fallback" => NodeKind::Fallback,
            "reactive_fallback" => NodeKind::ReactiveFallback,
            "parallel" => {
                let ok = self.number()?;
                let ko = self.number()?;
                NodeKind::Parallel(ParallelPolicy::new(ok, ko)?)
            }
            "inverter" => NodeKind::Inverter,
            "force_running" => NodeKind::ForceRunning,
            "force_failure" => NodeKind::ForceFailure,
            "action" => NodeKind::Action,
            "condition" => NodeKind::Condition,
            other => return Err(self.err(&format!("unknown node kind `{other}`"))),
        };
        let mut children = Vec::new();
        while self.peek() == Some(b'(') {
            children.push(self.node()?);
        }
        self.expect(b')')?;
        Ok(TreeSpec { name, kind, children })
    }
}
