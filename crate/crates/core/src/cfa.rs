//! Control flow automata: program locations connected by statement-labeled
//! edges, with a single entry and a single exit.
//!
//! Every edge carries its own [`Statement`] and statement IDs are dense, so a
//! statement ID identifies an edge uniquely. Coverage is counted over these IDs.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::ast::{Expr, VarId};

/// A program location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

/// Identifier of a statement, dense from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StmtId(pub u32);

impl StmtId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StatementKind {
    Assign { var: VarId, expr: Expr },
    Assume(Expr),
    Assert(Expr),
    Skip,
    Halt(Option<Expr>),
}

impl StatementKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatementKind::Assign { .. } => "assign",
            StatementKind::Assume(_) => "assume",
            StatementKind::Assert(_) => "assert",
            StatementKind::Skip => "skip",
            StatementKind::Halt(_) => "halt",
        }
    }

    /// The expression evaluated when the statement fires, if any.
    /// Halt expressions are not evaluated.
    pub fn evaluated_expr(&self) -> Option<&Expr> {
        match self {
            StatementKind::Assign { expr, .. } => Some(expr),
            StatementKind::Assume(e) | StatementKind::Assert(e) => Some(e),
            StatementKind::Skip | StatementKind::Halt(_) => None,
        }
    }

    pub fn nondet_count(&self) -> usize {
        self.evaluated_expr().map_or(0, Expr::nondet_count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub id: StmtId,
    pub kind: StatementKind,
    pub source_line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: NodeId,
    pub stmt: Statement,
    pub to: NodeId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfaError {
    #[error("statement IDs must be contiguous from 0: edge {position} has ID {id}")]
    NonContiguousIds { position: usize, id: u32 },
    #[error("edge {0} references a node outside the graph")]
    UnknownNode(StmtId),
    #[error("entry node has incoming edge {0}")]
    EntryHasIncoming(StmtId),
    #[error("exit node has outgoing edge {0}")]
    ExitHasOutgoing(StmtId),
    #[error("entry and exit must differ")]
    EntryIsExit,
}

/// A control flow automaton for a single function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfa {
    name: String,
    vars: Vec<String>,
    num_nodes: u32,
    entry: NodeId,
    exit: NodeId,
    /// Indexed by statement ID.
    edges: Vec<Edge>,
    /// Outgoing statement IDs per node, ascending.
    out: Vec<Vec<StmtId>>,
}

impl Cfa {
    pub fn new(
        name: impl Into<String>,
        vars: Vec<String>,
        num_nodes: u32,
        entry: NodeId,
        exit: NodeId,
        mut edges: Vec<Edge>,
    ) -> Result<Cfa, CfaError> {
        edges.sort_by_key(|e| e.stmt.id);
        for (position, e) in edges.iter().enumerate() {
            if e.stmt.id.index() != position {
                return Err(CfaError::NonContiguousIds {
                    position,
                    id: e.stmt.id.0,
                });
            }
            if e.from.0 >= num_nodes || e.to.0 >= num_nodes {
                return Err(CfaError::UnknownNode(e.stmt.id));
            }
            if e.to == entry {
                return Err(CfaError::EntryHasIncoming(e.stmt.id));
            }
            if e.from == exit {
                return Err(CfaError::ExitHasOutgoing(e.stmt.id));
            }
        }
        if entry == exit || entry.0 >= num_nodes || exit.0 >= num_nodes {
            return Err(CfaError::EntryIsExit);
        }
        let mut out = vec![Vec::new(); num_nodes as usize];
        for e in &edges {
            out[e.from.index()].push(e.stmt.id);
        }
        Ok(Cfa {
            name: name.into(),
            vars,
            num_nodes,
            entry,
            exit,
            edges,
            out,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes as usize
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.num_nodes).map(NodeId)
    }

    pub fn entry(&self) -> NodeId {
        self.entry
    }

    pub fn exit(&self) -> NodeId {
        self.exit
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: StmtId) -> Option<&Edge> {
        self.edges.get(id.index())
    }

    pub fn statement(&self, id: StmtId) -> Option<&Statement> {
        self.edge(id).map(|e| &e.stmt)
    }

    pub fn num_statements(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edges of `node` in ascending statement-ID order.
    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.out[node.index()]
            .iter()
            .map(move |id| &self.edges[id.index()])
    }

    /// All statements of the program, ordered by ID.
    pub fn statements(&self) -> Vec<&Statement> {
        self.edges.iter().map(|e| &e.stmt).collect()
    }

    pub fn statement_ids(&self) -> BTreeSet<StmtId> {
        self.edges.iter().map(|e| e.stmt.id).collect()
    }

    /// Statement IDs of every edge reachable from `node`.
    pub fn statements_reachable_from(&self, node: NodeId) -> BTreeSet<StmtId> {
        let mut seen = vec![false; self.num_nodes()];
        let mut stack = vec![node];
        let mut out = BTreeSet::new();
        seen[node.index()] = true;
        while let Some(n) = stack.pop() {
            for e in self.out_edges(n) {
                out.insert(e.stmt.id);
                if !seen[e.to.index()] {
                    seen[e.to.index()] = true;
                    stack.push(e.to);
                }
            }
        }
        out
    }

    /// DFS postorder numbering from the entry, visiting out-edges in ascending
    /// statement-ID order. Nodes unreachable from the entry are numbered
    /// afterwards by further DFS runs started in node order. The result is
    /// indexed by node.
    pub fn postorder_index(&self) -> Vec<usize> {
        const UNSEEN: usize = usize::MAX;
        let n = self.num_nodes();
        let mut index = vec![UNSEEN; n];
        let mut visited = vec![false; n];
        let mut next = 0;
        let roots = std::iter::once(self.entry).chain(self.nodes());
        for root in roots {
            if visited[root.index()] {
                continue;
            }
            visited[root.index()] = true;
            // (node, position in its out-edge list)
            let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
            while let Some(top) = stack.last_mut() {
                let (node, pos) = *top;
                let succ = self.out[node.index()]
                    .get(pos)
                    .map(|id| self.edges[id.index()].to);
                match succ {
                    Some(to) => {
                        top.1 += 1;
                        if !visited[to.index()] {
                            visited[to.index()] = true;
                            stack.push((to, 0));
                        }
                    }
                    None => {
                        index[node.index()] = next;
                        next += 1;
                        stack.pop();
                    }
                }
            }
        }
        index
    }

    pub fn statement_text(&self, stmt: &Statement) -> String {
        match &stmt.kind {
            StatementKind::Assign { var, expr } => {
                format!("{} = {}", self.var_name(*var), expr.display(&self.vars))
            }
            StatementKind::Assume(e) | StatementKind::Assert(e) => {
                e.display(&self.vars).to_string()
            }
            StatementKind::Skip => String::new(),
            StatementKind::Halt(None) => "return".into(),
            StatementKind::Halt(Some(e)) => format!("return {}", e.display(&self.vars)),
        }
    }

    pub fn var_name(&self, var: VarId) -> &str {
        self.vars.get(var.index()).map_or("?", String::as_str)
    }

    /// Line-oriented dump, one edge per line ordered by (source node, statement ID).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "CFA {}", self.name).unwrap();
        writeln!(out, "NODES {}", self.num_nodes).unwrap();
        writeln!(out, "ENTRY {}", self.entry).unwrap();
        writeln!(out, "EXIT {}", self.exit).unwrap();
        for node in self.nodes() {
            for e in self.out_edges(node) {
                let text = self.statement_text(&e.stmt);
                let label = if text.is_empty() {
                    format!("{}:{}", e.stmt.id, e.stmt.kind.name())
                } else {
                    format!("{}:{} {}", e.stmt.id, e.stmt.kind.name(), text)
                };
                writeln!(out, "{} -[{}]-> {}", e.from, label, e.to).unwrap();
            }
        }
        out
    }
}
