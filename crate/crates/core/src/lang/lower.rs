use super::ast::{Ast, Expr, Stmt, StmtKind};
use crate::cfa::{Cfa, Edge, NodeId, Statement, StatementKind, StmtId};

/// Lowers `main` to a CFA. Statement IDs follow AST pre-order; for a `for`
/// loop that is init, both guards, update, then the body, in source order.
pub fn lower(ast: &Ast) -> Cfa {
    let mut l = Lowerer {
        edges: Vec::new(),
        num_nodes: 2,
        entry: NodeId(0),
        exit: NodeId(1),
    };
    if ast.body.is_empty() {
        l.edge(l.entry, StatementKind::Halt(None), ast.end_line, l.exit);
    } else {
        l.seq(&ast.body, l.entry, l.exit);
    }
    Cfa::new(
        ast.name.clone(),
        ast.vars.clone(),
        l.num_nodes,
        l.entry,
        l.exit,
        l.edges,
    )
    .expect("lowering produces a well-formed CFA")
}

struct Lowerer {
    edges: Vec<Edge>,
    num_nodes: u32,
    entry: NodeId,
    exit: NodeId,
}

impl Lowerer {
    fn node(&mut self) -> NodeId {
        let n = NodeId(self.num_nodes);
        self.num_nodes += 1;
        n
    }

    fn edge(&mut self, from: NodeId, kind: StatementKind, line: u32, to: NodeId) {
        let id = StmtId(self.edges.len() as u32);
        self.edges.push(Edge {
            from,
            stmt: Statement {
                id,
                kind,
                source_line: line,
            },
            to,
        });
    }

    /// Lowers a non-empty statement list between `from` and `to`.
    fn seq(&mut self, stmts: &[Stmt], from: NodeId, to: NodeId) {
        let mut cur = from;
        for (i, s) in stmts.iter().enumerate() {
            let next = if i + 1 == stmts.len() { to } else { self.node() };
            self.stmt(s, cur, next);
            cur = next;
        }
    }

    /// Start node for a branch or loop body: `fallthrough` when empty.
    fn region_start(&mut self, body: &[Stmt], fallthrough: NodeId) -> NodeId {
        if body.is_empty() {
            fallthrough
        } else {
            self.node()
        }
    }

    /// The entry may not have incoming edges, so a loop starting there gets
    /// a skip edge into a fresh head.
    fn loop_head(&mut self, from: NodeId, line: u32) -> NodeId {
        if from == self.entry {
            let head = self.node();
            self.edge(from, StatementKind::Skip, line, head);
            head
        } else {
            from
        }
    }

    fn stmt(&mut self, s: &Stmt, from: NodeId, to: NodeId) {
        let line = s.line;
        match &s.kind {
            StmtKind::Decl { var, init } => {
                let expr = init.clone().unwrap_or_else(|| Expr::int(0));
                self.edge(from, StatementKind::Assign { var: *var, expr }, line, to);
            }
            StmtKind::Assign { var, value } => {
                let kind = StatementKind::Assign {
                    var: *var,
                    expr: value.clone(),
                };
                self.edge(from, kind, line, to);
            }
            StmtKind::Skip => self.edge(from, StatementKind::Skip, line, to),
            StmtKind::Assert(e) => self.edge(from, StatementKind::Assert(e.clone()), line, to),
            StmtKind::Return(e) => {
                let exit = self.exit;
                self.edge(from, StatementKind::Halt(e.clone()), line, exit);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let empty = Vec::new();
                let else_branch = else_branch.as_ref().unwrap_or(&empty);
                let then_start = self.region_start(then_branch, to);
                self.edge(from, StatementKind::Assume(cond.clone()), line, then_start);
                let else_start = self.region_start(else_branch, to);
                self.edge(
                    from,
                    StatementKind::Assume(Expr::not(cond.clone())),
                    line,
                    else_start,
                );
                if !then_branch.is_empty() {
                    self.seq(then_branch, then_start, to);
                }
                if !else_branch.is_empty() {
                    self.seq(else_branch, else_start, to);
                }
            }
            StmtKind::While { cond, body } => {
                let head = self.loop_head(from, line);
                let body_start = self.region_start(body, head);
                self.edge(head, StatementKind::Assume(cond.clone()), line, body_start);
                self.edge(head, StatementKind::Assume(Expr::not(cond.clone())), line, to);
                if !body.is_empty() {
                    self.seq(body, body_start, head);
                }
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                let head = match init {
                    Some(init) => {
                        let head = self.node();
                        self.stmt(init, from, head);
                        head
                    }
                    None => self.loop_head(from, line),
                };
                let cond = cond.clone().unwrap_or_else(|| Expr::int(1));
                let latch = if update.is_some() { self.node() } else { head };
                let body_start = self.region_start(body, latch);
                self.edge(head, StatementKind::Assume(cond.clone()), line, body_start);
                self.edge(head, StatementKind::Assume(Expr::not(cond)), line, to);
                if let Some(update) = update {
                    self.stmt(update, latch, head);
                }
                if !body.is_empty() {
                    self.seq(body, body_start, latch);
                }
            }
        }
    }
}
