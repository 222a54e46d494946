use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::value::Valuation;
use crate::automaton::AaState;
use crate::cfa::{Cfa, NodeId, StmtId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtId(pub u32);

impl ArtId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ArtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Expanded,
    /// Created but never expanded.
    Frontier,
    CoveredBy(ArtId),
    /// Reached through a failing assertion; the execution stops there.
    Pruned,
}

#[derive(Debug, Clone)]
pub struct ArtNode {
    pub id: ArtId,
    pub cfa_node: NodeId,
    pub valuation: Valuation,
    pub parent: Option<ArtId>,
    pub incoming_stmt: Option<StmtId>,
    pub status: NodeStatus,
    /// Automaton position when exploring a product with an assumption automaton.
    pub aa_state: Option<AaState>,
    /// Statements of interest exercised before the automaton entered `FALSE`.
    pub tracked: Arc<BTreeSet<StmtId>>,
}

/// An abstract reachability tree.
#[derive(Debug, Clone)]
pub struct Art {
    nodes: Vec<ArtNode>,
    children: Vec<Vec<ArtId>>,
    expansion_order: Vec<ArtId>,
}

impl Art {
    pub(crate) fn new(cfa_node: NodeId, valuation: Valuation, aa_state: Option<AaState>) -> Self {
        Art {
            nodes: vec![ArtNode {
                id: ArtId(0),
                cfa_node,
                valuation,
                parent: None,
                incoming_stmt: None,
                status: NodeStatus::Frontier,
                aa_state,
                tracked: Arc::default(),
            }],
            children: vec![Vec::new()],
            expansion_order: Vec::new(),
        }
    }

    pub(crate) fn add_child(
        &mut self,
        parent: ArtId,
        stmt: StmtId,
        cfa_node: NodeId,
        valuation: Valuation,
        aa_state: Option<AaState>,
        tracked: Arc<BTreeSet<StmtId>>,
    ) -> ArtId {
        let id = ArtId(self.nodes.len() as u32);
        self.nodes.push(ArtNode {
            id,
            cfa_node,
            valuation,
            parent: Some(parent),
            incoming_stmt: Some(stmt),
            status: NodeStatus::Frontier,
            aa_state,
            tracked,
        });
        self.children.push(Vec::new());
        self.children[parent.index()].push(id);
        id
    }

    pub(crate) fn set_status(&mut self, id: ArtId, status: NodeStatus) {
        if status == NodeStatus::Expanded {
            self.expansion_order.push(id);
        }
        self.nodes[id.index()].status = status;
    }

    pub fn root(&self) -> ArtId {
        ArtId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: ArtId) -> &ArtNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[ArtNode] {
        &self.nodes
    }

    pub fn children(&self, id: ArtId) -> &[ArtId] {
        &self.children[id.index()]
    }

    /// Nodes in the order they were expanded.
    pub fn expansion_order(&self) -> &[ArtId] {
        &self.expansion_order
    }

    /// Statement labels from the root down to `id`.
    pub fn path_to(&self, id: ArtId) -> Vec<StmtId> {
        let mut path = Vec::new();
        let mut cur = self.node(id);
        while let (Some(p), Some(s)) = (cur.parent, cur.incoming_stmt) {
            path.push(s);
            cur = self.node(p);
        }
        path.reverse();
        path
    }

    /// Follows covered-by links to a node that is not covered.
    pub fn representative(&self, mut id: ArtId) -> ArtId {
        while let NodeStatus::CoveredBy(j) = self.node(id).status {
            id = j;
        }
        id
    }

    pub fn count(&self, pred: impl Fn(NodeStatus) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(n.status)).count()
    }

    /// Source lines of statements leading into expanded nodes.
    pub fn lines_touched(&self, cfa: &Cfa) -> BTreeSet<u32> {
        self.nodes
            .iter()
            .filter(|n| n.status == NodeStatus::Expanded)
            .filter_map(|n| n.incoming_stmt)
            .filter_map(|s| cfa.statement(s).map(|st| st.source_line))
            .collect()
    }
}
