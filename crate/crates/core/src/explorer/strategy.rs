use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::art::ArtId;
use crate::heuristic::ScoreMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Bfs,
    DfsPostorder,
    DfsPostorderScore,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Bfs => "bfs",
            StrategyKind::DfsPostorder => "dfs-postorder",
            StrategyKind::DfsPostorderScore => "dfs-postorder+score",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs" => Ok(StrategyKind::Bfs),
            "dfs-postorder" => Ok(StrategyKind::DfsPostorder),
            "dfs-postorder+score" => Ok(StrategyKind::DfsPostorderScore),
            other => Err(format!(
                "unknown strategy '{other}' (expected bfs, dfs-postorder or dfs-postorder+score)"
            )),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy dfs-postorder+score needs a score map")]
    MissingScores,
}

/// Waitlist discipline for ART construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalStrategy {
    kind: StrategyKind,
    scores: Option<ScoreMap>,
}

pub fn make_strategy(
    kind: StrategyKind,
    scores: Option<ScoreMap>,
) -> Result<TraversalStrategy, StrategyError> {
    match (kind, scores) {
        (StrategyKind::DfsPostorderScore, None) => Err(StrategyError::MissingScores),
        (StrategyKind::DfsPostorderScore, scores) => Ok(TraversalStrategy { kind, scores }),
        (kind, _) => Ok(TraversalStrategy { kind, scores: None }),
    }
}

impl TraversalStrategy {
    pub fn bfs() -> Self {
        TraversalStrategy {
            kind: StrategyKind::Bfs,
            scores: None,
        }
    }

    pub fn dfs_postorder() -> Self {
        TraversalStrategy {
            kind: StrategyKind::DfsPostorder,
            scores: None,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn scores(&self) -> Option<&ScoreMap> {
        self.scores.as_ref()
    }
}

impl Default for TraversalStrategy {
    fn default() -> Self {
        TraversalStrategy::dfs_postorder()
    }
}

/// Sort key of a freshly created child.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ChildKey {
    pub id: ArtId,
    pub postorder: usize,
    pub score: u64,
}

pub(crate) enum Waitlist {
    Fifo(VecDeque<ArtId>),
    Stack(Vec<ArtId>),
}

impl Waitlist {
    pub fn new(kind: StrategyKind) -> Self {
        match kind {
            StrategyKind::Bfs => Waitlist::Fifo(VecDeque::new()),
            _ => Waitlist::Stack(Vec::new()),
        }
    }

    pub fn pop(&mut self) -> Option<ArtId> {
        match self {
            Waitlist::Fifo(q) => q.pop_front(),
            Waitlist::Stack(s) => s.pop(),
        }
    }

    pub fn push_front(&mut self, id: ArtId) {
        match self {
            Waitlist::Fifo(q) => q.push_front(id),
            Waitlist::Stack(s) => s.push(id),
        }
    }

    /// Adds the children of one expansion. For the depth-first variants the
    /// child with the lowest postorder index ends up on top; ties go to the
    /// higher score when scores are in use, then to the older node.
    pub fn push_children(&mut self, kind: StrategyKind, mut children: Vec<ChildKey>) {
        match self {
            Waitlist::Fifo(q) => q.extend(children.iter().map(|c| c.id)),
            Waitlist::Stack(s) => {
                let use_score = kind == StrategyKind::DfsPostorderScore;
                children.sort_by(|a, b| {
                    a.postorder
                        .cmp(&b.postorder)
                        .then_with(|| {
                            if use_score {
                                b.score.cmp(&a.score)
                            } else {
                                std::cmp::Ordering::Equal
                            }
                        })
                        .then_with(|| a.id.cmp(&b.id))
                });
                s.extend(children.iter().rev().map(|c| c.id));
            }
        }
    }

    pub fn drain(&mut self) -> Vec<ArtId> {
        match self {
            Waitlist::Fifo(q) => q.drain(..).collect(),
            Waitlist::Stack(s) => s.drain(..).collect(),
        }
    }
}
