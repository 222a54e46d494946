//! Product of an assumption automaton with a CFA, the least fixpoint of
//! reachable CFA nodes per product state, and per-state scores derived from it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::automaton::{AaState, AssumptionAutomaton, MismatchError};
use crate::cfa::{Cfa, NodeId, StmtId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("statement id mismatch: {0}")]
    StatementIdMismatch(#[from] MismatchError),
    #[error("product edge {from} -> {to} refers to a missing state")]
    UnknownProductState { from: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductState {
    pub aa_state: AaState,
    pub cfa_node: NodeId,
}

/// Product states in discovery order with labelled successor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductGraph {
    states: Vec<ProductState>,
    succ: Vec<Vec<(StmtId, usize)>>,
}

impl ProductGraph {
    /// Builds a graph from explicit parts; edges are `(from, stmt, to)` by index.
    pub fn from_parts(
        states: Vec<ProductState>,
        edges: &[(usize, StmtId, usize)],
    ) -> Result<Self, HeuristicError> {
        let mut succ = vec![Vec::new(); states.len()];
        for &(from, stmt, to) in edges {
            if from >= states.len() || to >= states.len() {
                return Err(HeuristicError::UnknownProductState { from, to });
            }
            succ[from].push((stmt, to));
        }
        Ok(ProductGraph { states, succ })
    }

    pub fn states(&self) -> &[ProductState] {
        &self.states
    }

    pub fn successors(&self, index: usize) -> &[(StmtId, usize)] {
        &self.succ[index]
    }

    pub fn index_of(&self, state: ProductState) -> Option<usize> {
        self.states.iter().position(|&s| s == state)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Product states reachable from `(initial, entry)`. A CFA edge `(n, s, n')`
/// moves `(q, n)` to `(step(q, s), n')`; states paired with `FALSE` have no
/// successors.
pub fn compose(aa: &AssumptionAutomaton, cfa: &Cfa) -> Result<ProductGraph, HeuristicError> {
    aa.check_compatible(cfa)?;
    let start = ProductState {
        aa_state: aa.initial(),
        cfa_node: cfa.entry(),
    };
    let mut index: HashMap<ProductState, usize> = HashMap::new();
    let mut states = vec![start];
    let mut succ: Vec<Vec<(StmtId, usize)>> = vec![Vec::new()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let p = states[i];
        if p.aa_state.is_false() {
            continue;
        }
        for e in cfa.out_edges(p.cfa_node) {
            let q = aa
                .step(p.aa_state, e.stmt.id)
                .expect("product states use states of the automaton");
            let next = ProductState {
                aa_state: q,
                cfa_node: e.to,
            };
            let j = *index.entry(next).or_insert_with(|| {
                states.push(next);
                succ.push(Vec::new());
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            succ[i].push((e.stmt.id, j));
        }
    }
    Ok(ProductGraph { states, succ })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachSets {
    /// Indexed like the product graph's states.
    pub sets: Vec<BTreeSet<NodeId>>,
    /// Iteration rounds that changed at least one set.
    pub rounds: usize,
}

impl ReachSets {
    pub fn as_map(&self, graph: &ProductGraph) -> BTreeMap<ProductState, BTreeSet<NodeId>> {
        graph
            .states()
            .iter()
            .copied()
            .zip(self.sets.iter().cloned())
            .collect()
    }
}

/// Least solution of `Reach(q, n) = {n} ∪ ⋃ Reach(succ)` for `q ≠ FALSE`
/// and `∅` otherwise, by simultaneous Kleene iteration from `∅`.
pub fn reach_fixpoint(graph: &ProductGraph) -> ReachSets {
    let mut sets: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); graph.len()];
    let mut rounds = 0;
    loop {
        let next: Vec<BTreeSet<NodeId>> = (0..graph.len())
            .map(|i| {
                let p = graph.states[i];
                if p.aa_state.is_false() {
                    return BTreeSet::new();
                }
                let mut s: BTreeSet<NodeId> = [p.cfa_node].into();
                for &(_, j) in graph.successors(i) {
                    s.extend(sets[j].iter().copied());
                }
                s
            })
            .collect();
        if next == sets {
            return ReachSets { sets, rounds };
        }
        sets = next;
        rounds += 1;
    }
}

/// Heuristic score per automaton state. Unscored states and `FALSE` score 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoreMap(BTreeMap<AaState, u64>);

impl ScoreMap {
    pub fn get(&self, state: AaState) -> u64 {
        if state.is_false() {
            return 0;
        }
        self.0.get(&state).copied().unwrap_or(0)
    }

    pub fn insert(&mut self, state: AaState, score: u64) {
        if !state.is_false() {
            self.0.insert(state, score);
        }
    }

    /// Entries by descending score, then ascending state.
    pub fn ranked(&self) -> Vec<(AaState, u64)> {
        let mut v: Vec<(AaState, u64)> = self.0.iter().map(|(&q, &s)| (q, s)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Maximum `|Reach|` over the product states of each automaton state.
pub fn score_product(graph: &ProductGraph, reach: &ReachSets) -> ScoreMap {
    let mut map = ScoreMap::default();
    for (p, set) in graph.states().iter().zip(&reach.sets) {
        if p.aa_state.is_false() {
            continue;
        }
        let cur = map.get(p.aa_state);
        map.insert(p.aa_state, cur.max(set.len() as u64));
    }
    map
}

pub fn score(aa: &AssumptionAutomaton, cfa: &Cfa) -> Result<ScoreMap, HeuristicError> {
    let graph = compose(aa, cfa)?;
    let reach = reach_fixpoint(&graph);
    Ok(score_product(&graph, &reach))
}
