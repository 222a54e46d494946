//! ART construction over the value domain, with counterexample replay and
//! assumption-automaton emission.

mod art;
mod emit;
mod replay;
mod strategy;
mod value;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap as HashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use art::{Art, ArtId, ArtNode, NodeStatus};
pub use emit::emit_assumption_automaton;
pub use replay::{replay, replay_with_goal, Feasibility, ReplayGoal, Witness};
pub use strategy::{make_strategy, StrategyError, StrategyKind, TraversalStrategy};
pub use value::{eval, AbsValue, Valuation};

use crate::automaton::{AaState, AssumptionAutomaton};
use crate::cfa::{Cfa, Edge, NodeId, StatementKind, StmtId};
use strategy::{ChildKey, Waitlist};
use value::equality_binding;

/// Inclusive range that `nondet()` draws from during replay and explicit
/// enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NondetDomain {
    lo: i64,
    hi: i64,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("empty nondet domain: {lo} > {hi}")]
pub struct DomainError {
    pub lo: i64,
    pub hi: i64,
}

impl NondetDomain {
    pub fn new(lo: i64, hi: i64) -> Result<Self, DomainError> {
        if lo > hi {
            return Err(DomainError { lo, hi });
        }
        Ok(NondetDomain { lo, hi })
    }

    pub fn lo(self) -> i64 {
        self.lo
    }

    pub fn hi(self) -> i64 {
        self.hi
    }

    pub fn size(self) -> u64 {
        (self.hi as i128 - self.lo as i128 + 1).min(u64::MAX as i128) as u64
    }

    /// The `index`-th assignment of `k` occurrences, ascending, with the
    /// first occurrence varying slowest.
    pub fn combo(self, mut index: u64, k: u32) -> Vec<i64> {
        let width = self.size();
        let mut out = vec![self.lo; k as usize];
        for slot in out.iter_mut().rev() {
            *slot = (self.lo as i128 + (index % width) as i128) as i64;
            index /= width;
        }
        out
    }
}

impl Default for NondetDomain {
    fn default() -> Self {
        NondetDomain { lo: -8, hi: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub time_limit: Duration,
    /// Cap on ART nodes created, summed over refinement restarts.
    pub max_nodes: Option<usize>,
    pub max_cex: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            time_limit: Duration::from_secs(900),
            max_nodes: None,
            max_cex: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    pub budget: Budget,
    pub domain: NondetDomain,
    pub replay_step_limit: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            budget: Budget::default(),
            domain: NondetDomain::default(),
            replay_step_limit: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("cover target has no statements")]
    EmptyTarget,
}

/// Statements still to be covered, tracked through an assumption automaton.
#[derive(Debug, Clone, Copy)]
pub struct CoverTarget<'a> {
    remaining: &'a BTreeSet<StmtId>,
    aa: &'a AssumptionAutomaton,
}

impl<'a> CoverTarget<'a> {
    pub fn new(remaining: &'a BTreeSet<StmtId>, aa: &'a AssumptionAutomaton) -> Result<Self, SpecError> {
        if remaining.is_empty() {
            return Err(SpecError::EmptyTarget);
        }
        Ok(CoverTarget { remaining, aa })
    }

    pub fn remaining(&self) -> &BTreeSet<StmtId> {
        self.remaining
    }

    pub fn aa(&self) -> &AssumptionAutomaton {
        self.aa
    }
}

/// What counts as a violation.
#[derive(Debug, Clone, Copy)]
pub enum Spec<'a> {
    /// A failing assert.
    Assertions,
    /// A failing assert, or reaching the exit. With `blocking`, reaching the
    /// exit only counts if the run exercised a remaining statement before
    /// the automaton entered `FALSE`.
    ReachExit { blocking: Option<CoverTarget<'a>> },
    /// Reaching the exit with every assert holding, after exercising a
    /// remaining statement before the automaton entered `FALSE`.
    Cover(CoverTarget<'a>),
}

impl<'a> Spec<'a> {
    fn target(&self) -> Option<&CoverTarget<'a>> {
        match self {
            Spec::Assertions | Spec::ReachExit { blocking: None } => None,
            Spec::ReachExit { blocking: Some(t) } | Spec::Cover(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    AssertionFailure,
    ExitReached,
}

/// A concrete run: its statement path and the nondet values it used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub statements: Vec<StmtId>,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub kind: ViolationKind,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    CounterexamplesFound(Vec<Counterexample>),
    Unknown,
}

impl Verdict {
    pub fn counterexamples(&self) -> &[Counterexample] {
        match self {
            Verdict::CounterexamplesFound(c) => c,
            _ => &[],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Safe => "safe",
            Verdict::CounterexamplesFound(_) => "counterexamples",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtStats {
    /// Nodes created, summed over restarts.
    pub nodes: usize,
    pub expanded: usize,
    pub frontier: usize,
    pub covered: usize,
    pub pruned: usize,
    pub refinements: usize,
    pub lines: usize,
    pub interrupted: bool,
}

#[derive(Debug, Clone)]
pub struct ExplorationResult {
    pub verdict: Verdict,
    pub art: Art,
    pub stats: ArtStats,
    /// A confirmed assertion failure.
    pub bug_found: bool,
    /// Statements whose nondet values were enumerated explicitly.
    pub precision: BTreeSet<StmtId>,
}

impl ExplorationResult {
    /// The explored region as an assumption automaton. After a `Safe`
    /// verdict, edges the ART never took are routed to `TRUE`.
    pub fn assumption_automaton(&self, cfa: &Cfa) -> AssumptionAutomaton {
        emit_assumption_automaton(&self.art, cfa, self.verdict == Verdict::Safe)
    }
}

/// Builds an ART for `spec` until it is complete, the budget runs out or
/// enough counterexamples are confirmed.
///
/// `nondet()` starts out as ⊤. A candidate violation whose path does not
/// replay adds the nondet statements on it to the precision and the search
/// restarts; from then on those statements branch on every domain value.
pub fn explore(
    cfa: &Cfa,
    spec: Spec<'_>,
    options: &ExploreOptions,
    strategy: &TraversalStrategy,
) -> ExplorationResult {
    let deadline = Instant::now().checked_add(options.budget.time_limit);
    let mut ex = Explorer {
        cfa,
        spec,
        options,
        strategy,
        postorder: cfa.postorder_index(),
        precision: BTreeSet::new(),
        deadline,
        created: 0,
    };
    let mut refinements = 0;
    loop {
        match ex.attempt() {
            Attempt::Refine(more) => {
                ex.precision.extend(more);
                refinements += 1;
            }
            Attempt::Done { art, cexs, interrupted } => {
                let bug_found = cexs
                    .iter()
                    .any(|c| c.kind == ViolationKind::AssertionFailure);
                let verdict = if !cexs.is_empty() {
                    Verdict::CounterexamplesFound(cexs)
                } else if interrupted {
                    Verdict::Unknown
                } else {
                    Verdict::Safe
                };
                let stats = ArtStats {
                    nodes: ex.created,
                    expanded: art.count(|s| s == NodeStatus::Expanded),
                    frontier: art.count(|s| s == NodeStatus::Frontier),
                    covered: art.count(|s| matches!(s, NodeStatus::CoveredBy(_))),
                    pruned: art.count(|s| s == NodeStatus::Pruned),
                    refinements,
                    lines: art.lines_touched(cfa).len(),
                    interrupted,
                };
                return ExplorationResult {
                    verdict,
                    art,
                    stats,
                    bug_found,
                    precision: ex.precision,
                };
            }
        }
    }
}

enum Attempt {
    Done {
        art: Art,
        cexs: Vec<Counterexample>,
        interrupted: bool,
    },
    Refine(Vec<StmtId>),
}

type CoverKey = (NodeId, Option<AaState>, u32);

struct Successor {
    valuation: Valuation,
    /// Outcome of the assert on the edge, `None` when undetermined.
    assert: Option<Option<bool>>,
}

struct Explorer<'a, 'b> {
    cfa: &'a Cfa,
    spec: Spec<'b>,
    options: &'a ExploreOptions,
    strategy: &'a TraversalStrategy,
    postorder: Vec<usize>,
    precision: BTreeSet<StmtId>,
    deadline: Option<Instant>,
    created: usize,
}

impl Explorer<'_, '_> {
    fn out_of_budget(&self) -> bool {
        self.options.budget.max_nodes.is_some_and(|m| self.created >= m)
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn attempt(&mut self) -> Attempt {
        let cfa = self.cfa;
        let kind = self.strategy.kind();
        let target = self.spec.target().copied();
        let root_aa = target.map(|t| t.aa.initial());
        let mut art = Art::new(cfa.entry(), Valuation::new(cfa.vars().len()), root_aa);
        self.created += 1;
        let mut waitlist = Waitlist::new(kind);
        waitlist.push_front(art.root());
        // tracked sets are interned so coverage keys stay small
        let mut interned: HashMap<Arc<BTreeSet<StmtId>>, u32> = HashMap::default();
        interned.insert(art.node(art.root()).tracked.clone(), 0);
        let mut tracked_ids: Vec<u32> = vec![0];
        let mut exact: HashMap<CoverKey, HashMap<Valuation, ArtId>> = HashMap::default();
        let mut abstracted: HashMap<CoverKey, Vec<ArtId>> = HashMap::default();
        let mut cexs: Vec<Counterexample> = Vec::new();
        let mut interrupted = false;
        let mut stop = false;

        while !stop {
            let Some(n) = waitlist.pop() else { break };
            if self.out_of_budget() {
                waitlist.push_front(n);
                interrupted = true;
                break;
            }
            let node = art.node(n);
            let key: CoverKey = (node.cfa_node, node.aa_state, tracked_ids[n.index()]);
            let concrete = node.valuation.is_concrete();
            // a concrete valuation is only subsumed by an equal one, so those
            // are looked up by hash; valuations with ⊤ are scanned
            let coverer = concrete
                .then(|| exact.get(&key).and_then(|m| m.get(&node.valuation)).copied())
                .flatten()
                .or_else(|| {
                    abstracted.get(&key).and_then(|v| {
                        v.iter()
                            .copied()
                            .find(|&j| art.node(j).valuation.subsumes(&node.valuation))
                    })
                });
            if let Some(j) = coverer {
                art.set_status(n, NodeStatus::CoveredBy(j));
                continue;
            }
            if concrete {
                exact.entry(key).or_default().insert(art.node(n).valuation.clone(), n);
            } else {
                abstracted.entry(key).or_default().push(n);
            }
            art.set_status(n, NodeStatus::Expanded);

            // in cover mode a run that left the automaton without exercising
            // anything can no longer become a violation
            if let Spec::Cover(_) = self.spec {
                let node = art.node(n);
                if node.aa_state == Some(AaState::False) && node.tracked.is_empty() {
                    continue;
                }
            }

            let mut keys = Vec::new();
            let loc = art.node(n).cfa_node;
            for edge in cfa.out_edges(loc) {
                let parent = art.node(n);
                let succs = self.successors(&parent.valuation, edge);
                if succs.is_empty() {
                    continue;
                }
                let mut tracked = parent.tracked.clone();
                let mut tracked_id = tracked_ids[n.index()];
                let aa_state = target.map(|t| {
                    let q = parent.aa_state.expect("product nodes carry a state");
                    let next = t.aa.step(q, edge.stmt.id).unwrap_or(AaState::False);
                    if !next.is_false() && t.remaining.contains(&edge.stmt.id) && !tracked.contains(&edge.stmt.id) {
                        let mut grown = (*tracked).clone();
                        grown.insert(edge.stmt.id);
                        tracked = Arc::new(grown);
                        let fresh = interned.len() as u32;
                        tracked_id = *interned.entry(tracked.clone()).or_insert(fresh);
                    }
                    next
                });
                for succ in succs {
                    let id = art.add_child(n, edge.stmt.id, edge.to, succ.valuation, aa_state, tracked.clone());
                    tracked_ids.push(tracked_id);
                    self.created += 1;
                    let mut candidate = None;
                    match (self.spec, succ.assert) {
                        (Spec::Assertions | Spec::ReachExit { .. }, Some(outcome)) if outcome != Some(true) => {
                            candidate = Some((ReplayGoal::FinalAssertFails, ViolationKind::AssertionFailure));
                            if outcome == Some(false) {
                                art.set_status(id, NodeStatus::Pruned);
                            }
                        }
                        (Spec::Cover(_), Some(Some(false))) => art.set_status(id, NodeStatus::Pruned),
                        _ => {}
                    }
                    if art.node(id).status == NodeStatus::Pruned {
                        // nothing more to do below a failed assert
                    } else if edge.to == cfa.exit() {
                        art.set_status(id, NodeStatus::Expanded);
                        let exit_counts = match self.spec {
                            Spec::Assertions => false,
                            Spec::ReachExit { blocking } => blocking.is_none() || !tracked.is_empty(),
                            Spec::Cover(_) => !tracked.is_empty(),
                        };
                        if exit_counts && candidate.is_none() {
                            candidate = Some((ReplayGoal::AssertsHold, ViolationKind::ExitReached));
                        }
                    } else {
                        keys.push(ChildKey {
                            id,
                            postorder: self.postorder[edge.to.index()],
                            score: self.score(aa_state),
                        });
                    }

                    let Some((goal, vkind)) = candidate else { continue };
                    if stop {
                        continue;
                    }
                    let path = art.path_to(id);
                    match replay_with_goal(cfa, &path, self.options.domain, self.options.replay_step_limit, goal) {
                        Feasibility::Feasible(witness) => {
                            cexs.push(Counterexample {
                                kind: vkind,
                                execution: Execution { statements: path, witness },
                            });
                            let first_bug_stops = matches!(self.spec, Spec::ReachExit { .. })
                                && vkind == ViolationKind::AssertionFailure;
                            if first_bug_stops || cexs.len() >= self.options.budget.max_cex {
                                stop = true;
                            }
                        }
                        Feasibility::Infeasible | Feasibility::Inconclusive => {
                            let missing: Vec<StmtId> = path
                                .iter()
                                .copied()
                                .filter(|s| {
                                    !self.precision.contains(s)
                                        && cfa.statement(*s).is_some_and(|st| st.kind.nondet_count() > 0)
                                })
                                .collect::<BTreeSet<_>>()
                                .into_iter()
                                .collect();
                            if !missing.is_empty() {
                                return Attempt::Refine(missing);
                            }
                        }
                    }
                }
            }
            waitlist.push_children(kind, keys);
        }
        if !waitlist.drain().is_empty() {
            interrupted = true;
        }
        Attempt::Done { art, cexs, interrupted }
    }

    fn score(&self, state: Option<AaState>) -> u64 {
        match (self.strategy.scores(), state) {
            (Some(scores), Some(q)) => scores.get(q),
            _ => 0,
        }
    }

    /// Abstract successors of `env` along `edge`; empty when the edge is
    /// definitely blocked.
    fn successors(&self, env: &Valuation, edge: &Edge) -> Vec<Successor> {
        let stmt = &edge.stmt;
        let k = stmt.kind.nondet_count() as u32;
        let explicit = k > 0 && self.precision.contains(&stmt.id);
        let combos: Vec<Option<Vec<i64>>> = if explicit {
            let domain = self.options.domain;
            let n = domain.size().saturating_pow(k);
            (0..n).map(|i| Some(domain.combo(i, k))).collect()
        } else {
            vec![None]
        };
        let mut out: Vec<Successor> = Vec::new();
        for combo in combos {
            let mut vals = combo.into_iter().flatten();
            let mut nondet = || vals.next().map_or(AbsValue::Top, AbsValue::known);
            let succ = match &stmt.kind {
                StatementKind::Assign { var, expr } => {
                    let mut next = env.clone();
                    next.set(*var, eval(expr, env, &mut nondet));
                    Some(Successor { valuation: next, assert: None })
                }
                StatementKind::Assume(e) => match eval(e, env, &mut nondet).truth() {
                    Some(false) => None,
                    Some(true) => Some(Successor { valuation: env.clone(), assert: None }),
                    None => Some(Successor { valuation: strengthen(env, e), assert: None }),
                },
                StatementKind::Assert(e) => Some(Successor {
                    valuation: env.clone(),
                    assert: Some(eval(e, env, &mut nondet).truth()),
                }),
                StatementKind::Skip | StatementKind::Halt(_) => {
                    Some(Successor { valuation: env.clone(), assert: None })
                }
            };
            if let Some(s) = succ {
                if !out.iter().any(|o| o.valuation == s.valuation && o.assert == s.assert) {
                    out.push(s);
                }
            }
        }
        out
    }
}

/// Binds the variable of an undetermined equality guard to its constant.
fn strengthen(env: &Valuation, guard: &crate::lang::ast::Expr) -> Valuation {
    let mut next = env.clone();
    if let Some((var, c)) = equality_binding(guard) {
        if let AbsValue::Known(v) = eval(c, env, &mut || AbsValue::Top) {
            next.set(var, AbsValue::Known(v));
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combos_vary_first_occurrence_slowest() {
        let d = NondetDomain::new(0, 2).unwrap();
        assert_eq!(d.size(), 3);
        assert_eq!(d.combo(0, 2), vec![0, 0]);
        assert_eq!(d.combo(1, 2), vec![0, 1]);
        assert_eq!(d.combo(3, 2), vec![1, 0]);
        assert_eq!(d.combo(8, 2), vec![2, 2]);
        assert!(NondetDomain::new(1, 0).is_err());
    }
}
