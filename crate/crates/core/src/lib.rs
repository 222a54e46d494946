//! Verification coverage for a small C-like language: control flow
//! automata, budgeted ART exploration, assumption automata and coverage
//! computation.

pub mod automaton;
pub mod cfa;
pub mod coverage;
pub mod explorer;
pub mod heuristic;
pub mod lang;
pub mod report;

pub use automaton::{parse_aa, serialize_aa, AaState, AssumptionAutomaton, AutomatonError, StateId};
pub use cfa::{Cfa, NodeId, StatementKind, StmtId};
pub use coverage::{
    exact_coverage, exercised_within_analysis, is_covered, over_approx_coverage, under_approx_coverage,
    CoverageError, CoverageMode, CoverageReport,
};
pub use explorer::{
    explore, make_strategy, Budget, CoverTarget, ExplorationResult, ExploreOptions, NondetDomain, Spec,
    StrategyKind, TraversalStrategy, Verdict,
};
pub use heuristic::{compose, reach_fixpoint, score, ScoreMap};
pub use lang::{compile, ParseError, SourceProgram};
