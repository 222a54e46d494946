//! Verification coverage: exact, from generated executions, and from the
//! contents of an assumption automaton.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{AaState, AssumptionAutomaton, MismatchError};
use crate::cfa::{Cfa, StmtId};
use crate::explorer::{
    explore, CoverTarget, Execution, ExploreOptions, Spec, TraversalStrategy, Verdict,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverageError {
    #[error("statement id mismatch: {0}")]
    StatementIdMismatch(#[from] MismatchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageMode {
    Exact,
    Under,
    Over,
}

impl CoverageMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoverageMode::Exact => "exact",
            CoverageMode::Under => "under",
            CoverageMode::Over => "over",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    /// Zero-based exploration round that produced the execution.
    pub round: usize,
    pub execution: Execution,
    pub newly_covered: BTreeSet<StmtId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub program: String,
    pub mode: CoverageMode,
    pub total_statements: usize,
    pub covered: BTreeSet<StmtId>,
    pub executions_used: usize,
    pub bug_found: bool,
    /// The budget ran out before the computation finished.
    pub exhausted: bool,
    pub per_execution: Vec<ExecutionRecord>,
    /// Exploration rounds performed.
    pub rounds: usize,
}

impl CoverageReport {
    fn new(cfa: &Cfa, mode: CoverageMode) -> Self {
        CoverageReport {
            program: cfa.name().to_string(),
            mode,
            total_statements: cfa.num_statements(),
            covered: BTreeSet::new(),
            executions_used: 0,
            bug_found: false,
            exhausted: false,
            per_execution: Vec::new(),
            rounds: 0,
        }
    }

    pub fn value(&self) -> f64 {
        if self.total_statements == 0 {
            return 0.0;
        }
        self.covered.len() as f64 / self.total_statements as f64
    }

    /// Source lines of the covered statements.
    pub fn covered_lines(&self, cfa: &Cfa) -> BTreeSet<u32> {
        self.covered
            .iter()
            .filter_map(|&s| cfa.statement(s).map(|st| st.source_line))
            .collect()
    }

    fn record(&mut self, execution: Execution, aa: &AssumptionAutomaton) -> BTreeSet<StmtId> {
        let exercised = exercised_within_analysis(&execution.statements, aa);
        let newly: BTreeSet<StmtId> = exercised.difference(&self.covered).copied().collect();
        self.covered.extend(newly.iter().copied());
        self.executions_used += 1;
        self.per_execution.push(ExecutionRecord {
            round: self.rounds - 1,
            execution,
            newly_covered: newly.clone(),
        });
        newly
    }
}

/// Labels of the transitions taken by `cex` before the automaton first
/// enters `FALSE`.
pub fn exercised_within_analysis(cex: &[StmtId], aa: &AssumptionAutomaton) -> BTreeSet<StmtId> {
    let mut q = aa.initial();
    let mut out = BTreeSet::new();
    for &s in cex {
        q = aa.step(q, s).unwrap_or(AaState::False);
        if q.is_false() {
            break;
        }
        out.insert(s);
    }
    out
}

/// Whether `s` is covered by the terminating execution `t`.
pub fn is_covered(s: StmtId, t: &[StmtId], aa: &AssumptionAutomaton, phi_holds: bool) -> bool {
    phi_holds && exercised_within_analysis(t, aa).contains(&s)
}

fn remaining_time(start: Instant, limit: Duration) -> Option<Duration> {
    limit.checked_sub(start.elapsed()).filter(|d| !d.is_zero())
}

/// Exact coverage by repeated exploration for executions that exercise a
/// statement not yet covered. Each round accepts up to `max_cex` of them.
/// Stops when no such execution exists or, with `exhausted` set, when the
/// budget runs out.
///
/// Rounds search breadth-first so every candidate at finite depth is
/// eventually checked, which is what drives precision refinement.
pub fn exact_coverage(
    cfa: &Cfa,
    aa: &AssumptionAutomaton,
    options: &ExploreOptions,
) -> Result<CoverageReport, CoverageError> {
    aa.check_compatible(cfa)?;
    let mut report = CoverageReport::new(cfa, CoverageMode::Exact);
    let start = Instant::now();
    let strategy = TraversalStrategy::bfs();
    let mut remaining = cfa.statement_ids();
    while !remaining.is_empty() {
        let Some(time_limit) = remaining_time(start, options.budget.time_limit) else {
            report.exhausted = true;
            break;
        };
        let mut round = *options;
        round.budget.time_limit = time_limit;
        let target = CoverTarget::new(&remaining, aa).expect("remaining is non-empty");
        let result = explore(cfa, Spec::Cover(target), &round, &strategy);
        report.rounds += 1;
        match result.verdict {
            Verdict::Safe => break,
            Verdict::Unknown => {
                report.exhausted = true;
                break;
            }
            Verdict::CounterexamplesFound(cexs) => {
                for c in cexs {
                    report.record(c.execution, aa);
                }
                remaining = remaining.difference(&report.covered).copied().collect();
            }
        }
    }
    Ok(report)
}

/// Coverage from up to `max_cex` generated terminating executions. Each
/// search only accepts an execution that covers something new. An
/// assertion failure found on the way sets `bug_found` and ends the run.
pub fn under_approx_coverage(
    cfa: &Cfa,
    aa: &AssumptionAutomaton,
    options: &ExploreOptions,
    strategy: &TraversalStrategy,
) -> Result<CoverageReport, CoverageError> {
    aa.check_compatible(cfa)?;
    let mut report = CoverageReport::new(cfa, CoverageMode::Under);
    let start = Instant::now();
    let mut remaining = cfa.statement_ids();
    while report.executions_used < options.budget.max_cex && !remaining.is_empty() {
        let Some(time_limit) = remaining_time(start, options.budget.time_limit) else {
            report.exhausted = true;
            break;
        };
        let mut round = *options;
        round.budget.time_limit = time_limit;
        round.budget.max_cex = 1;
        let target = CoverTarget::new(&remaining, aa).expect("remaining is non-empty");
        let result = explore(cfa, Spec::ReachExit { blocking: Some(target) }, &round, strategy);
        report.rounds += 1;
        if result.bug_found {
            report.bug_found = true;
            break;
        }
        match result.verdict {
            Verdict::Safe => break,
            Verdict::Unknown => {
                report.exhausted = true;
                break;
            }
            Verdict::CounterexamplesFound(cexs) => {
                for c in cexs {
                    report.record(c.execution, aa);
                }
                remaining = remaining.difference(&report.covered).copied().collect();
            }
        }
    }
    Ok(report)
}

/// Statements the automaton lets through: labels of transitions between
/// non-`FALSE` states, plus everything the CFA can reach after a
/// transition into `TRUE`.
pub fn over_approx_coverage(cfa: &Cfa, aa: &AssumptionAutomaton) -> Result<CoverageReport, CoverageError> {
    aa.check_compatible(cfa)?;
    let mut report = CoverageReport::new(cfa, CoverageMode::Over);
    for (_, stmt, to) in aa.transitions() {
        match to {
            AaState::False => {}
            AaState::State(_) => {
                report.covered.insert(stmt);
            }
            AaState::True => {
                report.covered.insert(stmt);
                if let Some(e) = cfa.edge(stmt) {
                    report.covered.extend(cfa.statements_reachable_from(e.to));
                }
            }
        }
    }
    Ok(report)
}
