//! Text and JSON renderings of coverage reports.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cfa::{Cfa, StmtId};
use crate::coverage::{CoverageMode, CoverageReport};
use crate::explorer::Witness;

#[derive(Serialize)]
struct Document<'a> {
    program: &'a str,
    mode: CoverageMode,
    total_statements: usize,
    covered_count: usize,
    value: f64,
    executions_used: usize,
    bug_found: bool,
    exhausted: bool,
    covered_ids: Vec<StmtId>,
    per_execution: Vec<ExecutionEntry<'a>>,
    rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    covered_lines: Option<Vec<u32>>,
}

#[derive(Serialize)]
struct ExecutionEntry<'a> {
    round: usize,
    statements: &'a [StmtId],
    nondet_values: Vec<i64>,
    newly_covered: Vec<StmtId>,
}

fn witness_values(w: &Witness) -> Vec<i64> {
    w.values().copied().collect()
}

/// Structured report with a fixed key order. With `cfa`, covered source
/// lines are included.
pub fn to_json(report: &CoverageReport, cfa: Option<&Cfa>) -> String {
    let doc = Document {
        program: &report.program,
        mode: report.mode,
        total_statements: report.total_statements,
        covered_count: report.covered.len(),
        value: report.value(),
        executions_used: report.executions_used,
        bug_found: report.bug_found,
        exhausted: report.exhausted,
        covered_ids: report.covered.iter().copied().collect(),
        per_execution: report
            .per_execution
            .iter()
            .map(|r| ExecutionEntry {
                round: r.round,
                statements: &r.execution.statements,
                nondet_values: witness_values(&r.execution.witness),
                newly_covered: r.newly_covered.iter().copied().collect(),
            })
            .collect(),
        rounds: report.rounds,
        covered_lines: cfa.map(|c| report.covered_lines(c).into_iter().collect()),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn to_text(report: &CoverageReport, cfa: Option<&Cfa>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "program: {}", report.program);
    let _ = writeln!(s, "mode: {}", report.mode.as_str());
    let _ = writeln!(
        s,
        "coverage: {}/{} = {:.4}",
        report.covered.len(),
        report.total_statements,
        report.value()
    );
    let _ = writeln!(s, "executions: {}", report.executions_used);
    let _ = writeln!(s, "rounds: {}", report.rounds);
    let _ = writeln!(s, "bug found: {}", if report.bug_found { "yes" } else { "no" });
    let _ = writeln!(s, "exhausted: {}", if report.exhausted { "yes" } else { "no" });
    let _ = writeln!(s, "covered: [{}]", join(&report.covered));
    if let Some(cfa) = cfa {
        let _ = writeln!(s, "covered lines: [{}]", join(report.covered_lines(cfa)));
    }
    for (i, r) in report.per_execution.iter().enumerate() {
        let _ = writeln!(
            s,
            "execution {i} (round {}): path [{}] nondet [{}] new [{}]",
            r.round,
            join(&r.execution.statements),
            join(witness_values(&r.execution.witness)),
            join(&r.newly_covered)
        );
    }
    s
}
