mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use common::*;
use vericov::automaton::AutomatonState;
use vericov::coverage::{
    exact_coverage, exercised_within_analysis, is_covered, over_approx_coverage, under_approx_coverage, CoverageReport,
};
use vericov::explorer::TraversalStrategy;
use vericov::{compile, AaState, AssumptionAutomaton, Cfa, NodeId, SourceProgram, StateId, StmtId};

fn ids(v: &[u32]) -> BTreeSet<StmtId> {
    v.iter().map(|&i| StmtId(i)).collect()
}

fn chain_aa() -> AssumptionAutomaton {
    // q0 -1-> q1 -2-> FALSE
    let states = vec![
        AutomatonState {
            name: "q0".into(),
            location: NodeId(0),
            transitions: [(StmtId(1), AaState::State(StateId(1)))].into(),
        },
        AutomatonState {
            name: "q1".into(),
            location: NodeId(1),
            transitions: [(StmtId(2), AaState::False)].into(),
        },
    ];
    AssumptionAutomaton::new("c", AaState::State(StateId(0)), states).unwrap()
}

fn exact(cfa: &Cfa, aa: &AssumptionAutomaton) -> CoverageReport {
    exact_coverage(cfa, aa, &options(None, 10, small_domain())).unwrap()
}

/// Depth-first search can unroll a loop with an unknown bound forever, so
/// every search gets a node budget.
fn under(cfa: &Cfa, aa: &AssumptionAutomaton, max_cex: usize) -> CoverageReport {
    under_approx_coverage(cfa, aa, &options(Some(20_000), max_cex, small_domain()), &TraversalStrategy::default()).unwrap()
}

/// Whether every statement path AA1 keeps outside `FALSE` is also kept by
/// AA2, over paths of the CFA.
fn language_included(cfa: &Cfa, a1: &AssumptionAutomaton, a2: &AssumptionAutomaton) -> bool {
    let start = (cfa.entry(), a1.initial(), a2.initial());
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((n, p, q)) = queue.pop_front() {
        if p.is_false() {
            continue;
        }
        if q.is_false() {
            return false;
        }
        for e in cfa.out_edges(n) {
            let next = (e.to, a1.step(p, e.stmt.id).unwrap(), a2.step(q, e.stmt.id).unwrap());
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    true
}

#[test]
fn exercised_examples() {
    let aa = chain_aa();
    assert!(exercised_within_analysis(&[], &aa).is_empty());
    assert_eq!(exercised_within_analysis(&ids_vec(&[1, 2, 3]), &aa), ids(&[1]));
    let dead_branch = load("dead_branch.c");
    let full = vericov::parse_aa(&read_fixture("dead_branch_full.aa")).unwrap();
    let path = ids_vec(&[0, 1, 2, 4, 6, 7]);
    assert_eq!(exercised_within_analysis(&path, &full), path.iter().copied().collect());
    assert_eq!(dead_branch.num_statements(), 8);
}

fn ids_vec(v: &[u32]) -> Vec<StmtId> {
    v.iter().map(|&i| StmtId(i)).collect()
}

#[test]
fn is_covered_examples() {
    let aa = chain_aa();
    let t = ids_vec(&[1, 2, 3]);
    assert!(!is_covered(StmtId(5), &t, &aa, true));
    assert!(!is_covered(StmtId(1), &t, &aa, false));
    assert!(!is_covered(StmtId(3), &t, &aa, true));
    assert!(is_covered(StmtId(1), &t, &aa, true));
}

#[test]
fn long_loop_exact_is_zero_for_any_automaton() {
    let cfa = load("long_loop.c");
    for budget in [Some(10), Some(100), Some(1000)] {
        let aa = first_phase_aa(&cfa, budget, small_domain());
        let r = exact(&cfa, &aa);
        assert!(r.covered.is_empty());
        assert_eq!(r.value(), 0.0);
    }
    let r = exact(&cfa, &AssumptionAutomaton::unexplored("long_loop"));
    assert_eq!(r.value(), 0.0);
}

#[test]
fn exact_excludes_dead_branch() {
    let cfa = load("dead_branch.c");
    let aa = vericov::parse_aa(&read_fixture("dead_branch_full.aa")).unwrap();
    let r = exact(&cfa, &aa);
    assert_eq!(r.covered, ids(&[0, 1, 2, 4, 6, 7]));
    assert_eq!(r.value(), 6.0 / 8.0);
    assert!(!r.exhausted);
}

#[test]
fn unexplored_automaton_needs_one_round() {
    for (name, cfa) in corpus() {
        let aa = AssumptionAutomaton::unexplored(name.as_str());
        let r = exact(&cfa, &aa);
        assert_eq!(r.rounds, 1, "{name}");
        assert!(r.covered.is_empty() && !r.exhausted, "{name}");
        assert_eq!(over_approx_coverage(&cfa, &aa).unwrap().covered.len(), 0, "{name}");
    }
}

#[test]
fn unreachable_exit_uses_no_executions() {
    let cfa = load("corpus/c09_never_exits.c");
    let aa = first_phase_aa(&cfa, None, small_domain());
    let r = under(&cfa, &aa, 10);
    assert_eq!(r.executions_used, 0);
    assert_eq!(r.value(), 0.0);
    assert!(!r.bug_found);
}

#[test]
fn small_bound_loop_fully_covered() {
    let cfa = compile(&SourceProgram::new(
        "long_loop_small",
        "int main() {\n  int i;\n  for (i = 0; i < 10; i++);\n  return 0;\n}\n",
    ))
    .unwrap();
    let aa = first_phase_aa(&cfa, None, small_domain());
    let r = under(&cfa, &aa, 10);
    assert_eq!(r.value(), 1.0);
    // the oracle sees the same
    let oracle = oracle_covered(&cfa, &aa, -2, 2, 200);
    assert_eq!(oracle, cfa.statement_ids());
}

#[test]
fn reachable_failure_short_circuits() {
    for f in ["corpus/c04_failing.c", "corpus/c17_always_fails.c"] {
        let cfa = load(f);
        let aa = first_phase_aa(&cfa, Some(200), small_domain());
        let r = under(&cfa, &aa, 10);
        assert!(r.bug_found, "{f}");
        assert!(r.executions_used < 10, "{f}");
    }
}

#[test]
fn over_includes_dead_branch_when_expanded() {
    let cfa = load("dead_branch.c");
    let aa = vericov::parse_aa(&read_fixture("dead_branch_full.aa")).unwrap();
    let over = over_approx_coverage(&cfa, &aa).unwrap();
    assert!(over.covered.is_superset(&ids(&[3, 5])));
    assert_eq!(over.value(), 1.0);
}

#[test]
fn over_at_least_under_on_corpus() {
    for (name, cfa) in corpus() {
        for budget in [10, 200] {
            let aa = first_phase_aa(&cfa, Some(budget), small_domain());
            let u = under(&cfa, &aa, 10);
            let o = over_approx_coverage(&cfa, &aa).unwrap();
            assert!(o.value() >= u.value(), "{name} {budget}");
            assert!(u.covered.is_subset(&o.covered), "{name} {budget}");
        }
    }
}

#[test]
fn under_executions_each_add_something() {
    for (name, cfa) in corpus() {
        let aa = first_phase_aa(&cfa, Some(200), small_domain());
        let r = under(&cfa, &aa, 10);
        assert!(r.executions_used <= 10, "{name}");
        for rec in &r.per_execution {
            assert!(!rec.newly_covered.is_empty(), "{name}");
        }
    }
}

#[test]
fn psi_monotone_exact_coverage() {
    let cfa = two_region_program("mono", 4);
    let nested = [(0, 0), (1, 0), (1, 1), (3, 1), (3, 4), (6, 6)];
    for w in nested.windows(2) {
        let a1 = two_region_aa(&cfa, w[0].0, w[0].1);
        let a2 = two_region_aa(&cfa, w[1].0, w[1].1);
        assert!(language_included(&cfa, &a1, &a2));
        let c1 = exact(&cfa, &a1).covered;
        let c2 = exact(&cfa, &a2).covered;
        assert!(c1.is_subset(&c2), "{:?} {:?}", w[0], w[1]);
    }
    for (name, cfa) in corpus() {
        let empty = AssumptionAutomaton::unexplored(name.as_str());
        let aa = first_phase_aa(&cfa, Some(50), small_domain());
        assert!(language_included(&cfa, &empty, &aa));
        assert!(exact(&cfa, &empty).covered.is_subset(&exact(&cfa, &aa).covered));
    }
}

#[test]
fn mismatched_automaton_is_rejected() {
    let cfa = load("corpus/c01_straight.c");
    let aa = vericov::parse_aa(&read_fixture("long_loop_unroll.aa")).unwrap();
    assert!(exact_coverage(&cfa, &aa, &options(None, 10, small_domain())).is_err());
    assert!(over_approx_coverage(&cfa, &aa).is_err());
}
