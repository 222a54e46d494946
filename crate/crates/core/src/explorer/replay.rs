//! Feasibility check of a statement path by concrete re-execution, searching
//! over values for the `nondet()` occurrences along the path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::value::{eval, AbsValue, Valuation};
use super::NondetDomain;
use crate::cfa::{Cfa, StatementKind, StmtId};

/// Concrete values for nondet occurrences, keyed by occurrence index along
/// the path.
pub type Witness = BTreeMap<usize, i64>;

/// What a replay has to establish besides every assume holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayGoal {
    /// Only assumes constrain the path.
    Assumes,
    /// Every assert on the path must hold as well.
    AssertsHold,
    /// The path ends in an assert that must fail. Earlier asserts are unconstrained.
    FinalAssertFails,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible,
    /// The step limit ran out before the search space was exhausted.
    Inconclusive,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

pub fn replay(cfa: &Cfa, path: &[StmtId], domain: NondetDomain, step_limit: usize) -> Feasibility {
    replay_with_goal(cfa, path, domain, step_limit, ReplayGoal::Assumes)
}

struct Choice {
    pos: usize,
    env: Valuation,
    witness_len: usize,
    combo: u64,
    combos: u64,
}

pub fn replay_with_goal(
    cfa: &Cfa,
    path: &[StmtId],
    domain: NondetDomain,
    step_limit: usize,
    goal: ReplayGoal,
) -> Feasibility {
    // structural validity first, so the search only deals with values
    let mut at = cfa.entry();
    for &id in path {
        match cfa.edge(id) {
            Some(e) if e.from == at => at = e.to,
            _ => return Feasibility::Infeasible,
        }
    }
    if goal == ReplayGoal::FinalAssertFails
        && !matches!(
            path.last().and_then(|&id| cfa.statement(id)).map(|s| &s.kind),
            Some(StatementKind::Assert(_))
        )
    {
        return Feasibility::Infeasible;
    }

    let width = domain.size();
    let mut steps = 0usize;
    let mut env = Valuation::new(cfa.vars().len());
    let mut witness: Vec<i64> = Vec::new();
    let mut choices: Vec<Choice> = Vec::new();
    let mut pos = 0;

    loop {
        // advance as far as possible
        let mut failed = false;
        while pos < path.len() {
            steps += 1;
            if steps > step_limit {
                return Feasibility::Inconclusive;
            }
            let stmt = &cfa.statement(path[pos]).expect("validated above").kind;
            let k = stmt.nondet_count() as u32;
            let values: Vec<i64> = if k == 0 {
                Vec::new()
            } else {
                let combos = width.checked_pow(k).unwrap_or(u64::MAX);
                choices.push(Choice {
                    pos,
                    env: env.clone(),
                    witness_len: witness.len(),
                    combo: 0,
                    combos,
                });
                domain.combo(0, k)
            };
            if exec(stmt, &mut env, &values, goal, pos + 1 == path.len()) {
                witness.extend(values);
                pos += 1;
            } else {
                failed = true;
                break;
            }
        }
        if !failed {
            return Feasibility::Feasible(witness.into_iter().enumerate().collect());
        }

        // backtrack to the latest choice with untried values
        loop {
            let Some(choice) = choices.last_mut() else {
                return Feasibility::Infeasible;
            };
            choice.combo += 1;
            if choice.combo >= choice.combos {
                choices.pop();
                continue;
            }
            steps += 1;
            if steps > step_limit {
                return Feasibility::Inconclusive;
            }
            env = choice.env.clone();
            witness.truncate(choice.witness_len);
            pos = choice.pos;
            let stmt = &cfa.statement(path[pos]).expect("validated above").kind;
            let k = stmt.nondet_count() as u32;
            let values = domain.combo(choice.combo, k);
            if exec(stmt, &mut env, &values, goal, pos + 1 == path.len()) {
                witness.extend(values);
                pos += 1;
                break;
            }
        }
    }
}

/// Executes one statement concretely; false when the path is blocked.
fn exec(stmt: &StatementKind, env: &mut Valuation, values: &[i64], goal: ReplayGoal, last: bool) -> bool {
    let mut it = values.iter();
    let mut nondet = || AbsValue::known(*it.next().expect("one value per occurrence"));
    match stmt {
        StatementKind::Assign { var, expr } => {
            let v = eval(expr, env, &mut nondet);
            env.set(*var, v);
            true
        }
        StatementKind::Assume(e) => eval(e, env, &mut nondet).truth() == Some(true),
        StatementKind::Assert(e) => {
            let holds = eval(e, env, &mut nondet).truth() == Some(true);
            match goal {
                ReplayGoal::Assumes => true,
                ReplayGoal::AssertsHold => holds,
                ReplayGoal::FinalAssertFails => !last || !holds,
            }
        }
        StatementKind::Skip | StatementKind::Halt(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{compile, SourceProgram};

    fn cfa(text: &str) -> Cfa {
        compile(&SourceProgram::new("t", text)).unwrap()
    }

    fn ids(v: &[u32]) -> Vec<StmtId> {
        v.iter().copied().map(StmtId).collect()
    }

    const LIMIT: usize = 1_000_000;

    #[test]
    fn trivially_true_assume() {
        let c = cfa("int main() { if (1 == 1) { } return 0; }");
        // 0: assume 1==1, 1: assume !(1==1), 2: return
        let r = replay(&c, &ids(&[0, 2]), NondetDomain::default(), LIMIT);
        assert_eq!(r, Feasibility::Feasible(Witness::new()));
        let r = replay(&c, &ids(&[1, 2]), NondetDomain::default(), LIMIT);
        assert_eq!(r, Feasibility::Infeasible);
    }

    #[test]
    fn dead_branch_is_infeasible() {
        let c = cfa("int main() { int x = nondet(); if (x*x < 0) { x = 1; } return 0; }");
        // 0: x = nondet, 1: assume x*x<0, 2: assume !, 3: x = 1, 4: return
        for domain in [NondetDomain::default(), NondetDomain::new(-100, 100).unwrap()] {
            let r = replay(&c, &ids(&[0, 1, 3, 4]), domain, LIMIT);
            assert_eq!(r, Feasibility::Infeasible);
        }
        let r = replay(&c, &ids(&[0, 2, 4]), NondetDomain::default(), LIMIT);
        assert_eq!(r, Feasibility::Feasible([(0, -8)].into_iter().collect()));
    }

    #[test]
    fn finds_required_value() {
        let c = cfa("int main() { int x = nondet(); if (x == 3) { return 1; } return 0; }");
        let r = replay(&c, &ids(&[0, 1, 3]), NondetDomain::default(), LIMIT);
        assert_eq!(r, Feasibility::Feasible([(0, 3)].into_iter().collect()));
        let small = NondetDomain::new(-2, 2).unwrap();
        assert_eq!(replay(&c, &ids(&[0, 1, 3]), small, LIMIT), Feasibility::Infeasible);
    }

    #[test]
    fn backtracks_across_occurrences() {
        let c = cfa("int main() { int a = nondet(); int b = nondet(); assert(a + b == 5 && a > b); return 0; }");
        let path = ids(&[0, 1, 2, 3]);
        let r = replay_with_goal(&c, &path, NondetDomain::default(), LIMIT, ReplayGoal::AssertsHold);
        assert_eq!(r, Feasibility::Feasible([(0, 3), (1, 2)].into_iter().collect()));
        let fail = replay_with_goal(
            &c,
            &ids(&[0, 1, 2]),
            NondetDomain::default(),
            LIMIT,
            ReplayGoal::FinalAssertFails,
        );
        assert_eq!(fail, Feasibility::Feasible([(0, -8), (1, -8)].into_iter().collect()));
    }

    #[test]
    fn step_limit_gives_inconclusive() {
        let c = cfa("int main() { int a = nondet(); int b = nondet(); assert(a == 100); return 0; }");
        let r = replay_with_goal(&c, &ids(&[0, 1, 2, 3]), NondetDomain::default(), 50, ReplayGoal::AssertsHold);
        assert_eq!(r, Feasibility::Inconclusive);
    }

    #[test]
    fn broken_paths_are_infeasible() {
        let c = cfa("int main() { int x = 1; x = 2; return x; }");
        assert_eq!(replay(&c, &ids(&[1, 2]), NondetDomain::default(), LIMIT), Feasibility::Infeasible);
        assert!(replay(&c, &ids(&[0, 1, 2]), NondetDomain::default(), LIMIT).is_feasible());
    }
}
