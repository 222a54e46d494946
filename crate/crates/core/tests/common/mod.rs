#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use vericov::automaton::{AaState, AssumptionAutomaton};
use vericov::cfa::{Cfa, StatementKind, StmtId};
use vericov::explorer::{explore, Budget, ExploreOptions, NondetDomain, Spec, TraversalStrategy};
use vericov::lang::ast::{BinOp, Expr, UnOp};
use vericov::{compile, SourceProgram};

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn load(rel: &str) -> Cfa {
    let name = rel.rsplit('/').next().unwrap().trim_end_matches(".c");
    compile(&SourceProgram::new(name, read_fixture(rel))).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn corpus() -> Vec<(String, Cfa)> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_path("corpus"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".c"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let cfa = load(&format!("corpus/{n}"));
            (n, cfa)
        })
        .collect()
}

pub fn small_domain() -> NondetDomain {
    NondetDomain::new(-2, 2).unwrap()
}

pub fn options(max_nodes: Option<usize>, max_cex: usize, domain: NondetDomain) -> ExploreOptions {
    ExploreOptions {
        budget: Budget {
            time_limit: Duration::from_secs(120),
            max_nodes,
            max_cex,
        },
        domain,
        replay_step_limit: 10_000_000,
    }
}

/// The automaton a budgeted assertion check leaves behind.
pub fn first_phase_aa(cfa: &Cfa, max_nodes: Option<usize>, domain: NondetDomain) -> AssumptionAutomaton {
    let opts = options(max_nodes, 10, domain);
    explore(cfa, Spec::Assertions, &opts, &TraversalStrategy::default()).assumption_automaton(cfa)
}

// Independent concrete semantics used by the oracle.

fn truth(v: i128) -> bool {
    v != 0
}

fn eval(e: &Expr, env: &[i128], nondet: &mut std::slice::Iter<'_, i128>) -> i128 {
    match e {
        Expr::Int(v) => i128::try_from(v).expect("fixture literal fits"),
        Expr::Var(v) => env[v.index()],
        Expr::Nondet => *nondet.next().expect("enough nondet values"),
        Expr::Unary(UnOp::Neg, a) => -eval(a, env, nondet),
        Expr::Unary(UnOp::Not, a) => (!truth(eval(a, env, nondet))) as i128,
        Expr::Binary(op, a, b) => {
            let x = eval(a, env, nondet);
            let y = eval(b, env, nondet);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0 {
                        0
                    } else {
                        x / y
                    }
                }
                BinOp::Rem => {
                    if y == 0 {
                        x
                    } else {
                        x % y
                    }
                }
                BinOp::Lt => (x < y) as i128,
                BinOp::Le => (x <= y) as i128,
                BinOp::Gt => (x > y) as i128,
                BinOp::Ge => (x >= y) as i128,
                BinOp::Eq => (x == y) as i128,
                BinOp::Ne => (x != y) as i128,
                BinOp::And => (truth(x) && truth(y)) as i128,
                BinOp::Or => (truth(x) || truth(y)) as i128,
            }
        }
    }
}

fn nondets(e: &Expr) -> usize {
    match e {
        Expr::Nondet => 1,
        Expr::Int(_) | Expr::Var(_) => 0,
        Expr::Unary(_, a) => nondets(a),
        Expr::Binary(_, a, b) => nondets(a) + nondets(b),
    }
}

fn value_tuples(lo: i64, hi: i64, k: usize) -> Vec<Vec<i128>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v as i128);
                    p
                })
            })
            .collect();
    }
    out
}

/// A terminating execution found by enumeration.
#[derive(Debug, Clone)]
pub struct ConcreteRun {
    pub path: Vec<StmtId>,
    pub phi: bool,
}

/// Every terminating execution of at most `max_len` statements, with each
/// `nondet()` drawn from `lo..=hi`.
pub fn terminating_runs(cfa: &Cfa, lo: i64, hi: i64, max_len: usize) -> Vec<ConcreteRun> {
    let mut runs = Vec::new();
    let mut stack = vec![(cfa.entry(), vec![0i128; cfa.vars().len()], Vec::<StmtId>::new(), true)];
    while let Some((node, env, path, phi)) = stack.pop() {
        if node == cfa.exit() {
            runs.push(ConcreteRun { path, phi });
            continue;
        }
        if path.len() >= max_len {
            continue;
        }
        for e in cfa.edges().iter().filter(|e| e.from == node) {
            let k = match &e.stmt.kind {
                StatementKind::Assign { expr, .. } => nondets(expr),
                StatementKind::Assume(c) | StatementKind::Assert(c) => nondets(c),
                StatementKind::Skip | StatementKind::Halt(_) => 0,
            };
            for vals in value_tuples(lo, hi, k) {
                let mut it = vals.iter();
                let mut env2 = env.clone();
                let mut phi2 = phi;
                match &e.stmt.kind {
                    StatementKind::Assign { var, expr } => env2[var.index()] = eval(expr, &env, &mut it),
                    StatementKind::Assume(c) => {
                        if !truth(eval(c, &env, &mut it)) {
                            continue;
                        }
                    }
                    StatementKind::Assert(c) => phi2 &= truth(eval(c, &env, &mut it)),
                    StatementKind::Skip | StatementKind::Halt(_) => {}
                }
                let mut p = path.clone();
                p.push(e.stmt.id);
                stack.push((e.to, env2, p, phi2));
            }
        }
    }
    runs
}

/// Statements before the first move into `FALSE`, walking the automaton's
/// transition tables directly.
pub fn oracle_exercised(path: &[StmtId], aa: &AssumptionAutomaton) -> BTreeSet<StmtId> {
    let mut q = aa.initial();
    let mut out = BTreeSet::new();
    for s in path {
        q = match q {
            AaState::State(id) => aa.state(id).transitions.get(s).copied().unwrap_or(AaState::False),
            sink => sink,
        };
        if q == AaState::False {
            break;
        }
        out.insert(*s);
    }
    out
}

/// Covered set by definition: statements inside the explored region on some
/// terminating execution on which every assert holds.
pub fn oracle_covered(cfa: &Cfa, aa: &AssumptionAutomaton, lo: i64, hi: i64, max_len: usize) -> BTreeSet<StmtId> {
    terminating_runs(cfa, lo, hi, max_len)
        .iter()
        .filter(|r| r.phi)
        .flat_map(|r| oracle_exercised(&r.path, aa))
        .collect()
}

/// Program with a nondet branch whose arms are empty and meet at one join
/// node, followed by `tail` straight-line statements.
pub fn two_region_program(name: &str, tail: usize) -> Cfa {
    let mut text = String::from("int nondet();\nint main() {\n  int x = nondet();\n  int y = 0;\n");
    text.push_str("  if (x > 0) {\n  } else {\n  }\n");
    for _ in 0..tail {
        text.push_str("  y = y + 1;\n");
    }
    text.push_str("  return y;\n}\n");
    compile(&SourceProgram::new(name, text)).unwrap()
}

/// Automaton that follows the CFA up to its branch node, then follows the
/// then arm for `then_len` statements and the else arm for `else_len`
/// statements before leaving the region.
pub fn two_region_aa(cfa: &Cfa, then_len: usize, else_len: usize) -> AssumptionAutomaton {
    use vericov::automaton::AutomatonState;
    use vericov::StateId;

    let mut states: Vec<AutomatonState> = Vec::new();
    let push = |states: &mut Vec<AutomatonState>, loc| {
        states.push(AutomatonState {
            name: format!("q{}", states.len()),
            location: loc,
            transitions: Default::default(),
        });
        StateId(states.len() as u32 - 1)
    };
    let mut node = cfa.entry();
    let mut cur = push(&mut states, node);
    loop {
        let out: Vec<_> = cfa.out_edges(node).collect();
        if out.len() != 1 {
            break;
        }
        let next = push(&mut states, out[0].to);
        states[cur.index()].transitions.insert(out[0].stmt.id, AaState::State(next));
        cur = next;
        node = out[0].to;
    }
    let split = cur;
    let mut arms: Vec<_> = cfa.out_edges(node).map(|e| (e.stmt.id, e.to)).collect();
    arms.sort();
    for ((stmt, to), len) in arms.into_iter().zip([then_len, else_len]) {
        if len == 0 {
            continue;
        }
        let mut at = push(&mut states, to);
        states[split.index()].transitions.insert(stmt, AaState::State(at));
        let mut n = to;
        for _ in 1..len {
            let Some(e) = cfa.out_edges(n).next() else { break };
            let next = push(&mut states, e.to);
            states[at.index()].transitions.insert(e.stmt.id, AaState::State(next));
            at = next;
            n = e.to;
        }
    }
    AssumptionAutomaton::new(cfa.name(), AaState::State(StateId(0)), states).unwrap()
}

/// A control-path label: source line and statement kind.
pub type Label = (u32, &'static str);

enum Cont<'a> {
    Stmts(&'a [vericov::lang::ast::Stmt]),
    Guard(&'a vericov::lang::ast::Stmt),
    Update(&'a vericov::lang::ast::Stmt),
}

/// Control paths of `main` read off the syntax tree, up to `max_len` labels.
/// Conditions are not evaluated.
pub fn ast_paths(ast: &vericov::lang::ast::Ast, max_len: usize) -> BTreeSet<Vec<Label>> {
    let mut out = BTreeSet::new();
    if ast.body.is_empty() {
        out.insert(vec![(ast.end_line, "halt")]);
        return out;
    }
    walk(vec![Cont::Stmts(&ast.body)], Vec::new(), max_len, &mut out);
    out
}

fn walk<'a>(mut cont: Vec<Cont<'a>>, mut path: Vec<Label>, max: usize, out: &mut BTreeSet<Vec<Label>>) {
    use vericov::lang::ast::StmtKind as K;
    loop {
        if path.len() > max {
            return;
        }
        let Some(top) = cont.pop() else {
            out.insert(path);
            return;
        };
        match top {
            Cont::Stmts([]) => {}
            Cont::Stmts([s, rest @ ..]) => {
                cont.push(Cont::Stmts(rest));
                match &s.kind {
                    K::Decl { .. } | K::Assign { .. } => path.push((s.line, "assign")),
                    K::Skip => path.push((s.line, "skip")),
                    K::Assert(_) => path.push((s.line, "assert")),
                    K::Return(_) => {
                        path.push((s.line, "halt"));
                        if path.len() <= max {
                            out.insert(path);
                        }
                        return;
                    }
                    K::If {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        let mut p = path.clone();
                        p.push((s.line, "assume"));
                        let mut c: Vec<Cont<'a>> = cont.iter().map(clone_cont).collect();
                        c.push(Cont::Stmts(then_branch));
                        walk(c, p, max, out);
                        path.push((s.line, "assume"));
                        if let Some(e) = else_branch {
                            cont.push(Cont::Stmts(e));
                        }
                    }
                    K::While { .. } => {
                        if path.is_empty() {
                            path.push((s.line, "skip"));
                        }
                        cont.push(Cont::Guard(s));
                    }
                    K::For { init, .. } => {
                        match init {
                            Some(i) => path.push((i.line, "assign")),
                            None if path.is_empty() => path.push((s.line, "skip")),
                            None => {}
                        }
                        cont.push(Cont::Guard(s));
                    }
                }
            }
            Cont::Guard(s) => {
                let (body, update) = match &s.kind {
                    K::While { body, .. } => (body, None),
                    K::For { body, update, .. } => (body, update.as_deref()),
                    _ => unreachable!("guards belong to loops"),
                };
                let mut p = path.clone();
                p.push((s.line, "assume"));
                let mut c: Vec<Cont<'a>> = cont.iter().map(clone_cont).collect();
                c.push(Cont::Guard(s));
                if let Some(u) = update {
                    c.push(Cont::Update(u));
                }
                c.push(Cont::Stmts(body));
                walk(c, p, max, out);
                path.push((s.line, "assume"));
            }
            Cont::Update(s) => path.push((s.line, "assign")),
        }
    }
}

fn clone_cont<'a>(c: &Cont<'a>) -> Cont<'a> {
    match c {
        Cont::Stmts(s) => Cont::Stmts(s),
        Cont::Guard(s) => Cont::Guard(s),
        Cont::Update(s) => Cont::Update(s),
    }
}

/// Entry-to-exit paths of the CFA, up to `max_len` edges, as labels.
pub fn cfa_paths(cfa: &Cfa, max_len: usize) -> BTreeSet<Vec<Label>> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(cfa.entry(), Vec::<Label>::new())];
    while let Some((n, path)) = stack.pop() {
        if n == cfa.exit() {
            out.insert(path);
            continue;
        }
        if path.len() >= max_len {
            continue;
        }
        for e in cfa.out_edges(n) {
            let mut p = path.clone();
            p.push((e.stmt.source_line, e.stmt.kind.name()));
            stack.push((e.to, p));
        }
    }
    out
}
