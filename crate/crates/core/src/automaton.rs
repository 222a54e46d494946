//! Assumption automata: the condition under which an interrupted analysis
//! verified the program, as an automaton over statement IDs.
//!
//! Besides ordinary states (each pinned to one CFA location) there are two
//! absorbing sinks. `FALSE` marks the unexplored state space, `TRUE` a region
//! that was fully verified. A (state, statement) pair without a recorded
//! transition behaves as a transition into `FALSE`.
//!
//! Text format:
//!
//! ```text
//! AUTOMATON <name>
//! INITIAL <state>
//! STATE <state> @L<cfa-node>
//!   ON <stmt-id> -> <state|__FALSE|__TRUE>
//! END
//! ```

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::cfa::{Cfa, NodeId, StmtId};

pub const FALSE_NAME: &str = "__FALSE";
pub const TRUE_NAME: &str = "__TRUE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A position in the automaton: an ordinary state or one of the sinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AaState {
    State(StateId),
    False,
    True,
}

impl AaState {
    pub fn is_false(self) -> bool {
        self == AaState::False
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonState {
    pub name: String,
    pub location: NodeId,
    pub transitions: BTreeMap<StmtId, AaState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionAutomaton {
    name: String,
    initial: AaState,
    states: Vec<AutomatonState>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate transition on statement {stmt} from state '{state}'")]
    DuplicateTransition {
        line: usize,
        state: String,
        stmt: StmtId,
    },
    #[error("unknown automaton state {0:?}")]
    UnknownState(AaState),
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

/// The automaton refers to statements or locations the CFA does not have.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MismatchError {
    #[error("automaton uses statement {0} which the program does not define")]
    UnknownStatement(StmtId),
    #[error("automaton state '{state}' is located at {location} which the program does not have")]
    UnknownLocation { state: String, location: NodeId },
}

impl AssumptionAutomaton {
    /// Builds an automaton and puts its states in canonical order: breadth-first
    /// by first use from the initial state, following transitions in ascending
    /// statement order; states unreachable from the initial state keep their
    /// relative order at the end.
    pub fn new(
        name: impl Into<String>,
        initial: AaState,
        states: Vec<AutomatonState>,
    ) -> Result<Self, AutomatonError> {
        let mut names = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if s.name == FALSE_NAME || s.name == TRUE_NAME {
                return Err(AutomatonError::Invalid(format!(
                    "state name '{}' is reserved",
                    s.name
                )));
            }
            if s.name.is_empty() || s.name.chars().any(char::is_whitespace) {
                return Err(AutomatonError::Invalid(format!(
                    "invalid state name '{}'",
                    s.name
                )));
            }
            if names.insert(s.name.clone(), i).is_some() {
                return Err(AutomatonError::Invalid(format!(
                    "state '{}' defined twice",
                    s.name
                )));
            }
        }
        let check = |t: AaState| match t {
            AaState::State(id) if id.index() >= states.len() => {
                Err(AutomatonError::UnknownState(t))
            }
            _ => Ok(()),
        };
        check(initial)?;
        for s in &states {
            for &t in s.transitions.values() {
                check(t)?;
            }
        }

        // canonical order
        let mut order = Vec::with_capacity(states.len());
        let mut placed = vec![false; states.len()];
        let mut queue = VecDeque::new();
        if let AaState::State(id) = initial {
            placed[id.index()] = true;
            queue.push_back(id);
        }
        while let Some(id) = queue.pop_front() {
            order.push(id);
            for &t in states[id.index()].transitions.values() {
                if let AaState::State(next) = t {
                    if !placed[next.index()] {
                        placed[next.index()] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
        for (i, p) in placed.iter().enumerate() {
            if !p {
                order.push(StateId(i as u32));
            }
        }
        let mut remap = vec![StateId(0); states.len()];
        for (new, old) in order.iter().enumerate() {
            remap[old.index()] = StateId(new as u32);
        }
        let map = |t: AaState| match t {
            AaState::State(id) => AaState::State(remap[id.index()]),
            other => other,
        };
        let mut slots: Vec<Option<AutomatonState>> = states.into_iter().map(Some).collect();
        let states = order
            .iter()
            .map(|old| {
                let mut s = slots[old.index()].take().expect("each state placed once");
                for t in s.transitions.values_mut() {
                    *t = map(*t);
                }
                s
            })
            .collect();
        Ok(AssumptionAutomaton {
            name: name.into(),
            initial: map(initial),
            states,
        })
    }

    /// The automaton accepting nothing: its initial state is `FALSE`.
    pub fn unexplored(name: impl Into<String>) -> Self {
        AssumptionAutomaton {
            name: name.into(),
            initial: AaState::False,
            states: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> AaState {
        self.initial
    }

    pub fn states(&self) -> &[AutomatonState] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &AutomatonState {
        &self.states[id.index()]
    }

    pub fn location_of(&self, state: AaState) -> Option<NodeId> {
        match state {
            AaState::State(id) => self.states.get(id.index()).map(|s| s.location),
            _ => None,
        }
    }

    pub fn state_name(&self, state: AaState) -> &str {
        match state {
            AaState::False => FALSE_NAME,
            AaState::True => TRUE_NAME,
            AaState::State(id) => &self.states[id.index()].name,
        }
    }

    /// All (source, statement, target) triples in canonical order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, StmtId, AaState)> + '_ {
        self.states.iter().enumerate().flat_map(|(i, s)| {
            s.transitions
                .iter()
                .map(move |(&stmt, &to)| (StateId(i as u32), stmt, to))
        })
    }

    /// Successor of `state` on `stmt`. Sinks absorb; a missing transition
    /// leads to `FALSE`.
    pub fn step(&self, state: AaState, stmt: StmtId) -> Result<AaState, AutomatonError> {
        match state {
            AaState::False => Ok(AaState::False),
            AaState::True => Ok(AaState::True),
            AaState::State(id) => {
                let s = self
                    .states
                    .get(id.index())
                    .ok_or(AutomatonError::UnknownState(state))?;
                Ok(s.transitions.get(&stmt).copied().unwrap_or(AaState::False))
            }
        }
    }

    /// Walks `path` from the initial state.
    pub fn run(&self, path: &[StmtId]) -> AaState {
        path.iter().fold(self.initial, |q, &s| {
            self.step(q, s).expect("states of a built automaton are valid")
        })
    }

    /// The condition: holds iff walking `path` never enters `FALSE`.
    pub fn psi(&self, path: &[StmtId]) -> bool {
        // FALSE is absorbing, so checking the final state suffices
        !self.run(path).is_false()
    }

    pub fn check_compatible(&self, cfa: &Cfa) -> Result<(), MismatchError> {
        for s in &self.states {
            if s.location.index() >= cfa.num_nodes() {
                return Err(MismatchError::UnknownLocation {
                    state: s.name.clone(),
                    location: s.location,
                });
            }
            for stmt in s.transitions.keys() {
                if stmt.index() >= cfa.num_statements() {
                    return Err(MismatchError::UnknownStatement(*stmt));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, AutomatonError> {
        parse_aa(text)
    }

    pub fn serialize(&self) -> String {
        serialize_aa(self)
    }
}

impl fmt::Display for AssumptionAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_aa(self))
    }
}

pub fn serialize_aa(aa: &AssumptionAutomaton) -> String {
    let mut out = String::new();
    writeln!(out, "AUTOMATON {}", aa.name).unwrap();
    writeln!(out, "INITIAL {}", aa.state_name(aa.initial)).unwrap();
    for s in &aa.states {
        writeln!(out, "STATE {} @{}", s.name, s.location).unwrap();
        for (stmt, to) in &s.transitions {
            writeln!(out, "  ON {} -> {}", stmt, aa.state_name(*to)).unwrap();
        }
    }
    out.push_str("END\n");
    out
}

pub fn parse_aa(text: &str) -> Result<AssumptionAutomaton, AutomatonError> {
    let fmt_err = |line: usize, message: String| AutomatonError::Format { line, message };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, first) = lines
        .next()
        .ok_or_else(|| fmt_err(1, "empty automaton text".into()))?;
    let name = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["AUTOMATON", name] => name.to_string(),
        _ => return Err(fmt_err(ln, "expected 'AUTOMATON <name>'".into())),
    };
    let (ln, second) = lines
        .next()
        .ok_or_else(|| fmt_err(ln, "missing INITIAL line".into()))?;
    let (initial_name, initial_line) = match second.split_whitespace().collect::<Vec<_>>().as_slice()
    {
        ["INITIAL", q] => (q.to_string(), ln),
        _ => return Err(fmt_err(ln, "expected 'INITIAL <state>'".into())),
    };

    struct RawState {
        name: String,
        location: NodeId,
        transitions: Vec<(usize, StmtId, String)>,
    }
    let mut raw: Vec<RawState> = Vec::new();
    let mut ended = false;
    for (ln, line) in lines {
        if ended {
            return Err(fmt_err(ln, "content after END".into()));
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["END"] => ended = true,
            ["STATE", q, loc] => {
                let location = loc
                    .strip_prefix("@L")
                    .and_then(|n| n.parse::<u32>().ok())
                    .map(NodeId)
                    .ok_or_else(|| fmt_err(ln, format!("bad location '{loc}', expected @L<n>")))?;
                if *q == FALSE_NAME || *q == TRUE_NAME {
                    return Err(fmt_err(ln, format!("state name '{q}' is reserved")));
                }
                if raw.iter().any(|s| s.name == *q) {
                    return Err(fmt_err(ln, format!("state '{q}' defined twice")));
                }
                raw.push(RawState {
                    name: q.to_string(),
                    location,
                    transitions: Vec::new(),
                });
            }
            ["ON", stmt, "->", target] => {
                let stmt = stmt
                    .parse::<u32>()
                    .map(StmtId)
                    .map_err(|_| fmt_err(ln, format!("bad statement id '{stmt}'")))?;
                let cur = raw
                    .last_mut()
                    .ok_or_else(|| fmt_err(ln, "transition outside of a STATE block".into()))?;
                if cur.transitions.iter().any(|(_, s, _)| *s == stmt) {
                    return Err(AutomatonError::DuplicateTransition {
                        line: ln,
                        state: cur.name.clone(),
                        stmt,
                    });
                }
                cur.transitions.push((ln, stmt, target.to_string()));
            }
            _ => return Err(fmt_err(ln, format!("unrecognized line '{line}'"))),
        }
    }
    if !ended {
        return Err(fmt_err(text.lines().count().max(1), "missing END".into()));
    }

    let index: HashMap<&str, StateId> = raw
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), StateId(i as u32)))
        .collect();
    let resolve = |name: &str, line: usize| -> Result<AaState, AutomatonError> {
        match name {
            FALSE_NAME => Ok(AaState::False),
            TRUE_NAME => Ok(AaState::True),
            _ => index
                .get(name)
                .map(|&id| AaState::State(id))
                .ok_or_else(|| fmt_err(line, format!("reference to undefined state '{name}'"))),
        }
    };
    let initial = resolve(&initial_name, initial_line)?;
    let mut states = Vec::with_capacity(raw.len());
    for s in &raw {
        let mut transitions = BTreeMap::new();
        for (line, stmt, target) in &s.transitions {
            transitions.insert(*stmt, resolve(target, *line)?);
        }
        states.push(AutomatonState {
            name: s.name.clone(),
            location: s.location,
            transitions,
        });
    }
    AssumptionAutomaton::new(name, initial, states)
}
