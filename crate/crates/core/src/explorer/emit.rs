use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::art::{Art, ArtId, NodeStatus};
use super::value::Valuation;
use crate::automaton::{AaState, AssumptionAutomaton, AutomatonState, StateId};
use crate::cfa::{Cfa, NodeId, StmtId};

/// Turns an ART into an assumption automaton.
///
/// Nodes at the same location with equal valuations share a class. Automaton
/// states are sets of classes, built by subset construction so the result
/// stays deterministic when one class has several children on the same
/// statement. A transition whose target contains a never-expanded node goes
/// to `FALSE`; covered nodes stand for their coverer. With
/// `route_unmatched_to_true`, out-edges of a state's location that the ART
/// never took are sent to `TRUE`.
pub fn emit_assumption_automaton(
    art: &Art,
    cfa: &Cfa,
    route_unmatched_to_true: bool,
) -> AssumptionAutomaton {
    let mut class_of: Vec<Option<usize>> = vec![None; art.len()];
    let mut keys: HashMap<(NodeId, &Valuation), usize> = HashMap::new();
    let mut class_loc: Vec<NodeId> = Vec::new();
    let mut class_frontier: Vec<bool> = Vec::new();
    let mut class_members: Vec<Vec<ArtId>> = Vec::new();
    for n in art.nodes() {
        if !matches!(n.status, NodeStatus::Expanded | NodeStatus::Frontier) {
            continue;
        }
        let c = *keys.entry((n.cfa_node, &n.valuation)).or_insert_with(|| {
            class_loc.push(n.cfa_node);
            class_frontier.push(false);
            class_members.push(Vec::new());
            class_loc.len() - 1
        });
        class_of[n.id.index()] = Some(c);
        if n.status == NodeStatus::Frontier {
            class_frontier[c] = true;
        } else {
            class_members[c].push(n.id);
        }
    }
    let resolve = |id: ArtId| -> Option<usize> {
        let rep = art.representative(id);
        class_of[rep.index()]
    };

    let name = cfa.name().to_string();
    let Some(root_class) = resolve(art.root()) else {
        return AssumptionAutomaton::unexplored(name);
    };
    if class_frontier[root_class] {
        return AssumptionAutomaton::unexplored(name);
    }

    let mut ids: HashMap<BTreeSet<usize>, StateId> = HashMap::new();
    let mut states: Vec<AutomatonState> = Vec::new();
    let mut queue: VecDeque<(StateId, BTreeSet<usize>)> = VecDeque::new();

    let mut intern = |set: BTreeSet<usize>,
                      states: &mut Vec<AutomatonState>,
                      queue: &mut VecDeque<(StateId, BTreeSet<usize>)>|
     -> StateId {
        if let Some(&id) = ids.get(&set) {
            return id;
        }
        let id = StateId(states.len() as u32);
        let loc = class_loc[*set.iter().next().expect("non-empty class set")];
        states.push(AutomatonState {
            name: format!("q{}", id.0),
            location: loc,
            transitions: BTreeMap::new(),
        });
        ids.insert(set.clone(), id);
        queue.push_back((id, set));
        id
    };

    let start: BTreeSet<usize> = [root_class].into();
    let initial = intern(start, &mut states, &mut queue);
    while let Some((me, set)) = queue.pop_front() {
        let mut targets: BTreeMap<StmtId, BTreeSet<usize>> = BTreeMap::new();
        for &c in &set {
            for &m in &class_members[c] {
                for &child in art.children(m) {
                    let stmt = art
                        .node(child)
                        .incoming_stmt
                        .expect("children have an incoming statement");
                    if let Some(tc) = resolve(child) {
                        targets.entry(stmt).or_default().insert(tc);
                    }
                }
            }
        }
        let mut transitions = BTreeMap::new();
        for (stmt, target) in targets {
            let to = if target.iter().any(|&c| class_frontier[c]) {
                AaState::False
            } else {
                AaState::State(intern(target, &mut states, &mut queue))
            };
            transitions.insert(stmt, to);
        }
        if route_unmatched_to_true {
            let loc = states[me.index()].location;
            for e in cfa.out_edges(loc) {
                transitions.entry(e.stmt.id).or_insert(AaState::True);
            }
        }
        states[me.index()].transitions = transitions;
    }

    AssumptionAutomaton::new(name, AaState::State(initial), states)
        .expect("emitted automaton is well-formed")
}
