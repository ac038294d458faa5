//! Bounded breadth-first exploration of a session's reachable states.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::label::CommLabel;
use crate::par::{self, Execution};
use crate::session::{render_state, ProcessGraph, Session, State};

/// Exploration limits, shared by exploration, checking and inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Maximum number of distinct states (or, for typing, visited pairs).
    pub max_states: usize,
    /// Maximum length of any single (sender, receiver) channel.
    pub max_queue: usize,
}

pub type CheckBounds = Bounds;

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_states: 100_000, max_queue: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bounds must be positive (max states {max_states}, max queue {max_queue})")]
pub struct BoundsError {
    pub max_states: usize,
    pub max_queue: usize,
}

impl Bounds {
    pub fn new(max_states: usize, max_queue: usize) -> Result<Self, BoundsError> {
        if max_states == 0 || max_queue == 0 {
            return Err(BoundsError { max_states, max_queue });
        }
        Ok(Bounds { max_states, max_queue })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub label: CommLabel,
    pub to: usize,
}

/// The explored fragment of a session's transition system. State 0 is the
/// initial state; states are numbered in breadth-first order.
#[derive(Clone, Debug)]
pub struct StateGraph {
    graph: Arc<ProcessGraph>,
    states: Vec<State>,
    index: HashMap<State, usize>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    truncated: BTreeSet<usize>,
}

impl PartialEq for StateGraph {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states && self.edges == other.edges && self.truncated == other.truncated
    }
}

impl StateGraph {
    pub fn process_graph(&self) -> &Arc<ProcessGraph> {
        &self.graph
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn session(&self, i: usize) -> Session {
        Session::from_state(Arc::clone(&self.graph), self.states[i].clone())
    }

    pub fn index_of(&self, state: &State) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = &Edge> {
        self.out[i].iter().map(|e| &self.edges[*e])
    }

    pub fn truncated(&self) -> &BTreeSet<usize> {
        &self.truncated
    }

    pub fn is_complete(&self) -> bool {
        self.truncated.is_empty()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Shortest label sequence from the initial state to state `i`.
    pub fn trace_to(&self, mut i: usize) -> Vec<CommLabel> {
        let mut trace = Vec::new();
        while let Some(e) = self.parent[i] {
            trace.push(self.edges[e].label.clone());
            i = self.edges[e].from;
        }
        trace.reverse();
        trace
    }

    /// States reachable from `start` (inclusive).
    pub fn forward_closure(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut work = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = work.pop_front() {
            for e in self.outgoing(i) {
                if !seen[e.to] {
                    seen[e.to] = true;
                    work.push_back(e.to);
                }
            }
        }
        seen
    }

    /// States from which some truncated state is reachable.
    pub fn reaches_truncation(&self) -> Vec<bool> {
        self.backward_closure(self.truncated.iter().copied(), |_| true)
    }

    /// Backward closure from `seeds` over edges accepted by `follow`.
    pub fn backward_closure(
        &self,
        seeds: impl IntoIterator<Item = usize>,
        follow: impl Fn(&Edge) -> bool,
    ) -> Vec<bool> {
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); self.states.len()];
        for (k, e) in self.edges.iter().enumerate() {
            incoming[e.to].push(k);
        }
        let mut seen = vec![false; self.states.len()];
        let mut work = VecDeque::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                work.push_back(s);
            }
        }
        while let Some(i) = work.pop_front() {
            for k in &incoming[i] {
                let e = &self.edges[*k];
                if follow(e) && !seen[e.from] {
                    seen[e.from] = true;
                    work.push_back(e.from);
                }
            }
        }
        seen
    }

    pub fn render_state(&self, i: usize) -> String {
        render_state(&self.graph, &self.states[i])
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph session {\n  node [shape=box, fontname=monospace];\n");
        for i in 0..self.states.len() {
            let label = escape(&self.render_state(i));
            let style = if i == 0 {
                ", style=bold"
            } else if self.truncated.contains(&i) {
                ", style=dashed"
            } else {
                ""
            };
            let _ = writeln!(out, "  s{i} [label=\"{label}\"{style}];");
        }
        for e in &self.edges {
            let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", e.from, e.to, escape(&e.label.dot_string()));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "states": (0..self.states.len()).map(|i| self.render_state(i)).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from,
                "label": e.label.to_string(),
                "to": e.to,
            })).collect::<Vec<_>>(),
            "initial": 0,
            "truncated": self.truncated.iter().collect::<Vec<_>>(),
        })
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

enum Successor {
    Next(CommLabel, State),
    QueueOverflow,
}

fn successors(graph: &ProcessGraph, state: &State, max_queue: usize) -> Vec<Successor> {
    state
        .enabled_labels(graph)
        .into_iter()
        .map(|label| {
            let next = state.step(graph, &label).expect("enabled label steps");
            if next.queue.max_channel_len() > max_queue {
                Successor::QueueOverflow
            } else {
                Successor::Next(label, next)
            }
        })
        .collect()
}

pub fn explore(s: &Session, bounds: Bounds) -> StateGraph {
    explore_with(s, bounds, Execution::default())
}

/// Breadth-first exploration. Each frontier level is expanded with `exec`
/// and merged in frontier order, so the result does not depend on it.
pub fn explore_with(s: &Session, bounds: Bounds, exec: Execution) -> StateGraph {
    let graph = Arc::clone(s.graph());
    let initial = s.state().clone();
    let mut sg = StateGraph {
        graph: Arc::clone(&graph),
        states: vec![initial.clone()],
        index: HashMap::from([(initial, 0)]),
        edges: Vec::new(),
        out: vec![Vec::new()],
        parent: vec![None],
        truncated: BTreeSet::new(),
    };
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let states: Vec<&State> = frontier.iter().map(|i| &sg.states[*i]).collect();
        let expansions = par::map(exec, &states, |st| successors(&graph, st, bounds.max_queue));
        let mut next_frontier = Vec::new();
        for (from, succs) in frontier.iter().copied().zip(expansions) {
            for succ in succs {
                let (label, next) = match succ {
                    Successor::Next(label, next) => (label, next),
                    Successor::QueueOverflow => {
                        sg.truncated.insert(from);
                        continue;
                    }
                };
                let to = match sg.index.get(&next) {
                    Some(to) => *to,
                    None if sg.states.len() >= bounds.max_states => {
                        sg.truncated.insert(from);
                        continue;
                    }
                    None => {
                        let to = sg.states.len();
                        sg.index.insert(next.clone(), to);
                        sg.states.push(next);
                        sg.out.push(Vec::new());
                        sg.parent.push(Some(sg.edges.len()));
                        next_frontier.push(to);
                        to
                    }
                };
                sg.out[from].push(sg.edges.len());
                sg.edges.push(Edge { from, label, to });
            }
        }
        frontier = next_frontier;
    }
    sg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::run_trace;
    use crate::syntax::load_program;

    const EXAMPLE: &str = "
        participant P = s!req . (s?res . P + s?halt . s?res . end)
        participant Q = c?req . c!res . Q + c!halt . c?req . c!res . end
        session CS = c :: P || s :: Q with []
        participant Flood = q!l . Flood
        session F = p :: Flood with []
        session Done = p :: end with []
    ";

    #[test]
    fn example_one_is_finite() {
        let r = load_program(EXAMPLE).unwrap();
        let cs = r.session("CS").unwrap();
        let sg = explore(cs, Bounds::new(1000, 2).unwrap());
        assert!(sg.is_complete());
        // the request/response loop returns to the initial state
        let back = sg.edges().iter().filter(|e| e.to == 0).count();
        assert!(back >= 1);
        for i in 0..sg.len() {
            assert_eq!(run_trace(cs, &sg.trace_to(i)).unwrap().state(), sg.state(i));
        }
    }

    #[test]
    fn final_session_has_one_state() {
        let r = load_program(EXAMPLE).unwrap();
        let sg = explore(r.session("Done").unwrap(), Bounds::default());
        assert_eq!((sg.len(), sg.edges().len()), (1, 0));
    }

    #[test]
    fn unread_channel_truncates() {
        let r = load_program(EXAMPLE).unwrap();
        let sg = explore(r.session("F").unwrap(), Bounds::new(1000, 3).unwrap());
        assert!(!sg.truncated().is_empty());
        assert_eq!(sg.len(), 4);
        let sg = explore(r.session("F").unwrap(), Bounds::new(2, 8).unwrap());
        assert_eq!(sg.len(), 2);
        assert!(sg.truncated().contains(&1));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let r = load_program(EXAMPLE).unwrap();
        let cs = r.session("CS").unwrap();
        let a = explore_with(cs, Bounds::default(), Execution::Sequential);
        let b = explore_with(cs, Bounds::default(), Execution::Parallel);
        assert_eq!(a, b);
        assert_eq!(a.to_dot(), b.to_dot());
    }

    #[test]
    fn zero_bounds_are_rejected() {
        assert!(Bounds::new(0, 1).is_err());
        assert!(Bounds::new(1, 0).is_err());
    }
}
