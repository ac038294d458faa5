//! Asynchronous operational semantics of multiparty sessions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::label::{CommLabel, Kind, Prefix};
use crate::name::Participant;
use crate::queue::{apply_label, Queue};
use crate::syntax::render_many;
use crate::term::{bisimilar, Node, NodeId, TermGraph};

pub type ProcessGraph = TermGraph<Prefix>;

/// The canonical identity of a session: live bindings plus queue.
///
/// Terminated processes are never stored, so a network is final exactly
/// when the map is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub network: BTreeMap<Participant, NodeId>,
    pub queue: Queue,
}

impl State {
    pub fn plays(&self) -> BTreeSet<Participant> {
        self.network.keys().cloned().collect()
    }

    pub fn is_final(&self) -> bool {
        self.network.is_empty()
    }

    pub fn step(&self, graph: &ProcessGraph, label: &CommLabel) -> Option<State> {
        let node = *self.network.get(&label.player)?;
        let prefix = label.prefix();
        let next = graph.node(node).branches().iter().find(|(p, _)| *p == prefix).map(|(_, n)| *n)?;
        let queue = apply_label(label, &self.queue)?;
        let mut network = self.network.clone();
        if graph.node(next).is_stop() {
            network.remove(&label.player);
        } else {
            network.insert(label.player.clone(), next);
        }
        Some(State { network, queue })
    }

    fn enabled_of(&self, graph: &ProcessGraph, p: &Participant, node: NodeId, out: &mut BTreeSet<CommLabel>) {
        for (prefix, _) in graph.node(node).branches() {
            let ok = match prefix.kind {
                Kind::Output => true,
                Kind::Input => self.queue.head(&prefix.peer, p) == Some(&prefix.tag),
            };
            if ok {
                out.insert(prefix.as_label(p));
            }
        }
    }

    pub fn enabled_labels(&self, graph: &ProcessGraph) -> BTreeSet<CommLabel> {
        let mut out = BTreeSet::new();
        for (p, node) in &self.network {
            self.enabled_of(graph, p, *node, &mut out);
        }
        out
    }

    pub fn enabled_for(&self, graph: &ProcessGraph, p: &Participant) -> BTreeSet<CommLabel> {
        let mut out = BTreeSet::new();
        if let Some(node) = self.network.get(p) {
            self.enabled_of(graph, p, *node, &mut out);
        }
        out
    }

    pub fn is_satisfied(&self, graph: &ProcessGraph, p: &Participant) -> bool {
        let Some(node) = self.network.get(p) else {
            return true;
        };
        let branches = graph.node(*node).branches();
        let readable: BTreeSet<&Participant> = branches
            .iter()
            .filter(|(pre, _)| pre.kind == Kind::Input && self.queue.head(&pre.peer, p) == Some(&pre.tag))
            .map(|(pre, _)| &pre.peer)
            .collect();
        branches.iter().filter(|(pre, _)| pre.kind == Kind::Input).all(|(pre, _)| readable.contains(&pre.peer))
    }

    pub fn coherent_sets(&self, graph: &ProcessGraph) -> Vec<BTreeSet<CommLabel>> {
        let mut sets: Vec<BTreeSet<CommLabel>> = Vec::new();
        for p in self.network.keys() {
            if self.is_satisfied(graph, p) {
                let own = self.enabled_for(graph, p);
                if !own.is_empty() {
                    sets.push(own);
                }
            }
        }
        let all = self.enabled_labels(graph);
        if !all.is_empty() && !sets.contains(&all) {
            sets.push(all);
        }
        sets
    }
}

/// A network paired with a queue, over a shared process graph.
#[derive(Clone)]
pub struct Session {
    graph: Arc<ProcessGraph>,
    state: State,
}

impl Session {
    /// Builds a session; terminated bindings are dropped.
    pub fn new(graph: Arc<ProcessGraph>, bindings: BTreeMap<Participant, NodeId>, queue: Queue) -> Self {
        let network = bindings.into_iter().filter(|(_, n)| !graph.node(*n).is_stop()).collect();
        Session { graph, state: State { network, queue } }
    }

    pub fn from_state(graph: Arc<ProcessGraph>, state: State) -> Self {
        debug_assert!(state.network.values().all(|n| !graph.node(*n).is_stop()));
        Session { graph, state }
    }

    pub fn graph(&self) -> &Arc<ProcessGraph> {
        &self.graph
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn queue(&self) -> &Queue {
        &self.state.queue
    }

    pub fn network(&self) -> &BTreeMap<Participant, NodeId> {
        &self.state.network
    }

    pub fn process(&self, p: &Participant) -> Option<&Node<Prefix>> {
        self.state.network.get(p).map(|n| self.graph.node(*n))
    }

    pub fn plays(&self) -> BTreeSet<Participant> {
        self.state.plays()
    }

    pub fn is_final(&self) -> bool {
        self.state.is_final()
    }

    pub fn with_state(&self, state: State) -> Session {
        Session { graph: Arc::clone(&self.graph), state }
    }

    /// Same participants, same queue, and pairwise bisimilar processes.
    pub fn equivalent(&self, other: &Session) -> bool {
        self.state.queue == other.state.queue
            && self.state.network.len() == other.state.network.len()
            && self
                .state
                .network
                .iter()
                .zip(&other.state.network)
                .all(|((p, a), (q, b))| p == q && bisimilar(&self.graph, *a, &other.graph, *b))
    }
}

impl PartialEq for Session {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) && self.state == other.state
    }
}

impl Eq for Session {}

impl Hash for Session {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.state.hash(h);
    }
}

/// Renders `p :: P || q :: Q with [..]`.
pub fn render_state(graph: &ProcessGraph, state: &State) -> String {
    if state.network.is_empty() {
        return format!("(final) with {}", state.queue);
    }
    let roots: Vec<NodeId> = state.network.values().copied().collect();
    let (refs, decls) = render_many(graph, &roots);
    let bindings: Vec<String> = state.network.keys().zip(refs).map(|(p, r)| format!("{p} :: {r}")).collect();
    let fresh: Vec<String> = decls
        .into_iter()
        .filter(|d| {
            let name = d.split_whitespace().nth(1).unwrap_or_default();
            !graph.names().values().any(|n| n == name)
        })
        .map(|d| d.split_once(' ').map(|(_, rest)| rest.to_string()).unwrap_or(d))
        .collect();
    let mut out = format!("{} with {}", bindings.join(" || "), state.queue);
    if !fresh.is_empty() {
        out.push_str(" where ");
        out.push_str(&fresh.join(", "));
    }
    out
}

/// A session plus every definition it mentions, as a parseable document.
pub fn render_session_document(session: &Session, name: &str) -> String {
    let roots: Vec<NodeId> = session.network().values().copied().collect();
    let (refs, decls) = render_many(session.graph(), &roots);
    let mut out = String::new();
    for d in decls {
        out.push_str(&d);
        out.push('\n');
    }
    let bindings: Vec<String> = session.network().keys().zip(refs).map(|(p, r)| format!("{p} :: {r}")).collect();
    let network = if bindings.is_empty() {
        // The grammar needs a binding; a terminated one is neutral.
        "nobody :: end".to_string()
    } else {
        bindings.join(" || ")
    };
    let msgs: Vec<String> = session.queue().messages().map(|m| m.to_string()).collect();
    out.push_str(&format!("session {name} = {network} with [{}]\n", msgs.join(", ")));
    out
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_state(&self.graph, &self.state))
    }
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn step(s: &Session, label: &CommLabel) -> Option<Session> {
    s.state.step(&s.graph, label).map(|state| s.with_state(state))
}

pub fn enabled_labels(s: &Session) -> BTreeSet<CommLabel> {
    s.state.enabled_labels(&s.graph)
}

pub fn enabled_for(p: &Participant, s: &Session) -> BTreeSet<CommLabel> {
    s.state.enabled_for(&s.graph, p)
}

/// `p` is satisfied when it is not live, or when every sender it waits on
/// in its top choice has a matching message at the head of its channel.
pub fn is_satisfied(p: &Participant, s: &Session) -> bool {
    s.state.is_satisfied(&s.graph, p)
}

/// Coherent label sets: each satisfied participant's enabled labels (by
/// participant name), then the full enabled set, without duplicates.
pub fn coherent_sets(s: &Session) -> Vec<BTreeSet<CommLabel>> {
    s.state.coherent_sets(&s.graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label {label} at trace index {index} is not enabled")]
pub struct TraceError {
    pub index: usize,
    pub label: CommLabel,
}

pub fn run_trace(s: &Session, trace: &[CommLabel]) -> Result<Session, TraceError> {
    let mut state = s.state.clone();
    for (index, label) in trace.iter().enumerate() {
        state = state.step(&s.graph, label).ok_or_else(|| TraceError { index, label: label.clone() })?;
    }
    Ok(s.with_state(state))
}

/// Players of a trace.
pub fn trace_plays(trace: &[CommLabel]) -> BTreeSet<Participant> {
    trace.iter().map(|l| l.player.clone()).collect()
}
