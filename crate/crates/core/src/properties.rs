//! Bounded model checking of lock freedom, orphan-message freedom and
//! eventual reception, and executable oracles for the typing metatheory.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::checker::{check, Status, Verdict};
use crate::explore::{explore_with, Bounds, StateGraph};
use crate::gen::{batch_rng, random_session, GenParams};
use crate::global::GlobalType;
use crate::label::CommLabel;
use crate::name::Participant;
use crate::par::{self, Execution};
use crate::queue::Queue;
use crate::session::{render_session_document, Session, State};
use crate::typesem::TypeConfiguration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    LockFreedom,
    OrphanFreedom,
    EventualReception,
    SubjectReduction,
    SessionFidelity,
    TypeProgress,
    SatisfactionPreservation,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::LockFreedom => "lock-freedom",
            Property::OrphanFreedom => "orphan-freedom",
            Property::EventualReception => "eventual-reception",
            Property::SubjectReduction => "subject-reduction",
            Property::SessionFidelity => "session-fidelity",
            Property::TypeProgress => "type-progress",
            Property::SatisfactionPreservation => "satisfaction-preservation",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyStatus {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for PropertyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyStatus::Holds => "holds",
            PropertyStatus::Fails => "fails",
            PropertyStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// Labels leading from the initial session to the violating state.
    pub trace: Vec<CommLabel>,
    /// The violating session, when the property is about sessions.
    pub session: Option<Session>,
    /// Rendering of the violating state.
    pub state: String,
    /// What could not be fulfilled there.
    pub obligation: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub states: usize,
    pub truncated: usize,
}

#[derive(Clone, Debug)]
pub struct PropertyVerdict {
    pub property: Property,
    pub status: PropertyStatus,
    pub counterexample: Option<Counterexample>,
    pub coverage: Coverage,
}

impl PropertyVerdict {
    fn holds(property: Property, coverage: Coverage) -> Self {
        PropertyVerdict { property, status: PropertyStatus::Holds, counterexample: None, coverage }
    }

    fn fails(property: Property, counterexample: Counterexample, coverage: Coverage) -> Self {
        PropertyVerdict { property, status: PropertyStatus::Fails, counterexample: Some(counterexample), coverage }
    }

    fn inconclusive(property: Property, counterexample: Option<Counterexample>, coverage: Coverage) -> Self {
        PropertyVerdict { property, status: PropertyStatus::Inconclusive, counterexample, coverage }
    }

    pub fn holds_definitely(&self) -> bool {
        self.status == PropertyStatus::Holds
    }

    pub fn to_json(&self) -> Value {
        let mut doc = json!({
            "property": self.property,
            "status": self.status,
            "coverage": self.coverage,
        });
        if let Some(c) = &self.counterexample {
            doc["counterexample"] = json!({
                "trace": c.trace,
                "state": c.state,
                "obligation": c.obligation,
            });
        }
        doc
    }
}

impl fmt::Display for PropertyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} states, {} truncated)",
            self.property, self.status, self.coverage.states, self.coverage.truncated
        )?;
        if let Some(c) = &self.counterexample {
            let trace: Vec<String> = c.trace.iter().map(ToString::to_string).collect();
            write!(f, "\n  trace: [{}]", trace.join(","))?;
            write!(f, "\n  state: {}", c.state)?;
            write!(f, "\n  obligation: {}", c.obligation)?;
        }
        Ok(())
    }
}

fn coverage(sg: &StateGraph) -> Coverage {
    Coverage { states: sg.len(), truncated: sg.truncated().len() }
}

fn counterexample(sg: &StateGraph, i: usize, obligation: String) -> Counterexample {
    Counterexample { trace: sg.trace_to(i), session: Some(sg.session(i)), state: sg.render_state(i), obligation }
}

/// Turns per-state violations into a verdict. A violation at a state that
/// can reach a truncated state may be an artefact of the bounds; a graph
/// with truncated states cannot show that the property holds.
fn judge(property: Property, sg: &StateGraph, violations: Vec<(usize, String)>) -> PropertyVerdict {
    let tainted = sg.reaches_truncation();
    let mut uncertain = None;
    for (i, obligation) in violations {
        if !tainted[i] {
            return PropertyVerdict::fails(property, counterexample(sg, i, obligation), coverage(sg));
        }
        uncertain.get_or_insert((i, obligation));
    }
    if let Some((i, obligation)) = uncertain {
        return PropertyVerdict::inconclusive(property, Some(counterexample(sg, i, obligation)), coverage(sg));
    }
    if sg.is_complete() {
        PropertyVerdict::holds(property, coverage(sg))
    } else {
        PropertyVerdict::inconclusive(property, None, coverage(sg))
    }
}

/// Every live participant of every reachable state can still act.
pub fn lock_freedom(sg: &StateGraph) -> PropertyVerdict {
    let participants: BTreeSet<Participant> = sg.states().iter().flat_map(State::plays).collect();
    let can_act: HashMap<&Participant, Vec<bool>> = participants
        .iter()
        .map(|p| {
            let seeds = sg.edges().iter().filter(|e| &e.label.player == p).map(|e| e.from);
            (p, sg.backward_closure(seeds, |_| true))
        })
        .collect();
    let mut violations = Vec::new();
    for (i, state) in sg.states().iter().enumerate() {
        for p in state.network.keys() {
            if !can_act[p][i] {
                violations.push((i, format!("{p} can never act again")));
            }
        }
    }
    judge(Property::LockFreedom, sg, violations)
}

/// No reachable state has terminated every process with messages left.
pub fn orphan_freedom(sg: &StateGraph) -> PropertyVerdict {
    let violations = sg
        .states()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_final() && !s.queue.is_empty())
        .map(|(i, s)| (i, format!("every process has terminated but {} is left unread", s.queue)))
        .collect();
    judge(Property::OrphanFreedom, sg, violations)
}

/// Every message at the head of a channel is eventually read.
pub fn eventual_reception(sg: &StateGraph) -> PropertyVerdict {
    let mut reach: HashMap<CommLabel, Vec<bool>> = HashMap::new();
    let mut violations = Vec::new();
    for (i, state) in sg.states().iter().enumerate() {
        for m in state.queue.heads() {
            let read = CommLabel::input(m.receiver.clone(), m.sender.clone(), m.tag.clone());
            let can_read = reach.entry(read.clone()).or_insert_with(|| {
                let seeds = sg.edges().iter().filter(|e| e.label == read).map(|e| e.from);
                sg.backward_closure(seeds, |e| e.label != read)
            });
            if !can_read[i] {
                violations.push((i, format!("{m} is never read")));
            }
        }
    }
    judge(Property::EventualReception, sg, violations)
}

pub fn check_lock_freedom(s: &Session, bounds: Bounds) -> PropertyVerdict {
    lock_freedom(&explore_with(s, bounds, Execution::default()))
}

pub fn check_orphan_freedom(s: &Session, bounds: Bounds) -> PropertyVerdict {
    orphan_freedom(&explore_with(s, bounds, Execution::default()))
}

pub fn check_eventual_reception(s: &Session, bounds: Bounds) -> PropertyVerdict {
    eventual_reception(&explore_with(s, bounds, Execution::default()))
}

/// The three session properties over one shared exploration, in a fixed
/// order.
pub fn check_all(s: &Session, bounds: Bounds, exec: Execution) -> Vec<PropertyVerdict> {
    let sg = explore_with(s, bounds, exec);
    let (lock, (orphan, reception)) =
        par::join(exec, || lock_freedom(&sg), || par::join(exec, || orphan_freedom(&sg), || eventual_reception(&sg)));
    vec![lock, orphan, reception]
}

/// The oracles below only make sense for typed inputs.
#[derive(Debug, Clone, Error)]
#[error("the session is not typed by the global type ({status})")]
pub struct OracleError {
    pub status: Status,
    pub verdict: Box<Verdict>,
}

/// Pairs of session state and type visited by a lockstep walk, with types
/// compared up to bisimilarity.
#[derive(Default)]
struct Visited {
    seen: HashMap<State, Vec<GlobalType>>,
    count: usize,
}

impl Visited {
    fn insert(&mut self, state: &State, g: &GlobalType) -> bool {
        let types = self.seen.entry(state.clone()).or_default();
        if types.iter().any(|t| t.bisim_equal(g)) {
            return false;
        }
        types.push(g.clone());
        self.count += 1;
        true
    }
}

enum Side {
    Session,
    Type,
}

fn lockstep(
    property: Property,
    g: &GlobalType,
    s: &Session,
    bounds: Bounds,
    side: Side,
) -> Result<PropertyVerdict, OracleError> {
    let verdict = check(g, s, bounds, false);
    if !verdict.is_accepted() {
        return Err(OracleError { status: verdict.status, verdict: Box::new(verdict) });
    }
    let graph = s.graph();
    let mut visited = Visited::default();
    visited.insert(s.state(), g);
    let mut work = VecDeque::from([(s.state().clone(), g.clone(), Vec::<CommLabel>::new())]);
    let mut truncated = 0usize;
    let cover = |visited: &Visited, truncated: usize| Coverage { states: visited.count, truncated };
    let fail = |state: &State, g: &GlobalType, trace: &[CommLabel], obligation: String| Counterexample {
        trace: trace.to_vec(),
        session: Some(s.with_state(state.clone())),
        state: format!("{} typed by {g}", s.with_state(state.clone())),
        obligation,
    };
    while let Some((state, g, trace)) = work.pop_front() {
        let conf = TypeConfiguration::new(g.clone(), state.queue.clone());
        let labels = match side {
            Side::Session => state.enabled_labels(graph),
            Side::Type => conf.enabled(),
        };
        for label in labels {
            let next_type = conf.step(&label);
            let next_state = state.step(graph, &label);
            let (next_type, next_state) = match (next_type, next_state) {
                (Some(t), Some(n)) => (t.global, n),
                (None, _) => {
                    let why = format!("the type cannot do {label}, which the session does");
                    return Ok(PropertyVerdict::fails(
                        property,
                        fail(&state, &g, &trace, why),
                        cover(&visited, truncated),
                    ));
                }
                (_, None) => {
                    let why = format!("the session cannot do {label}, which the type does");
                    return Ok(PropertyVerdict::fails(
                        property,
                        fail(&state, &g, &trace, why),
                        cover(&visited, truncated),
                    ));
                }
            };
            if next_state.queue.max_channel_len() > bounds.max_queue || visited.count >= bounds.max_states {
                truncated += 1;
                continue;
            }
            let mut next_trace = trace.clone();
            next_trace.push(label.clone());
            let retyped = check(&next_type, &s.with_state(next_state.clone()), bounds, false);
            match retyped.status {
                Status::Accepted => {}
                Status::Rejected => {
                    let why = format!(
                        "after {label} the type {next_type} no longer types the session: {}",
                        retyped.reason.map(|r| r.as_str()).unwrap_or_default()
                    );
                    return Ok(PropertyVerdict::fails(
                        property,
                        fail(&next_state, &next_type, &next_trace, why),
                        cover(&visited, truncated),
                    ));
                }
                Status::Inconclusive => {
                    truncated += 1;
                    continue;
                }
            }
            if visited.insert(&next_state, &next_type) {
                work.push_back((next_state, next_type, next_trace));
            }
        }
    }
    let coverage = cover(&visited, truncated);
    if truncated == 0 {
        Ok(PropertyVerdict::holds(property, coverage))
    } else {
        Ok(PropertyVerdict::inconclusive(property, None, coverage))
    }
}

/// Every session transition from a typed state is matched by the type, and
/// the successors are typed again.
pub fn cross_check_subject_reduction(
    g: &GlobalType,
    s: &Session,
    bounds: Bounds,
) -> Result<PropertyVerdict, OracleError> {
    lockstep(Property::SubjectReduction, g, s, bounds, Side::Session)
}

/// Every transition of the type configuration is matched by the session,
/// and the successors are typed again.
pub fn cross_check_session_fidelity(
    g: &GlobalType,
    s: &Session,
    bounds: Bounds,
) -> Result<PropertyVerdict, OracleError> {
    lockstep(Property::SessionFidelity, g, s, bounds, Side::Type)
}

/// From `g ∥ q`, every player of `g` is reached by some path of type steps
/// on which it did not act before.
pub fn cross_check_type_progress(g: &GlobalType, q: &Queue, bounds: Bounds) -> PropertyVerdict {
    let property = Property::TypeProgress;
    let start = TypeConfiguration::new(g.clone(), q.clone());
    let mut total = Coverage::default();
    for p in g.players() {
        let mut seen: Vec<TypeConfiguration> = vec![start.clone()];
        let mut work = VecDeque::from([start.clone()]);
        let mut found = false;
        let mut truncated = 0usize;
        'search: while let Some(conf) = work.pop_front() {
            for label in conf.enabled() {
                if &label.player == p {
                    found = true;
                    break 'search;
                }
                let next = conf.step(&label).expect("enabled type step");
                if seen.iter().any(|c| c.queue == next.queue && c.global.bisim_equal(&next.global)) {
                    continue;
                }
                if next.queue.max_channel_len() > bounds.max_queue || seen.len() >= bounds.max_states {
                    truncated += 1;
                    continue;
                }
                seen.push(next.clone());
                work.push_back(next);
            }
        }
        total.states += seen.len();
        total.truncated += truncated;
        if !found {
            let c = Counterexample {
                trace: Vec::new(),
                session: None,
                state: format!("{g} with {q}"),
                obligation: format!("{p} is a player but no path of type steps lets it act"),
            };
            return if truncated == 0 {
                PropertyVerdict::fails(property, c, total)
            } else {
                PropertyVerdict::inconclusive(property, Some(c), total)
            };
        }
    }
    PropertyVerdict::holds(property, total)
}

/// A participant that was satisfied and stopped being so after another
/// participant's step.
fn satisfaction_broken(s: &Session, sg: &StateGraph) -> Option<Counterexample> {
    let graph = s.graph();
    for e in sg.edges() {
        let (before, after) = (sg.state(e.from), sg.state(e.to));
        for p in before.network.keys() {
            if *p != e.label.player && before.is_satisfied(graph, p) && !after.is_satisfied(graph, p) {
                let mut trace = sg.trace_to(e.from);
                trace.push(e.label.clone());
                return Some(Counterexample {
                    trace,
                    session: Some(sg.session(e.to)),
                    state: render_session_document(s, "S"),
                    obligation: format!("{p} was satisfied before {} and is not after it", e.label),
                });
            }
        }
    }
    None
}

/// Random sessions never lose a participant's satisfaction through a step
/// of someone else. Each session is explored within small bounds and every
/// transition is checked.
pub fn fuzz_satisfaction_preservation(seed: u64, count: usize) -> PropertyVerdict {
    fuzz_satisfaction_preservation_with(seed, count, Execution::default())
}

pub fn fuzz_satisfaction_preservation_with(seed: u64, count: usize, exec: Execution) -> PropertyVerdict {
    let bounds = Bounds { max_states: 200, max_queue: 3 };
    let results = par::map_range(exec, count, |i| {
        let s = random_session(&mut batch_rng(seed, i as u64), &GenParams::default());
        let sg = explore_with(&s, bounds, Execution::Sequential);
        (sg.len(), sg.truncated().len(), satisfaction_broken(&s, &sg))
    });
    let mut coverage = Coverage::default();
    for (states, truncated, broken) in results {
        coverage.states += states;
        coverage.truncated += truncated;
        if let Some(c) = broken {
            return PropertyVerdict::fails(Property::SatisfactionPreservation, c, coverage);
        }
    }
    PropertyVerdict::holds(Property::SatisfactionPreservation, coverage)
}
