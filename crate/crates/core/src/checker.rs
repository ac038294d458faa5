//! The coinductive typing judgment `G ⊢ N ∥ Q`, its sound variant, and
//! inference of a global type from a session.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::explore::Bounds;
use crate::global::GlobalType;
use crate::label::CommLabel;
use crate::name::Participant;
use crate::session::{ProcessGraph, Session, State};
use crate::term::{Node, NodeId, TermGraph};
use crate::typesem::{unsound_messages, TypeConfiguration};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Accepted,
    Rejected,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Accepted => "accepted",
            Status::Rejected => "rejected",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    EndMismatch,
    CoherenceViolation,
    PlayersMismatch,
    BranchStepUndefined,
    SoundnessViolation,
    BoundExceeded,
    OrphanAtEnd,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::EndMismatch => "end-mismatch",
            Reason::CoherenceViolation => "coherence-violation",
            Reason::PlayersMismatch => "players-mismatch",
            Reason::BranchStepUndefined => "branch-step-undefined",
            Reason::SoundnessViolation => "soundness-violation",
            Reason::BoundExceeded => "bound-exceeded",
            Reason::OrphanAtEnd => "orphan-at-end",
        }
    }

    /// The rule premise whose failure this reason reports.
    pub fn premise(self) -> &'static str {
        match self {
            Reason::EndMismatch => "End: the type is End exactly when every process has terminated",
            Reason::OrphanAtEnd => "End: the queue is empty once every process has terminated",
            Reason::CoherenceViolation => "TComm: the branch labels form a coherent set of the session",
            Reason::PlayersMismatch => "TComm: the players of the type are the live participants",
            Reason::BranchStepUndefined => "TComm: every branch label is a transition of the session",
            Reason::SoundnessViolation => "TCommS: every queued message has finite weight",
            Reason::BoundExceeded => "exploration bound",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which limit stopped a search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundHit {
    States(usize),
    Queue(usize),
}

/// The judgment instance at which a check or inference failed.
#[derive(Clone, Debug)]
pub struct Witness {
    pub session: Session,
    pub global: Option<GlobalType>,
    pub labels: BTreeSet<CommLabel>,
    /// Session transitions leading from the initial session to `session`.
    pub trace: Vec<CommLabel>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub visited: usize,
    pub memo_hits: usize,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    pub reason: Option<Reason>,
    pub witness: Option<Witness>,
    pub bound: Option<BoundHit>,
    pub stats: Stats,
}

impl Verdict {
    fn accepted(stats: Stats) -> Self {
        Verdict { status: Status::Accepted, reason: None, witness: None, bound: None, stats }
    }

    fn rejected(reason: Reason, witness: Witness, stats: Stats) -> Self {
        Verdict { status: Status::Rejected, reason: Some(reason), witness: Some(witness), bound: None, stats }
    }

    fn inconclusive(bound: BoundHit, witness: Option<Witness>, stats: Stats) -> Self {
        Verdict {
            status: Status::Inconclusive,
            reason: Some(Reason::BoundExceeded),
            witness,
            bound: Some(bound),
            stats,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.status == Status::Accepted
    }
}

fn label_list(labels: &BTreeSet<CommLabel>) -> String {
    let items: Vec<String> = labels.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        if let Some(reason) = self.reason {
            write!(f, ": {reason}")?;
        }
        match self.bound {
            Some(BoundHit::States(n)) => write!(f, " (more than {n} states)")?,
            Some(BoundHit::Queue(n)) => write!(f, " (a channel longer than {n})")?,
            None => {}
        }
        if let Some(w) = &self.witness {
            write!(f, "\n  session: {}", w.session)?;
            if let Some(g) = &w.global {
                write!(f, "\n  type:    {g}")?;
            }
            if !w.labels.is_empty() {
                write!(f, "\n  labels:  {}", label_list(&w.labels))?;
            }
            if let Some(reason) = self.reason {
                write!(f, "\n  premise: {}", reason.premise())?;
            }
            let trace: Vec<String> = w.trace.iter().map(ToString::to_string).collect();
            write!(f, "\n  after:   [{}]", trace.join(","))?;
        }
        Ok(())
    }
}

/// JSON rendering of a verdict, with the failing premise and, for
/// coherence failures, the coherent sets that were available.
pub fn check_report(v: &Verdict) -> Value {
    let mut doc = json!({
        "status": v.status,
        "stats": v.stats,
    });
    if let Some(reason) = v.reason {
        doc["reason"] = json!(reason);
        doc["premise"] = json!(reason.premise());
    }
    if let Some(bound) = v.bound {
        doc["bound"] = match bound {
            BoundHit::States(n) => json!({"kind": "max-states", "limit": n}),
            BoundHit::Queue(n) => json!({"kind": "max-queue", "limit": n}),
        };
    }
    if let Some(w) = &v.witness {
        let mut witness = json!({
            "session": w.session.to_string(),
            "global": w.global.as_ref().map(ToString::to_string),
            "labels": w.labels,
            "trace": w.trace,
        });
        match v.reason {
            Some(Reason::CoherenceViolation) => {
                witness["coherent_sets"] = json!(crate::session::coherent_sets(&w.session));
            }
            Some(Reason::PlayersMismatch) => {
                witness["plays"] = json!(w.session.plays());
                witness["players"] = json!(w.global.as_ref().map(|g| g.players().clone()));
            }
            Some(Reason::SoundnessViolation) => {
                if let Some(g) = &w.global {
                    let conf = TypeConfiguration::new(g.clone(), w.session.queue().clone());
                    witness["unsound_messages"] = json!(unsound_messages(&conf));
                }
            }
            _ => {}
        }
        doc["witness"] = witness;
    }
    doc
}

struct Visit {
    node: NodeId,
    state: State,
    parent: Option<(usize, CommLabel)>,
}

/// Checks `G ⊢ s` (or `G ⊢_S s` with `sound_mode`).
///
/// Pairs of type node and session state are explored breadth first and
/// assumed to hold when revisited, which accepts exactly the regular
/// coinductive derivations.
pub fn check(g: &GlobalType, s: &Session, bounds: Bounds, sound_mode: bool) -> Verdict {
    let graph = s.graph();
    let types = g.graph();
    let mut visits = vec![Visit { node: g.root(), state: s.state().clone(), parent: None }];
    let mut seen: HashSet<(NodeId, State)> = HashSet::from([(g.root(), s.state().clone())]);
    let mut work = VecDeque::from([0usize]);
    let mut stats = Stats { visited: 1, memo_hits: 0 };

    let witness_of = |visits: &[Visit], i: usize, labels: BTreeSet<CommLabel>| {
        let mut trace = Vec::new();
        let mut at = i;
        while let Some((parent, label)) = &visits[at].parent {
            trace.push(label.clone());
            at = *parent;
        }
        trace.reverse();
        Witness { session: s.with_state(visits[i].state.clone()), global: Some(g.at(visits[i].node)), labels, trace }
    };

    while let Some(i) = work.pop_front() {
        let (node, state) = (visits[i].node, &visits[i].state);
        let branches = match types.node(node) {
            Node::Stop if state.is_final() && state.queue.is_empty() => continue,
            Node::Stop if state.is_final() => {
                return Verdict::rejected(Reason::OrphanAtEnd, witness_of(&visits, i, BTreeSet::new()), stats);
            }
            Node::Stop => {
                return Verdict::rejected(Reason::EndMismatch, witness_of(&visits, i, BTreeSet::new()), stats);
            }
            Node::Choice(branches) => branches,
        };
        let labels: BTreeSet<CommLabel> = branches.iter().map(|(l, _)| l.clone()).collect();
        if state.is_final() {
            return Verdict::rejected(Reason::EndMismatch, witness_of(&visits, i, labels), stats);
        }
        if *types.players(node) != state.plays() {
            return Verdict::rejected(Reason::PlayersMismatch, witness_of(&visits, i, labels), stats);
        }
        if !state.coherent_sets(graph).contains(&labels) {
            return Verdict::rejected(Reason::CoherenceViolation, witness_of(&visits, i, labels), stats);
        }
        let mut successors = Vec::with_capacity(branches.len());
        for (label, next_node) in branches {
            match state.step(graph, label) {
                Some(next) => successors.push((label.clone(), *next_node, next)),
                None => {
                    let offending = BTreeSet::from([label.clone()]);
                    return Verdict::rejected(Reason::BranchStepUndefined, witness_of(&visits, i, offending), stats);
                }
            }
        }
        if sound_mode && !TypeConfiguration::new(g.at(node), state.queue.clone()).is_sound() {
            return Verdict::rejected(Reason::SoundnessViolation, witness_of(&visits, i, labels), stats);
        }
        for (label, next_node, next) in successors {
            if next.queue.max_channel_len() > bounds.max_queue {
                let w = witness_of(&visits, i, BTreeSet::from([label]));
                return Verdict::inconclusive(BoundHit::Queue(bounds.max_queue), Some(w), stats);
            }
            if seen.contains(&(next_node, next.clone())) {
                stats.memo_hits += 1;
                continue;
            }
            if visits.len() >= bounds.max_states {
                let w = witness_of(&visits, i, BTreeSet::from([label]));
                return Verdict::inconclusive(BoundHit::States(bounds.max_states), Some(w), stats);
            }
            seen.insert((next_node, next.clone()));
            visits.push(Visit { node: next_node, state: next, parent: Some((i, label)) });
            stats.visited += 1;
            work.push_back(visits.len() - 1);
        }
    }
    Verdict::accepted(stats)
}

/// Which coherent sets inference may use for each type node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Every coherent set, single satisfied participants first.
    #[default]
    SatisfiedFirst,
    /// Only the set of all enabled labels.
    FullSetOnly,
}

/// Successful inference: the type and the search statistics.
#[derive(Clone, Debug)]
pub struct Inferred {
    pub global: GlobalType,
    pub stats: Stats,
}

enum Solved {
    Ok(NodeId, usize),
    Fail(usize),
}

const NO_LINK: usize = usize::MAX;

/// One coherent set being tried for a state.
struct Attempt {
    labels: Vec<CommLabel>,
    branches: Vec<(CommLabel, NodeId)>,
    low: usize,
    checkpoint: (usize, usize, usize),
}

/// A state whose type is being searched for.
struct Frame {
    state: State,
    /// Discovery order, unique over the whole search.
    index: usize,
    placeholder: NodeId,
    start: usize,
    candidates: std::vec::IntoIter<BTreeSet<CommLabel>>,
    attempt: Option<Attempt>,
    fail_low: usize,
}

/// Depth-first search over session states with an explicit stack. Lows
/// follow Tarjan's algorithm: a solved state whose type reaches a
/// placeholder of a state still on the stack stays pending until that
/// state's cycle closes, and is rolled back with it on failure.
struct Infer<'a> {
    graph: &'a ProcessGraph,
    session: &'a Session,
    strategy: Strategy,
    bounds: Bounds,
    out: TermGraph<CommLabel>,
    stop: NodeId,
    frames: Vec<Frame>,
    next_index: usize,
    /// States on the stack, with their index and placeholder.
    on_stack: HashMap<State, (usize, NodeId)>,
    /// Solved states and the lowest index their solution relies on.
    done: HashMap<State, (NodeId, usize)>,
    done_log: Vec<State>,
    /// Solved states whose cycle is not closed yet.
    pending: Vec<(State, NodeId)>,
    failed: HashSet<State>,
    /// Players of the nodes of closed cycles, by node index.
    players: Vec<Option<BTreeSet<Participant>>>,
    path: Vec<CommLabel>,
    stats: Stats,
    bound: Option<BoundHit>,
    aborted: bool,
    first_failure: Option<(Reason, Witness)>,
}

impl Infer<'_> {
    fn fail(&mut self, reason: Reason, state: &State, labels: BTreeSet<CommLabel>) {
        if self.first_failure.is_none() {
            let witness = Witness {
                session: self.session.with_state(state.clone()),
                global: None,
                labels,
                trace: self.path.clone(),
            };
            self.first_failure = Some((reason, witness));
        }
    }

    fn rollback(&mut self, (out_len, done_len, pending_len): (usize, usize, usize)) {
        self.out.truncate(out_len);
        self.players.truncate(out_len);
        for state in self.done_log.drain(done_len..) {
            self.done.remove(&state);
        }
        self.pending.truncate(pending_len);
    }

    /// Answers from the caches when possible, otherwise pushes a frame.
    fn enter(&mut self, state: State) -> Option<Solved> {
        if let Some((node, low)) = self.done.get(&state) {
            self.stats.memo_hits += 1;
            return Some(Solved::Ok(*node, *low));
        }
        if let Some((d, node)) = self.on_stack.get(&state) {
            self.stats.memo_hits += 1;
            return Some(Solved::Ok(*node, *d));
        }
        if self.failed.contains(&state) {
            self.stats.memo_hits += 1;
            return Some(Solved::Fail(NO_LINK));
        }
        if state.is_final() {
            if state.queue.is_empty() {
                return Some(Solved::Ok(self.stop, NO_LINK));
            }
            self.fail(Reason::OrphanAtEnd, &state, BTreeSet::new());
            return Some(Solved::Fail(NO_LINK));
        }
        self.stats.visited += 1;
        if self.stats.visited > self.bounds.max_states {
            self.bound = Some(BoundHit::States(self.bounds.max_states));
            self.aborted = true;
            return Some(Solved::Fail(0));
        }
        let mut candidates = state.coherent_sets(self.graph);
        if self.strategy == Strategy::FullSetOnly {
            candidates = candidates.pop().into_iter().collect();
        }
        if candidates.is_empty() {
            self.fail(Reason::CoherenceViolation, &state, BTreeSet::new());
            self.failed.insert(state);
            return Some(Solved::Fail(NO_LINK));
        }
        let start = self.out.len();
        let placeholder = self.out.add(Node::Stop);
        let index = self.next_index;
        self.next_index += 1;
        self.on_stack.insert(state.clone(), (index, placeholder));
        self.frames.push(Frame {
            state,
            index,
            placeholder,
            start,
            candidates: candidates.into_iter(),
            attempt: None,
            fail_low: NO_LINK,
        });
        None
    }

    fn abandon_attempt(&mut self) {
        let frame = self.frames.last_mut().expect("a frame is active");
        let attempt = frame.attempt.take().expect("an attempt is active");
        frame.fail_low = frame.fail_low.min(attempt.low);
        self.rollback(attempt.checkpoint);
    }

    /// Runs the top frame until it needs a child frame (`None`) or is
    /// finished (`Some`). `child` is the answer for its last label.
    fn advance(&mut self, mut child: Option<Solved>) -> Option<Solved> {
        loop {
            if let Some(answer) = child.take() {
                self.path.pop();
                let attempt = self.frames.last_mut().and_then(|f| f.attempt.as_mut()).expect("an attempt is active");
                match answer {
                    Solved::Ok(node, low) => {
                        attempt.low = attempt.low.min(low);
                        let label = attempt.labels[attempt.branches.len()].clone();
                        attempt.branches.push((label, node));
                    }
                    Solved::Fail(low) => {
                        attempt.low = attempt.low.min(low);
                        self.abandon_attempt();
                    }
                }
            }
            let frame = self.frames.last_mut().expect("a frame is active");
            let Some(attempt) = &frame.attempt else {
                match frame.candidates.next() {
                    Some(labels) => {
                        let checkpoint = (self.out.len(), self.done_log.len(), self.pending.len());
                        frame.attempt = Some(Attempt {
                            labels: labels.into_iter().collect(),
                            branches: Vec::new(),
                            low: NO_LINK,
                            checkpoint,
                        });
                    }
                    None => {
                        let frame = self.frames.pop().expect("a frame is active");
                        self.on_stack.remove(&frame.state);
                        self.out.truncate(frame.start);
                        self.players.truncate(frame.start);
                        if frame.fail_low >= frame.index {
                            self.failed.insert(frame.state);
                        }
                        return Some(Solved::Fail(frame.fail_low));
                    }
                }
                continue;
            };
            if attempt.branches.len() == attempt.labels.len() {
                if let Some(answer) = self.close_attempt() {
                    return Some(answer);
                }
                continue;
            }
            let label = attempt.labels[attempt.branches.len()].clone();
            let next = frame.state.step(self.graph, &label).expect("coherent labels are enabled");
            if next.queue.max_channel_len() > self.bounds.max_queue {
                self.bound = Some(BoundHit::Queue(self.bounds.max_queue));
                self.abandon_attempt();
                continue;
            }
            self.path.push(label);
            match self.enter(next) {
                Some(answer) if self.aborted => return Some(answer),
                Some(answer) => child = Some(answer),
                None => return None,
            }
        }
    }

    /// Every branch of the current attempt has a type. Returns the frame's
    /// answer, or `None` when the attempt had to be rejected after all.
    fn close_attempt(&mut self) -> Option<Solved> {
        let frame = self.frames.last_mut().expect("a frame is active");
        let attempt = frame.attempt.as_mut().expect("an attempt is active");
        let (state, index, placeholder) = (frame.state.clone(), frame.index, frame.placeholder);
        let low = attempt.low;
        let pending_mark = attempt.checkpoint.2;
        self.out.set(placeholder, Node::Choice(std::mem::take(&mut attempt.branches)));
        if low < index {
            self.finish_frame();
            self.pending.push((state.clone(), placeholder));
            self.done.insert(state.clone(), (placeholder, low));
            self.done_log.push(state);
            return Some(Solved::Ok(placeholder, low));
        }
        // The cycle through this state is closed: every node it reaches is
        // complete, so players can be compared now.
        let members: Vec<(State, NodeId)> =
            self.pending[pending_mark..].iter().cloned().chain(std::iter::once((state.clone(), placeholder))).collect();
        let players = players_from(&self.out, placeholder, &self.players);
        if let Some((bad, node)) = members.iter().find(|(st, n)| players[n] != st.plays()) {
            let labels = self.out.node(*node).branches().iter().map(|(l, _)| l.clone()).collect();
            let bad = bad.clone();
            self.fail(Reason::PlayersMismatch, &bad, labels);
            self.abandon_attempt();
            return None;
        }
        if self.players.len() < self.out.len() {
            self.players.resize(self.out.len(), None);
        }
        for (node, p) in players {
            self.players[node.index()] = Some(p);
        }
        self.pending.truncate(pending_mark);
        for (member, _) in &members {
            if let Some(entry) = self.done.get_mut(member) {
                entry.1 = NO_LINK;
            }
        }
        self.finish_frame();
        self.done.insert(state.clone(), (placeholder, NO_LINK));
        self.done_log.push(state);
        Some(Solved::Ok(placeholder, NO_LINK))
    }

    fn finish_frame(&mut self) {
        let frame = self.frames.pop().expect("a frame is active");
        self.on_stack.remove(&frame.state);
    }

    fn run(&mut self, initial: State) -> Solved {
        if let Some(answer) = self.enter(initial) {
            return answer;
        }
        let mut child = None;
        loop {
            let answer = self.advance(child.take());
            if self.aborted {
                return Solved::Fail(0);
            }
            if let Some(answer) = answer {
                if self.frames.is_empty() {
                    return answer;
                }
                child = Some(answer);
            }
        }
    }
}

/// Players of the nodes reachable from `root` that are not in `known`,
/// which must already hold every node they reach outside that set.
fn players_from(
    graph: &TermGraph<CommLabel>,
    root: NodeId,
    known: &[Option<BTreeSet<Participant>>],
) -> HashMap<NodeId, BTreeSet<Participant>> {
    let cached = |n: NodeId| known.get(n.index()).and_then(Option::as_ref);
    let mut nodes = Vec::new();
    let mut seen = HashSet::from([root]);
    let mut work = vec![root];
    while let Some(n) = work.pop() {
        nodes.push(n);
        for (_, next) in graph.node(n).branches() {
            if cached(*next).is_none() && seen.insert(*next) {
                work.push(*next);
            }
        }
    }
    let mut players: HashMap<NodeId, BTreeSet<Participant>> = nodes
        .iter()
        .map(|n| {
            let mut own: BTreeSet<Participant> = BTreeSet::new();
            for (l, next) in graph.node(*n).branches() {
                own.insert(l.player.clone());
                if let Some(p) = cached(*next) {
                    own.extend(p.iter().cloned());
                }
            }
            (*n, own)
        })
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for n in &nodes {
            for (_, next) in graph.node(*n).branches() {
                let Some(from) = players.get(next) else { continue };
                let extra: Vec<Participant> = from.iter().filter(|p| !players[n].contains(*p)).cloned().collect();
                if !extra.is_empty() {
                    players.get_mut(n).expect("collected").extend(extra);
                    changed = true;
                }
            }
        }
    }
    players
}

/// Searches for a global type typing `s`, trying coherent sets in the order
/// given by `strategy` and backtracking on failure.
pub fn infer(s: &Session, bounds: Bounds, strategy: Strategy) -> Result<Inferred, Box<Verdict>> {
    let mut out = TermGraph::new();
    let stop = out.add(Node::Stop);
    let mut search = Infer {
        graph: s.graph(),
        session: s,
        strategy,
        bounds,
        out,
        stop,
        frames: Vec::new(),
        next_index: 0,
        on_stack: HashMap::new(),
        done: HashMap::new(),
        done_log: Vec::new(),
        pending: Vec::new(),
        failed: HashSet::new(),
        players: vec![Some(BTreeSet::new())],
        path: Vec::new(),
        stats: Stats::default(),
        bound: None,
        aborted: false,
        first_failure: None,
    };
    let solved = search.run(s.state().clone());
    let stats = search.stats;
    match solved {
        Solved::Ok(root, _) => Ok(Inferred { global: GlobalType::from_terms(&search.out, root), stats }),
        Solved::Fail(_) => match search.bound {
            Some(bound) => Err(Box::new(Verdict::inconclusive(bound, None, stats))),
            None => {
                let (reason, witness) = search.first_failure.expect("a failed search records why");
                Err(Box::new(Verdict::rejected(reason, witness, stats)))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::load_program;

    const CLIENT_SERVER: &str = "
        participant P = s!req . (s?res . P + s?halt . s?res . end)
        participant Q = c?req . c!res . Q + c!halt . c?req . c!res . end
        session CS = c :: P || s :: Q with []
        global G = c s ! req . (s c ? req . s c ! res . c s ? res . G
            + s c ! halt . c s ? halt . s c ? req . s c ! res . c s ? res . End)
    ";

    #[test]
    fn client_server_is_typed() {
        let r = load_program(CLIENT_SERVER).unwrap();
        let (g, s) = (r.global("G").unwrap(), r.session("CS").unwrap());
        let v = check(&g, s, Bounds::default(), false);
        assert!(v.is_accepted(), "{v}");
        assert!(v.stats.memo_hits >= 1);
        assert!(check(&g, s, Bounds::default(), true).is_accepted());
    }

    #[test]
    fn coherence_counterexample() {
        let r = load_program(
            "session S = p :: (q!l . r?l . end + r?l . q!l2 . end) || q :: p?l . end || r :: p!l . end with []
             global G = p q ! l . q p ? l . r p ! l . p r ? l . End",
        )
        .unwrap();
        let v = check(&r.global("G").unwrap(), r.session("S").unwrap(), Bounds::default(), false);
        assert_eq!((v.status, v.reason), (Status::Rejected, Some(Reason::CoherenceViolation)));
        assert!(v.witness.as_ref().unwrap().trace.is_empty());
        let doc = check_report(&v);
        assert_eq!(doc["reason"], "coherence-violation");
        // r alone, then everything: {rp!l} and {pq!l, rp!l}
        assert_eq!(doc["witness"]["coherent_sets"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn players_counterexample() {
        let r = load_program(
            "participant P = q!l . P
             participant Q = p?l . Q
             session S = p :: P || q :: Q || r :: s!l . end with []
             global G = p q ! l . q p ? l . G",
        )
        .unwrap();
        let v = check(&r.global("G").unwrap(), r.session("S").unwrap(), Bounds::default(), false);
        assert_eq!(v.reason, Some(Reason::PlayersMismatch));
        let inferred = infer(r.session("S").unwrap(), Bounds::default(), Strategy::SatisfiedFirst).unwrap();
        assert!(check(&inferred.global, r.session("S").unwrap(), Bounds::default(), false).is_accepted());
    }

    #[test]
    fn end_cases() {
        let r = load_program("session F = p :: end with []\nsession O = p :: end with [<p, l, q>]").unwrap();
        let end = GlobalType::end();
        assert!(check(&end, r.session("F").unwrap(), Bounds::default(), false).is_accepted());
        let v = check(&end, r.session("O").unwrap(), Bounds::default(), false);
        assert_eq!(v.reason, Some(Reason::OrphanAtEnd));
        let cs = load_program(CLIENT_SERVER).unwrap();
        let v = check(&end, cs.session("CS").unwrap(), Bounds::default(), false);
        assert_eq!(v.reason, Some(Reason::EndMismatch));
        assert!(infer(r.session("F").unwrap(), Bounds::default(), Strategy::SatisfiedFirst).unwrap().global.is_end());
    }

    #[test]
    fn unread_message_violates_soundness() {
        // <p, l, q> is never read while q and r loop forever.
        let r = load_program(
            "participant Q = r!m . Q
             participant R = q?m . R
             session S = p :: q!l . end || q :: Q || r :: R with []
             global G = p q ! l . H
             global H = q r ! m . r q ? m . H",
        )
        .unwrap();
        let (g, s) = (r.global("G").unwrap(), r.session("S").unwrap());
        assert!(check(&g, s, Bounds::default(), false).is_accepted());
        let v = check(&g, s, Bounds::default(), true);
        assert_eq!(v.reason, Some(Reason::SoundnessViolation));
        assert_eq!(check_report(&v)["witness"]["unsound_messages"][0], "<p,l,q>");
    }

    #[test]
    fn infer_client_server() {
        let r = load_program(CLIENT_SERVER).unwrap();
        let s = r.session("CS").unwrap();
        let inferred = infer(s, Bounds::default(), Strategy::SatisfiedFirst).unwrap();
        assert!(inferred.global.bisim_equal(&r.global("G").unwrap()), "{}", inferred.global);
    }

    #[test]
    fn infer_two_readers() {
        let r = load_program(
            "session S = p :: q?l . end || r :: s?l2 . end with [<q, l, p>, <s, l2, r>]
             global Seq = p q ? l . r s ? l2 . End
             global Both = p q ? l . r s ? l2 . End + r s ? l2 . p q ? l . End",
        )
        .unwrap();
        let s = r.session("S").unwrap();
        let a = infer(s, Bounds::default(), Strategy::SatisfiedFirst).unwrap();
        assert!(a.global.bisim_equal(&r.global("Seq").unwrap()));
        let b = infer(s, Bounds::default(), Strategy::FullSetOnly).unwrap();
        assert!(b.global.bisim_equal(&r.global("Both").unwrap()));
    }

    #[test]
    fn stuck_session_is_not_inferred() {
        let r = load_program("session S = q :: p?l . end with [<p, l2, q>]").unwrap();
        let v = infer(r.session("S").unwrap(), Bounds::default(), Strategy::SatisfiedFirst).unwrap_err();
        assert_eq!(v.status, Status::Rejected);
    }

    #[test]
    fn queue_bounds() {
        let r = load_program(
            "participant P = q!l . P
             participant Q = p?l . Q
             session S = p :: P || q :: Q with []
             session Alone = p :: P with []
             global G = p q ! l . G",
        )
        .unwrap();
        let bounds = Bounds::new(1000, 3).unwrap();
        let s = r.session("S").unwrap();
        let inferred = infer(s, bounds, Strategy::SatisfiedFirst).unwrap();
        assert!(check(&inferred.global, s, bounds, false).is_accepted());
        let v = check(&r.global("G").unwrap(), r.session("Alone").unwrap(), bounds, false);
        assert_eq!(v.status, Status::Inconclusive);
        assert_eq!(v.bound, Some(BoundHit::Queue(3)));
        assert_eq!(check_report(&v)["bound"]["kind"], "max-queue");
        assert!(infer(r.session("Alone").unwrap(), bounds, Strategy::SatisfiedFirst).is_err());
    }
}
