//! Seeded random generation of sessions and global types.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::global::{GlobalGraph, GlobalType};
use crate::label::{CommLabel, Kind, Message, Prefix};
use crate::name::{Participant, Tag};
use crate::queue::Queue;
use crate::session::{ProcessGraph, Session};
use crate::term::{Node, NodeId, TermGraph, TermLabel};

const PARTICIPANTS: [&str; 4] = ["p", "q", "r", "s"];
const TAGS: [&str; 3] = ["l", "m", "n"];

/// Size limits for generated terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub max_participants: usize,
    pub max_tags: usize,
    pub max_width: usize,
    pub max_depth: usize,
    pub max_messages: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_participants: 4, max_tags: 3, max_width: 3, max_depth: 5, max_messages: 2 }
    }
}

/// The generator for item `index` of a batch seeded with `seed`; the same
/// pair always yields the same stream.
pub fn batch_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn pick<'a, R: Rng>(rng: &mut R, names: &[&'a str]) -> &'a str {
    names.choose(rng).expect("nonempty name pool")
}

/// Builds a random tree of choices of bounded depth and width whose leaves
/// are the stop node or jumps back to an ancestor.
fn random_term<L, R, F>(rng: &mut R, graph: &mut TermGraph<L>, params: &GenParams, mut label: F) -> NodeId
where
    L: TermLabel,
    R: Rng,
    F: FnMut(&mut R) -> L,
{
    let stop = graph.add(Node::Stop);
    let mut ancestors = Vec::new();
    grow(rng, graph, params, &mut label, stop, &mut ancestors, params.max_depth.max(1))
}

fn grow<L, R, F>(
    rng: &mut R,
    graph: &mut TermGraph<L>,
    params: &GenParams,
    label: &mut F,
    stop: NodeId,
    ancestors: &mut Vec<NodeId>,
    depth: usize,
) -> NodeId
where
    L: TermLabel,
    R: Rng,
    F: FnMut(&mut R) -> L,
{
    let id = graph.add(Node::Stop);
    ancestors.push(id);
    let width = rng.gen_range(1..=params.max_width.max(1));
    let mut branches: Vec<(L, NodeId)> = Vec::new();
    for _ in 0..width {
        let l = label(rng);
        if branches.iter().any(|(b, _)| *b == l) {
            continue;
        }
        let next = if depth <= 1 || rng.gen_bool(0.3) {
            if rng.gen_bool(0.5) {
                stop
            } else {
                *ancestors.choose(rng).expect("self is an ancestor")
            }
        } else {
            grow(rng, graph, params, label, stop, ancestors, depth - 1)
        };
        branches.push((l, next));
    }
    ancestors.pop();
    graph.set(id, Node::Choice(branches));
    id
}

/// A random session of 2 to `max_participants` participants whose processes
/// only name each other, with a few messages already queued.
pub fn random_session<R: Rng>(rng: &mut R, params: &GenParams) -> Session {
    let n = rng.gen_range(2..=params.max_participants.clamp(2, PARTICIPANTS.len()));
    let names = &PARTICIPANTS[..n];
    let tags = &TAGS[..params.max_tags.clamp(1, TAGS.len())];
    let mut graph = ProcessGraph::new();
    let mut bindings = BTreeMap::new();
    for me in names {
        let peers: Vec<&str> = names.iter().copied().filter(|p| p != me).collect();
        let root = random_term(rng, &mut graph, params, |rng: &mut R| {
            let kind = if rng.gen_bool(0.5) { Kind::Output } else { Kind::Input };
            Prefix { kind, peer: Participant::from(pick(rng, &peers)), tag: Tag::from(pick(rng, tags)) }
        });
        bindings.insert(Participant::from(*me), root);
    }
    let mut queue = Queue::new();
    for _ in 0..rng.gen_range(0..=params.max_messages) {
        let sender = pick(rng, names);
        let receiver = pick(rng, &names.iter().copied().filter(|p| *p != sender).collect::<Vec<_>>());
        queue.push(Message::new(sender, pick(rng, tags), receiver));
    }
    Session::new(Arc::new(graph), bindings, queue)
}

/// A random global type over up to `max_participants` participants.
pub fn random_global<R: Rng>(rng: &mut R, params: &GenParams) -> GlobalType {
    let n = rng.gen_range(2..=params.max_participants.clamp(2, PARTICIPANTS.len()));
    let names = &PARTICIPANTS[..n];
    let tags = &TAGS[..params.max_tags.clamp(1, TAGS.len())];
    let mut terms = TermGraph::new();
    let root = random_term(rng, &mut terms, params, |rng: &mut R| {
        let player = pick(rng, names);
        let partner = pick(rng, &names.iter().copied().filter(|p| *p != player).collect::<Vec<_>>());
        let tag = pick(rng, tags);
        if rng.gen_bool(0.5) {
            CommLabel::output(player, partner, tag)
        } else {
            CommLabel::input(player, partner, tag)
        }
    });
    let (terms, root) = terms.extract(root);
    GlobalType::new(Arc::new(GlobalGraph::new(terms)), root)
}

/// A random queue over the participants and tags of `params`.
pub fn random_queue<R: Rng>(rng: &mut R, params: &GenParams) -> Queue {
    let names = &PARTICIPANTS[..params.max_participants.clamp(2, PARTICIPANTS.len())];
    let tags = &TAGS[..params.max_tags.clamp(1, TAGS.len())];
    let mut queue = Queue::new();
    for _ in 0..rng.gen_range(0..=params.max_messages) {
        let sender = pick(rng, names);
        let receiver = pick(rng, &names.iter().copied().filter(|p| *p != sender).collect::<Vec<_>>());
        queue.push(Message::new(sender, pick(rng, tags), receiver));
    }
    queue
}

enum Step {
    /// `chooser` tells every other participant, in name order, which tag
    /// it picked.
    Choice {
        chooser: usize,
        branches: Vec<(usize, Cont)>,
    },
    Message {
        from: usize,
        to: usize,
        tag: usize,
        next: Cont,
    },
}

#[derive(Clone, Copy)]
enum Cont {
    End,
    At(usize),
}

struct Protocol {
    steps: Vec<Step>,
}

impl Protocol {
    fn grow<R: Rng>(
        &mut self,
        rng: &mut R,
        n: usize,
        tags: usize,
        params: &GenParams,
        choices: &mut Vec<usize>,
        depth: usize,
    ) -> Cont {
        let root = self.steps.is_empty();
        if !root && (depth == 0 || rng.gen_bool(0.15)) {
            return if rng.gen_bool(0.5) {
                Cont::End
            } else {
                Cont::At(*choices.choose(rng).expect("root is a choice"))
            };
        }
        let at = self.steps.len();
        if root || rng.gen_bool(0.4) {
            let chooser = rng.gen_range(0..n);
            let mut pool: Vec<usize> = (0..tags).collect();
            pool.shuffle(rng);
            pool.truncate(rng.gen_range(1..=params.max_width.clamp(1, tags)));
            self.steps.push(Step::Choice { chooser, branches: Vec::new() });
            choices.push(at);
            let branches = pool
                .into_iter()
                .map(|tag| (tag, self.grow(rng, n, tags, params, choices, depth.saturating_sub(1))))
                .collect();
            choices.pop();
            self.steps[at] = Step::Choice { chooser, branches };
        } else {
            let from = rng.gen_range(0..n);
            let to = (from + rng.gen_range(1..n)) % n;
            let tag = rng.gen_range(0..tags);
            self.steps.push(Step::Message { from, to, tag, next: Cont::End });
            let next = self.grow(rng, n, tags, params, choices, depth.saturating_sub(1));
            self.steps[at] = Step::Message { from, to, tag, next };
        }
        Cont::At(at)
    }

    fn project(
        &self,
        me: usize,
        at: Cont,
        graph: &mut ProcessGraph,
        stop: NodeId,
        memo: &mut BTreeMap<usize, NodeId>,
        n: usize,
    ) -> NodeId {
        let at = match at {
            Cont::End => return stop,
            Cont::At(at) => at,
        };
        if let Some(id) = memo.get(&at) {
            return *id;
        }
        match &self.steps[at] {
            Step::Message { from, to, tag, next } => {
                let rest = self.project(me, *next, graph, stop, memo, n);
                let prefix = if me == *from {
                    Prefix::output(PARTICIPANTS[*to], TAGS[*tag])
                } else if me == *to {
                    Prefix::input(PARTICIPANTS[*from], TAGS[*tag])
                } else {
                    return rest;
                };
                graph.add(Node::Choice(vec![(prefix, rest)]))
            }
            Step::Choice { chooser, branches } => {
                let id = graph.add(Node::Stop);
                memo.insert(at, id);
                let mut out = Vec::new();
                for (tag, cont) in branches {
                    let mut next = self.project(me, *cont, graph, stop, memo, n);
                    if me == *chooser {
                        let others: Vec<usize> = (0..n).filter(|x| x != chooser).collect();
                        for other in others.iter().skip(1).rev() {
                            let prefix = Prefix::output(PARTICIPANTS[*other], TAGS[*tag]);
                            next = graph.add(Node::Choice(vec![(prefix, next)]));
                        }
                        out.push((Prefix::output(PARTICIPANTS[others[0]], TAGS[*tag]), next));
                    } else {
                        out.push((Prefix::input(PARTICIPANTS[*chooser], TAGS[*tag]), next));
                    }
                }
                graph.set(id, Node::Choice(out));
                id
            }
        }
    }
}

/// A session implementing a random protocol: choices are announced by the
/// chooser to everybody, other steps are single messages. Such sessions
/// are usually, though not always, typable.
pub fn random_protocol_session<R: Rng>(rng: &mut R, params: &GenParams) -> Session {
    let n = rng.gen_range(2..=params.max_participants.clamp(2, PARTICIPANTS.len()));
    let tags = params.max_tags.clamp(1, TAGS.len());
    let mut protocol = Protocol { steps: Vec::new() };
    protocol.grow(rng, n, tags, params, &mut Vec::new(), params.max_depth.max(1));
    let mut graph = ProcessGraph::new();
    let stop = graph.add(Node::Stop);
    let mut bindings = BTreeMap::new();
    for (me, name) in PARTICIPANTS.iter().enumerate().take(n) {
        let root = protocol.project(me, Cont::At(0), &mut graph, stop, &mut BTreeMap::new(), n);
        bindings.insert(Participant::from(*name), root);
    }
    Session::new(Arc::new(graph), bindings, Queue::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_session() {
        let a = random_session(&mut batch_rng(7, 3), &GenParams::default());
        let b = random_session(&mut batch_rng(7, 3), &GenParams::default());
        assert_eq!(a.to_string(), b.to_string());
        let c = random_session(&mut batch_rng(7, 4), &GenParams::default());
        let d = random_session(&mut batch_rng(8, 3), &GenParams::default());
        assert!(a.to_string() != c.to_string() || a.to_string() != d.to_string());
    }

    #[test]
    fn generated_sessions_reparse() {
        for i in 0..50 {
            let s = random_session(&mut batch_rng(1, i), &GenParams::default());
            let doc = crate::session::render_session_document(&s, "S");
            let back = crate::syntax::load_program(&doc).unwrap();
            assert!(back.session("S").unwrap().equivalent(&s), "{doc}");
            assert!(s.plays().len() <= 4);
        }
    }

    #[test]
    fn generated_globals_have_distinct_labels() {
        for i in 0..50 {
            let g = random_global(&mut batch_rng(2, i), &GenParams::default());
            for id in g.graph().reachable(g.root()) {
                let labels: Vec<&CommLabel> = g.graph().node(id).branches().iter().map(|(l, _)| l).collect();
                let mut dedup = labels.clone();
                dedup.sort();
                dedup.dedup();
                assert_eq!(labels.len(), dedup.len());
                for l in labels {
                    assert_ne!(l.player, l.partner);
                }
            }
        }
    }
}
