//! Transitions of type configurations `G ∥ Q`, message weights and
//! soundness.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::global::GlobalType;
use crate::label::{CommLabel, Kind, Message};
use crate::queue::{apply_label, Queue};
use crate::term::{bisimilar, Node, NodeId, TermGraph};

/// A global type paired with a queue.
#[derive(Clone, Debug)]
pub struct TypeConfiguration {
    pub global: GlobalType,
    pub queue: Queue,
}

impl TypeConfiguration {
    pub fn new(global: GlobalType, queue: Queue) -> Self {
        TypeConfiguration { global, queue }
    }

    /// The successor configuration, when the step is defined.
    pub fn step(&self, label: &CommLabel) -> Option<TypeConfiguration> {
        let queue = apply_label(label, &self.queue)?;
        let global = transform(&self.global, label)?;
        Some(TypeConfiguration { global, queue })
    }

    pub fn enabled(&self) -> BTreeSet<CommLabel> {
        self.global
            .capabilities()
            .iter()
            .filter(|l| apply_label(l, &self.queue).is_some() && transform(&self.global, l).is_some())
            .cloned()
            .collect()
    }

    pub fn is_sound(&self) -> bool {
        is_sound(self)
    }
}

pub fn gt_step(c: &TypeConfiguration, label: &CommLabel) -> Option<GlobalType> {
    c.step(label).map(|next| next.global)
}

pub fn gt_enabled(c: &TypeConfiguration) -> BTreeSet<CommLabel> {
    c.enabled()
}

enum Memo {
    InProgress(NodeId),
    Done(Option<NodeId>),
}

struct Transform<'a> {
    source: &'a TermGraph<CommLabel>,
    global: &'a GlobalType,
    label: &'a CommLabel,
    out: TermGraph<CommLabel>,
    memo: HashMap<NodeId, Memo>,
}

impl Transform<'_> {
    fn go(&mut self, id: NodeId) -> Option<NodeId> {
        match self.memo.get(&id) {
            Some(Memo::InProgress(placeholder)) => return Some(*placeholder),
            Some(Memo::Done(result)) => return *result,
            None => {}
        }
        let Node::Choice(branches) = self.source.node(id) else {
            return None;
        };
        if let Some((_, next)) = branches.iter().find(|(l, _)| l == self.label) {
            return Some(*next);
        }
        let guards = branches.iter().all(|(l, next)| {
            l.player != self.label.player && self.global.graph().capabilities(*next).contains(self.label)
        });
        if !guards {
            self.memo.insert(id, Memo::Done(None));
            return None;
        }
        let placeholder = self.out.add(Node::Stop);
        self.memo.insert(id, Memo::InProgress(placeholder));
        let mut rewritten = Vec::with_capacity(branches.len());
        for (l, next) in branches {
            match self.go(*next) {
                Some(n) => rewritten.push((l.clone(), n)),
                None => {
                    self.memo.insert(id, Memo::Done(None));
                    return None;
                }
            }
        }
        self.out.set(placeholder, Node::Choice(rewritten));
        self.memo.insert(id, Memo::Done(Some(placeholder)));
        Some(placeholder)
    }
}

/// Rewrites `g` by the label, through one GE step possibly under GI
/// contexts. The queue is not involved.
fn transform(g: &GlobalType, label: &CommLabel) -> Option<GlobalType> {
    let source = g.graph().terms();
    let mut t = Transform { source, global: g, label, out: source.clone(), memo: HashMap::new() };
    let root = t.go(g.root())?;
    Some(GlobalType::from_terms(&t.out, root))
}

/// Naturals extended with a maximal infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Finite(u64),
    Infinity,
}

impl ExtNat {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Finite(_))
    }

    pub fn succ(self) -> ExtNat {
        match self {
            ExtNat::Finite(n) => ExtNat::Finite(n + 1),
            ExtNat::Infinity => ExtNat::Infinity,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(n) => write!(f, "{n}"),
            ExtNat::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(n) => s.serialize_u64(*n),
            ExtNat::Infinity => s.serialize_str("inf"),
        }
    }
}

enum Consumes {
    Yes,
    Blocks,
    No,
}

/// How a branch label relates to the reception of `m`.
fn consumes(label: &CommLabel, m: &Message) -> Consumes {
    if label.kind == Kind::Input && label.player == m.receiver && label.partner == m.sender {
        if label.tag == m.tag {
            Consumes::Yes
        } else {
            Consumes::Blocks
        }
    } else {
        Consumes::No
    }
}

/// Number of communications before `m` is necessarily read, minimised
/// over the branches of the type.
///
/// Computed as a shortest path; on regular graphs this coincides with the
/// recursive definition (see [`weight_by_definition`]).
pub fn weight(g: &GlobalType, m: &Message) -> ExtNat {
    let graph = g.graph();
    let mut seen = HashSet::from([g.root()]);
    let mut level = vec![g.root()];
    let mut depth = 0u64;
    while !level.is_empty() {
        let mut next_level = Vec::new();
        for id in level {
            for (label, next) in graph.node(id).branches() {
                match consumes(label, m) {
                    Consumes::Yes => return ExtNat::Finite(depth),
                    Consumes::Blocks => {}
                    Consumes::No => {
                        if seen.insert(*next) {
                            next_level.push(*next);
                        }
                    }
                }
            }
        }
        level = next_level;
        depth += 1;
    }
    ExtNat::Infinity
}

/// How the visited set of the recursive weight definition compares terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Same branch of the same graph node.
    NodeIdentity,
    /// Same label and bisimilar continuation.
    Bisimilar,
}

/// The recursive definition of weight, with its visited set of branches
/// taken literally. Exponential in the worst case; meant for testing.
pub fn weight_by_definition(g: &GlobalType, m: &Message, membership: Membership) -> ExtNat {
    let mut visited = Vec::new();
    waux(g, g.root(), m, membership, &mut visited)
}

fn waux(g: &GlobalType, id: NodeId, m: &Message, membership: Membership, visited: &mut Vec<(NodeId, usize)>) -> ExtNat {
    let terms = g.graph().terms();
    let mut best = ExtNat::Infinity;
    for (i, (label, next)) in terms.node(id).branches().iter().enumerate() {
        let w = match consumes(label, m) {
            Consumes::Yes => ExtNat::Finite(0),
            Consumes::Blocks => ExtNat::Infinity,
            Consumes::No => {
                let seen = visited.iter().any(|(vid, vi)| match membership {
                    Membership::NodeIdentity => (*vid, *vi) == (id, i),
                    Membership::Bisimilar => {
                        let (vl, vn) = &terms.node(*vid).branches()[*vi];
                        vl == label && bisimilar(terms, *vn, terms, *next)
                    }
                });
                if seen {
                    ExtNat::Infinity
                } else {
                    visited.push((id, i));
                    let w = waux(g, *next, m, membership, visited).succ();
                    visited.pop();
                    w
                }
            }
        };
        best = best.min(w);
    }
    best
}

/// Every queued message has finite weight in the configuration's type.
pub fn is_sound(c: &TypeConfiguration) -> bool {
    c.queue.messages().all(|m| weight(&c.global, &m).is_finite())
}

/// Messages of the queue whose weight is infinite.
pub fn unsound_messages(c: &TypeConfiguration) -> Vec<Message> {
    c.queue.messages().filter(|m| !weight(&c.global, m).is_finite()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::load_program;

    fn l(s: &str) -> CommLabel {
        s.parse().unwrap()
    }

    fn conf(src: &str, name: &str) -> TypeConfiguration {
        let r = load_program(src).unwrap();
        TypeConfiguration::new(r.global(name).unwrap(), Queue::new())
    }

    #[test]
    fn capability_guard_blocks_bogus_step() {
        let c = conf("global G = r s ! l2 . s r ? l2 . G", "G");
        assert!(c.step(&l("p>q!l")).is_none());
        assert_eq!(gt_enabled(&c), BTreeSet::from([l("r>s!l2")]));
    }

    #[test]
    fn step_under_an_unrelated_prefix() {
        let src = "
            global G = p q ! l . H
            global H = r s ! l2 . s r ? l2 . End
            global Want = p q ! l . s r ? l2 . End
        ";
        let r = load_program(src).unwrap();
        let c = TypeConfiguration::new(r.global("G").unwrap(), Queue::new());
        let next = c.step(&l("r>s!l2")).unwrap();
        assert!(next.global.bisim_equal(&r.global("Want").unwrap()));
        assert_eq!(next.queue, Queue::from_messages([Message::new("r", "l2", "s")]));
    }

    #[test]
    fn head_step_and_end() {
        let c = conf("global G = p q ! l . End", "G");
        assert!(c.step(&l("p>q!l")).unwrap().global.is_end());
        let end = TypeConfiguration::new(GlobalType::end(), Queue::new());
        assert!(end.enabled().is_empty());
        let two = conf("global G = p q ! l . End + r s ! l2 . End", "G");
        assert_eq!(two.enabled(), BTreeSet::from([l("p>q!l"), l("r>s!l2")]));
    }

    #[test]
    fn input_needs_the_message() {
        let c = conf("global G = q p ? l . End", "G");
        assert!(c.step(&l("q<p?l")).is_none());
        let c = TypeConfiguration::new(c.global, Queue::from_messages([Message::new("p", "l", "q")]));
        assert!(c.step(&l("q<p?l")).unwrap().queue.is_empty());
    }

    #[test]
    fn client_server_type_offers_halt_under_request() {
        let c = conf(
            "global G = c s ! req . (s c ? req . s c ! res . c s ? res . G
                 + s c ! halt . c s ? halt . s c ? req . s c ! res . c s ? res . End)",
            "G",
        );
        assert_eq!(c.enabled(), BTreeSet::from([l("c>s!req"), l("s>c!halt")]));
        let r = load_program("global W = c s ! req . c s ? halt . s c ? req . s c ! res . c s ? res . End").unwrap();
        assert!(c.step(&l("s>c!halt")).unwrap().global.bisim_equal(&r.global("W").unwrap()));
    }

    #[test]
    fn same_player_different_action_is_stuck() {
        let c = conf("global G = p q ! l . End", "G");
        assert!(c.step(&l("p>r!l")).is_none());
    }

    #[test]
    fn weights_of_the_loop_example() {
        let src = "global G = p q ! l . q p ? l . G + p r ? l . End";
        let g = load_program(src).unwrap().global("G").unwrap();
        for w in [
            weight(&g, &Message::new("p", "l", "q")),
            weight_by_definition(&g, &Message::new("p", "l", "q"), Membership::NodeIdentity),
            weight_by_definition(&g, &Message::new("p", "l", "q"), Membership::Bisimilar),
        ] {
            assert_eq!(w, ExtNat::Finite(1));
        }
        assert_eq!(weight(&g, &Message::new("r", "l", "p")), ExtNat::Finite(0));
        assert_eq!(weight(&g, &Message::new("p", "l2", "q")), ExtNat::Infinity);
        assert_eq!(weight(&GlobalType::end(), &Message::new("p", "l", "q")), ExtNat::Infinity);

        let sound = TypeConfiguration::new(g.clone(), Queue::from_messages([Message::new("p", "l", "q")]));
        assert!(sound.is_sound());
        let unsound = TypeConfiguration::new(g, Queue::from_messages([Message::new("p", "l2", "q")]));
        assert!(!unsound.is_sound());
        assert_eq!(unsound_messages(&unsound), vec![Message::new("p", "l2", "q")]);
    }

    #[test]
    fn ext_nat_order() {
        assert!(ExtNat::Finite(u64::MAX) < ExtNat::Infinity);
        assert_eq!(ExtNat::Infinity.succ(), ExtNat::Infinity);
        assert_eq!(ExtNat::Finite(2).succ(), ExtNat::Finite(3));
    }
}
