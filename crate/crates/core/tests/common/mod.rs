//! Law checks shared by the property suites and the acceptance harness.
#![allow(dead_code)]

use std::path::PathBuf;

use mixsess::explore::{explore_with, Bounds};
use mixsess::gen::{batch_rng, random_global, random_queue, random_session, GenParams};
use mixsess::par::Execution;
use mixsess::{GlobalType, Message, Node, Queue};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn message() -> impl Strategy<Value = Message> {
    let names = prop::sample::select(vec!["p", "q", "r", "s"]);
    let tags = prop::sample::select(vec!["l", "m", "n"]);
    (names.clone(), tags, names)
        .prop_filter("distinct endpoints", |(a, _, b)| a != b)
        .prop_map(|(a, t, b)| Message::new(a, t, b))
}

pub fn queue() -> impl Strategy<Value = Queue> {
    any::<u64>()
        .prop_map(|seed| random_queue(&mut batch_rng(seed, 0), &GenParams { max_messages: 5, ..GenParams::default() }))
}

pub fn pushed(q: &Queue, ms: &[&Message]) -> Queue {
    let mut q = q.clone();
    for m in ms {
        q.push((*m).clone());
    }
    q
}

/// Messages on different channels commute; on the same channel with
/// different tags they do not.
pub fn queue_commutation(q: &Queue, a: &Message, b: &Message) -> Result<(), TestCaseError> {
    let ab = pushed(q, &[a, b]);
    let ba = pushed(q, &[b, a]);
    let same_channel = a.sender == b.sender && a.receiver == b.receiver;
    if !same_channel {
        prop_assert_eq!(&ab, &ba);
    } else if a.tag != b.tag {
        prop_assert_ne!(&ab, &ba);
    }
    Ok(())
}

/// A copy of `g` with its root unfolded once into a fresh node.
pub fn unfold(g: &GlobalType) -> GlobalType {
    let mut terms = g.graph().terms().clone();
    let copy = terms.add(g.node().clone());
    GlobalType::from_terms(&terms, copy)
}

/// `g` with its first branch dropped, when it has more than one.
pub fn pruned(g: &GlobalType) -> Option<GlobalType> {
    let branches = g.node().branches();
    if branches.len() < 2 {
        return None;
    }
    let mut terms = g.graph().terms().clone();
    let root = terms.add(Node::Choice(branches[1..].to_vec()));
    Some(GlobalType::from_terms(&terms, root))
}

pub fn random_globals(seed: u64) -> (GlobalType, GlobalType) {
    let params = GenParams::default();
    (random_global(&mut batch_rng(seed, 0), &params), random_global(&mut batch_rng(seed, 1), &params))
}

/// Reflexivity, symmetry and transitivity, exercised on unfoldings (which
/// must be related) and on unrelated or pruned types.
pub fn bisim_laws(seed: u64) -> Result<(), TestCaseError> {
    let (g, h) = random_globals(seed);
    let g1 = unfold(&g);
    let g2 = unfold(&g1);
    prop_assert!(g.bisim_equal(&g));
    prop_assert!(g.bisim_equal(&g1) && g1.bisim_equal(&g));
    prop_assert!(g1.bisim_equal(&g2) && g.bisim_equal(&g2));
    prop_assert_eq!(g.bisim_equal(&h), h.bisim_equal(&g));
    prop_assert_eq!(g.bisim_equal(&h), g2.bisim_equal(&h));
    if let Some(p) = pruned(&g) {
        // labels of a choice are distinct, so dropping one is observable
        prop_assert!(!p.bisim_equal(&g) && !g1.bisim_equal(&p));
    }
    Ok(())
}

/// No step of one participant makes a satisfied participant unsatisfied.
pub fn satisfaction_preserved(seed: u64) -> Result<(), TestCaseError> {
    let s = random_session(&mut batch_rng(seed, 0), &GenParams::default());
    let sg = explore_with(&s, Bounds { max_states: 200, max_queue: 3 }, Execution::Sequential);
    let graph = s.graph();
    for e in sg.edges() {
        let (before, after) = (sg.state(e.from), sg.state(e.to));
        for p in before.plays() {
            if p != e.label.player && before.is_satisfied(graph, &p) {
                prop_assert!(after.is_satisfied(graph, &p), "{} lost satisfaction by {} in {}", p, e.label, s);
            }
        }
    }
    Ok(())
}

/// Exploration is a function of its input and bounds, whatever the
/// execution mode.
pub fn deterministic_exploration(seed: u64) -> Result<(), TestCaseError> {
    let s = random_session(&mut batch_rng(seed, 0), &GenParams::default());
    let bounds = Bounds { max_states: 300, max_queue: 3 };
    let a = explore_with(&s, bounds, Execution::Sequential);
    let b = explore_with(&s, bounds, Execution::Sequential);
    let c = explore_with(&s, bounds, Execution::Parallel);
    prop_assert!(a == b && b == c);
    Ok(())
}
