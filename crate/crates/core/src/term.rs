//! Finite cyclic graphs presenting regular coinductive terms.
//!
//! Processes and global types share one shape: a node is either the
//! terminated term or a finite choice of labelled continuations. Back-edges
//! encode recursion, so a regular term is a root node in a [`TermGraph`].

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use crate::label::{CommLabel, Prefix};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node<L> {
    /// `end` for processes, `End` for global types.
    Stop,
    Choice(Vec<(L, NodeId)>),
}

impl<L> Node<L> {
    pub fn branches(&self) -> &[(L, NodeId)] {
        match self {
            Node::Stop => &[],
            Node::Choice(branches) => branches,
        }
    }

    pub fn is_stop(&self) -> bool {
        matches!(self, Node::Stop)
    }
}

/// Labels that can decorate term-graph branches.
pub trait TermLabel: Clone + Ord + fmt::Debug {
    /// Keyword for the terminated term.
    const STOP: &'static str;
    /// Keyword introducing a named definition of this sort.
    const DECL: &'static str;
    fn to_dsl(&self) -> String;
}

impl TermLabel for Prefix {
    const STOP: &'static str = "end";
    const DECL: &'static str = "participant";

    fn to_dsl(&self) -> String {
        format!("{}{}{}", self.peer, self.kind.symbol(), self.tag)
    }
}

impl TermLabel for CommLabel {
    const STOP: &'static str = "End";
    const DECL: &'static str = "global";

    fn to_dsl(&self) -> String {
        self.dsl_string()
    }
}

/// An arena of term nodes. Definition names are remembered for printing.
#[derive(Clone, Debug)]
pub struct TermGraph<L> {
    nodes: Vec<Node<L>>,
    names: BTreeMap<NodeId, String>,
}

impl<L> Default for TermGraph<L> {
    fn default() -> Self {
        TermGraph { nodes: Vec::new(), names: BTreeMap::new() }
    }
}

impl<L: TermLabel> TermGraph<L> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, node: Node<L>) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("term graph too large"));
        self.nodes.push(node);
        id
    }

    pub fn set(&mut self, id: NodeId, node: Node<L>) {
        self.nodes[id.index()] = node;
    }

    pub fn node(&self, id: NodeId) -> &Node<L> {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(|i| NodeId(i as u32))
    }

    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
        self.names.retain(|id, _| id.index() < len);
    }

    pub fn name_of(&self, id: NodeId) -> Option<&str> {
        self.names.get(&id).map(String::as_str)
    }

    pub fn set_name(&mut self, id: NodeId, name: impl Into<String>) {
        self.names.insert(id, name.into());
    }

    pub fn names(&self) -> &BTreeMap<NodeId, String> {
        &self.names
    }

    /// Nodes reachable from `root`, in depth-first preorder with branches
    /// visited in stored order.
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            order.push(id);
            for (_, next) in self.node(id).branches().iter().rev() {
                if !seen.contains(next) {
                    stack.push(*next);
                }
            }
        }
        order
    }

    /// Copies the part of the graph reachable from `root` into a fresh,
    /// densely numbered graph whose root is node 0.
    pub fn extract(&self, root: NodeId) -> (TermGraph<L>, NodeId) {
        let order = self.reachable(root);
        let renumber: BTreeMap<NodeId, NodeId> =
            order.iter().enumerate().map(|(i, id)| (*id, NodeId(i as u32))).collect();
        let mut out = TermGraph::new();
        for id in &order {
            let node = match self.node(*id) {
                Node::Stop => Node::Stop,
                Node::Choice(branches) => {
                    Node::Choice(branches.iter().map(|(l, n)| (l.clone(), renumber[n])).collect())
                }
            };
            let new_id = out.add(node);
            if let Some(name) = self.name_of(*id) {
                out.set_name(new_id, name);
            }
        }
        (out, NodeId(0))
    }
}

/// Bisimilarity of two regular terms, possibly living in different graphs.
///
/// Choices are compared as sets of branches: both sides must offer the same
/// labels and the matching continuations must be bisimilar. Pairs are assumed
/// related on first visit (greatest fixpoint).
pub fn bisimilar<L: TermLabel>(ga: &TermGraph<L>, a: NodeId, gb: &TermGraph<L>, b: NodeId) -> bool {
    let mut assumed: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut work = VecDeque::from([(a, b)]);
    while let Some((x, y)) = work.pop_front() {
        if !assumed.insert((x, y)) {
            continue;
        }
        match (ga.node(x), gb.node(y)) {
            (Node::Stop, Node::Stop) => {}
            (Node::Choice(bx), Node::Choice(by)) => {
                if bx.len() != by.len() {
                    return false;
                }
                let mut sx: Vec<&(L, NodeId)> = bx.iter().collect();
                let mut sy: Vec<&(L, NodeId)> = by.iter().collect();
                sx.sort_by(|l, r| l.0.cmp(&r.0));
                sy.sort_by(|l, r| l.0.cmp(&r.0));
                for ((lx, nx), (ly, ny)) in sx.into_iter().zip(sy) {
                    if lx != ly {
                        return false;
                    }
                    work.push_back((*nx, *ny));
                }
            }
            _ => return false,
        }
    }
    true
}

/// Least fixpoint of a set-valued attribute over the graph: `f(Stop) = ∅`,
/// `f(Σ Λ_i.G_i) = ∪ (local(Λ_i) ∪ f(G_i))`.
pub(crate) fn label_fixpoint<L, T, F>(graph: &TermGraph<L>, local: F) -> Vec<std::collections::BTreeSet<T>>
where
    L: TermLabel,
    T: Ord + Clone,
    F: Fn(&L) -> T,
{
    use std::collections::BTreeSet;
    let mut sets: Vec<BTreeSet<T>> =
        graph.ids().map(|id| graph.node(id).branches().iter().map(|(l, _)| local(l)).collect()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for id in graph.ids() {
            for (_, next) in graph.node(id).branches() {
                if next.index() == id.index() {
                    continue;
                }
                let extra: Vec<T> =
                    sets[next.index()].iter().filter(|t| !sets[id.index()].contains(*t)).cloned().collect();
                if !extra.is_empty() {
                    sets[id.index()].extend(extra);
                    changed = true;
                }
            }
        }
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;

    fn out(peer: &str, tag: &str) -> Prefix {
        Prefix::output(peer, tag)
    }

    #[test]
    fn extract_renumbers_and_keeps_names() {
        let mut g = TermGraph::new();
        let unused = g.add(Node::Stop);
        let a = g.add(Node::Stop);
        g.set(a, Node::Choice(vec![(out("q", "l"), a)]));
        g.set_name(a, "P");
        let (h, root) = g.extract(a);
        assert_eq!(h.len(), 1);
        assert_eq!(h.name_of(root), Some("P"));
        assert!(bisimilar(&g, a, &h, root));
        assert!(!bisimilar(&g, a, &g, unused));
    }

    #[test]
    fn bisim_ignores_branch_order() {
        let mut g = TermGraph::new();
        let end = g.add(Node::Stop);
        let x = g.add(Node::Choice(vec![(out("q", "l"), end), (Prefix::input("r", "m"), end)]));
        let y = g.add(Node::Choice(vec![(Prefix::input("r", "m"), end), (out("q", "l"), end)]));
        assert!(bisimilar(&g, x, &g, y));
    }
}
