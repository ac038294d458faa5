//! Global types as regular term graphs, with players and capabilities.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::sync::{Arc, OnceLock};

use crate::label::CommLabel;
use crate::name::Participant;
use crate::term::{bisimilar, label_fixpoint, Node, NodeId, TermGraph};

/// A term graph of global-type nodes with lazily computed per-node analyses.
#[derive(Default)]
pub struct GlobalGraph {
    terms: TermGraph<CommLabel>,
    players: OnceLock<Vec<BTreeSet<Participant>>>,
    capabilities: OnceLock<Vec<BTreeSet<CommLabel>>>,
}

impl GlobalGraph {
    pub fn new(terms: TermGraph<CommLabel>) -> Self {
        GlobalGraph { terms, players: OnceLock::new(), capabilities: OnceLock::new() }
    }

    pub fn terms(&self) -> &TermGraph<CommLabel> {
        &self.terms
    }

    pub fn players(&self, id: NodeId) -> &BTreeSet<Participant> {
        &self.players.get_or_init(|| label_fixpoint(&self.terms, |l: &CommLabel| l.player.clone()))[id.index()]
    }

    pub fn capabilities(&self, id: NodeId) -> &BTreeSet<CommLabel> {
        &self.capabilities.get_or_init(|| label_fixpoint(&self.terms, CommLabel::clone))[id.index()]
    }
}

impl Deref for GlobalGraph {
    type Target = TermGraph<CommLabel>;

    fn deref(&self) -> &Self::Target {
        &self.terms
    }
}

impl fmt::Debug for GlobalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.terms.fmt(f)
    }
}

/// A global type: a root node in a shared, immutable graph.
#[derive(Clone, Debug)]
pub struct GlobalType {
    graph: Arc<GlobalGraph>,
    root: NodeId,
}

impl GlobalType {
    pub fn new(graph: Arc<GlobalGraph>, root: NodeId) -> Self {
        GlobalType { graph, root }
    }

    /// Builds a standalone global type from a raw term graph, keeping only
    /// the part reachable from `root`.
    pub fn from_terms(terms: &TermGraph<CommLabel>, root: NodeId) -> Self {
        let (terms, root) = terms.extract(root);
        GlobalType { graph: Arc::new(GlobalGraph::new(terms)), root }
    }

    pub fn end() -> Self {
        let mut terms = TermGraph::new();
        let root = terms.add(Node::Stop);
        GlobalType::new(Arc::new(GlobalGraph::new(terms)), root)
    }

    pub fn graph(&self) -> &Arc<GlobalGraph> {
        &self.graph
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self) -> &Node<CommLabel> {
        self.graph.node(self.root)
    }

    pub fn is_end(&self) -> bool {
        self.node().is_stop()
    }

    /// The same graph, rooted elsewhere.
    pub fn at(&self, root: NodeId) -> GlobalType {
        GlobalType { graph: Arc::clone(&self.graph), root }
    }

    pub fn branches(&self) -> impl Iterator<Item = (&CommLabel, GlobalType)> + '_ {
        self.node().branches().iter().map(|(l, n)| (l, self.at(*n)))
    }

    pub fn players(&self) -> &BTreeSet<Participant> {
        self.graph.players(self.root)
    }

    pub fn capabilities(&self) -> &BTreeSet<CommLabel> {
        self.graph.capabilities(self.root)
    }

    pub fn node_count(&self) -> usize {
        self.graph.reachable(self.root).len()
    }

    pub fn bisim_equal(&self, other: &GlobalType) -> bool {
        bisimilar(self.graph.terms(), self.root, other.graph.terms(), other.root)
    }
}

pub fn players_of_global(g: &GlobalType) -> &BTreeSet<Participant> {
    g.players()
}

pub fn capabilities(g: &GlobalType) -> &BTreeSet<CommLabel> {
    g.capabilities()
}

impl fmt::Display for GlobalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::render_inline(self.graph.terms(), self.root))
    }
}
