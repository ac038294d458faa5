//! Rendering term graphs back to DSL text.
//!
//! Nodes that are shared or sit on a cycle get a definition name (their
//! source name when they have one, otherwise a fresh `X<n>`); everything
//! else is printed inline.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use crate::label::Message;
use crate::term::{Node, NodeId, TermGraph, TermLabel};

use super::{is_keyword, Resolved};

pub(crate) struct Printer<'g, L> {
    graph: &'g TermGraph<L>,
    names: HashMap<NodeId, String>,
    /// Named nodes in the order they were first named.
    order: Vec<NodeId>,
}

impl<'g, L: TermLabel> Printer<'g, L> {
    /// Plans names for every node reachable from `roots`. Roots without a
    /// name take the suggested one when given.
    pub(crate) fn new(graph: &'g TermGraph<L>, roots: &[(Option<&str>, NodeId)], use_source_names: bool) -> Self {
        let mut indegree: HashMap<NodeId, usize> = HashMap::new();
        let mut reachable = Vec::new();
        let mut seen = HashSet::new();
        for (_, root) in roots {
            *indegree.entry(*root).or_default() += 1;
            for id in graph.reachable(*root) {
                if seen.insert(id) {
                    reachable.push(id);
                }
            }
        }
        for id in &reachable {
            for (_, next) in graph.node(*id).branches() {
                *indegree.entry(*next).or_default() += 1;
            }
        }

        let mut taken: HashSet<String> = graph.names().values().cloned().collect();
        taken.extend(roots.iter().filter_map(|(n, _)| n.map(str::to_string)));
        let mut printer = Printer { graph, names: HashMap::new(), order: Vec::new() };

        for (suggested, root) in roots {
            if graph.node(*root).is_stop() || printer.names.contains_key(root) {
                continue;
            }
            let source = graph.name_of(*root).filter(|_| use_source_names);
            if let Some(name) = source.or(*suggested) {
                printer.assign(*root, name.to_string());
            }
        }

        let mut fresh = 0usize;
        for id in reachable {
            if graph.node(id).is_stop() || printer.names.contains_key(&id) {
                continue;
            }
            if let Some(name) = graph.name_of(id).filter(|_| use_source_names) {
                printer.assign(id, name.to_string());
            } else if indegree.get(&id).copied().unwrap_or(0) >= 2 {
                let name = loop {
                    let candidate = format!("X{fresh}");
                    fresh += 1;
                    if !taken.contains(&candidate) && !is_keyword(&candidate) {
                        break candidate;
                    }
                };
                taken.insert(name.clone());
                printer.assign(id, name);
            }
        }
        printer
    }

    fn assign(&mut self, id: NodeId, name: String) {
        self.names.insert(id, name);
        self.order.push(id);
    }

    pub(crate) fn name(&self, id: NodeId) -> Option<&str> {
        self.names.get(&id).map(String::as_str)
    }

    /// A reference to `id`: its name, the stop keyword, or an inline term
    /// (parenthesised when it is a sum).
    pub(crate) fn reference(&self, id: NodeId) -> String {
        if let Some(name) = self.name(id) {
            return name.to_string();
        }
        match self.graph.node(id) {
            Node::Stop => L::STOP.to_string(),
            Node::Choice(branches) if branches.len() == 1 => self.body(id),
            Node::Choice(_) => format!("({})", self.body(id)),
        }
    }

    /// The defining term of `id`, ignoring its own name.
    pub(crate) fn body(&self, id: NodeId) -> String {
        match self.graph.node(id) {
            Node::Stop => L::STOP.to_string(),
            Node::Choice(branches) => {
                let mut out = String::new();
                for (i, (label, next)) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    let _ = write!(out, "{} . {}", label.to_dsl(), self.reference(*next));
                }
                out
            }
        }
    }

    /// Declarations for every named node, in naming order.
    pub(crate) fn declarations(&self, skip_source_names: bool) -> Vec<String> {
        self.order
            .iter()
            .filter(|id| !(skip_source_names && self.graph.name_of(**id) == self.name(**id)))
            .map(|id| format!("{} {} = {}", L::DECL, self.names[id], self.body(*id)))
            .collect()
    }
}

/// Full DSL document declaring `root_name` as the given node.
pub fn render_definition<L: TermLabel>(graph: &TermGraph<L>, root: NodeId, root_name: &str) -> String {
    let printer = Printer::new(graph, &[(Some(root_name), root)], true);
    let mut lines = Vec::new();
    if printer.name(root) != Some(root_name) {
        lines.push(format!("{} {} = {}", L::DECL, root_name, printer.reference(root)));
    }
    lines.extend(printer.declarations(false));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Compact one-line rendering. Source definition names are shown as
/// references; fresh names, if any are needed, are defined in a trailing
/// `where` clause.
pub fn render_inline<L: TermLabel>(graph: &TermGraph<L>, root: NodeId) -> String {
    let printer = Printer::new(graph, &[(None, root)], true);
    with_where(printer.reference(root), &printer)
}

fn with_where<L: TermLabel>(head: String, printer: &Printer<'_, L>) -> String {
    let fresh: Vec<String> = printer
        .declarations(true)
        .into_iter()
        .map(|d| d.split_once(' ').map(|(_, rest)| rest.to_string()).unwrap_or(d))
        .collect();
    if fresh.is_empty() {
        head
    } else {
        format!("{head} where {}", fresh.join(", "))
    }
}

/// Renders several roots into one document; returns the names chosen for
/// each root (a name or an inline term) alongside the declarations.
pub(crate) fn render_many<L: TermLabel>(graph: &TermGraph<L>, roots: &[NodeId]) -> (Vec<String>, Vec<String>) {
    let planned: Vec<(Option<&str>, NodeId)> = roots.iter().map(|r| (None, *r)).collect();
    let printer = Printer::new(graph, &planned, true);
    let refs = roots.iter().map(|r| printer.reference(*r)).collect();
    (refs, printer.declarations(false))
}

/// The whole program as one document that parses back to the same
/// definitions: processes, then global types, then sessions.
pub fn render_program(program: &Resolved) -> String {
    let mut out = String::new();
    let procs = program.processes();
    let mut roots: Vec<(Option<&str>, NodeId)> =
        program.process_names().map(|n| (Some(n), program.process(n).expect("declared name"))).collect();
    for (_, session) in program.sessions() {
        roots.extend(session.network().values().map(|id| (None, *id)));
    }
    let printer = Printer::new(procs, &roots, true);
    for d in printer.declarations(false) {
        let _ = writeln!(out, "{d}");
    }
    let globals: Vec<(&str, crate::global::GlobalType)> = program.globals().collect();
    if let Some((_, first)) = globals.first() {
        let roots: Vec<(Option<&str>, NodeId)> = globals.iter().map(|(n, g)| (Some(*n), g.root())).collect();
        let printer = Printer::new(first.graph().terms(), &roots, true);
        for d in printer.declarations(false) {
            let _ = writeln!(out, "{d}");
        }
    }
    for (name, session) in program.sessions() {
        let bindings: Vec<String> =
            session.network().iter().map(|(p, id)| format!("{p} :: {}", printer.reference(*id))).collect();
        let network = if bindings.is_empty() { "nobody :: end".to_string() } else { bindings.join(" || ") };
        let msgs: Vec<String> = session.queue().messages().map(|m: Message| m.to_string()).collect();
        let _ = writeln!(out, "session {name} = {network} with [{}]", msgs.join(", "));
    }
    out
}
