//! Resolution of named definitions into finite cyclic term graphs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::global::{GlobalGraph, GlobalType};
use crate::label::{CommLabel, Prefix};
use crate::queue::Queue;
use crate::session::{ProcessGraph, Session};
use crate::term::{Node, NodeId, TermGraph, TermLabel};

use super::parser::{Decl, GlobalTerm, Ident, ProcTerm, Program};
use super::{Pos, ResolveError};

/// Every definition of a program, resolved.
#[derive(Clone, Debug)]
pub struct Resolved {
    processes: Arc<ProcessGraph>,
    globals: Arc<GlobalGraph>,
    process_defs: BTreeMap<String, NodeId>,
    global_defs: BTreeMap<String, NodeId>,
    sessions: BTreeMap<String, Session>,
}

impl Resolved {
    pub fn processes(&self) -> &Arc<ProcessGraph> {
        &self.processes
    }

    pub fn process(&self, name: &str) -> Option<NodeId> {
        self.process_defs.get(name).copied()
    }

    pub fn global(&self, name: &str) -> Option<GlobalType> {
        self.global_defs.get(name).map(|id| GlobalType::new(Arc::clone(&self.globals), *id))
    }

    pub fn session(&self, name: &str) -> Option<&Session> {
        self.sessions.get(name)
    }

    pub fn process_names(&self) -> impl Iterator<Item = &str> {
        self.process_defs.keys().map(String::as_str)
    }

    pub fn global_names(&self) -> impl Iterator<Item = &str> {
        self.global_defs.keys().map(String::as_str)
    }

    pub fn sessions(&self) -> impl Iterator<Item = (&str, &Session)> {
        self.sessions.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn globals(&self) -> impl Iterator<Item = (&str, GlobalType)> + '_ {
        self.global_defs.iter().map(|(n, id)| (n.as_str(), GlobalType::new(Arc::clone(&self.globals), *id)))
    }
}

enum View<'t, T: Surface> {
    End,
    Ref(&'t Ident),
    Sum(&'t [(T::Label, Pos, T)]),
}

trait Surface: Sized {
    type Label: TermLabel;
    fn view(&self) -> View<'_, Self>;
    fn duplicate(label: &Self::Label, pos: Pos) -> ResolveError;
}

impl Surface for ProcTerm {
    type Label = Prefix;

    fn view(&self) -> View<'_, Self> {
        match self {
            ProcTerm::End => View::End,
            ProcTerm::Ref(id) => View::Ref(id),
            ProcTerm::Sum(bs) => View::Sum(bs),
        }
    }

    fn duplicate(label: &Prefix, pos: Pos) -> ResolveError {
        ResolveError::DistinctPrefixViolation { prefix: label.to_string(), line: pos.line, col: pos.col }
    }
}

impl Surface for GlobalTerm {
    type Label = CommLabel;

    fn view(&self) -> View<'_, Self> {
        match self {
            GlobalTerm::End => View::End,
            GlobalTerm::Ref(id) => View::Ref(id),
            GlobalTerm::Sum(bs) => View::Sum(bs),
        }
    }

    fn duplicate(label: &CommLabel, pos: Pos) -> ResolveError {
        ResolveError::DuplicateGlobalLabel { label: label.dsl_string(), line: pos.line, col: pos.col }
    }
}

struct Builder<'p, T: Surface> {
    graph: TermGraph<T::Label>,
    stop: NodeId,
    defs: HashMap<&'p str, NodeId>,
}

impl<'p, T: Surface> Builder<'p, T> {
    fn new(decls: &[(&'p Ident, &'p T)]) -> Result<Self, ResolveError> {
        let mut graph = TermGraph::new();
        let stop = graph.add(Node::Stop);
        let mut defs: HashMap<&str, NodeId> = HashMap::new();
        let mut aliases: HashMap<&str, &Ident> = HashMap::new();
        for (name, body) in decls {
            match body.view() {
                View::End => {
                    defs.insert(&name.name, stop);
                }
                View::Ref(target) => {
                    aliases.insert(&name.name, target);
                }
                View::Sum(_) => {
                    let id = graph.add(Node::Stop);
                    graph.set_name(id, name.name.clone());
                    defs.insert(&name.name, id);
                }
            }
        }
        for (name, _) in decls {
            if !aliases.contains_key(name.name.as_str()) {
                continue;
            }
            let mut seen = HashSet::new();
            let mut current: &str = &name.name;
            let target = loop {
                if let Some(id) = defs.get(current) {
                    break *id;
                }
                if !seen.insert(current) {
                    return Err(ResolveError::UnguardedRecursion {
                        name: name.name.clone(),
                        line: name.pos.line,
                        col: name.pos.col,
                    });
                }
                let next = aliases.get(current).expect("alias chain member");
                if !defs.contains_key(next.name.as_str()) && !aliases.contains_key(next.name.as_str()) {
                    return Err(undefined(next));
                }
                current = &next.name;
            };
            defs.insert(&name.name, target);
        }
        let mut builder = Builder { graph, stop, defs };
        for (name, body) in decls {
            if let View::Sum(branches) = body.view() {
                let id = builder.defs[name.name.as_str()];
                let node = builder.choice(branches)?;
                builder.graph.set(id, node);
            }
        }
        Ok(builder)
    }

    fn build(&mut self, term: &T) -> Result<NodeId, ResolveError> {
        match term.view() {
            View::End => Ok(self.stop),
            View::Ref(id) => self.defs.get(id.name.as_str()).copied().ok_or_else(|| undefined(id)),
            View::Sum(branches) => {
                let id = self.graph.add(Node::Stop);
                let node = self.choice(branches)?;
                self.graph.set(id, node);
                Ok(id)
            }
        }
    }

    fn choice(&mut self, branches: &[(T::Label, Pos, T)]) -> Result<Node<T::Label>, ResolveError> {
        let mut out: Vec<(T::Label, NodeId)> = Vec::with_capacity(branches.len());
        for (label, pos, cont) in branches {
            if out.iter().any(|(l, _)| l == label) {
                return Err(T::duplicate(label, *pos));
            }
            let next = self.build(cont)?;
            out.push((label.clone(), next));
        }
        Ok(Node::Choice(out))
    }
}

fn undefined(id: &Ident) -> ResolveError {
    ResolveError::UndefinedName { name: id.name.clone(), line: id.pos.line, col: id.pos.col }
}

/// Resolves every definition of `program` into shared term graphs.
pub fn resolve(program: &Program) -> Result<Resolved, ResolveError> {
    let mut proc_decls = Vec::new();
    let mut global_decls = Vec::new();
    for decl in &program.decls {
        match decl {
            Decl::Process { name, body } => proc_decls.push((name, body)),
            Decl::Global { name, body } => global_decls.push((name, body)),
            Decl::Session { .. } => {}
        }
    }

    let mut procs = Builder::<ProcTerm>::new(&proc_decls)?;
    let mut states = Vec::new();
    for decl in &program.decls {
        let Decl::Session { name, network, queue } = decl else { continue };
        let mut bindings: BTreeMap<crate::name::Participant, NodeId> = BTreeMap::new();
        let mut bound = HashSet::new();
        for (who, body) in network {
            if !bound.insert(who.name.as_str()) {
                return Err(ResolveError::DuplicateParticipant {
                    name: who.name.clone(),
                    line: who.pos.line,
                    col: who.pos.col,
                });
            }
            let node = procs.build(body)?;
            bindings.insert(who.name.as_str().into(), node);
        }
        states.push((name.name.clone(), bindings, Queue::from_messages(queue.iter().cloned())));
    }
    let process_defs = procs.defs.iter().map(|(n, id)| (n.to_string(), *id)).collect();
    let processes = Arc::new(procs.graph);
    let sessions = states
        .into_iter()
        .map(|(name, bindings, queue)| (name, Session::new(Arc::clone(&processes), bindings, queue)))
        .collect();

    let globals = Builder::<GlobalTerm>::new(&global_decls)?;
    let global_defs = globals.defs.iter().map(|(n, id)| (n.to_string(), *id)).collect();

    Ok(Resolved { processes, globals: Arc::new(GlobalGraph::new(globals.graph)), process_defs, global_defs, sessions })
}

#[cfg(test)]
mod tests {
    use super::super::load_program;
    use super::*;

    #[test]
    fn single_loop_has_one_choice_node() {
        let r = load_program("participant P = q!l . P").unwrap();
        let g = r.processes();
        let p = r.process("P").unwrap();
        assert_eq!(g.reachable(p).len(), 1);
        assert_eq!(g.node(p).branches(), &[(Prefix::output("q", "l"), p)]);
    }

    #[test]
    fn unguarded_recursion() {
        let err = load_program("participant P = P").unwrap_err();
        assert!(matches!(err, super::super::DslError::Resolve(ResolveError::UnguardedRecursion { .. })));
        let err = load_program("participant P = Q\nparticipant Q = (P)").unwrap_err();
        assert!(matches!(err, super::super::DslError::Resolve(ResolveError::UnguardedRecursion { .. })));
    }

    #[test]
    fn distinct_prefixes() {
        let err = load_program("participant P = s!req . (s?res . P + s?res . end)").unwrap_err();
        assert!(matches!(err, super::super::DslError::Resolve(ResolveError::DistinctPrefixViolation { .. })));
        // Same peer and tag but different direction is fine.
        assert!(load_program("participant P = s!res . end + s?res . end").is_ok());
    }

    #[test]
    fn duplicate_global_label() {
        let err = load_program("global G = p q ! l . G + p q ! l . End").unwrap_err();
        assert!(matches!(err, super::super::DslError::Resolve(ResolveError::DuplicateGlobalLabel { .. })));
        assert!(load_program("global G = p q ! l . G + p q ? l . End").is_ok());
    }

    #[test]
    fn undefined_and_duplicate_participant() {
        let err = load_program("participant P = q!l . Q").unwrap_err();
        assert!(matches!(err, super::super::DslError::Resolve(ResolveError::UndefinedName { .. })));
        let err = load_program("session S = p :: end || p :: end with []").unwrap_err();
        assert!(matches!(err, super::super::DslError::Resolve(ResolveError::DuplicateParticipant { .. })));
    }

    #[test]
    fn aliases_resolve_to_their_target() {
        let r = load_program("participant A = B\nparticipant B = q!l . A\nparticipant C = end").unwrap();
        assert_eq!(r.process("A"), r.process("B"));
        assert!(r.processes().node(r.process("C").unwrap()).is_stop());
    }

    #[test]
    fn terminated_bindings_leave_the_network() {
        let r = load_program("session S = p :: end || q :: p!l . end with [<p, m, q>]").unwrap();
        let s = r.session("S").unwrap();
        assert_eq!(s.plays().len(), 1);
        assert!(!s.queue().is_empty());
    }
}
