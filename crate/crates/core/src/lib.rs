//! Verification toolkit for asynchronous multiparty sessions with mixed
//! choice.
//!
//! Sessions and global types are written in a small DSL ([`syntax`]),
//! resolved into finite cyclic term graphs, and then executed ([`session`],
//! [`explore`]), typed ([`checker`]) and model-checked ([`properties`]).

pub mod checker;
pub mod corpus;
pub mod explore;
pub mod gen;
pub mod global;
pub mod label;
pub mod name;
pub mod par;
pub mod properties;
pub mod queue;
pub mod schedule;
pub mod session;
pub mod syntax;
pub mod term;
pub mod typesem;

pub use global::{capabilities, players_of_global, GlobalGraph, GlobalType};
pub use label::{parse_trace, CommLabel, Kind, Message, Prefix};
pub use name::{Participant, Tag};
pub use queue::{apply_label, Queue};
pub use session::{
    coherent_sets, enabled_for, enabled_labels, is_satisfied, run_trace, step, ProcessGraph, Session, State,
};
pub use syntax::{load_program, parse_program, resolve, DslError, Resolved};
pub use term::{bisimilar, Node, NodeId, TermGraph};
