//! The `.mps` DSL: parsing, resolution into term graphs, and printing.

mod lexer;
mod parser;
mod pretty;
mod resolve;

use thiserror::Error;

pub use parser::{parse_program, Decl, GlobalTerm, Ident, ProcTerm, Program};
pub(crate) use pretty::render_many;
pub use pretty::{render_definition, render_inline, render_program};
pub use resolve::{resolve, Resolved};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: duplicate definition `{name}`")]
    DuplicateDefinition { name: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("{line}:{col}: undefined name `{name}`")]
    UndefinedName { name: String, line: usize, col: usize },
    #[error("{line}:{col}: unguarded recursion through `{name}`")]
    UnguardedRecursion { name: String, line: usize, col: usize },
    #[error("{line}:{col}: prefix `{prefix}` occurs twice in one choice")]
    DistinctPrefixViolation { prefix: String, line: usize, col: usize },
    #[error("{line}:{col}: label `{label}` occurs twice in one choice")]
    DuplicateGlobalLabel { label: String, line: usize, col: usize },
    #[error("{line}:{col}: participant `{name}` is bound twice in session")]
    DuplicateParticipant { name: String, line: usize, col: usize },
}

/// Any failure while turning DSL text into resolved graphs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

const KEYWORDS: [&str; 6] = ["participant", "global", "session", "with", "end", "End"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses and resolves a whole program.
pub fn load_program(text: &str) -> Result<Resolved, DslError> {
    let program = parse_program(text)?;
    Ok(resolve(&program)?)
}

#[cfg(test)]
mod program_tests {
    use super::*;

    #[test]
    fn rendered_programs_reparse() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let original = load_program(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let text = render_program(&original);
            let again = load_program(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", path.display()));
            for (name, s) in original.sessions() {
                assert!(s.equivalent(again.session(name).unwrap()), "{name}");
            }
            for (name, g) in original.globals() {
                assert!(g.bisim_equal(&again.global(name).unwrap()), "{name}");
            }
            assert_eq!(text, render_program(&again), "{}", path.display());
        }
    }
}
