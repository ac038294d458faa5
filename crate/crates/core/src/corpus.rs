//! Loading a directory of `.mps` programs.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::global::GlobalType;
use crate::session::Session;
use crate::syntax::{load_program, DslError, Resolved};

/// One resolved file of a corpus.
#[derive(Clone, Debug)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub program: Resolved,
}

impl CorpusFile {
    /// The file name without its extension.
    pub fn stem(&self) -> String {
        self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub files: Vec<CorpusFile>,
}

impl Corpus {
    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn sessions(&self) -> impl Iterator<Item = (&CorpusFile, &str, &Session)> {
        self.files.iter().flat_map(|f| f.program.sessions().map(move |(n, s)| (f, n, s)))
    }

    pub fn globals(&self) -> impl Iterator<Item = (&CorpusFile, &str, GlobalType)> {
        self.files.iter().flat_map(|f| f.program.globals().map(move |(n, g)| (f, n, g)))
    }

    /// Every (global type, session) pair declared in the same file.
    pub fn pairs(&self) -> impl Iterator<Item = (&CorpusFile, (&str, GlobalType), (&str, &Session))> {
        self.files.iter().flat_map(|f| {
            f.program
                .globals()
                .flat_map(move |(gn, g)| f.program.sessions().map(move |(sn, s)| (f, (gn, g.clone()), (sn, s))))
        })
    }

    pub fn session(&self, name: &str) -> Option<&Session> {
        self.files.iter().find_map(|f| f.program.session(name))
    }

    pub fn global(&self, name: &str) -> Option<GlobalType> {
        self.files.iter().find_map(|f| f.program.global(name))
    }
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Dsl(#[from] DslError),
}

/// Every file of a directory that failed to load.
#[derive(Debug, Error)]
pub struct CorpusError {
    pub failures: Vec<(PathBuf, FileError)>,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (path, err)) in self.failures.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {err}", path.display())?;
        }
        Ok(())
    }
}

pub fn load_file(path: &Path) -> Result<CorpusFile, FileError> {
    let text = fs::read_to_string(path)?;
    let program = load_program(&text)?;
    Ok(CorpusFile { path: path.to_path_buf(), program })
}

/// Loads every `.mps` file of `dir`, in file-name order.
pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|e| CorpusError { failures: vec![(dir.to_path_buf(), e.into())] })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "mps"))
        .collect();
    paths.sort();
    let mut corpus = Corpus::default();
    let mut failures = Vec::new();
    for path in paths {
        match load_file(&path) {
            Ok(file) => corpus.files.push(file),
            Err(e) => failures.push((path, e)),
        }
    }
    if failures.is_empty() {
        Ok(corpus)
    } else {
        Err(CorpusError { failures })
    }
}
