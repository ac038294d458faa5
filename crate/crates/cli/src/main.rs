use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mixsess::checker::{check, check_report, infer, Status, Strategy};
use mixsess::corpus::{load_corpus, load_file, Corpus, CorpusError};
use mixsess::explore::{explore_with, Bounds};
use mixsess::par::Execution;
use mixsess::properties::{
    check_all, check_eventual_reception, check_lock_freedom, check_orphan_freedom, cross_check_session_fidelity,
    cross_check_subject_reduction, cross_check_type_progress, PropertyStatus, PropertyVerdict,
};
use mixsess::schedule::random_schedule;
use mixsess::syntax::{render_definition, render_program};
use mixsess::{parse_trace, run_trace, CommLabel, GlobalType, Session};

const EXIT_FAILS: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "mixsess", version, about = "Check, infer and verify asynchronous mixed-choice multiparty sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `.mps` files, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Largest number of states to visit.
    #[arg(long, default_value_t = Bounds::default().max_states)]
    max_states: usize,
    /// Longest channel allowed in any visited state.
    #[arg(long, default_value_t = Bounds::default().max_queue)]
    max_queue: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    SatisfiedFirst,
    FullSetOnly,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    All,
    LockFreedom,
    OrphanFreedom,
    EventualReception,
    SubjectReduction,
    SessionFidelity,
    TypeProgress,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the inputs and print them back.
    Parse {
        #[command(flatten)]
        common: Common,
    },
    /// Check a session against a global type.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        global: String,
        #[arg(long)]
        session: Option<String>,
        /// Also require every queued message to be eventually read by the type.
        #[arg(long)]
        sound: bool,
    },
    /// Search for a global type of a session.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        session: Option<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::SatisfiedFirst)]
        strategy: StrategyArg,
    },
    /// Run a session along a given trace or a random schedule.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        session: Option<String>,
        /// Comma-separated labels such as `c>s!req,s<c?req`.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        trace: Option<String>,
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 10, requires = "random")]
        steps: usize,
        #[arg(long, default_value_t = 0, requires = "random")]
        seed: u64,
    },
    /// Model-check session properties, or cross-check a typing.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        session: Option<String>,
        #[arg(long, value_enum, default_value_t = PropertyArg::All)]
        property: PropertyArg,
        /// Global type for subject-reduction, session-fidelity and type-progress.
        #[arg(long)]
        global: Option<String>,
    },
    /// Print the explored state graph of a session in DOT (or JSON).
    ExportDot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        session: Option<String>,
        /// Write to this file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// A failure that ends the run with the usage exit code.
struct Usage(String);

impl From<CorpusError> for Usage {
    fn from(e: CorpusError) -> Self {
        Usage(e.to_string())
    }
}

struct Loaded {
    corpus: Corpus,
    bounds: Bounds,
    format: Format,
}

impl Loaded {
    fn new(common: &Common) -> Result<Self, Usage> {
        let bounds = Bounds::new(common.max_states, common.max_queue).map_err(|e| Usage(e.to_string()))?;
        let mut corpus = Corpus::default();
        let mut failures = Vec::new();
        for path in &common.inputs {
            if path.is_dir() {
                match load_corpus(path) {
                    Ok(c) => corpus.files.extend(c.files),
                    Err(e) => failures.extend(e.failures),
                }
            } else {
                match load_file(path) {
                    Ok(f) => corpus.files.push(f),
                    Err(e) => failures.push((path.clone(), e)),
                }
            }
        }
        if !failures.is_empty() {
            return Err(CorpusError { failures }.into());
        }
        Ok(Loaded { corpus, bounds, format: common.format })
    }

    /// The named session, or the only one when no name is given.
    fn session(&self, name: Option<&str>) -> Result<Session, Usage> {
        match name {
            Some(n) => self.corpus.session(n).cloned().ok_or_else(|| Usage(format!("no session named `{n}`"))),
            None => {
                let all: Vec<&str> = self.corpus.sessions().map(|(_, n, _)| n).collect();
                match all.as_slice() {
                    [only] => Ok(self.corpus.session(only).expect("listed session").clone()),
                    [] => Err(Usage("the inputs declare no session".into())),
                    _ => Err(Usage(format!("several sessions declared ({}); pick one with --session", all.join(", ")))),
                }
            }
        }
    }

    fn global(&self, name: &str) -> Result<GlobalType, Usage> {
        self.corpus.global(name).ok_or_else(|| Usage(format!("no global type named `{name}`")))
    }

    fn emit(&self, text: impl FnOnce() -> String, doc: impl FnOnce() -> Value) {
        match self.format {
            Format::Text => println!("{}", text().trim_end()),
            Format::Json => println!("{}", serde_json::to_string_pretty(&doc()).expect("serialisable")),
        }
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Accepted => 0,
        Status::Rejected => EXIT_FAILS,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn property_code(verdicts: &[PropertyVerdict]) -> u8 {
    if verdicts.iter().any(|v| v.status == PropertyStatus::Fails) {
        EXIT_FAILS
    } else if verdicts.iter().any(|v| v.status == PropertyStatus::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        0
    }
}

fn trace_string(trace: &[CommLabel]) -> String {
    trace.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn parse(common: &Common) -> Result<u8, Usage> {
    let loaded = Loaded::new(common)?;
    loaded.emit(
        || {
            let mut out = String::new();
            for f in &loaded.corpus.files {
                out.push_str(&format!("# {}\n{}\n", f.path.display(), render_program(&f.program)));
            }
            out
        },
        || {
            let files: Vec<Value> = loaded
                .corpus
                .files
                .iter()
                .map(|f| {
                    json!({
                        "path": f.path.display().to_string(),
                        "processes": f.program.process_names().collect::<Vec<_>>(),
                        "globals": f.program.global_names().collect::<Vec<_>>(),
                        "sessions": f.program.sessions().map(|(n, _)| n).collect::<Vec<_>>(),
                        "text": render_program(&f.program),
                    })
                })
                .collect();
            json!({ "files": files })
        },
    );
    Ok(0)
}

fn run_check(common: &Common, global: &str, session: Option<&str>, sound: bool) -> Result<u8, Usage> {
    let loaded = Loaded::new(common)?;
    let (g, s) = (loaded.global(global)?, loaded.session(session)?);
    let verdict = check(&g, &s, loaded.bounds, sound);
    loaded.emit(|| verdict.to_string(), || check_report(&verdict));
    Ok(status_code(verdict.status))
}

fn run_infer(common: &Common, session: Option<&str>, strategy: StrategyArg) -> Result<u8, Usage> {
    let loaded = Loaded::new(common)?;
    let s = loaded.session(session)?;
    let strategy = match strategy {
        StrategyArg::SatisfiedFirst => Strategy::SatisfiedFirst,
        StrategyArg::FullSetOnly => Strategy::FullSetOnly,
    };
    match infer(&s, loaded.bounds, strategy) {
        Ok(found) => {
            let g = &found.global;
            let definition = render_definition(g.graph().terms(), g.root(), "G");
            loaded.emit(
                || format!("accepted\n{definition}"),
                || json!({ "status": Status::Accepted, "global": definition, "stats": found.stats }),
            );
            Ok(0)
        }
        Err(verdict) => {
            loaded.emit(|| verdict.to_string(), || check_report(&verdict));
            Ok(status_code(verdict.status))
        }
    }
}

fn run_simulate(
    common: &Common,
    session: Option<&str>,
    trace: Option<&str>,
    steps: usize,
    seed: u64,
) -> Result<u8, Usage> {
    let loaded = Loaded::new(common)?;
    let s = loaded.session(session)?;
    let labels = match trace {
        Some(t) => parse_trace(t).map_err(|e| Usage(e.to_string()))?,
        None => random_schedule(&s, steps, seed),
    };
    match run_trace(&s, &labels) {
        Ok(end) => {
            let enabled: Vec<CommLabel> = mixsess::enabled_labels(&end).into_iter().collect();
            loaded.emit(
                || format!("trace: [{}]\nsession: {end}\nenabled: [{}]", trace_string(&labels), trace_string(&enabled)),
                || {
                    json!({
                        "status": "ok",
                        "trace": labels,
                        "trace_literal": trace_string(&labels),
                        "session": end.to_string(),
                        "final": end.is_final(),
                        "enabled": enabled,
                    })
                },
            );
            Ok(0)
        }
        Err(e) => {
            loaded.emit(
                || format!("{e}"),
                || json!({ "status": "stuck", "index": e.index, "label": e.label, "trace": labels }),
            );
            Ok(EXIT_FAILS)
        }
    }
}

fn run_verify(
    common: &Common,
    session: Option<&str>,
    property: PropertyArg,
    global: Option<&str>,
) -> Result<u8, Usage> {
    let loaded = Loaded::new(common)?;
    let s = loaded.session(session)?;
    let bounds = loaded.bounds;
    let typed = |name: Option<&str>| -> Result<GlobalType, Usage> {
        let name = name.ok_or_else(|| Usage("this property needs --global".into()))?;
        loaded.global(name)
    };
    let oracle = |r: Result<PropertyVerdict, mixsess::properties::OracleError>| {
        r.map_err(|e| Usage(format!("{e}; the cross-check needs a typed pair\n{}", e.verdict)))
    };
    let verdicts = match property {
        PropertyArg::All => check_all(&s, bounds, Execution::default()),
        PropertyArg::LockFreedom => vec![check_lock_freedom(&s, bounds)],
        PropertyArg::OrphanFreedom => vec![check_orphan_freedom(&s, bounds)],
        PropertyArg::EventualReception => vec![check_eventual_reception(&s, bounds)],
        PropertyArg::SubjectReduction => vec![oracle(cross_check_subject_reduction(&typed(global)?, &s, bounds))?],
        PropertyArg::SessionFidelity => vec![oracle(cross_check_session_fidelity(&typed(global)?, &s, bounds))?],
        PropertyArg::TypeProgress => vec![cross_check_type_progress(&typed(global)?, s.queue(), bounds)],
    };
    loaded.emit(
        || verdicts.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"),
        || {
            if verdicts.len() == 1 {
                verdicts[0].to_json()
            } else {
                Value::Array(verdicts.iter().map(PropertyVerdict::to_json).collect())
            }
        },
    );
    Ok(property_code(&verdicts))
}

fn run_export(common: &Common, session: Option<&str>, output: Option<&Path>) -> Result<u8, Usage> {
    let loaded = Loaded::new(common)?;
    let s = loaded.session(session)?;
    let sg = explore_with(&s, loaded.bounds, Execution::Sequential);
    let text = match loaded.format {
        Format::Text => sg.to_dot(),
        Format::Json => serde_json::to_string_pretty(&sg.to_json()).expect("serialisable") + "\n",
    };
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Usage> {
    match &cli.command {
        Command::Parse { common } => parse(common),
        Command::Check { common, global, session, sound } => run_check(common, global, session.as_deref(), *sound),
        Command::Infer { common, session, strategy } => run_infer(common, session.as_deref(), *strategy),
        Command::Simulate { common, session, trace, random: _, steps, seed } => {
            run_simulate(common, session.as_deref(), trace.as_deref(), *steps, *seed)
        }
        Command::Verify { common, session, property, global } => {
            run_verify(common, session.as_deref(), *property, global.as_deref())
        }
        Command::ExportDot { common, session, output } => run_export(common, session.as_deref(), output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
