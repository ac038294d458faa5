//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mixsess::checker::{check, infer, Reason, Status, Strategy, Verdict};
use mixsess::corpus::{load_corpus, Corpus};
use mixsess::explore::{explore, Bounds};
use mixsess::gen::{batch_rng, random_protocol_session, GenParams};
use mixsess::properties::{
    check_eventual_reception, check_lock_freedom, check_orphan_freedom, cross_check_session_fidelity,
    cross_check_subject_reduction, PropertyStatus,
};
use mixsess::typesem::{gt_step, weight, ExtNat, TypeConfiguration};
use mixsess::{run_trace, CommLabel, Message, Queue};
use proptest::test_runner::{Config, TestRunner};

/// Wall-clock budget of every criterion.
const TIME_LIMIT: Duration = Duration::from_secs(10);
const LAW_CASES: u32 = 1000;
const RANDOM_TYPABLE: usize = 500;
const RANDOM_SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus() -> Result<Corpus, String> {
    load_corpus(&common::corpus_dir()).map_err(|e| e.to_string())
}

fn expect_accepted(v: &Verdict, what: &str) -> Result<(), String> {
    if v.is_accepted() {
        Ok(())
    } else {
        Err(format!("{what}: {v}"))
    }
}

fn named(corpus: &Corpus, g: &str, s: &str) -> Result<(mixsess::GlobalType, mixsess::Session), String> {
    let global = corpus.global(g).ok_or(format!("no global {g}"))?;
    let session = corpus.session(s).ok_or(format!("no session {s}"))?.clone();
    Ok((global, session))
}

fn client_server() -> Outcome {
    let (g, s) = named(&corpus()?, "G_cs", "CS")?;
    expect_accepted(&check(&g, &s, Bounds::default(), false), "plain")?;
    expect_accepted(&check(&g, &s, Bounds::default(), true), "sound")?;
    Ok("accepted with and without sound mode".into())
}

fn workers() -> Outcome {
    let (g, s) = named(&corpus()?, "G_csw", "CSW")?;
    expect_accepted(&check(&g, &s, Bounds::default(), false), "G_csw")?;
    Ok("accepted".into())
}

fn time_out() -> Outcome {
    let corpus = corpus()?;
    let mut errors = Vec::new();
    for name in ["G_to1", "G_to2"] {
        let (g, s) = named(&corpus, name, "TO")?;
        if let Err(e) = expect_accepted(&check(&g, &s, Bounds::default(), false), name) {
            errors.push(e);
        }
    }
    if errors.is_empty() {
        Ok("both types accepted".into())
    } else {
        Err(errors.join("\n"))
    }
}

fn negative_controls() -> Outcome {
    let corpus = corpus()?;
    for (g, s, reason) in [("G_coh", "Coh", Reason::CoherenceViolation), ("G_plays", "Plays", Reason::PlayersMismatch)]
    {
        let (g, s) = named(&corpus, g, s)?;
        let v = check(&g, &s, Bounds::default(), false);
        if v.status != Status::Rejected || v.reason != Some(reason) {
            return Err(format!("expected rejection with {reason}, got {v}"));
        }
    }
    Ok("coherence-violation and players-mismatch".into())
}

fn weights() -> Outcome {
    let g = corpus()?.global("G_w").ok_or("no G_w")?;
    let a = weight(&g, &Message::new("p", "l", "q"));
    let b = weight(&g, &Message::new("r", "l", "p"));
    if (a, b) == (ExtNat::Finite(1), ExtNat::Finite(0)) {
        Ok("1 and 0".into())
    } else {
        Err(format!("got {a} and {b}"))
    }
}

fn inference() -> Outcome {
    let corpus = corpus()?;
    let bounds = Bounds::default();
    let (g, cs) = named(&corpus, "G_cs", "CS")?;
    let found = infer(&cs, bounds, Strategy::SatisfiedFirst).map_err(|v| format!("CS: {v}"))?;
    if !found.global.bisim_equal(&g) {
        return Err(format!("inferred {} is not bisimilar to G_cs", found.global));
    }
    let mut from_corpus = 0;
    for (_, name, s) in corpus.sessions() {
        if let Ok(found) = infer(s, bounds, Strategy::SatisfiedFirst) {
            expect_accepted(&check(&found.global, s, bounds, false), name)?;
            from_corpus += 1;
        }
    }
    // a session counts as typable when inference finds a type within the
    // search bounds; the check then runs with the default bounds
    let search = Bounds::new(2_000, 4).expect("positive bounds");
    let params = GenParams::default();
    let mut typable = 0;
    let mut index = 0u64;
    while typable < RANDOM_TYPABLE {
        let s = random_protocol_session(&mut batch_rng(RANDOM_SEED, index), &params);
        index += 1;
        if let Ok(found) = infer(&s, search, Strategy::SatisfiedFirst) {
            expect_accepted(&check(&found.global, &s, bounds, false), &format!("random session {}: {s}", index - 1))?;
            typable += 1;
        }
    }
    Ok(format!(
        "CS matches G_cs; {from_corpus} corpus and {typable} random inferred types accepted ({index} generated)"
    ))
}

fn metatheory() -> Outcome {
    let corpus = corpus()?;
    let bounds = Bounds::default();
    let mut pairs = 0;
    for (_, (gn, g), (sn, s)) in corpus.pairs() {
        if !check(&g, s, bounds, false).is_accepted() {
            continue;
        }
        if !explore(s, bounds).is_complete() {
            return Err(format!("{gn} / {sn}: exploration truncated"));
        }
        for v in [cross_check_subject_reduction(&g, s, bounds), cross_check_session_fidelity(&g, s, bounds)] {
            let v = v.map_err(|e| format!("{gn} / {sn}: {e}"))?;
            if v.status != PropertyStatus::Holds {
                return Err(format!("{gn} / {sn}: {v}"));
            }
        }
        pairs += 1;
    }
    Ok(format!("{pairs} accepted pairs"))
}

fn properties() -> Outcome {
    let corpus = corpus()?;
    let bounds = Bounds::default();
    let (mut typed, mut sound) = (0, 0);
    for (_, (gn, g), (sn, s)) in corpus.pairs() {
        let mut required = Vec::new();
        if check(&g, s, bounds, false).is_accepted() {
            required.extend([check_lock_freedom(s, bounds), check_orphan_freedom(s, bounds)]);
            typed += 1;
        }
        if check(&g, s, bounds, true).is_accepted() {
            required.push(check_eventual_reception(s, bounds));
            sound += 1;
        }
        if let Some(v) = required.iter().find(|v| v.status != PropertyStatus::Holds) {
            return Err(format!("{gn} / {sn}: {v}"));
        }
    }
    let stuck = corpus.session("Stuck").ok_or("no Stuck")?;
    let v = check_lock_freedom(stuck, bounds);
    let c = v.counterexample.as_ref().filter(|_| v.status == PropertyStatus::Fails).ok_or(format!("Stuck: {v}"))?;
    let reached = run_trace(stuck, &c.trace).map_err(|e| e.to_string())?;
    if !c.session.as_ref().is_some_and(|s| s.equivalent(&reached)) {
        return Err("Stuck counterexample does not replay".into());
    }
    Ok(format!("{typed} typed and {sound} soundly typed pairs; Stuck fails with a replayable trace"))
}

fn cp_guard() -> Outcome {
    let g = corpus()?.global("G_cp").ok_or("no G_cp")?;
    match gt_step(&TypeConfiguration::new(g, Queue::new()), &CommLabel::output("p", "q", "l")) {
        None => Ok("undefined".into()),
        Some(next) => Err(format!("stepped to {next}")),
    }
}

fn run_law<S: proptest::strategy::Strategy>(
    name: &str,
    strategy: S,
    law: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: LAW_CASES, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, law).map_err(|e| format!("{name}: {e}"))
}

fn laws() -> Outcome {
    use proptest::prelude::any;
    run_law("queue commutation", (common::queue(), common::message(), common::message()), |(q, a, b)| {
        common::queue_commutation(&q, &a, &b)
    })?;
    run_law("bisimilarity", any::<u64>(), common::bisim_laws)?;
    run_law("satisfaction preservation", any::<u64>(), common::satisfaction_preserved)?;
    run_law("deterministic exploration", any::<u64>(), common::deterministic_exploration)?;
    Ok(format!("4 suites x {LAW_CASES} cases"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("client/server typing", client_server),
        ("client-server-workers typing", workers),
        ("time-out typings", time_out),
        ("negative controls", negative_controls),
        ("weights", weights),
        ("inference round trip", inference),
        ("subject reduction and session fidelity oracles", metatheory),
        ("typability implies the session properties", properties),
        ("cp guard", cp_guard),
        ("semantics laws", laws),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > TIME_LIMIT => Err(format!("took {elapsed:.2?}, over {TIME_LIMIT:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{elapsed:.2?}]", i + 1);
                for line in detail.lines() {
                    println!("        {line}");
                }
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
