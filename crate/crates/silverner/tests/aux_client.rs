use std::sync::Arc;
use std::time::{Duration, Instant};

use silverner::aux::{AuxClient, AuxCommand, AuxCounters, AuxError, AuxTagger};
use silverner_core::catalog::EntityClass;
use silverner_core::mention::{Mention, RawEntity};
use silverner_core::span::Span;

mod common;

fn command(extra: &str) -> AuxCommand {
    AuxCommand::parse(&common::stub_cmd(extra)).expect("non-empty command")
}

fn spawn(extra: &str, timeout: Duration) -> AuxClient {
    AuxClient::spawn(&command(extra), timeout).expect("stub starts")
}

fn raw(start: usize, end: usize, class: &str) -> RawEntity {
    RawEntity {
        start,
        end,
        class: class.to_string(),
    }
}

#[test]
fn offsets_are_unicode_scalars() {
    let mut c = spawn("", Duration::from_secs(10));
    // "São João" has two two-byte characters.
    let got = c.request("Ontem São João visitou São Paulo.").unwrap();
    assert_eq!(got, vec![raw(6, 14, "PER"), raw(23, 32, "LOC")]);
    let got = c.request("João").unwrap();
    assert_eq!(got, vec![raw(0, 4, "PER")]);
}

#[test]
fn thousand_pipelined_requests_have_bijective_ids() {
    // batches of 8 divide 1000, so every request is answered
    let mut c = spawn("--reverse-batch 8", Duration::from_secs(30));
    let texts: Vec<String> = (0..1000)
        .map(|i| {
            if i % 3 == 0 {
                format!("{i} Copacabana")
            } else {
                format!("nothing {i}")
            }
        })
        .collect();
    let ids: Vec<u64> = texts.iter().map(|t| c.submit(t).unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 1000);
    // ask in reverse so most answers arrive before they are wanted
    for (i, id) in ids.iter().enumerate().rev() {
        let got = c.wait(*id).unwrap();
        if i % 3 == 0 {
            let digits = i.to_string().len();
            assert_eq!(got, vec![raw(digits + 1, digits + 11, "LOC")], "request {i}");
        } else {
            assert!(got.is_empty(), "request {i}");
        }
    }
}

#[test]
fn crash_is_reported_as_closed() {
    let mut c = spawn("--crash-after 1", Duration::from_secs(10));
    assert!(c.request("Copacabana").is_ok());
    assert!(matches!(c.request("Copacabana"), Err(AuxError::Closed)));
}

#[test]
fn hang_is_reported_as_timeout() {
    let mut c = spawn("--hang-after 0", Duration::from_millis(300));
    let started = Instant::now();
    assert!(matches!(c.request("Copacabana"), Err(AuxError::Timeout)));
    assert!(started.elapsed() < Duration::from_secs(5));
}

#[test]
fn garbage_is_a_protocol_error() {
    let mut c = spawn("--garbage-after 0", Duration::from_secs(10));
    assert!(matches!(c.request("Copacabana"), Err(AuxError::Protocol(_))));
}

#[test]
fn missing_program_fails_to_spawn() {
    let cmd = AuxCommand::parse("/nonexistent/tagger --flag").unwrap();
    assert!(matches!(
        AuxClient::spawn(&cmd, Duration::from_secs(1)),
        Err(AuxError::Spawn(_))
    ));
}

#[test]
fn tagger_converts_to_byte_spans() {
    let counters = Arc::new(AuxCounters::default());
    let mut t = AuxTagger::start(command(""), Duration::from_secs(10), counters.clone()).unwrap();
    let text = "São João em Copacabana";
    let got = t.predict(text);
    assert_eq!(
        got,
        vec![
            Mention::predicted(0, 10, EntityClass::Person),
            Mention::predicted(14, 24, EntityClass::Location)
        ]
    );
    assert_eq!(&text[got[0].span.start..got[0].span.end], "São João");
    assert_eq!(got[1].span, Span::new(14, 24));
    assert_eq!(counters.report().requests, 1);
}

#[test]
fn tagger_recovers_from_crashes_within_budget() {
    let counters = Arc::new(AuxCounters::with_restart_budget(2));
    let mut t = AuxTagger::start(command("--crash-after 1"), Duration::from_secs(10), counters.clone()).unwrap();
    let mut answered = 0;
    for _ in 0..8 {
        if !t.predict("Copacabana").is_empty() {
            answered += 1;
        }
    }
    let r = counters.report();
    // one answer per process: the original and two restarts
    assert_eq!(answered, 3);
    assert_eq!(r.restarts, 2);
    assert_eq!(r.requests, 8);
    assert_eq!(r.failures, 5);
}

#[test]
fn tagger_survives_hangs_with_empty_predictions() {
    let counters = Arc::new(AuxCounters::with_restart_budget(1));
    let mut t = AuxTagger::start(command("--hang-after 0"), Duration::from_millis(200), counters.clone()).unwrap();
    assert!(t.predict("Copacabana").is_empty());
    assert!(t.predict("Copacabana").is_empty());
    assert!(t.predict("Copacabana").is_empty());
    let r = counters.report();
    // the third request finds no worker and the budget spent
    assert_eq!(r.failures, 3, "{r:?}");
    assert_eq!(r.restarts, 1);
}
