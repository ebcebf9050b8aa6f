//! Dictionary-backed stand-in for the auxiliary tagger worker.
//!
//! Speaks the worker protocol on stdin/stdout and tags every
//! leftmost-longest, word-bounded occurrence of a dictionary name. The
//! dictionary is a UTF-8 file with one `name<TAB>CLASS` pair per line.
//! Fault-injection flags exercise the client's recovery paths.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::{Deserialize, Serialize};
use silverner_core::catalog::{EntityClass, NameIndex};
use silverner_core::mention::{match_mentions, RawEntity};
use silverner_core::span::CharOffsets;

#[derive(Parser)]
#[command(about = "Dictionary tagger speaking the auxiliary worker protocol")]
struct Args {
    /// `name<TAB>CLASS` dictionary.
    #[arg(long)]
    dict: PathBuf,
    /// Only `stub` is available in this binary.
    #[arg(long, default_value = "stub")]
    backend: String,
    /// Buffer this many requests and answer each batch in reverse order.
    #[arg(long, default_value_t = 1)]
    reverse_batch: usize,
    /// Exit without answering once this many requests have been answered.
    #[arg(long)]
    crash_after: Option<usize>,
    /// Stop answering (but keep running) after this many answers.
    #[arg(long)]
    hang_after: Option<usize>,
    /// Print a non-JSON line instead of the answer after this many answers.
    #[arg(long)]
    garbage_after: Option<usize>,
}

#[derive(Deserialize)]
struct Request {
    id: u64,
    text: String,
}

#[derive(Serialize)]
struct Response<'a> {
    id: u64,
    entities: &'a [RawEntity],
}

fn load_dict(path: &Path) -> Result<NameIndex, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, class) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected name<TAB>CLASS", i + 1))?;
        let class =
            EntityClass::from_code(class.trim()).ok_or_else(|| format!("line {}: unknown class {class:?}", i + 1))?;
        pairs.push((name.to_string(), class));
    }
    Ok(NameIndex::from_names(pairs))
}

fn tag(index: &NameIndex, text: &str) -> Vec<RawEntity> {
    let offsets = CharOffsets::new(text);
    match_mentions(text, index)
        .into_iter()
        .map(|m| {
            let (start, end) = offsets.span_to_chars(m.span).expect("matches fall on char boundaries");
            RawEntity {
                start,
                end,
                class: m.class.code().to_string(),
            }
        })
        .collect()
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.backend != "stub" {
        eprintln!("aux-stub: unsupported backend {:?}", args.backend);
        return ExitCode::from(1);
    }
    let index = match load_dict(&args.dict) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("aux-stub: {e}");
            return ExitCode::from(1);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if writeln!(out, "{{\"ready\": true}}").and_then(|_| out.flush()).is_err() {
        return ExitCode::from(1);
    }
    let mut answered = 0usize;
    let mut batch: Vec<String> = Vec::new();
    let reached = |limit: Option<usize>, n: usize| limit.is_some_and(|l| n >= l);
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("aux-stub: bad request: {e}");
                continue;
            }
        };
        let entities = tag(&index, &req.text);
        let reply = serde_json::to_string(&Response {
            id: req.id,
            entities: &entities,
        })
        .expect("response serializes");
        batch.push(reply);
        if batch.len() < args.reverse_batch.max(1) {
            continue;
        }
        for reply in std::mem::take(&mut batch).into_iter().rev() {
            if reached(args.crash_after, answered) {
                return ExitCode::from(3);
            }
            if reached(args.hang_after, answered) {
                continue;
            }
            let line = if reached(args.garbage_after, answered) {
                "this is not json".to_string()
            } else {
                reply
            };
            if writeln!(out, "{line}").and_then(|_| out.flush()).is_err() {
                return ExitCode::SUCCESS;
            }
            answered += 1;
        }
    }
    for reply in batch.into_iter().rev() {
        let _ = writeln!(out, "{reply}");
    }
    let _ = out.flush();
    ExitCode::SUCCESS
}
