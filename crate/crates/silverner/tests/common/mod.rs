//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn silverner() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_silverner"));
    c.env("RUST_LOG", "error");
    c
}

pub fn stub_path() -> &'static str {
    env!("CARGO_BIN_EXE_aux-stub")
}

/// Command line of the dictionary stub with extra flags.
pub fn stub_cmd(extra: &str) -> String {
    format!("{} --dict {} {extra}", stub_path(), fixture("stub_dict.tsv").display())
}

pub fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

/// Builds the fixture dump into `dir/<name>` and returns the corpus path.
pub fn build_fixture(dir: &Path, name: &str, workers: usize, with_stub: bool) -> PathBuf {
    let out = dir.join(name);
    let mut cmd = silverner();
    cmd.arg("build")
        .arg("--dump")
        .arg(fixture("dump.xml"))
        .arg("--catalog")
        .arg(fixture("catalog.jsonl"))
        .arg("--out")
        .arg(&out)
        .arg("--workers")
        .arg(workers.to_string());
    if with_stub {
        cmd.arg("--with-origin").arg("--aux-cmd").arg(stub_cmd(""));
    }
    let o = run(&mut cmd);
    assert!(o.status.success(), "build failed: {}", stderr(&o));
    out
}
