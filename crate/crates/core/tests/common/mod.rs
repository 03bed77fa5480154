#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub mod checks;
pub mod dot;
pub mod gen;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every `.tm` file that is expected to parse.
pub fn corpus() -> Vec<PathBuf> {
    let mut files = Vec::new();
    for dir in ["", "golden", "warnings"] {
        let dir = fixture(dir);
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "tm") {
                files.push(path);
            }
        }
    }
    files.push(fixture("invalid/illegal_flow.tm"));
    files.sort();
    files
}

pub fn tmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmkit"))
        .args(args)
        .output()
        .expect("tmkit runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}
