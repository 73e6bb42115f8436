#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_citilink");

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    /// The JSON summary on the last stdout line.
    pub fn summary(&self) -> Value {
        let last = self.stdout.lines().last().unwrap_or_default();
        serde_json::from_str(last).unwrap_or_else(|e| panic!("{e}: {:?}\nstderr: {}", self.stdout, self.stderr))
    }
}

pub fn citilink(args: &[&str]) -> Run {
    let out = Command::new(BIN)
        .args(args)
        .env_remove("CITILINK_ADMIN_TOKEN")
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn minute_files(prefix: &str) -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(fixtures().join("minutes"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(prefix))
        .map(|p| p.display().to_string())
        .collect();
    files.sort();
    files
}

pub const FIXTURE_MINUTES: [&str; 6] = [
    "covilha-2025-01-10",
    "covilha-2025-01-28",
    "covilha-2025-03-14",
    "covilha-2025-04-22",
    "fundao-2025-02-05",
    "fundao-2025-05-19",
];

/// Runs the batch pipeline over every fixture minute; returns the failing
/// step, if any.
pub fn walkthrough(store: &Path) -> Result<(), String> {
    let s = store.to_str().unwrap();
    let registry = fixtures().join("registry.json");
    let mut steps: Vec<Vec<String>> = vec![vec![
        "registry".into(),
        "import".into(),
        "--store".into(),
        s.into(),
        "--file".into(),
        registry.display().to_string(),
    ]];
    for slug in ["covilha", "fundao"] {
        let mut step: Vec<String> = vec![
            "ingest".into(),
            "--store".into(),
            s.into(),
            "--municipality".into(),
            slug.into(),
        ];
        step.extend(minute_files(slug));
        steps.push(step);
    }
    steps.push(vec![
        "extract".into(),
        "--store".into(),
        s.into(),
        "--extractor".into(),
        "rule".into(),
        "--all-pending".into(),
    ]);
    for m in FIXTURE_MINUTES {
        steps.push(vec![
            "validate".into(),
            "--store".into(),
            s.into(),
            "--minute".into(),
            m.into(),
            "--ack-unresolved".into(),
        ]);
        steps.push(vec![
            "publish".into(),
            "--store".into(),
            s.into(),
            "--minute".into(),
            m.into(),
        ]);
    }
    for step in steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let run = citilink(&args);
        if run.code != 0 || run.summary()["ok"] != true {
            return Err(format!("{} exited {}: {}", step[..2].join(" "), run.code, run.stdout));
        }
    }
    Ok(())
}

/// A running `serve` child that is killed on drop.
pub struct Server {
    pub child: Child,
    pub addr: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn serve(store: &Path, extra: &[&str]) -> Server {
    use std::io::{BufRead, BufReader};
    let mut child = Command::new(BIN)
        .args([
            "serve",
            "--store",
            store.to_str().unwrap(),
            "--port",
            "0",
            "--admin-token",
            "tok",
        ])
        .args(extra)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let v: Value = serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"));
    Server {
        child,
        addr: v["listening"].as_str().unwrap().to_string(),
    }
}
