//! Helpers shared by the integration tests: a scratch directory, CLI invocation and CSV reading.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

/// Output of one CLI run.
pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

impl Workspace {
    pub fn new() -> Self {
        Self { dir: tempfile::tempdir().expect("temporary directory") }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).expect("write config");
        p
    }

    pub fn run(&self, args: &[&str]) -> Run {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_weakdamp")).args(args).output().expect("run weakdamp");
        Run {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
            elapsed: start.elapsed(),
        }
    }

    /// Runs and requires the given exit code.
    pub fn run_expect(&self, args: &[&str], code: i32) -> Result<Run, String> {
        let r = self.run(args);
        if r.code == code {
            Ok(r)
        } else {
            Err(format!("`weakdamp {}` exited {} (expected {}): {}", args.join(" "), r.code, code, r.stderr.trim()))
        }
    }
}

/// Data rows of a CSV written by the CLI, keyed by the header.
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Trailing `#` comment lines.
    pub comments: Vec<String>,
}

impl Csv {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
        let comments = text.lines().filter(|l| l.starts_with('#')).map(str::to_string).collect();
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().ok_or("empty csv")?.split(',').map(str::to_string).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Ok(Self { header, rows, comments })
    }

    pub fn col(&self, name: &str) -> Result<Vec<f64>, String> {
        let k = self.header.iter().position(|h| h == name).ok_or(format!("missing column {name}"))?;
        self.rows.iter().map(|r| r[k].parse::<f64>().map_err(|e| e.to_string())).collect()
    }

    pub fn text_col(&self, name: &str) -> Result<Vec<String>, String> {
        let k = self.header.iter().position(|h| h == name).ok_or(format!("missing column {name}"))?;
        Ok(self.rows.iter().map(|r| r[k].clone()).collect())
    }
}

