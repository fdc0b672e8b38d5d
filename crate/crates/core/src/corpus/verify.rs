//! Re-execution of submissions against their test cases.
//!
//! Each test runs in its own subprocess with a wall-clock timeout. The runner
//! command is a template: `{src}` expands to the path of the program file and
//! `{stdin}` to a file holding the test input (which is also piped to the
//! process's standard input).

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::{normalize_lines, CorpusError, Submission};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommandTemplate {
    /// Whitespace-separated command line. No shell is involved.
    Line(String),
    Args(Vec<String>),
}

impl CommandTemplate {
    fn args(&self) -> Vec<String> {
        match self {
            CommandTemplate::Line(s) => s.split_whitespace().map(String::from).collect(),
            CommandTemplate::Args(v) => v.clone(),
        }
    }

    fn expand(&self, src: &Path, stdin: &Path) -> Vec<String> {
        let src = src.to_string_lossy();
        let stdin = stdin.to_string_lossy();
        self.args()
            .into_iter()
            .map(|a| a.replace("{src}", &src).replace("{stdin}", &stdin))
            .collect()
    }
}

fn default_syntax_markers() -> Vec<String> {
    vec!["SyntaxError".into(), "IndentationError".into(), "TabError".into()]
}

fn default_extension() -> String {
    "py".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunnerConfig {
    pub command_template: CommandTemplate,
    pub timeout_ms: u64,
    /// Optional compile/parse-only command run once before the tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub syntax_check: Option<CommandTemplate>,
    /// Stderr substrings that mark a nonzero exit as a parse failure.
    #[serde(default = "default_syntax_markers")]
    pub syntax_error_markers: Vec<String>,
    #[serde(default = "default_extension")]
    pub source_extension: String,
}

impl RunnerConfig {
    pub fn new(command_template: impl Into<String>, timeout_ms: u64) -> Self {
        Self {
            command_template: CommandTemplate::Line(command_template.into()),
            timeout_ms,
            syntax_check: None,
            syntax_error_markers: default_syntax_markers(),
            source_extension: default_extension(),
        }
    }

    /// Checks that the runner's executables can be found.
    pub fn preflight(&self) -> Result<(), CorpusError> {
        let mut templates = vec![&self.command_template];
        templates.extend(self.syntax_check.as_ref());
        for t in templates {
            let args = t.args();
            let Some(program) = args.first() else {
                return Err(CorpusError::Config("runner command template is empty".into()));
            };
            if resolve_program(program).is_none() {
                return Err(CorpusError::Config(format!("runner command not found: {program}")));
            }
        }
        if self.timeout_ms == 0 {
            return Err(CorpusError::Config("runner timeout_ms must be positive".into()));
        }
        Ok(())
    }
}

fn resolve_program(program: &str) -> Option<PathBuf> {
    let p = Path::new(program);
    if p.components().count() > 1 {
        return p.is_file().then(|| p.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|cand| cand.is_file())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub stdin: String,
    pub expected_stdout: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyStatus {
    Pass,
    SyntaxError,
    RuntimeError,
    WrongOutput,
    Timeout,
}

impl VerifyStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyStatus::Pass => "pass",
            VerifyStatus::SyntaxError => "syntax_error",
            VerifyStatus::RuntimeError => "runtime_error",
            VerifyStatus::WrongOutput => "wrong_output",
            VerifyStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierOutcome {
    pub status: VerifyStatus,
    /// Stdout of the first failing test, or of the last test on a pass.
    pub stdout: String,
    pub elapsed_ms: u64,
}

struct RunResult {
    exit_ok: bool,
    timed_out: bool,
    stdout: String,
    stderr: String,
}

fn run_once(args: &[String], stdin_data: &str, timeout: Duration, cwd: &Path) -> Result<RunResult, CorpusError> {
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .current_dir(cwd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                CorpusError::Config(format!("runner command not found: {}", args[0]))
            }
            _ => CorpusError::Io(e),
        })?;

    let mut stdin = child.stdin.take().expect("stdin piped");
    let input = stdin_data.as_bytes().to_vec();
    let writer = thread::spawn(move || {
        // Programs may exit without reading their input.
        let _ = stdin.write_all(&input);
    });
    let mut out_pipe = child.stdout.take().expect("stdout piped");
    let mut err_pipe = child.stderr.take().expect("stderr piped");
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = out_pipe.read_to_end(&mut buf);
        buf
    });
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = err_pipe.read_to_end(&mut buf);
        buf
    });

    let (exit_ok, timed_out) = match child.wait_timeout(timeout)? {
        Some(status) => (status.success(), false),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            (false, true)
        }
    };
    let _ = writer.join();
    let stdout = String::from_utf8_lossy(&out_reader.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();
    Ok(RunResult { exit_ok, timed_out, stdout, stderr })
}

/// Runs `submission` on every test and reports the first failure.
///
/// A missing runner executable is a configuration error, never an outcome.
pub fn verify(
    submission: &Submission,
    tests: &[TestCase],
    runner: &RunnerConfig,
) -> Result<VerifierOutcome, CorpusError> {
    let started = Instant::now();
    let timeout = Duration::from_millis(runner.timeout_ms);
    let dir = tempfile::tempdir()?;
    let src = dir.path().join(format!("main.{}", runner.source_extension));
    std::fs::write(&src, submission.source_text())?;
    let stdin_path = dir.path().join("stdin.txt");
    std::fs::write(&stdin_path, "")?;

    let outcome = |status, stdout: String| VerifierOutcome {
        status,
        stdout,
        elapsed_ms: started.elapsed().as_millis() as u64,
    };

    let is_syntax = |stderr: &str| runner.syntax_error_markers.iter().any(|m| stderr.contains(m.as_str()));

    if let Some(check) = &runner.syntax_check {
        let r = run_once(&check.expand(&src, &stdin_path), "", timeout, dir.path())?;
        if r.timed_out {
            return Ok(outcome(VerifyStatus::Timeout, r.stdout));
        }
        if !r.exit_ok {
            return Ok(outcome(VerifyStatus::SyntaxError, r.stdout));
        }
    }

    let mut last_stdout = String::new();
    for test in tests {
        std::fs::write(&stdin_path, &test.stdin)?;
        let args = runner.command_template.expand(&src, &stdin_path);
        if args.is_empty() {
            return Err(CorpusError::Config("runner command template is empty".into()));
        }
        let r = run_once(&args, &test.stdin, timeout, dir.path())?;
        if r.timed_out {
            return Ok(outcome(VerifyStatus::Timeout, r.stdout));
        }
        if !r.exit_ok {
            let status = if is_syntax(&r.stderr) {
                VerifyStatus::SyntaxError
            } else {
                VerifyStatus::RuntimeError
            };
            return Ok(outcome(status, r.stdout));
        }
        if normalize_lines(&r.stdout) != normalize_lines(&test.expected_stdout) {
            return Ok(outcome(VerifyStatus::WrongOutput, r.stdout));
        }
        last_stdout = r.stdout;
    }
    Ok(outcome(VerifyStatus::Pass, last_stdout))
}
