use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use obfubench_core::types::DEFAULT_TIMEOUT_MS;
use obfubench_core::{CaseOutcome, DifferentialReport, SourceText, TestCase, Verdict};

use super::protocol::{parse_response, Request, Response};
use super::{Executor, SandboxError};

pub const RUNNER_SOURCE: &str = include_str!("../../assets/runner.py");

/// Headroom for interpreter start-up and source compilation.
const SLACK: Duration = Duration::from_millis(1500);

enum Reply {
    Message(Response),
    TimedOut,
    /// The runner exited while handling the request.
    Died,
}

struct RunnerProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl RunnerProcess {
    fn spawn(interpreter: &str) -> Result<Self, SandboxError> {
        let mut child = Command::new(interpreter)
            .args(["-u", "-c", RUNNER_SOURCE])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SandboxError::Spawn {
                interpreter: interpreter.into(),
                source,
            })?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines })
    }

    fn roundtrip(&mut self, req: &Request, budget: Duration) -> Result<Reply, SandboxError> {
        if self.stdin.write_all(req.to_line().as_bytes()).and_then(|_| self.stdin.flush()).is_err() {
            return Ok(Reply::Died);
        }
        match self.lines.recv_timeout(budget) {
            Ok(line) => parse_response(&line)
                .map(Reply::Message)
                .ok_or_else(|| SandboxError::Protocol(format!("unexpected line {line:?}"))),
            Err(RecvTimeoutError::Timeout) => Ok(Reply::TimedOut),
            Err(RecvTimeoutError::Disconnected) => Ok(Reply::Died),
        }
    }
}

impl Drop for RunnerProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Holds at most one live runner and replaces it after a kill.
struct Session<'a> {
    interpreter: &'a str,
    process: Option<RunnerProcess>,
}

impl Session<'_> {
    fn send(&mut self, req: &Request, budget: Duration) -> Result<Reply, SandboxError> {
        let process = match &mut self.process {
            Some(p) => p,
            slot => slot.insert(RunnerProcess::spawn(self.interpreter)?),
        };
        let reply = process.roundtrip(req, budget)?;
        if !matches!(reply, Reply::Message(_)) {
            // dropping kills; the next request respawns
            self.process = None;
        }
        Ok(reply)
    }
}

/// Runs subject code in `python -c <runner>` child processes.
#[derive(Debug, Clone)]
pub struct PythonSandbox {
    pub interpreter: String,
    pub float_tolerance: Option<f64>,
}

impl PythonSandbox {
    pub fn new(interpreter: impl Into<String>) -> Self {
        Self {
            interpreter: interpreter.into(),
            float_tolerance: None,
        }
    }

    /// Per-case wall-clock budget: every call on both sides, warm-up
    /// included, may use its full `timeout_ms`.
    pub fn case_budget(case: &TestCase) -> Duration {
        let calls = 2 * (1 + u64::from(case.repeats));
        Duration::from_millis(case.timeout_ms.saturating_mul(calls)) + SLACK
    }

    fn session(&self) -> Session<'_> {
        Session {
            interpreter: &self.interpreter,
            process: None,
        }
    }

    fn load_in(&self, session: &mut Session<'_>, src: &SourceText, timeout_ms: u64) -> Result<(bool, String), SandboxError> {
        let req = Request::Load {
            source: src.text.clone(),
        };
        Ok(match session.send(&req, Duration::from_millis(timeout_ms) + SLACK)? {
            Reply::Message(Response::Load { ok, detail }) => (ok, detail),
            Reply::Message(Response::Case(c)) => (c.verdict == Verdict::Match, c.detail),
            Reply::Message(Response::Error(e)) => (false, e),
            Reply::TimedOut => (false, "load timed out".into()),
            Reply::Died => (false, "runner exited during load".into()),
        })
    }
}

impl Executor for PythonSandbox {
    fn load_check(&self, src: &SourceText) -> Result<bool, SandboxError> {
        let mut session = self.session();
        Ok(self.load_in(&mut session, src, DEFAULT_TIMEOUT_MS)?.0)
    }

    fn run_differential(
        &self,
        function_id: &str,
        orig: &SourceText,
        obf: &SourceText,
        entry_orig: &str,
        entry_obf: &str,
        cases: &[TestCase],
    ) -> Result<DifferentialReport, SandboxError> {
        let first = cases.first().ok_or(SandboxError::NoCases)?;
        let mut session = self.session();
        let (load_ok, detail) = self.load_in(&mut session, obf, first.timeout_ms)?;
        let outcomes = if !load_ok {
            cases
                .iter()
                .map(|_| CaseOutcome::failed(Verdict::ObfError, format!("load failed: {detail}")))
                .collect()
        } else {
            let mut outcomes = Vec::with_capacity(cases.len());
            for case in cases {
                let req = Request::Case {
                    orig_source: orig.text.clone(),
                    obf_source: obf.text.clone(),
                    orig_entry: entry_orig.into(),
                    obf_entry: entry_obf.into(),
                    args: case.args.clone(),
                    kwargs: case.kwargs.clone(),
                    repeats: case.repeats,
                    float_tol: self.float_tolerance,
                };
                outcomes.push(match session.send(&req, Self::case_budget(case))? {
                    Reply::Message(Response::Case(c)) => c.into(),
                    Reply::Message(Response::Error(e)) => {
                        CaseOutcome::failed(Verdict::Mismatch, format!("runner error: {e}"))
                    }
                    Reply::Message(Response::Load { .. }) => {
                        return Err(SandboxError::Protocol("load reply to a case request".into()))
                    }
                    Reply::TimedOut => CaseOutcome::failed(Verdict::Timeout, "timed out"),
                    Reply::Died => CaseOutcome::failed(Verdict::ObfError, "runner exited"),
                });
            }
            outcomes
        };
        Ok(DifferentialReport {
            function_id: function_id.into(),
            outcomes,
            load_ok,
        })
    }
}
