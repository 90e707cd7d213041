//! Runs a user-configured solver command on an exported LP file.

use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::lp_format::{export_lp_text, parse_external_solution};
use super::{Budget, IpOutcome, IpProblem, UnknownReason};

/// Shell command template with `{in}` and `{out}` placeholders, e.g.
/// `mysolver --read {in} --write {out}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub command_template: String,
}

impl ExternalSolver {
    pub fn new(command_template: impl Into<String>) -> Self {
        ExternalSolver {
            command_template: command_template.into(),
        }
    }

    pub fn solve(&self, p: &IpProblem, budget: &Budget) -> IpOutcome {
        match self.run(p, budget) {
            Ok(outcome) => outcome,
            Err(reason) => IpOutcome::Unknown(reason),
        }
    }

    fn run(&self, p: &IpProblem, budget: &Budget) -> Result<IpOutcome, UnknownReason> {
        let io = |e: std::io::Error| UnknownReason::External(e.to_string());
        let dir = tempfile::tempdir().map_err(io)?;
        let input = dir.path().join("in.lp");
        let output = dir.path().join("out.sol");
        std::fs::write(&input, export_lp_text(p)).map_err(io)?;
        let command = self
            .command_template
            .replace("{in}", &input.to_string_lossy())
            .replace("{out}", &output.to_string_lossy());
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(io)?;
        let status = loop {
            if let Some(status) = child.try_wait().map_err(io)? {
                break status;
            }
            if budget.deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                return Err(UnknownReason::TimeLimit);
            }
            thread::sleep(Duration::from_millis(5));
        };
        if !status.success() {
            return Err(UnknownReason::External(format!("command exited with {status}")));
        }
        let text = std::fs::read_to_string(&output)
            .map_err(|e| UnknownReason::External(format!("reading solution file: {e}")))?;
        Ok(parse_external_solution(&text, p))
    }
}
