//! Line-oriented child processes for the augmenter and classifier protocols.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

/// Seconds to wait for one response line before giving up on a subprocess.
pub const TIMEOUT_ENV: &str = "TCPRED_SUBPROCESS_TIMEOUT";
const DEFAULT_TIMEOUT_SECS: u64 = 300;

pub fn timeout_from_env() -> Duration {
    let secs = std::env::var(TIMEOUT_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|s| s.is_finite() && *s > 0.0);
    secs.map(Duration::from_secs_f64)
        .unwrap_or(Duration::from_secs(DEFAULT_TIMEOUT_SECS))
}

/// A spawned child whose stdout is read on a helper thread so every read
/// can time out.
pub struct LineProcess {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    program: String,
}

impl LineProcess {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self, String> {
        let (prog, args) = command
            .split_first()
            .ok_or_else(|| "empty command line".to_string())?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| format!("cannot start `{prog}`: {e}"))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in stdout.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(LineProcess {
            child,
            stdin,
            lines: rx,
            timeout,
            program: prog.clone(),
        })
    }

    pub fn send(&mut self, line: &str) -> Result<(), String> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| format!("write to `{}` failed: {e}", self.program))
    }

    pub fn recv(&mut self) -> Result<String, String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(format!("read from `{}` failed: {e}", self.program)),
            Err(RecvTimeoutError::Timeout) => Err(format!(
                "`{}` did not answer within {:?}",
                self.program, self.timeout
            )),
            Err(RecvTimeoutError::Disconnected) => {
                Err(format!("`{}` closed its output", self.program))
            }
        }
    }
}

impl Drop for LineProcess {
    fn drop(&mut self) {
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
