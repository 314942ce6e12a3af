//! Child-process supervision: process groups, deadlines and capped capture.

use std::io::{BufRead, BufReader, Read};
use std::os::unix::process::CommandExt;
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Output of a command that ran to completion (or was killed).
#[derive(Debug)]
pub(crate) struct Finished {
    pub status: Option<ExitStatus>,
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
}

impl Finished {
    pub fn success(&self) -> bool {
        !self.timed_out && self.status.is_some_and(|s| s.success())
    }

    pub fn combined_output(&self) -> String {
        let mut out = self.stderr.clone();
        if !self.stdout.trim().is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&self.stdout);
        }
        out
    }
}

pub(crate) fn truncate(text: &str, max_bytes: usize) -> String {
    if text.len() <= max_bytes {
        return text.to_string();
    }
    let mut end = max_bytes;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}\n[truncated {} bytes]", &text[..end], text.len() - end)
}

fn command(argv: &[String], workdir: &Path) -> Result<Command> {
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| Error::Invalid("empty command".into()))?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTHONHASHSEED", "0")
        .process_group(0);
    Ok(cmd)
}

pub(crate) fn spawn(argv: &[String], workdir: &Path) -> Result<Child> {
    command(argv, workdir)?
        .spawn()
        .map_err(|e| Error::Toolchain {
            tool: argv[0].clone(),
            message: e.to_string(),
        })
}

/// Kills the whole process group the child leads.
pub(crate) fn kill_group(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: signalling a process group we created; failure only means it is gone.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn capture<R: Read + Send + 'static>(reader: R, limit: usize) -> JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let mut chunk = [0u8; 8192];
        let mut reader = reader;
        loop {
            match reader.read(&mut chunk) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if buf.len() < limit {
                        let take = n.min(limit - buf.len());
                        buf.extend_from_slice(&chunk[..take]);
                    }
                }
            }
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs `argv` to completion or until `timeout`, capturing both streams.
pub(crate) fn run_to_completion(
    argv: &[String],
    workdir: &Path,
    timeout: Duration,
    max_output_bytes: usize,
) -> Result<Finished> {
    let mut child = spawn(argv, workdir)?;
    let out = capture(child.stdout.take().expect("piped"), max_output_bytes);
    let err = capture(child.stderr.take().expect("piped"), max_output_bytes);
    let deadline = Instant::now() + timeout;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => {
                timed_out = true;
                kill_group(&mut child);
                break None;
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(_) => break None,
        }
    };
    // Grandchildren holding the pipes open were killed with the group.
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    Ok(Finished {
        status,
        stdout,
        stderr,
        timed_out,
    })
}

pub(crate) enum Event {
    Line(String),
    Eof,
}

/// A running child whose stdout is delivered line by line.
pub(crate) struct LineStream {
    pub child: Child,
    pub lines: Receiver<Event>,
    stderr: Option<JoinHandle<String>>,
}

impl LineStream {
    pub fn start(argv: &[String], workdir: &Path, max_output_bytes: usize) -> Result<Self> {
        let mut child = spawn(argv, workdir)?;
        let stdout = child.stdout.take().expect("piped");
        let stderr = capture(child.stderr.take().expect("piped"), max_output_bytes);
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut buf = Vec::new();
            loop {
                buf.clear();
                match reader.read_until(b'\n', &mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => {
                        let line = String::from_utf8_lossy(&buf)
                            .trim_end_matches(['\n', '\r'])
                            .to_string();
                        if tx.send(Event::Line(line)).is_err() {
                            return;
                        }
                    }
                }
            }
            let _ = tx.send(Event::Eof);
        });
        Ok(Self {
            child,
            lines: rx,
            stderr: Some(stderr),
        })
    }

    pub fn next(&self, timeout: Duration) -> std::result::Result<Event, RecvTimeoutError> {
        self.lines.recv_timeout(timeout)
    }

    pub fn kill(&mut self) {
        kill_group(&mut self.child);
    }

    /// Waits for exit and returns the exit status and captured stderr.
    pub fn finish(mut self) -> (Option<ExitStatus>, String) {
        let deadline = Instant::now() + Duration::from_secs(2);
        let status = loop {
            match self.child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(2)),
                _ => {
                    kill_group(&mut self.child);
                    break None;
                }
            }
        };
        let stderr = self
            .stderr
            .take()
            .and_then(|h| h.join().ok())
            .unwrap_or_default();
        (status, stderr)
    }
}

impl Drop for LineStream {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            kill_group(&mut self.child);
        }
    }
}

/// Searches `PATH` for an executable, unless `program` already names a path.
pub(crate) fn resolve_program(program: &str) -> Option<std::path::PathBuf> {
    let candidate = Path::new(program);
    if candidate.components().count() > 1 {
        return is_executable(candidate).then(|| candidate.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| is_executable(p))
}

fn is_executable(path: &Path) -> bool {
    use std::os::unix::fs::PermissionsExt;
    path.metadata()
        .map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0)
        .unwrap_or(false)
}
