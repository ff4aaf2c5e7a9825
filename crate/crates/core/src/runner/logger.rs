//! Run log: one file per run, tab-separated single-line events.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::IoError;

/// Append-only run log. Lines are `LEVEL<tab>ISO-8601 UTC<tab>message`
/// and every line is flushed, so an aborted run keeps its tail.
pub struct RunLogger {
    path: PathBuf,
    writer: Mutex<BufWriter<File>>,
}

impl RunLogger {
    /// Creates `run-<UTC timestamp>.log` under `dir`, adding a `-<n>`
    /// suffix when a same-second run already claimed the name.
    pub fn create(dir: &Path) -> Result<Self, IoError> {
        std::fs::create_dir_all(dir).map_err(|e| IoError::new(dir, e))?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
        let mut suffix = 0usize;
        loop {
            let name = if suffix == 0 {
                format!("run-{stamp}.log")
            } else {
                format!("run-{stamp}-{suffix}.log")
            };
            let path = dir.join(name);
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(file) => {
                    return Ok(Self {
                        path,
                        writer: Mutex::new(BufWriter::new(file)),
                    });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => suffix += 1,
                Err(e) => return Err(IoError::new(path, e)),
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn info(&self, message: &str) {
        self.write("INFO", message);
    }

    pub fn warn(&self, message: &str) {
        self.write("WARN", message);
    }

    pub fn error(&self, message: &str) {
        self.write("ERROR", message);
    }

    fn write(&self, level: &str, message: &str) {
        let stamp = chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ");
        let mut writer = self.writer.lock().expect("log writer poisoned");
        // A full disk must not take down the extraction itself.
        let _ = writeln!(writer, "{level}\t{stamp}\t{message}");
        let _ = writer.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creates_log_file_under_fresh_directory() {
        let dir = tempfile::tempdir().unwrap();
        let logs = dir.path().join("a/b/logs");
        let logger = RunLogger::create(&logs).unwrap();
        let name = logger.path().file_name().unwrap().to_str().unwrap();
        assert!(name.starts_with("run-"), "{name}");
        assert!(name.ends_with(".log"), "{name}");
        assert!(logger.path().exists());
    }

    #[test]
    fn same_second_runs_get_numbered_suffixes() {
        let dir = tempfile::tempdir().unwrap();
        let first = RunLogger::create(dir.path()).unwrap();
        let second = RunLogger::create(dir.path()).unwrap();
        let third = RunLogger::create(dir.path()).unwrap();
        assert_ne!(first.path(), second.path());
        assert_ne!(second.path(), third.path());
        // Either the clock ticked over or the suffix kicked in.
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names.len(), 3);
    }

    #[test]
    fn lines_are_level_timestamp_message() {
        let dir = tempfile::tempdir().unwrap();
        let logger = RunLogger::create(dir.path()).unwrap();
        logger.info("started");
        logger.warn("odd file");
        logger.error("boom");
        let text = std::fs::read_to_string(logger.path()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        for (line, (level, msg)) in lines
            .iter()
            .zip([("INFO", "started"), ("WARN", "odd file"), ("ERROR", "boom")])
        {
            let parts: Vec<&str> = line.split('\t').collect();
            assert_eq!(parts.len(), 3, "{line}");
            assert_eq!(parts[0], level);
            assert_eq!(parts[2], msg);
            // 2026-08-16T12:34:56.789Z
            assert_eq!(parts[1].len(), 24, "{}", parts[1]);
            assert!(parts[1].ends_with('Z'));
            assert_eq!(&parts[1][10..11], "T");
        }
    }
}
