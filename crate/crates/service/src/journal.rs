//! Append-only newline-delimited JSON journals with replay-on-start.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use signaal_core::Result;

pub struct Journal {
    writer: BufWriter<File>,
}

impl Journal {
    pub fn open(path: &Path) -> Result<Journal> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Journal {
            writer: BufWriter::new(file),
        })
    }

    /// Serialize, append and flush one row. The row is durable in the OS
    /// buffer before any response is produced from it.
    pub fn append<T: Serialize>(&mut self, row: &T) -> Result<()> {
        let mut line = serde_json::to_vec(row)?;
        line.push(b'\n');
        self.writer.write_all(&line)?;
        self.writer.flush()?;
        Ok(())
    }

    /// Replay rows, stopping at the first corrupt line (torn tail after a
    /// crash); returns the rows and the number of skipped lines.
    pub fn replay<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, usize)> {
        if !path.exists() {
            return Ok((Vec::new(), 0));
        }
        let raw = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        let mut skipped = 0;
        for line in raw.lines() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<T>(line) {
                Ok(row) => rows.push(row),
                Err(_) => skipped += 1,
            }
        }
        Ok((rows, skipped))
    }
}
