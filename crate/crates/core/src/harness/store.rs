//! Append-only run store: one `<sha256 hex> <json>` line per record.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::experiments::RunRecord;
use crate::error::{Error, Result};

static WRITER: Mutex<()> = Mutex::new(());

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// The store line for a record, without the trailing newline.
pub fn record_line(record: &RunRecord) -> Result<String> {
    let json = serde_json::to_string(record).map_err(|e| Error::NonFinite(e.to_string()))?;
    Ok(format!("{} {}", digest(&json), json))
}

/// Append one record.
pub fn append(record: &RunRecord, path: &Path) -> Result<()> {
    let line = record_line(record)?;
    let _guard = WRITER.lock().unwrap_or_else(|e| e.into_inner());
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(line.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Read and checksum every record.
pub fn read_store(path: &Path) -> Result<Vec<serde_json::Value>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Store {
            line: line_no,
            msg: msg.to_string(),
        };
        let (sum, json) = line.split_once(' ').ok_or_else(|| bad("missing checksum separator"))?;
        if digest(json) != sum {
            return Err(bad("checksum mismatch"));
        }
        let v = serde_json::from_str(json).map_err(|e| bad(&e.to_string()))?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{execute, presets};

    fn small_record() -> RunRecord {
        let mut cfg = presets::uniqueness_cross();
        cfg.grid.points = 64;
        cfg.grid.extent = 16.0;
        cfg.knobs.slices.clear();
        execute(&cfg).unwrap()
    }

    #[test]
    fn empty_store_append_gives_one_valid_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.store");
        let rec = small_record();
        append(&rec, &path).unwrap();
        let all = read_store(&path).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0]["kind"], "uniqueness_cross");
        append(&rec, &path).unwrap();
        assert_eq!(read_store(&path).unwrap().len(), 2);
    }

    #[test]
    fn corruption_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.store");
        let rec = small_record();
        append(&rec, &path).unwrap();
        append(&rec, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[1] = lines[1].replacen("uniqueness_cross", "uniqueness_crosz", 1);
        std::fs::write(&path, lines.join("\n")).unwrap();
        match read_store(&path) {
            Err(Error::Store { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
