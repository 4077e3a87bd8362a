//! The cell archive: best known record per discretised state.

use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::affect::AffectAccumulator;
use crate::environment::{Action, CellKey, Snapshot};
use crate::error::{Error, Result};

/// Which stored reward decides replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Game score, `r_b`.
    Behavior,
    /// The configured affect reward, `r_a`.
    Affect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub key: CellKey,
    pub trajectory: Vec<Action>,
    pub snapshot: Snapshot,
    /// Score when the cell was reached.
    pub r_b: f64,
    /// Affect reward of the trajectory.
    pub r_a: f64,
    pub affect: AffectAccumulator,
    pub c_seen: u64,
    pub terminal: bool,
}

impl CellRecord {
    pub fn len(&self) -> usize {
        self.trajectory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectory.is_empty()
    }

    pub fn reward(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Behavior => self.r_b,
            Channel::Affect => self.r_a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Inserted,
    Replaced,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEntry {
    Offer { key: CellKey, reward: f64, length: usize, outcome: Outcome },
    Selected { key: CellKey },
}

/// One line of the archive dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub key: CellKey,
    pub r_b: f64,
    pub r_a: f64,
    pub length: usize,
    pub c_seen: u64,
    pub terminal: bool,
    pub trajectory: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Archive {
    cells: IndexMap<CellKey, CellRecord>,
    bound: usize,
    insertions: u64,
    log: Option<Vec<LogEntry>>,
}

impl Archive {
    /// An empty archive over a key space of `bound` cells.
    pub fn new(bound: usize) -> Self {
        Archive { cells: IndexMap::new(), bound, insertions: 0, log: None }
    }

    /// Same, recording every offer and selection.
    pub fn with_log(bound: usize) -> Self {
        Archive { log: Some(Vec::new()), ..Archive::new(bound) }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Number of keys ever inserted.
    pub fn insertions(&self) -> u64 {
        self.insertions
    }

    pub fn log(&self) -> Option<&[LogEntry]> {
        self.log.as_deref()
    }

    pub fn get(&self, key: &CellKey) -> Option<&CellRecord> {
        self.cells.get(key)
    }

    pub fn get_index(&self, index: usize) -> Option<&CellRecord> {
        self.cells.get_index(index).map(|(_, r)| r)
    }

    /// Records in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &CellRecord> {
        self.cells.values()
    }

    pub fn fill_ratio(&self) -> f64 {
        if self.bound == 0 {
            0.0
        } else {
            self.cells.len() as f64 / self.bound as f64
        }
    }

    /// What [`Archive::offer`] would do, without building a record.
    pub fn judge(&self, key: &CellKey, reward: f64, length: usize, channel: Channel) -> Outcome {
        match self.cells.get(key) {
            None => Outcome::Inserted,
            Some(old) => {
                let incumbent = old.reward(channel);
                if reward > incumbent || (reward == incumbent && length < old.len()) {
                    Outcome::Replaced
                } else {
                    Outcome::Rejected
                }
            }
        }
    }

    pub fn offer(&mut self, candidate: CellRecord, channel: Channel) -> Outcome {
        let reward = candidate.reward(channel);
        let length = candidate.len();
        let key = candidate.key;
        let outcome = self.judge(&key, reward, length, channel);
        match outcome {
            Outcome::Inserted => {
                self.insertions += 1;
                self.cells.insert(key, CellRecord { c_seen: 0, ..candidate });
            }
            Outcome::Replaced => {
                let slot = self.cells.get_mut(&key).expect("judged present");
                let c_seen = slot.c_seen;
                *slot = CellRecord { c_seen, ..candidate };
            }
            Outcome::Rejected => {}
        }
        if let Some(log) = &mut self.log {
            log.push(LogEntry::Offer { key, reward, length, outcome });
        }
        outcome
    }

    pub fn mark_selected(&mut self, key: &CellKey) -> Result<()> {
        let record = self
            .cells
            .get_mut(key)
            .ok_or_else(|| Error::contract(format!("cell {key} is not in the archive")))?;
        record.c_seen += 1;
        if let Some(log) = &mut self.log {
            log.push(LogEntry::Selected { key: *key });
        }
        Ok(())
    }

    /// Highest reward on `channel`; ties go to the shorter, then earlier, record.
    pub fn best(&self, channel: Channel) -> Option<&CellRecord> {
        let mut best: Option<&CellRecord> = None;
        for r in self.cells.values() {
            best = match best {
                Some(b) if !better(r, b, channel) => Some(b),
                _ => Some(r),
            };
        }
        best
    }

    pub fn dump_records(&self) -> impl Iterator<Item = DumpRecord> + '_ {
        self.cells.values().map(|r| DumpRecord {
            key: r.key,
            r_b: r.r_b,
            r_a: r.r_a,
            length: r.len(),
            c_seen: r.c_seen,
            terminal: r.terminal,
            trajectory: r.trajectory.iter().map(|a| a.code()).collect(),
        })
    }

    /// Write one JSON record per line, in insertion order.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        for record in self.dump_records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Strictly better on `channel`, or equal and shorter.
pub(crate) fn better(a: &CellRecord, b: &CellRecord, channel: Channel) -> bool {
    let (x, y) = (a.reward(channel), b.reward(channel));
    x > y || (x == y && a.len() < b.len())
}

/// Read an archive dump back.
pub fn read_jsonl(path: &Path) -> Result<Vec<DumpRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| Error::Parse {
            file: path.to_path_buf(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
