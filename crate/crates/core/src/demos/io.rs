//! Session CSV files and the dataset manifest.
//!
//! A dataset directory holds `session_<id>.csv` files with the header
//! `window,f0..f{F-1},gas,steer,arousal_raw`, optional sibling
//! `session_<id>.truth.csv` files (`window,arousal_true`), and an optional
//! `manifest.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DemoSession;
use crate::environment::Action;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
const DEFAULT_MAX_WINDOWS: usize = 360;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSession {
    pub id: String,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    pub windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub features: usize,
    pub horizon: usize,
    pub sessions: Vec<ManifestSession>,
    /// Generator settings, when the dataset is synthetic.
    #[serde(default)]
    pub generation: serde_json::Value,
}

pub fn load_dataset(dir: &Path) -> Result<Vec<DemoSession>> {
    load_dataset_with(dir, DEFAULT_MAX_WINDOWS)
}

/// Load every `session_*.csv` in `dir`, ordered by session id (numerically
/// when ids are integers).
pub fn load_dataset_with(dir: &Path, max_windows: usize) -> Result<Vec<DemoSession>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(id) = name
            .strip_prefix("session_")
            .and_then(|rest| rest.strip_suffix(".csv"))
            .filter(|id| !id.ends_with(".truth"))
        {
            files.push((id.to_string(), path.clone()));
        }
    }
    files.sort_by(|(a, _), (b, _)| match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    });

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: Option<Manifest> = if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };

    let mut sessions = Vec::with_capacity(files.len());
    let mut width = manifest.as_ref().map(|m| m.features);
    for (id, path) in files {
        let mut session = read_session(&id, &path, &mut width, max_windows)?;
        let truth_path = dir.join(format!("session_{id}.truth.csv"));
        if truth_path.exists() {
            session.truth = Some(read_truth(&truth_path, session.len())?);
        }
        sessions.push(session);
    }
    if sessions.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no session_*.csv files in {}",
            dir.display()
        )));
    }
    Ok(sessions)
}

fn read_session(
    id: &str,
    path: &Path,
    width: &mut Option<usize>,
    max_windows: usize,
) -> Result<DemoSession> {
    let parse_err = |line: u64, message: String| Error::Parse {
        file: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| parse_err(0, e.to_string()))?;
    let header = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.len() < 5 {
        return Err(parse_err(1, "header too short".into()));
    }
    let features = header.len() - 4;
    match width {
        Some(f) if *f != features => {
            return Err(parse_err(1, format!("expected {f} features, header has {features}")))
        }
        _ => *width = Some(features),
    }
    let expected: Vec<String> = std::iter::once("window".to_string())
        .chain((0..features).map(|i| format!("f{i}")))
        .chain(["gas", "steer", "arousal_raw"].map(String::from))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(1, "unexpected header".into()));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} columns, found {}", header.len(), record.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = record[i]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("column {i}: not a number: {:?}", &record[i])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {i}: non-finite value")));
            }
            Ok(v)
        };
        let window = num(0)?;
        if window != rows.len() as f64 {
            return Err(parse_err(line, format!("window {window} out of sequence")));
        }
        let feats = (1..=features).map(num).collect::<Result<Vec<_>>>()?;
        let int = |i: usize| -> Result<i8> {
            let v = num(i)?;
            if v.fract() != 0.0 {
                return Err(parse_err(line, format!("column {i}: not an integer")));
            }
            Ok(v as i8)
        };
        let action = Action::new(int(features + 1)?, int(features + 2)?)
            .map_err(|e| parse_err(line, e.to_string()))?;
        rows.push((feats, action, num(features + 3)?));
        if rows.len() > max_windows {
            return Err(parse_err(line, format!("more than {max_windows} windows")));
        }
    }
    Ok(DemoSession::new(id, rows))
}

fn read_truth(path: &Path, windows: usize) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        file: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut out = Vec::with_capacity(windows);
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let value = record
            .get(1)
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                file: path.to_path_buf(),
                line,
                message: "bad ground-truth row".into(),
            })?;
        out.push(value);
    }
    if out.len() != windows {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 0,
            message: format!("{} truth rows for {windows} windows", out.len()),
        });
    }
    Ok(out)
}

/// Write sessions (raw arousal and, when present, ground truth) plus a
/// manifest into `dir`.
pub fn write_dataset(
    dir: &Path,
    sessions: &[DemoSession],
    horizon: usize,
    generation: serde_json::Value,
) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let features = sessions.first().map_or(0, |s| {
        s.windows.first().map_or(0, |w| w.features.len())
    });
    let mut listed = Vec::with_capacity(sessions.len());
    for s in sessions {
        let file = format!("session_{}.csv", s.id);
        let path = dir.join(&file);
        let mut out = String::with_capacity(s.len() * 200);
        out.push_str("window");
        for i in 0..features {
            out.push_str(&format!(",f{i}"));
        }
        out.push_str(",gas,steer,arousal_raw\n");
        for (i, w) in s.windows.iter().enumerate() {
            out.push_str(&i.to_string());
            for f in &w.features {
                out.push_str(&format!(",{f}"));
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                w.action.gas(),
                w.action.steer(),
                w.raw_arousal
            ));
        }
        write_file(&path, out.as_bytes())?;

        let truth = s.truth.as_ref().map(|g| -> Result<String> {
            let file = format!("session_{}.truth.csv", s.id);
            let mut out = String::from("window,arousal_true\n");
            for (i, v) in g.iter().enumerate() {
                out.push_str(&format!("{i},{v}\n"));
            }
            write_file(&dir.join(&file), out.as_bytes())?;
            Ok(file)
        });
        listed.push(ManifestSession {
            id: s.id.clone(),
            file,
            truth: truth.transpose()?,
            windows: s.len(),
        });
    }
    let manifest = Manifest {
        format: 1,
        features,
        horizon,
        sessions: listed,
        generation,
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_file(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
