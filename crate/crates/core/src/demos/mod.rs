//! Demonstration datasets: per-session play traces with annotated arousal,
//! the expert target trace derived from them, and the pooled action
//! distribution used for exploratory actions.

mod io;
mod synthetic;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::Action;
use crate::error::{Error, Result};

pub use io::{load_dataset, load_dataset_with, write_dataset, Manifest, ManifestSession};
pub use synthetic::{generate_sessions, generate_synthetic, ExpertController, SyntheticConfig};

/// z-score of the two-sided 95% normal interval.
pub const CI_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoWindow {
    pub features: Vec<f64>,
    pub action: Action,
    pub raw_arousal: f64,
    pub arousal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoSession {
    pub id: String,
    pub windows: Vec<DemoWindow>,
    /// Ground-truth arousal, when the session came from the generator.
    pub truth: Option<Vec<f64>>,
}

impl DemoSession {
    /// Build a session from raw arousal values, normalising them.
    pub fn new(id: impl Into<String>, rows: Vec<(Vec<f64>, Action, f64)>) -> Self {
        let raw: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let id = id.into();
        let normalized = normalize_arousal(&raw).unwrap_or_else(|| {
            log::warn!("session {id}: constant arousal, normalising to 0.5");
            vec![0.5; raw.len()]
        });
        let windows = rows
            .into_iter()
            .zip(normalized)
            .map(|((features, action, raw_arousal), arousal)| DemoWindow {
                features,
                action,
                raw_arousal,
                arousal,
            })
            .collect();
        DemoSession { id, windows, truth: None }
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn arousal(&self) -> impl Iterator<Item = f64> + '_ {
        self.windows.iter().map(|w| w.arousal)
    }
}

/// Per-session min-max normalisation. `None` when the range is zero.
pub fn normalize_arousal(raw: &[f64]) -> Option<Vec<f64>> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if raw.is_empty() || range <= 0.0 || !range.is_finite() {
        return None;
    }
    Some(raw.iter().map(|v| ((v - lo) / range).clamp(0.0, 1.0)).collect())
}

/// Expert target: per-window mean arousal with its spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTrace {
    /// `t_a(i)`.
    pub mean: Vec<f64>,
    /// Sample standard deviation across contributing sessions.
    pub std: Vec<f64>,
    /// Half-width of the 95% confidence interval, `c_a(i)`.
    pub ci: Vec<f64>,
    /// Sessions contributing to each window.
    pub contributors: Vec<usize>,
    /// Mean expert score over time, finished sessions held at their final score.
    pub behavior: Vec<f64>,
}

impl TargetTrace {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Summarise sessions into a target trace of `horizon` windows.
///
/// `max_score` converts the score-fraction feature back to points for the
/// behaviour trace; `score_feature` is its column.
pub fn target_trace(
    sessions: &[DemoSession],
    horizon: usize,
    score_feature: usize,
    max_score: f64,
) -> Result<TargetTrace> {
    if sessions.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "target trace needs at least 2 sessions, got {}",
            sessions.len()
        )));
    }
    let longest = sessions.iter().map(DemoSession::len).max().unwrap_or(0);
    if longest == 0 {
        return Err(Error::InsufficientData("all sessions are empty".into()));
    }
    let mut t = TargetTrace {
        mean: Vec::with_capacity(horizon),
        std: Vec::with_capacity(horizon),
        ci: Vec::with_capacity(horizon),
        contributors: Vec::with_capacity(horizon),
        behavior: Vec::with_capacity(horizon),
    };
    for i in 0..horizon {
        let score = |s: &DemoSession| {
            s.windows
                .get(i)
                .or(s.windows.last())
                .map_or(0.0, |w| w.features[score_feature] * max_score)
        };
        t.behavior.push(sessions.iter().map(score).sum::<f64>() / sessions.len() as f64);

        if i >= longest {
            // pad with the last populated window
            let last = longest - 1;
            t.mean.push(t.mean[last]);
            t.std.push(t.std[last]);
            t.ci.push(t.ci[last]);
            t.contributors.push(0);
            continue;
        }
        let values: Vec<f64> = sessions
            .iter()
            .filter_map(|s| s.windows.get(i).map(|w| w.arousal))
            .collect();
        let m = values.len();
        let mean = values.iter().sum::<f64>() / m as f64;
        let std = if m >= 2 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (m - 1) as f64).sqrt()
        } else {
            0.0
        };
        t.mean.push(mean);
        t.std.push(std);
        t.ci.push(CI_Z * std / (m as f64).sqrt());
        t.contributors.push(m);
    }
    Ok(t)
}

/// Empirical distribution over the nine actions, indexed by [`Action::code`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionFrequency {
    pub probabilities: [f64; 9],
}

impl ActionFrequency {
    pub fn from_counts(counts: [u64; 9]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientData("no actions to count".into()));
        }
        Ok(ActionFrequency {
            probabilities: counts.map(|c| c as f64 / total as f64),
        })
    }

    pub fn probability(&self, action: Action) -> f64 {
        self.probabilities[action.code() as usize]
    }

    /// Draw one action by inverse-CDF lookup.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (code, &p) in self.probabilities.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = code;
            if u < acc {
                return Action::ALL[code];
            }
        }
        Action::ALL[last]
    }
}

/// Pooled action histogram over every window of every session.
pub fn action_frequencies(sessions: &[DemoSession]) -> Result<ActionFrequency> {
    let mut counts = [0u64; 9];
    for w in sessions.iter().flat_map(|s| &s.windows) {
        counts[w.action.code() as usize] += 1;
    }
    ActionFrequency::from_counts(counts)
}
