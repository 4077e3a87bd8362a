//! Evaluation measures: concordance, correlation, and the per-run summary
//! computed from a replayed best trajectory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affect::{target_at, AffectAccumulator, KnnSurrogate};
use crate::demos::TargetTrace;
use crate::environment::{Action, Simulator, FEATURE_OFFROAD};
use crate::error::{Error, Result};

const FEATURE_SPEED: usize = 4;

fn moments(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::contract(format!("series lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::contract("series need at least 2 values"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    Ok((mx, my, vx / n, vy / n, cov / n))
}

/// Lin's concordance correlation coefficient with population moments.
///
/// Two constant series give 1 when equal and 0 otherwise.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my, vx, vy, cov) = moments(x, y)?;
    let den = vx + vy + (mx - my) * (mx - my);
    if den == 0.0 {
        return Ok(1.0);
    }
    if vx == 0.0 && vy == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * cov / den)
}

/// Product-moment correlation; 0 with a warning when either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (_, _, vx, vy, cov) = moments(x, y)?;
    if vx == 0.0 || vy == 0.0 {
        log::warn!("pearson: zero variance series, returning 0");
        return Ok(0.0);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// One window of a replayed trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub window: usize,
    pub h_a: f64,
    pub t_a: f64,
    pub c_a: f64,
    pub score: u32,
    pub offroad: f64,
    /// Window-averaged speed in world units per second.
    pub speed: f64,
    pub sigma: f64,
    /// Mean expert score at this window.
    pub target_score: f64,
}

/// Replay `actions` from reset and evaluate the surrogate on every window.
pub fn best_trace(
    sim: &Simulator,
    knn: &KnnSurrogate,
    target: &TargetTrace,
    actions: &[Action],
) -> Result<Vec<TraceRow>> {
    let v_max = sim.spec().physics.v_max;
    let mut state = sim.initial_state();
    let mut rows = Vec::with_capacity(actions.len());
    for (window, &a) in actions.iter().enumerate() {
        let out = sim.step(&mut state, a)?;
        let est = knn.estimate(out.features.as_slice())?;
        let (t_a, c_a) = target_at(target, window)?;
        rows.push(TraceRow {
            window,
            h_a: est.h_a,
            t_a,
            c_a,
            score: state.score,
            offroad: out.features.0[FEATURE_OFFROAD],
            speed: out.features.0[FEATURE_SPEED] * v_max,
            sigma: est.sigma,
            target_score: target.behavior[window],
        });
    }
    Ok(rows)
}

/// Per-run evaluation, in reporting column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub final_score: f64,
    pub behavior_ccc: f64,
    pub mean_arousal: f64,
    pub arousal_ccc: f64,
    pub arousal_deviation: f64,
    pub confidence: f64,
    /// Archive size as a percentage of the key space; absent without an archive.
    pub fill_pct: Option<f64>,
    pub offroad_pct: f64,
    pub avg_speed: f64,
}

impl SummaryRow {
    pub const COLUMNS: [&'static str; 9] = [
        "final_score",
        "behavior_ccc",
        "mean_arousal",
        "arousal_ccc",
        "arousal_deviation",
        "confidence",
        "fill_pct",
        "offroad_pct",
        "avg_speed",
    ];

    pub fn values(&self) -> [Option<f64>; 9] {
        [
            Some(self.final_score),
            Some(self.behavior_ccc),
            Some(self.mean_arousal),
            Some(self.arousal_ccc),
            Some(self.arousal_deviation),
            Some(self.confidence),
            self.fill_pct,
            Some(self.offroad_pct),
            Some(self.avg_speed),
        ]
    }
}

/// Summarise a replayed trace. `fill_ratio` is the archive's, when there is one.
pub fn summarize(trace: &[TraceRow], fill_ratio: Option<f64>) -> Result<SummaryRow> {
    if trace.len() < 2 {
        return Err(Error::contract("a summary needs at least 2 windows"));
    }
    let n = trace.len() as f64;
    let col = |f: fn(&TraceRow) -> f64| trace.iter().map(f).collect::<Vec<f64>>();
    let h = col(|r| r.h_a);
    let mut acc = AffectAccumulator::default();
    for r in trace {
        acc.push(r.h_a, r.sigma, r.t_a, r.c_a);
    }
    Ok(SummaryRow {
        final_score: trace[trace.len() - 1].score as f64,
        behavior_ccc: ccc(&col(|r| r.score as f64), &col(|r| r.target_score))?,
        mean_arousal: acc.max_arousal(),
        arousal_ccc: ccc(&h, &col(|r| r.t_a))?,
        arousal_deviation: acc.mean_sigma(),
        confidence: acc.rac(),
        fill_pct: fill_ratio.map(|f| 100.0 * f),
        offroad_pct: 100.0 * trace.iter().map(|r| r.offroad).sum::<f64>() / n,
        avg_speed: trace.iter().map(|r| r.speed).sum::<f64>() / n,
    })
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in trace {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean and 95% half-width (`1.96 s / sqrt(n)`, sample std) of `values`.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, crate::demos::CI_Z * var.sqrt() / (n as f64).sqrt())
}
