//! Arousal surrogate and affect rewards.
//!
//! Per window `i` the agent's predicted arousal `h_a(i)` is compared with the
//! expert target `t_a(i)`:
//!
//! ```text
//! sim(i)  = (1 - |h_a(i) - t_a(i)|)^2
//! R_a     = mean sim(i)
//! R_au    = mean sim(i) / (1 + sigma(i))
//! R_ac    = mean (+1 if |h_a(i) - t_a(i)| < c_a(i) else -1)
//! max     = mean h_a(i)
//! ```

mod knn;

use serde::{Deserialize, Serialize};

use crate::demos::TargetTrace;
use crate::error::{Error, Result};

pub use knn::{
    squared_distance, ArousalEstimate, KnnSurrogate, Neighbor, Origin, Weighting, DEFAULT_EPSILON,
};

/// `(1 - |h - t|)^2` for `h, t` in `[0, 1]`.
pub fn similarity(h: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) || !(0.0..=1.0).contains(&t) {
        return Err(Error::contract(format!("similarity inputs out of [0, 1]: h={h}, t={t}")));
    }
    Ok(similarity_unchecked(h, t))
}

#[inline]
pub(crate) fn similarity_unchecked(h: f64, t: f64) -> f64 {
    let s = 1.0 - (h - t).abs();
    s * s
}

/// Affect rewards an archive can be driven by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffectReward {
    MaxArousal,
    Ra,
    Rau,
    Rac,
}

impl AffectReward {
    pub fn value(self, acc: &AffectAccumulator) -> f64 {
        match self {
            AffectReward::MaxArousal => acc.max_arousal(),
            AffectReward::Ra => acc.ra(),
            AffectReward::Rau => acc.rau(),
            AffectReward::Rac => acc.rac(),
        }
    }

    /// Lower bound of the reward's range.
    pub fn minimum(self) -> f64 {
        match self {
            AffectReward::Rac => -1.0,
            _ => 0.0,
        }
    }
}

/// Running sums from which every affect reward is read in O(1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AffectAccumulator {
    pub n: u32,
    pub sum_similarity: f64,
    pub sum_discounted: f64,
    pub sum_inside: f64,
    pub sum_arousal: f64,
    pub sum_sigma: f64,
}

impl AffectAccumulator {
    /// Fold in window `i` with prediction `h`, spread `sigma`, and target
    /// values `t`, `c`.
    pub fn push(&mut self, h: f64, sigma: f64, t: f64, c: f64) {
        let sim = similarity_unchecked(h, t);
        self.n += 1;
        self.sum_similarity += sim;
        self.sum_discounted += sim / (1.0 + sigma);
        self.sum_inside += if (h - t).abs() < c { 1.0 } else { -1.0 };
        self.sum_arousal += h;
        self.sum_sigma += sigma;
    }

    fn mean(&self, sum: f64) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            sum / self.n as f64
        }
    }

    pub fn ra(&self) -> f64 {
        self.mean(self.sum_similarity)
    }

    pub fn rau(&self) -> f64 {
        self.mean(self.sum_discounted)
    }

    pub fn rac(&self) -> f64 {
        self.mean(self.sum_inside)
    }

    pub fn max_arousal(&self) -> f64 {
        self.mean(self.sum_arousal)
    }

    pub fn mean_sigma(&self) -> f64 {
        self.mean(self.sum_sigma)
    }
}

/// Per-window predictions of one trajectory plus their running sums.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArousalTrajectory {
    pub h_a: Vec<f64>,
    pub sigma: Vec<f64>,
    pub acc: AffectAccumulator,
}

impl ArousalTrajectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the next window's estimate, scored against `target`.
    pub fn push(&mut self, estimate: ArousalEstimate, target: &TargetTrace) -> Result<()> {
        let i = self.h_a.len();
        let (t, c) = target_at(target, i)?;
        self.acc.push(estimate.h_a, estimate.sigma, t, c);
        self.h_a.push(estimate.h_a);
        self.sigma.push(estimate.sigma);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.h_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_a.is_empty()
    }
}

pub(crate) fn target_at(target: &TargetTrace, i: usize) -> Result<(f64, f64)> {
    match (target.mean.get(i), target.ci.get(i)) {
        (Some(&t), Some(&c)) => Ok((t, c)),
        _ => Err(Error::contract(format!(
            "window {i} is past the {}-window target trace",
            target.len()
        ))),
    }
}

fn check_lengths(traj: &ArousalTrajectory, target: &TargetTrace) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::contract("empty arousal trajectory"));
    }
    if traj.len() > target.len() || traj.sigma.len() != traj.len() {
        return Err(Error::contract("arousal trajectory does not fit the target trace"));
    }
    Ok(())
}

/// Mean similarity to the target.
pub fn reward_ra(traj: &ArousalTrajectory, target: &TargetTrace) -> Result<f64> {
    check_lengths(traj, target)?;
    let mut sum = 0.0;
    for (h, t) in traj.h_a.iter().zip(&target.mean) {
        sum += similarity(*h, *t)?;
    }
    Ok(sum / traj.len() as f64)
}

/// Mean similarity discounted by the surrogate's neighbour spread.
pub fn reward_rau(traj: &ArousalTrajectory, target: &TargetTrace) -> Result<f64> {
    check_lengths(traj, target)?;
    let mut sum = 0.0;
    for ((h, s), t) in traj.h_a.iter().zip(&traj.sigma).zip(&target.mean) {
        sum += similarity(*h, *t)? / (1.0 + s);
    }
    Ok(sum / traj.len() as f64)
}

/// Fraction of windows inside the target's confidence band, mapped to [-1, 1].
pub fn reward_rac(traj: &ArousalTrajectory, target: &TargetTrace) -> Result<f64> {
    check_lengths(traj, target)?;
    let sum: f64 = traj
        .h_a
        .iter()
        .zip(target.mean.iter().zip(&target.ci))
        .map(|(h, (t, c))| if (h - t).abs() < *c { 1.0 } else { -1.0 })
        .sum();
    Ok(sum / traj.len() as f64)
}

pub fn reward_max_arousal(traj: &ArousalTrajectory) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::contract("empty arousal trajectory"));
    }
    Ok(traj.h_a.iter().sum::<f64>() / traj.len() as f64)
}
