//! Cell selection: uniform, arousal roulette wheel, and visit-discounted
//! roulette (`w_i = W_a^i / sqrt(c_seen_i + 1)`).
//!
//! Terminal cells are never selected.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affect::AffectReward;
use crate::archive::Archive;
use crate::environment::CellKey;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Uniform,
    Roulette,
    Ucb,
}

/// Unnormalised weights over the selectable cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionWeights {
    /// Positions in the archive's insertion order.
    pub indices: Vec<usize>,
    pub keys: Vec<CellKey>,
    pub weights: Vec<f64>,
    /// Sum of `weights`.
    pub total: f64,
    /// Every reward weight was zero and uniform weights were substituted.
    pub fell_back: bool,
}

impl SelectionWeights {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }

    pub fn probability(&self, key: &CellKey) -> Option<f64> {
        self.keys.iter().position(|k| k == key).map(|i| self.weights[i] / self.total)
    }

    /// Fill `self` for `strategy`, reusing its buffers.
    pub fn compute(&mut self, archive: &Archive, strategy: Strategy, reward: AffectReward) -> Result<()> {
        self.indices.clear();
        self.keys.clear();
        self.weights.clear();
        self.fell_back = false;
        for (i, r) in archive.iter().enumerate() {
            if r.terminal {
                continue;
            }
            let w = match strategy {
                Strategy::Uniform => 1.0,
                Strategy::Roulette => roulette_value(r.r_a, reward),
                Strategy::Ucb => roulette_value(r.r_a, reward) / ((r.c_seen + 1) as f64).sqrt(),
            };
            self.indices.push(i);
            self.keys.push(r.key);
            self.weights.push(w);
        }
        if self.weights.is_empty() {
            return Err(Error::contract("no selectable cells in the archive"));
        }
        self.total = self.weights.iter().sum();
        if self.total.is_nan() || self.total <= 0.0 {
            self.weights.iter_mut().for_each(|w| *w = 1.0);
            self.total = self.weights.len() as f64;
            self.fell_back = true;
        }
        Ok(())
    }

    /// Draw one archive position by cumulative lookup.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total;
        let mut acc = 0.0;
        let mut last = 0;
        for (j, &w) in self.weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = j;
            if u < acc {
                return j;
            }
        }
        last
    }
}

/// Reward mapped to a non-negative roulette weight; `R_ac` is shifted from
/// [-1, 1] to [0, 1].
pub fn roulette_value(r_a: f64, reward: AffectReward) -> f64 {
    let w = match reward {
        AffectReward::Rac => (r_a + 1.0) / 2.0,
        _ => r_a,
    };
    w.max(0.0)
}

fn weights(archive: &Archive, strategy: Strategy, reward: AffectReward) -> Result<SelectionWeights> {
    let mut w = SelectionWeights::default();
    w.compute(archive, strategy, reward)?;
    if w.fell_back {
        log::warn!("all selection weights are zero; selecting uniformly");
    }
    Ok(w)
}

pub fn weights_uniform(archive: &Archive) -> Result<SelectionWeights> {
    weights(archive, Strategy::Uniform, AffectReward::Ra)
}

pub fn weights_roulette(archive: &Archive, reward: AffectReward) -> Result<SelectionWeights> {
    weights(archive, Strategy::Roulette, reward)
}

pub fn weights_ucb(archive: &Archive, reward: AffectReward) -> Result<SelectionWeights> {
    weights(archive, Strategy::Ucb, reward)
}

/// Draw one key.
pub fn sample<R: Rng + ?Sized>(weights: &SelectionWeights, rng: &mut R) -> CellKey {
    weights.keys[weights.sample_index(rng)]
}
