//! Synthetic expert demonstrations with known ground-truth arousal.
//!
//! Each session is driven by a scripted waypoint follower with its own
//! racing line, corner-cutting depth and steering noise. Ground truth per
//! window is
//!
//! ```text
//! g = clamp01(base + w_off * offroad + w_curve * in_curve_or_loop + w_prox * proximity + eta)
//! ```
//!
//! and the recorded raw arousal is a per-session positive affine distortion
//! of `g`, so loading and min-max normalising it recovers `g`'s shape.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{io, DemoSession, Manifest};
use crate::environment::{Action, Simulator, State, FEATURE_OFFROAD};
use crate::error::{Error, Result};

const FEATURE_PROXIMITY: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub sessions: usize,
    /// Standard deviation of the per-window arousal noise.
    pub sigma_eta: f64,
    /// Apply a random positive affine map to each session's raw arousal.
    pub distort: bool,
    pub base: f64,
    pub w_offroad: f64,
    pub w_curve: f64,
    pub w_proximity: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            sessions: 27,
            sigma_eta: 0.05,
            distort: true,
            base: 0.3,
            w_offroad: 0.4,
            w_curve: 0.3,
            w_proximity: 0.2,
        }
    }
}

/// Scripted driver that steers towards a lateral racing line, cutting to the
/// inside ahead of curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertController {
    /// Preferred lateral offset on straights.
    pub lane: f64,
    /// How far the line moves to the inside of an upcoming curve.
    pub cut: f64,
    /// Probability of a random steering input in a window.
    pub noise: f64,
    /// Probability of lifting off the throttle in a window.
    pub lift: f64,
}

impl ExpertController {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        ExpertController {
            lane: rng.random_range(-3.0..3.0),
            cut: rng.random_range(1.0..8.5),
            noise: rng.random_range(0.02..0.12),
            lift: rng.random_range(0.0..0.08),
        }
    }

    /// Pick the steering input whose best two-window continuation ends
    /// closest to the racing line, aligned with the track and at speed.
    pub fn act<R: Rng + ?Sized>(&self, sim: &Simulator, state: &State, rng: &mut R) -> Action {
        let gas = if rng.random::<f64>() < self.lift { 0 } else { 1 };
        if rng.random::<f64>() < self.noise {
            let steer = rng.random_range(-1..=1);
            return Action::new(gas, steer).expect("controller emits valid inputs");
        }
        let phys = &sim.spec().physics;
        let geometry = sim.geometry();
        let look = sim.lap_position(state.progress + (state.speed.max(0.0) * 0.6).max(10.0));
        let k_ahead = geometry.curvature(geometry.locate(look).0);
        let target = if k_ahead == 0.0 {
            self.lane
        } else {
            self.lane + self.cut * k_ahead.signum()
        };

        let cost = |first: i8, second: i8| -> f64 {
            let mut s = state.clone();
            s.terminal = false;
            for steer in [first, second] {
                let a = Action::new(1, steer).expect("valid");
                if sim.step(&mut s, a).is_err() || s.terminal {
                    break;
                }
            }
            (s.lateral - target).powi(2) + 50.0 * s.heading.powi(2) + 5.0 * (phys.v_max - s.speed)
        };
        let mut best = (f64::INFINITY, 0i8);
        for first in [0i8, 1, -1] {
            for second in [0i8, 1, -1] {
                let c = cost(first, second);
                if c < best.0 {
                    best = (c, first);
                }
            }
        }
        Action::new(gas, best.1).expect("controller emits valid inputs")
    }
}

/// Generate `config.sessions` sessions in memory, ids `1..=m`.
pub fn generate_sessions(
    sim: &Simulator,
    config: &SyntheticConfig,
    seed: u64,
) -> Result<Vec<DemoSession>> {
    if config.sessions < 2 {
        return Err(Error::config("at least 2 sessions are needed for a target trace"));
    }
    if config.sigma_eta < 0.0 || !config.sigma_eta.is_finite() {
        return Err(Error::config("sigma_eta must be a finite non-negative number"));
    }
    let noise = Normal::new(0.0, config.sigma_eta)
        .map_err(|e| Error::config(format!("sigma_eta: {e}")))?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut sessions = Vec::with_capacity(config.sessions);
    for index in 1..=config.sessions {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let driver = ExpertController::random(&mut rng);
        // always drawn so the driving stream does not depend on `distort`
        let scale: f64 = rng.random_range(0.5..3.0);
        let offset: f64 = rng.random_range(-1.0..1.0);
        let (scale, offset) = if config.distort { (scale, offset) } else { (1.0, 0.0) };

        let mut state = sim.initial_state();
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        loop {
            let action = driver.act(sim, &state, &mut rng);
            let out = sim.step(&mut state, action)?;
            let (seg, _) = sim.geometry().locate(sim.lap_position(state.progress));
            let curve = sim.spec().segments[seg].is_curve_or_loop() as u8 as f64;
            let f = out.features.0;
            let eta = if config.sigma_eta > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            let g = (config.base
                + config.w_offroad * f[FEATURE_OFFROAD]
                + config.w_curve * curve
                + config.w_proximity * f[FEATURE_PROXIMITY]
                + eta)
                .clamp(0.0, 1.0);
            truth.push(g);
            rows.push((f.to_vec(), action, scale * g + offset));
            if out.terminal {
                break;
            }
        }
        if state.score < sim.max_score() {
            return Err(Error::Generation(format!(
                "session {index}: controller reached score {} of {} in {} windows",
                state.score,
                sim.max_score(),
                state.windows
            )));
        }
        let mut session = DemoSession::new(index.to_string(), rows);
        session.truth = Some(truth);
        sessions.push(session);
    }
    Ok(sessions)
}

/// Generate a dataset and write it, with its manifest, into `dir`.
pub fn generate_synthetic(
    sim: &Simulator,
    config: &SyntheticConfig,
    seed: u64,
    dir: &Path,
) -> Result<Manifest> {
    let sessions = generate_sessions(sim, config, seed)?;
    let generation = serde_json::json!({
        "seed": seed,
        "config": config,
        "track": sim.spec().name,
    });
    io::write_dataset(dir, &sessions, sim.horizon() as usize, generation)
}
