//! The exploration loop: select a cell, restore it, take a burst of sampled
//! actions, and offer every state reached back to the archive. Also the
//! random-agent baseline.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affect::{target_at, AffectAccumulator, AffectReward, KnnSurrogate, Weighting, DEFAULT_EPSILON};
use crate::archive::{better, Archive, CellRecord, Channel, Outcome};
use crate::demos::{action_frequencies, target_trace, ActionFrequency, DemoSession, TargetTrace};
use crate::environment::{encode_trajectory, Action, CellKey, Simulator, FEATURE_SCORE};
use crate::error::{Error, Result};
use crate::metrics::{best_trace, summarize, SummaryRow, TraceRow};
use crate::selection::{SelectionWeights, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agent {
    #[default]
    GoBlend,
    Random,
}

/// Reward that decides archive replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    #[default]
    Score,
    MaxArousal,
    Ra,
    Rau,
    Rac,
}

impl Replacement {
    pub fn channel(self) -> Channel {
        match self {
            Replacement::Score => Channel::Behavior,
            _ => Channel::Affect,
        }
    }

    pub fn affect(self) -> Option<AffectReward> {
        match self {
            Replacement::Score => None,
            Replacement::MaxArousal => Some(AffectReward::MaxArousal),
            Replacement::Ra => Some(AffectReward::Ra),
            Replacement::Rau => Some(AffectReward::Rau),
            Replacement::Rac => Some(AffectReward::Rac),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub agent: Agent,
    pub replacement: Replacement,
    pub selection: Strategy,
    /// Affect reward stored in `r_a` when replacement is score-driven.
    pub selection_reward: AffectReward,
    pub iterations: u64,
    pub burst: u32,
    pub runs: u32,
    pub k: usize,
    pub weighting: Weighting,
    pub epsilon: f64,
    /// Fraction of accepted offers whose trajectory is replayed and checked.
    pub replay_check_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: String::new(),
            agent: Agent::GoBlend,
            replacement: Replacement::Score,
            selection: Strategy::Uniform,
            selection_reward: AffectReward::Ra,
            iterations: 500_000,
            burst: 25,
            runs: 3,
            k: 5,
            weighting: Weighting::InverseDistance,
            epsilon: DEFAULT_EPSILON,
            replay_check_rate: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::config(format!("experiment '{}': {m}", self.name)));
        if self.name.is_empty()
            || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return fail("name must be non-empty and use only [A-Za-z0-9_-]");
        }
        if self.iterations == 0 {
            return fail("iterations must be at least 1");
        }
        if self.burst == 0 {
            return fail("burst must be at least 1");
        }
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail("epsilon must be positive");
        }
        if !(0.0..=1.0).contains(&self.replay_check_rate) {
            return fail("replay_check_rate must lie in [0, 1]");
        }
        Ok(())
    }

    /// Affect reward stored in every record's `r_a`.
    pub fn stored_affect(&self) -> AffectReward {
        self.replacement.affect().unwrap_or(self.selection_reward)
    }
}

/// Everything a run reads: environment, demonstrations and what is derived
/// from them.
#[derive(Debug, Clone)]
pub struct Setup {
    pub sim: Simulator,
    pub sessions: Vec<DemoSession>,
    pub target: TargetTrace,
    pub actions: ActionFrequency,
}

impl Setup {
    pub fn new(sim: Simulator, sessions: Vec<DemoSession>) -> Result<Self> {
        let horizon = sim.horizon() as usize;
        let target = target_trace(&sessions, horizon, FEATURE_SCORE, sim.max_score() as f64)?;
        let actions = action_frequencies(&sessions)?;
        Ok(Setup { sim, sessions, target, actions })
    }

    pub fn rows(&self) -> usize {
        self.sessions.iter().map(DemoSession::len).sum()
    }

    pub fn surrogate(&self, config: &ExperimentConfig) -> Result<KnnSurrogate> {
        if config.k > self.rows() {
            return Err(Error::config(format!(
                "k = {} exceeds the {} demonstration windows",
                config.k,
                self.rows()
            )));
        }
        KnnSurrogate::new(&self.sessions, config.k, config.weighting)?.with_epsilon(config.epsilon)
    }
}

/// Best trajectory found by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub key: CellKey,
    pub r_b: f64,
    pub r_a: f64,
    pub length: usize,
    pub terminal: bool,
    /// Action codes 0-8, one digit per window.
    pub trajectory: String,
}

impl BestCell {
    fn of(r: &CellRecord) -> Self {
        BestCell {
            key: r.key,
            r_b: r.r_b,
            r_a: r.r_a,
            length: r.len(),
            terminal: r.terminal,
            trajectory: encode_trajectory(&r.trajectory),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub experiment: String,
    pub run: u32,
    pub seed: u64,
    pub best: BestCell,
    pub summary: SummaryRow,
    pub archive_size: Option<usize>,
    pub fill_ratio: Option<f64>,
    pub iterations: u64,
    pub env_steps: u64,
    /// Number of completed episodes (random agent only).
    pub episodes: Option<u64>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

/// A run's result with the artefacts that are written beside it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: RunResult,
    pub archive: Option<Archive>,
    pub trace: Vec<TraceRow>,
}

/// Run `config` once with `seed`.
pub fn run(setup: &Setup, config: &ExperimentConfig, run: u32, seed: u64) -> Result<RunOutput> {
    config.validate()?;
    match config.agent {
        Agent::GoBlend => explore(setup, config, run, seed, false),
        Agent::Random => random_baseline(setup, config, run, seed),
    }
}

/// Go-Blend with a replacement log attached to the archive.
pub fn run_logged(setup: &Setup, config: &ExperimentConfig, seed: u64) -> Result<RunOutput> {
    config.validate()?;
    explore(setup, config, 0, seed, true)
}

fn explore(
    setup: &Setup,
    config: &ExperimentConfig,
    run: u32,
    seed: u64,
    logged: bool,
) -> Result<RunOutput> {
    let started = Instant::now();
    let knn = setup.surrogate(config)?;
    let sim = &setup.sim;
    let target = &setup.target;
    let channel = config.replacement.channel();
    let stored = config.stored_affect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c4ec);

    let bound = sim.key_space();
    let mut archive = if logged { Archive::with_log(bound) } else { Archive::new(bound) };
    let start = sim.initial_state();
    archive.offer(
        CellRecord {
            key: sim.cell_key_of(&start),
            trajectory: Vec::new(),
            snapshot: start.to_snapshot(),
            r_b: 0.0,
            r_a: 0.0,
            affect: AffectAccumulator::default(),
            c_seen: 0,
            terminal: false,
        },
        channel,
    );

    let mut weights = SelectionWeights::default();
    let mut warned = false;
    let mut best_terminal: Option<CellRecord> = None;
    let mut env_steps = 0u64;
    let mut iterations = 0u64;

    while iterations < config.iterations {
        if weights.compute(&archive, config.selection, stored).is_err() {
            log::info!("{}: no selectable cells left after {iterations} iterations", config.name);
            break;
        }
        if weights.fell_back && !warned {
            log::warn!("{}: all selection weights are zero; selecting uniformly", config.name);
            warned = true;
        }
        iterations += 1;
        let index = weights.indices[weights.sample_index(&mut rng)];
        let (key, mut state, mut trajectory, mut affect) = {
            let r = archive.get_index(index).expect("sampled index is in the archive");
            (r.key, r.snapshot.state(), r.trajectory.clone(), r.affect)
        };
        archive.mark_selected(&key)?;

        for _ in 0..config.burst {
            if state.terminal {
                break;
            }
            let action = setup.actions.sample(&mut rng);
            let out = sim.step(&mut state, action)?;
            env_steps += 1;
            trajectory.push(action);
            let est = knn.estimate(out.features.as_slice())?;
            let (t, c) = target_at(target, trajectory.len() - 1)?;
            affect.push(est.h_a, est.sigma, t, c);

            let key = sim.cell_key_of(&state);
            let r_b = state.score as f64;
            let r_a = stored.value(&affect);
            let reward = match channel {
                Channel::Behavior => r_b,
                Channel::Affect => r_a,
            };
            let accept = archive.judge(&key, reward, trajectory.len(), channel) != Outcome::Rejected;
            let improves_best = state.terminal
                && best_terminal.as_ref().is_none_or(|b| {
                    let incumbent = b.reward(channel);
                    reward > incumbent || (reward == incumbent && trajectory.len() < b.len())
                });
            if !(accept || improves_best || logged) {
                continue;
            }
            let candidate = CellRecord {
                key,
                trajectory: trajectory.clone(),
                snapshot: state.to_snapshot(),
                r_b,
                r_a,
                affect,
                c_seen: 0,
                terminal: state.terminal,
            };
            if accept && config.replay_check_rate > 0.0 && check_rng.random::<f64>() < config.replay_check_rate {
                check_replay(sim, &candidate)?;
            }
            if improves_best {
                best_terminal = Some(candidate.clone());
            }
            archive.offer(candidate, channel);
        }
    }

    let best = match best_terminal {
        Some(b) => b,
        None => {
            log::warn!("{}: no terminal state reached; reporting the archive's best cell", config.name);
            // a summary needs two windows
            archive
                .iter()
                .filter(|r| r.len() >= 2)
                .fold(None, |b: Option<&CellRecord>, r| match b {
                    Some(b) if !better(r, b, channel) => Some(b),
                    _ => Some(r),
                })
                .ok_or_else(|| Error::InsufficientData(format!("{}: no cell spans two windows", config.name)))?
                .clone()
        }
    };
    let trace = best_trace(sim, &knn, target, &best.trajectory)?;
    let fill = archive.fill_ratio();
    let summary = summarize(&trace, Some(fill))?;
    Ok(RunOutput {
        result: RunResult {
            experiment: config.name.clone(),
            run,
            seed,
            best: BestCell::of(&best),
            summary,
            archive_size: Some(archive.len()),
            fill_ratio: Some(fill),
            iterations,
            env_steps,
            episodes: None,
            wall_clock: started.elapsed(),
        },
        archive: Some(archive),
        trace,
    })
}

/// Replay a record's trajectory from reset and compare snapshots bytewise.
pub fn check_replay(sim: &Simulator, record: &CellRecord) -> Result<()> {
    let (state, _) = sim.replay(&record.trajectory)?;
    if state.to_snapshot().as_bytes() != record.snapshot.as_bytes() {
        return Err(Error::contract(format!(
            "cell {}: trajectory of {} actions does not replay to its snapshot",
            record.key,
            record.len()
        )));
    }
    Ok(())
}

/// Whole episodes of frequency-weighted random actions with an environment
/// step budget of `iterations * burst`. An episode cut short by the budget
/// is discarded.
pub fn random_baseline(
    setup: &Setup,
    config: &ExperimentConfig,
    run: u32,
    seed: u64,
) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let knn = setup.surrogate(config)?;
    let sim = &setup.sim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = config.iterations.saturating_mul(config.burst as u64);

    let mut env_steps = 0u64;
    let mut episodes = 0u64;
    let mut best: Option<(u32, Vec<Action>)> = None;
    let mut trajectory = Vec::with_capacity(sim.horizon() as usize);
    'episodes: loop {
        let mut state = sim.initial_state();
        trajectory.clear();
        while !state.terminal {
            if env_steps == budget {
                break 'episodes;
            }
            let action = setup.actions.sample(&mut rng);
            sim.step(&mut state, action)?;
            env_steps += 1;
            trajectory.push(action);
        }
        episodes += 1;
        let improves = best.as_ref().is_none_or(|(score, actions)| {
            state.score > *score || (state.score == *score && trajectory.len() < actions.len())
        });
        if improves {
            best = Some((state.score, trajectory.clone()));
        }
    }
    let (_, actions) = best.ok_or_else(|| {
        Error::config(format!(
            "experiment '{}': step budget {budget} is too small to finish one episode",
            config.name
        ))
    })?;

    let trace = best_trace(sim, &knn, &setup.target, &actions)?;
    let mut affect = AffectAccumulator::default();
    for r in &trace {
        affect.push(r.h_a, r.sigma, r.t_a, r.c_a);
    }
    let (state, _) = sim.replay(&actions)?;
    let summary = summarize(&trace, None)?;
    let record = CellRecord {
        key: sim.cell_key_of(&state),
        r_b: state.score as f64,
        r_a: config.stored_affect().value(&affect),
        snapshot: state.to_snapshot(),
        trajectory: actions,
        affect,
        c_seen: 0,
        terminal: state.terminal,
    };
    Ok(RunOutput {
        result: RunResult {
            experiment: config.name.clone(),
            run,
            seed,
            best: BestCell::of(&record),
            summary,
            archive_size: None,
            fill_ratio: None,
            iterations: config.iterations,
            env_steps,
            episodes: Some(episodes),
            wall_clock: started.elapsed(),
        },
        archive: None,
        trace,
    })
}
