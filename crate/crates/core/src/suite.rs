//! Experiment suites: configuration, per-run seeding, parallel execution
//! and the output tree.
//!
//! ```text
//! <out>/config.json                     resolved configuration
//! <out>/summary.csv                     one row per experiment, mean and 95% CI
//! <out>/dataset/                        generated demonstrations (synthetic only)
//! <out>/runs/<name>/<k>/result.json
//! <out>/runs/<name>/<k>/archive.jsonl   empty for the random agent
//! <out>/runs/<name>/<k>/best_trace.csv
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affect::AffectReward;
use crate::demos::{generate_sessions, load_dataset, write_dataset, SyntheticConfig};
use crate::environment::{Simulator, TrackSpec};
use crate::error::{Error, Result};
use crate::explorer::{run, Agent, ExperimentConfig, Replacement, RunResult, Setup};
use crate::metrics::{mean_ci, write_trace_csv, SummaryRow};
use crate::selection::Strategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Master seed for every run.
    pub seed: u64,
    /// Track file; the built-in track when absent.
    pub track: Option<PathBuf>,
    /// Demonstration directory; generated when absent.
    pub dataset: Option<PathBuf>,
    pub synthetic: SyntheticConfig,
    /// Seed for the generated demonstrations.
    pub data_seed: u64,
    pub experiments: Vec<ExperimentConfig>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            track: None,
            dataset: None,
            synthetic: SyntheticConfig::default(),
            data_seed: 7,
            experiments: default_experiments(),
        }
    }
}

/// Random baseline, the five replacement rewards, and the two biased
/// selection strategies on score replacement.
pub fn default_experiments() -> Vec<ExperimentConfig> {
    let e = |name: &str, agent, replacement, selection| ExperimentConfig {
        name: name.to_string(),
        agent,
        replacement,
        selection,
        selection_reward: AffectReward::Ra,
        ..ExperimentConfig::default()
    };
    use Replacement::*;
    use Strategy::*;
    vec![
        e("random", Agent::Random, Score, Uniform),
        e("max_score", Agent::GoBlend, Score, Uniform),
        e("max_arousal", Agent::GoBlend, MaxArousal, Uniform),
        e("r_a", Agent::GoBlend, Ra, Uniform),
        e("r_au", Agent::GoBlend, Rau, Uniform),
        e("r_ac", Agent::GoBlend, Rac, Uniform),
        e("max_score_wa", Agent::GoBlend, Score, Roulette),
        e("max_score_we", Agent::GoBlend, Score, Ucb),
    ]
}

impl SuiteConfig {
    /// Read a JSON config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: SuiteConfig = serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.track, &mut config.dataset].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(Error::config("the suite has no experiments"));
        }
        let mut names = HashSet::new();
        for e in &self.experiments {
            e.validate()?;
            if !names.insert(e.name.as_str()) {
                return Err(Error::config(format!("duplicate experiment name '{}'", e.name)));
            }
        }
        Ok(())
    }

    /// Apply command-line overrides.
    pub fn apply(&mut self, options: &SuiteOptions) -> Result<()> {
        if let Some(seed) = options.seed {
            self.seed = seed;
        }
        if !options.only.is_empty() {
            for name in &options.only {
                if !self.experiments.iter().any(|e| &e.name == name) {
                    return Err(Error::config(format!("--only: no experiment named '{name}'")));
                }
            }
            self.experiments.retain(|e| options.only.contains(&e.name));
        }
        for e in &mut self.experiments {
            if let Some(runs) = options.runs {
                e.runs = runs;
            }
            if let Some(iterations) = options.iterations {
                e.iterations = iterations;
            }
        }
        self.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteOptions {
    pub seed: Option<u64>,
    pub runs: Option<u32>,
    pub iterations: Option<u64>,
    pub only: Vec<String>,
    /// Worker threads; rayon's default when absent.
    pub jobs: Option<usize>,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `splitmix64(fnv1a64(master_le || name || run_le))`: depends only on its
/// own experiment's name, so adding experiments never moves other seeds.
pub fn run_seed(master: u64, name: &str, run: u32) -> u64 {
    let bytes = master
        .to_le_bytes()
        .into_iter()
        .chain(name.bytes())
        .chain(run.to_le_bytes());
    splitmix64(fnv1a64(bytes))
}

/// Load the track and the demonstrations. Generated demonstrations are
/// written under `<out>/dataset` when `out` is given.
pub fn prepare(config: &SuiteConfig, out: Option<&Path>) -> Result<Setup> {
    let sim = match &config.track {
        Some(path) => Simulator::new(TrackSpec::load(path)?)?,
        None => Simulator::default_track(),
    };
    let sessions = match &config.dataset {
        Some(dir) => load_dataset(dir)?,
        None => {
            let sessions = generate_sessions(&sim, &config.synthetic, config.data_seed)?;
            if let Some(out) = out {
                let generation = serde_json::json!({
                    "seed": config.data_seed,
                    "config": config.synthetic,
                    "track": sim.spec().name,
                });
                write_dataset(&out.join("dataset"), &sessions, sim.horizon() as usize, generation)?;
            }
            sessions
        }
    };
    Setup::new(sim, sessions)
}

/// Mean and CI of each summary column for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub experiment: String,
    pub runs: usize,
    pub columns: Vec<Option<(f64, f64)>>,
}

pub fn aggregate(name: &str, results: &[&RunResult]) -> Aggregate {
    let rows: Vec<[Option<f64>; 9]> = results.iter().map(|r| r.summary.values()).collect();
    let columns = (0..SummaryRow::COLUMNS.len())
        .map(|c| {
            let values: Option<Vec<f64>> = rows.iter().map(|r| r[c]).collect();
            values.filter(|v| !v.is_empty()).map(|v| mean_ci(&v))
        })
        .collect();
    Aggregate { experiment: name.to_string(), runs: results.len(), columns }
}

pub fn write_summary(path: &Path, aggregates: &[Aggregate]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["experiment".to_string(), "runs".to_string()];
    for c in SummaryRow::COLUMNS {
        header.push(c.to_string());
        header.push(format!("{c}_ci"));
    }
    w.write_record(&header)?;
    for a in aggregates {
        let mut record = vec![a.experiment.clone(), a.runs.to_string()];
        for col in &a.columns {
            match col {
                Some((mean, ci)) => {
                    record.push(mean.to_string());
                    record.push(ci.to_string());
                }
                None => {
                    record.push("NA".into());
                    record.push("NA".into());
                }
            }
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub results: Vec<RunResult>,
    pub aggregates: Vec<Aggregate>,
}

/// Run every experiment of `config` and write the output tree into `out`.
pub fn run_suite(mut config: SuiteConfig, options: &SuiteOptions, out: &Path) -> Result<SuiteReport> {
    config.apply(options)?;
    create_dir(out)?;
    write_json(&out.join("config.json"), &config)?;
    let setup = prepare(&config, Some(out))?;

    let jobs: Vec<(&ExperimentConfig, u32)> = config
        .experiments
        .iter()
        .flat_map(|e| (0..e.runs).map(move |k| (e, k)))
        .collect();
    let execute = || -> Vec<Result<RunResult>> {
        jobs.par_iter()
            .map(|&(experiment, k)| execute_run(&setup, experiment, config.seed, k, out))
            .collect()
    };
    let outcomes = match options.jobs {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(execute),
        None => execute(),
    };
    let results = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let aggregates: Vec<Aggregate> = config
        .experiments
        .iter()
        .map(|e| {
            let rows: Vec<&RunResult> = results.iter().filter(|r| r.experiment == e.name).collect();
            aggregate(&e.name, &rows)
        })
        .collect();
    write_summary(&out.join("summary.csv"), &aggregates)?;
    Ok(SuiteReport { results, aggregates })
}

fn execute_run(
    setup: &Setup,
    experiment: &ExperimentConfig,
    master: u64,
    k: u32,
    out: &Path,
) -> Result<RunResult> {
    let seed = run_seed(master, &experiment.name, k);
    let output = run(setup, experiment, k, seed)?;
    let r = &output.result;
    log::info!(
        "{} run {k}: score {} arousal ccc {:.3} fill {} in {:.1?}",
        experiment.name,
        r.summary.final_score,
        r.summary.arousal_ccc,
        r.summary.fill_pct.map_or("NA".to_string(), |f| format!("{f:.2}%")),
        r.wall_clock
    );
    let dir = out.join("runs").join(&experiment.name).join(k.to_string());
    create_dir(&dir)?;
    write_json(&dir.join("result.json"), r)?;
    let archive_path = dir.join("archive.jsonl");
    match &output.archive {
        Some(archive) => archive.write_jsonl(&archive_path)?,
        None => std::fs::write(&archive_path, b"").map_err(|e| Error::io(&archive_path, e))?,
    }
    write_trace_csv(&dir.join("best_trace.csv"), &output.trace)?;
    Ok(output.result)
}
