//! Go-Blend: archive-based trajectory search driven by game score and by
//! agreement with human arousal traces, with the MicroRally racing
//! environment and synthetic demonstration data.

pub mod affect;
pub mod archive;
pub mod demos;
pub mod environment;
pub mod error;
pub mod explorer;
pub mod metrics;
pub mod selection;
pub mod suite;

pub use affect::{AffectReward, ArousalEstimate, ArousalTrajectory, KnnSurrogate, Weighting};
pub use archive::{Archive, CellRecord, Channel, Outcome};
pub use demos::{ActionFrequency, DemoSession, SyntheticConfig, TargetTrace};
pub use environment::{Action, CellKey, FeatureVector, Simulator, Snapshot, TrackSpec};
pub use error::{Error, Result};
pub use explorer::{Agent, ExperimentConfig, Replacement, RunOutput, RunResult, Setup};
pub use metrics::{ccc, pearson, SummaryRow, TraceRow};
pub use selection::{SelectionWeights, Strategy};
pub use suite::{run_seed, run_suite, SuiteConfig, SuiteOptions};
