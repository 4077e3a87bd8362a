//! MicroRally: a deterministic fixed-timestep racing environment.
//!
//! One call to [`Simulator::tick`] advances one 250 ms window made of
//! `physics.substeps` fixed substeps. All state lives in [`State`], which
//! serialises to an opaque [`Snapshot`] for bit-exact restore.

mod cell;
mod sim;
mod track;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cell::{CellKey, Side, SpeedBucket, ROTATION_BANDS};
pub use sim::{OpponentState, Simulator, Snapshot, State, StepOutcome, Tick};
pub use track::{
    wrap_angle, Geometry, OpponentSpec, Physics, Pose, Segment, SegmentShape, TrackSpec, Waypoint,
    CHECKPOINTS_PER_LAP, LAPS, TRACK_FORMAT,
};

/// Number of features emitted per window.
pub const FEATURES: usize = 16;

/// Column names of the feature vector, in order.
pub const FEATURE_NAMES: [&str; FEATURES] = [
    "pos_x",
    "pos_y",
    "heading_sin",
    "heading_cos",
    "speed",
    "offroad",
    "segment_fraction",
    "lap_fraction",
    "score_fraction",
    "checkpoint_distance",
    "opponent_distance",
    "proximity",
    "gas",
    "steer",
    "collision",
    "elapsed",
];

/// Index of the off-road flag in the feature vector.
pub const FEATURE_OFFROAD: usize = 5;
/// Index of the score fraction in the feature vector.
pub const FEATURE_SCORE: usize = 8;

/// One of the nine (gas, steer) inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct Action {
    gas: i8,
    steer: i8,
}

#[derive(Serialize, Deserialize)]
struct RawAction {
    gas: i8,
    steer: i8,
}

impl TryFrom<RawAction> for Action {
    type Error = Error;
    fn try_from(raw: RawAction) -> Result<Self> {
        Action::new(raw.gas, raw.steer)
    }
}

impl From<Action> for RawAction {
    fn from(a: Action) -> Self {
        RawAction { gas: a.gas, steer: a.steer }
    }
}

impl Action {
    pub const IDLE: Action = Action { gas: 0, steer: 0 };

    /// All nine actions ordered by [`Action::code`].
    pub const ALL: [Action; 9] = {
        let mut all = [Action::IDLE; 9];
        let mut i = 0;
        while i < 9 {
            all[i] = Action {
                gas: (i / 3) as i8 - 1,
                steer: (i % 3) as i8 - 1,
            };
            i += 1;
        }
        all
    };

    pub fn new(gas: i8, steer: i8) -> Result<Self> {
        if !(-1..=1).contains(&gas) || !(-1..=1).contains(&steer) {
            return Err(Error::contract(format!(
                "action components must be in {{-1, 0, 1}}, got ({gas}, {steer})"
            )));
        }
        Ok(Action { gas, steer })
    }

    pub fn gas(self) -> i8 {
        self.gas
    }

    pub fn steer(self) -> i8 {
        self.steer
    }

    /// Compact code in `0..9`: `(gas + 1) * 3 + (steer + 1)`.
    pub fn code(self) -> u8 {
        ((self.gas + 1) * 3 + (self.steer + 1)) as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Action::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::contract(format!("action code {code} out of range")))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.gas, self.steer)
    }
}

/// Window-averaged observation, every component in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn offroad(&self) -> f64 {
        self.0[FEATURE_OFFROAD]
    }

    pub fn score_fraction(&self) -> f64 {
        self.0[FEATURE_SCORE]
    }
}

/// Encode a trajectory as a string of action codes.
pub fn encode_trajectory(actions: &[Action]) -> String {
    actions.iter().map(|a| char::from(b'0' + a.code())).collect()
}

pub fn decode_trajectory(codes: &str) -> Result<Vec<Action>> {
    codes
        .bytes()
        .map(|b| {
            b.checked_sub(b'0')
                .ok_or_else(|| Error::contract(format!("bad action code {:?}", b as char)))
                .and_then(Action::from_code)
        })
        .collect()
}
