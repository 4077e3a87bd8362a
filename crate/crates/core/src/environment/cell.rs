use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of 30-degree bands of absolute heading deviation.
pub const ROTATION_BANDS: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedBucket {
    Slow,
    Fast,
}

/// Sub-segment: which side of the centreline, and whether off the road.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
    LeftOffroad,
    RightOffroad,
}

impl Side {
    pub fn classify(lateral: f64, half_width: f64) -> Side {
        match (lateral > 0.0, lateral.abs() > half_width) {
            (true, false) => Side::Left,
            (false, false) => Side::Right,
            (true, true) => Side::LeftOffroad,
            (false, true) => Side::RightOffroad,
        }
    }
}

/// Discretised game state: six categorical variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub speed: SpeedBucket,
    /// `floor(|relative heading| / 30deg)`, so 0 is aligned with the track.
    pub rotation: u8,
    pub segment: u8,
    pub side: Side,
    /// 1 or 2.
    pub lap: u8,
    /// An opponent shares the player's sub-segment.
    pub near: bool,
}

impl CellKey {
    /// Size of the key space for a track with `segments` segments.
    pub fn space(segments: usize) -> usize {
        2 * ROTATION_BANDS as usize * segments * 4 * 2 * 2
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}/r{}/s{}/{:?}/lap{}/{}",
            self.speed,
            self.rotation,
            self.segment,
            self.side,
            self.lap,
            if self.near { "near" } else { "far" }
        )
    }
}
