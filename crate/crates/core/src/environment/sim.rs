use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cell::{CellKey, Side, SpeedBucket, ROTATION_BANDS};
use super::track::{wrap_angle, Geometry, SegmentShape, TrackSpec, CHECKPOINTS_PER_LAP, LAPS};
use super::{Action, FeatureVector, FEATURES};
use crate::error::{Error, Result};

const SNAPSHOT_VERSION: u8 = 1;
const HEADER_LEN: usize = 1 + 4 * 8 + 4 + 4 + 1 + 1 + 1 + 1;
/// Scale for the nearest-opponent distance feature.
const OPPONENT_DISTANCE_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpponentState {
    pub progress: f64,
    pub lane: f64,
}

/// Full environment state. Progress is absolute (laps included) and may go
/// negative when reversing over the start line.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub progress: f64,
    pub lateral: f64,
    /// Heading relative to the local track tangent, in `(-pi, pi]`.
    pub heading: f64,
    pub speed: f64,
    pub score: u32,
    pub windows: u32,
    pub prev_action: Action,
    pub collided: bool,
    pub terminal: bool,
    pub opponents: Vec<OpponentState>,
}

impl State {
    pub fn to_snapshot(&self) -> Snapshot {
        let mut b = Vec::with_capacity(HEADER_LEN + self.opponents.len() * 16);
        b.push(SNAPSHOT_VERSION);
        for v in [self.progress, self.lateral, self.heading, self.speed] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&self.score.to_le_bytes());
        b.extend_from_slice(&self.windows.to_le_bytes());
        b.push(self.prev_action.code());
        b.push(self.collided as u8);
        b.push(self.terminal as u8);
        b.push(self.opponents.len() as u8);
        for o in &self.opponents {
            b.extend_from_slice(&o.progress.to_le_bytes());
            b.extend_from_slice(&o.lane.to_le_bytes());
        }
        Snapshot(Arc::from(b))
    }

    fn decode(bytes: &[u8]) -> Result<State> {
        let bad = |why: &str| Error::contract(format!("malformed snapshot: {why}"));
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated"));
        }
        if bytes[0] != SNAPSHOT_VERSION {
            return Err(bad("unknown version"));
        }
        let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let u = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let n = bytes[HEADER_LEN - 1] as usize;
        if bytes.len() != HEADER_LEN + 16 * n {
            return Err(bad("length does not match opponent count"));
        }
        let flag = |at: usize| match bytes[at] {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(bad("flag byte")),
        };
        let opponents = (0..n)
            .map(|i| OpponentState {
                progress: f(HEADER_LEN + 16 * i),
                lane: f(HEADER_LEN + 16 * i + 8),
            })
            .collect();
        Ok(State {
            progress: f(1),
            lateral: f(9),
            heading: f(17),
            speed: f(25),
            score: u(33),
            windows: u(37),
            prev_action: Action::from_code(bytes[41]).map_err(|_| bad("action code"))?,
            collided: flag(42)?,
            terminal: flag(43)?,
            opponents,
        })
    }
}

/// Opaque, immutable, byte-serialisable environment state. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Snapshot(Arc<[u8]>);

impl Snapshot {
    /// Validate and wrap serialised bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Snapshot> {
        State::decode(bytes)?;
        Ok(Snapshot(Arc::from(bytes)))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn state(&self) -> State {
        State::decode(&self.0).expect("snapshots are validated on construction")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub features: FeatureVector,
    pub score_delta: u32,
    pub terminal: bool,
}

/// Result of [`Simulator::tick`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub snapshot: Snapshot,
    pub features: FeatureVector,
    pub score_delta: u32,
    pub terminal: bool,
}

/// The environment: an immutable track plus pure transition functions.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: TrackSpec,
    geometry: Geometry,
    /// End positions of the checkpoint segments within a lap, ascending.
    checkpoints: Vec<f64>,
    max_score: u32,
}

impl Simulator {
    pub fn new(spec: TrackSpec) -> Result<Self> {
        spec.validate()?;
        let geometry = Geometry::new(&spec);
        let mut checkpoints = Vec::with_capacity(CHECKPOINTS_PER_LAP);
        let mut end = 0.0;
        for seg in &spec.segments {
            end += seg.length;
            if seg.checkpoint {
                checkpoints.push(end);
            }
        }
        // the finish checkpoint sits exactly on the lap boundary
        *checkpoints.last_mut().unwrap() = geometry.lap_length();
        Ok(Simulator {
            spec,
            geometry,
            checkpoints,
            max_score: CHECKPOINTS_PER_LAP as u32 * LAPS,
        })
    }

    pub fn default_track() -> Self {
        Simulator::new(TrackSpec::default_track()).expect("built-in track is valid")
    }

    pub fn spec(&self) -> &TrackSpec {
        &self.spec
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn max_score(&self) -> u32 {
        self.max_score
    }

    pub fn horizon(&self) -> u32 {
        self.spec.physics.horizon
    }

    /// Number of distinct cell keys this track can produce.
    pub fn key_space(&self) -> usize {
        CellKey::space(self.spec.segments.len())
    }

    pub fn lap_position(&self, progress: f64) -> f64 {
        let lap = self.geometry.lap_length();
        let p = progress.rem_euclid(lap);
        // rem_euclid can round up to exactly `lap`
        if p >= lap {
            0.0
        } else {
            p
        }
    }

    /// Absolute progress of the next checkpoint for a given score.
    pub fn checkpoint_position(&self, score: u32) -> f64 {
        let per_lap = self.checkpoints.len() as u32;
        let lap = (score / per_lap) as f64;
        lap * self.geometry.lap_length() + self.checkpoints[(score % per_lap) as usize]
    }

    pub fn initial_state(&self) -> State {
        let opponents = self
            .spec
            .opponents
            .iter()
            .map(|o| OpponentState {
                progress: o.start,
                lane: o.lane_at(self.lap_position(o.start)),
            })
            .collect();
        State {
            progress: 0.0,
            lateral: self.spec.start_lane,
            heading: 0.0,
            speed: 0.0,
            score: 0,
            windows: 0,
            prev_action: Action::IDLE,
            collided: false,
            terminal: false,
            opponents,
        }
    }

    pub fn reset(&self) -> Snapshot {
        self.initial_state().to_snapshot()
    }

    pub fn tick(&self, snapshot: &Snapshot, action: Action) -> Result<Tick> {
        let mut state = snapshot.state();
        let out = self.step(&mut state, action)?;
        Ok(Tick {
            snapshot: state.to_snapshot(),
            features: out.features,
            score_delta: out.score_delta,
            terminal: out.terminal,
        })
    }

    /// Advance `state` in place by one window.
    pub fn step(&self, state: &mut State, action: Action) -> Result<StepOutcome> {
        if state.terminal {
            return Err(Error::contract("tick after terminal state"));
        }
        let phys = &self.spec.physics;
        let lap = self.geometry.lap_length();
        let gas = action.gas() as f64;
        let steer = action.steer() as f64;
        let score_before = state.score;
        let mut sums = [0.0; FEATURES];
        let mut collided = false;
        let [x0, y0, x1, y1] = self.geometry.bounds();

        for _ in 0..phys.substeps {
            let (seg_idx, _) = self.geometry.locate(self.lap_position(state.progress));
            let seg = &self.spec.segments[seg_idx];
            let cap = if state.lateral.abs() > seg.half_width {
                phys.v_off
            } else {
                phys.v_max
            };

            state.speed += (phys.a_gas * gas - phys.drag * state.speed) * phys.dt;
            state.speed = state.speed.clamp(-phys.v_reverse, cap);
            state.heading += phys.omega * steer * (state.speed / phys.v_max) * phys.dt;

            let k = self.geometry.curvature(seg_idx);
            let (sin, cos) = state.heading.sin_cos();
            let ds = state.speed * cos * phys.dt / (1.0 - k * state.lateral);
            state.lateral += state.speed * sin * phys.dt;
            state.heading = wrap_angle(state.heading - k * ds);
            state.progress += ds;

            let barrier = seg.half_width + phys.offroad_width;
            if state.lateral.abs() > barrier {
                // scrape along the wall
                state.lateral = barrier.copysign(state.lateral);
                if state.heading.signum() == state.lateral.signum() {
                    state.heading = 0.0;
                }
                state.speed *= 0.5;
            }

            let (seg_idx, _) = self.geometry.locate(self.lap_position(state.progress));
            if self.spec.segments[seg_idx].shape == SegmentShape::Loop
                && state.speed < phys.loop_min_speed
            {
                let lap_base = (state.progress / lap).floor() * lap;
                state.progress = lap_base + self.geometry.segment_start(seg_idx) - phys.loop_runup;
                state.speed = 0.0;
                state.heading = 0.0;
            }

            for (o, spec) in state.opponents.iter_mut().zip(&self.spec.opponents) {
                o.progress += spec.speed * phys.dt;
                o.lane = spec.lane_at(self.lap_position(o.progress));
            }

            let (nearest, near) = self.opponent_relation(state);
            if nearest < phys.collision_radius {
                state.speed = 0.0;
                collided = true;
            }

            while state.score < self.max_score
                && state.progress >= self.checkpoint_position(state.score)
            {
                state.score += 1;
            }

            let lap_pos = self.lap_position(state.progress);
            let (seg_idx, offset) = self.geometry.locate(lap_pos);
            let seg = &self.spec.segments[seg_idx];
            let pose = self.geometry.world(lap_pos, state.lateral);
            let (hs, hc) = (pose.heading + state.heading).sin_cos();
            let to_checkpoint = if state.score < self.max_score {
                ((self.checkpoint_position(state.score) - state.progress) / lap).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let sample = [
                ((pose.x - x0) / (x1 - x0)).clamp(0.0, 1.0),
                ((pose.y - y0) / (y1 - y0)).clamp(0.0, 1.0),
                (hs + 1.0) * 0.5,
                (hc + 1.0) * 0.5,
                (state.speed.abs() / phys.v_max).min(1.0),
                (state.lateral.abs() > seg.half_width) as u8 as f64,
                (offset / seg.length).clamp(0.0, 1.0),
                lap_pos / lap,
                state.score as f64 / self.max_score as f64,
                to_checkpoint,
                (nearest / OPPONENT_DISTANCE_SCALE).min(1.0),
                near as u8 as f64,
                (gas + 1.0) * 0.5,
                (steer + 1.0) * 0.5,
                0.0,
                0.0,
            ];
            for (acc, v) in sums.iter_mut().zip(sample) {
                *acc += v;
            }
        }

        state.windows += 1;
        state.prev_action = action;
        state.collided = collided;
        state.terminal = state.windows >= phys.horizon || state.score >= self.max_score;

        let n = phys.substeps as f64;
        let mut features = sums.map(|s| s / n);
        features[14] = collided as u8 as f64;
        features[15] = (state.windows as f64 / phys.horizon as f64).min(1.0);
        Ok(StepOutcome {
            features: FeatureVector(features),
            score_delta: state.score - score_before,
            terminal: state.terminal,
        })
    }

    /// Distance to the closest opponent in track coordinates and whether any
    /// opponent shares the player's sub-segment.
    fn opponent_relation(&self, state: &State) -> (f64, bool) {
        let lap = self.geometry.lap_length();
        let (seg, side) = self.sub_segment(state.progress, state.lateral);
        let mut nearest = f64::INFINITY;
        let mut near = false;
        for o in &state.opponents {
            let mut ds = (o.progress - state.progress).rem_euclid(lap);
            if ds > lap * 0.5 {
                ds -= lap;
            }
            let dd = o.lane - state.lateral;
            nearest = nearest.min((ds * ds + dd * dd).sqrt());
            near |= self.sub_segment(o.progress, o.lane) == (seg, side);
        }
        (nearest, near)
    }

    fn sub_segment(&self, progress: f64, lateral: f64) -> (usize, Side) {
        let (idx, _) = self.geometry.locate(self.lap_position(progress));
        (idx, Side::classify(lateral, self.spec.segments[idx].half_width))
    }

    pub fn cell_key(&self, snapshot: &Snapshot) -> CellKey {
        self.cell_key_of(&snapshot.state())
    }

    pub fn cell_key_of(&self, state: &State) -> CellKey {
        let phys = &self.spec.physics;
        let (segment, side) = self.sub_segment(state.progress, state.lateral);
        let band = (state.heading.abs() / 30f64.to_radians()).floor() as u8;
        let lap = 1.0 + (state.progress.max(0.0) / self.geometry.lap_length()).floor();
        CellKey {
            speed: if state.speed >= phys.v_max * 0.5 {
                SpeedBucket::Fast
            } else {
                SpeedBucket::Slow
            },
            rotation: band.min(ROTATION_BANDS - 1),
            segment: segment as u8,
            side,
            lap: lap.min(LAPS as f64) as u8,
            near: self.opponent_relation(state).1,
        }
    }

    /// Replay `actions` from reset, returning the final state and the
    /// per-window outcomes.
    pub fn replay(&self, actions: &[Action]) -> Result<(State, Vec<StepOutcome>)> {
        let mut state = self.initial_state();
        let mut outcomes = Vec::with_capacity(actions.len());
        for &a in actions {
            outcomes.push(self.step(&mut state, a)?);
        }
        Ok((state, outcomes))
    }
}
