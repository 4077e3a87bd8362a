//! Track description, physics constants and the centreline geometry derived
//! from them.
//!
//! A track is a closed chain of segments. The car lives in curvilinear
//! coordinates (progress along the centreline, signed lateral offset with
//! left positive), so most of the geometry here is only needed to produce
//! world-space positions for the feature vector and to validate closure.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRACK_FORMAT: u32 = 1;
pub const CHECKPOINTS_PER_LAP: usize = 8;
pub const LAPS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentShape {
    Straight,
    CurveLeft,
    CurveRight,
    /// A vertical loop: straight in plan view, but the car falls back to the
    /// run-up if it drops below the loop's minimum speed while inside.
    Loop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub shape: SegmentShape,
    /// Centreline arc length in world units.
    pub length: f64,
    /// Turning radius, curves only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub half_width: f64,
    #[serde(default)]
    pub checkpoint: bool,
}

impl Segment {
    /// Signed centreline curvature, positive for left-hand curves.
    pub fn curvature(&self) -> f64 {
        match (self.shape, self.radius) {
            (SegmentShape::CurveLeft, Some(r)) => 1.0 / r,
            (SegmentShape::CurveRight, Some(r)) => -1.0 / r,
            _ => 0.0,
        }
    }

    pub fn is_curve_or_loop(&self) -> bool {
        !matches!(self.shape, SegmentShape::Straight)
    }
}

/// A point on an opponent's racing line: from `at` (progress within the lap)
/// the lateral target interpolates linearly towards the next waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub at: f64,
    pub lane: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpponentSpec {
    /// Starting progress along the track.
    pub start: f64,
    /// Constant forward speed in world units per second.
    pub speed: f64,
    pub waypoints: Vec<Waypoint>,
}

impl OpponentSpec {
    /// Lateral offset at a lap position. Piecewise linear between waypoints,
    /// held constant before the first and after the last.
    pub fn lane_at(&self, lap_position: f64) -> f64 {
        let wps = &self.waypoints;
        let idx = wps.partition_point(|w| w.at <= lap_position);
        if idx == 0 {
            return wps[0].lane;
        }
        if idx == wps.len() {
            return wps[idx - 1].lane;
        }
        let (a, b) = (wps[idx - 1], wps[idx]);
        a.lane + (b.lane - a.lane) * ((lap_position - a.at) / (b.at - a.at))
    }
}

/// Physics constants of the kinematic point model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    /// Acceleration per unit of gas input (world units / s^2).
    pub a_gas: f64,
    /// Linear drag coefficient (1 / s).
    pub drag: f64,
    /// Speed cap on the road.
    pub v_max: f64,
    /// Speed cap off the road.
    pub v_off: f64,
    /// Largest reverse speed.
    pub v_reverse: f64,
    /// Turn rate at full steer and `v_max` (rad / s).
    pub omega: f64,
    pub substeps: u32,
    /// Substep length in seconds; `substeps * dt` is one window.
    pub dt: f64,
    /// Width of the grass band between the road edge and the barrier.
    pub offroad_width: f64,
    pub loop_min_speed: f64,
    /// Distance before the loop entry where a stalled car is put back.
    pub loop_runup: f64,
    pub collision_radius: f64,
    /// Episode horizon in windows.
    pub horizon: u32,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            a_gas: 25.0,
            drag: 0.3,
            v_max: 40.0,
            v_off: 8.0,
            v_reverse: 10.0,
            omega: 2.0,
            substeps: 10,
            dt: 0.025,
            offroad_width: 6.0,
            loop_min_speed: 20.0,
            loop_runup: 30.0,
            collision_radius: 2.5,
            horizon: 360,
        }
    }
}

/// On-disk track file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackSpec {
    pub format: u32,
    #[serde(default)]
    pub name: String,
    /// Lateral offset of the player's start position.
    pub start_lane: f64,
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub opponents: Vec<OpponentSpec>,
    #[serde(default)]
    pub physics: Physics,
}

impl TrackSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: TrackSpec = serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn lap_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != TRACK_FORMAT {
            return Err(Error::config(format!(
                "unsupported track format {} (expected {TRACK_FORMAT})",
                self.format
            )));
        }
        if self.segments.is_empty() {
            return Err(Error::config("track has no segments"));
        }
        let p = &self.physics;
        let positive = [
            ("a_gas", p.a_gas),
            ("v_max", p.v_max),
            ("v_off", p.v_off),
            ("omega", p.omega),
            ("dt", p.dt),
            ("offroad_width", p.offroad_width),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("physics.{name} must be positive")));
            }
        }
        if p.v_off >= p.v_max {
            return Err(Error::config("physics.v_off must be below v_max"));
        }
        if p.drag < 0.0 || p.v_reverse < 0.0 || p.substeps == 0 || p.horizon == 0 {
            return Err(Error::config("physics block has out-of-range values"));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.length > 0.0 && seg.half_width > 0.0) {
                return Err(Error::config(format!("segment {i}: non-positive length or width")));
            }
            let curved = matches!(seg.shape, SegmentShape::CurveLeft | SegmentShape::CurveRight);
            match (curved, seg.radius) {
                (true, Some(r)) if r > 0.0 => {
                    if (seg.half_width + p.offroad_width) / r >= 0.9 {
                        return Err(Error::config(format!(
                            "segment {i}: radius too tight for its width"
                        )));
                    }
                }
                (true, _) => return Err(Error::config(format!("segment {i}: curve needs a radius"))),
                (false, Some(_)) => {
                    return Err(Error::config(format!("segment {i}: only curves take a radius")))
                }
                (false, None) => {}
            }
        }
        let checkpoints = self.segments.iter().filter(|s| s.checkpoint).count();
        if checkpoints != CHECKPOINTS_PER_LAP {
            return Err(Error::config(format!(
                "track needs exactly {CHECKPOINTS_PER_LAP} checkpoints per lap, found {checkpoints}"
            )));
        }
        if !self.segments.last().is_some_and(|s| s.checkpoint) {
            return Err(Error::config("the final segment must carry the finish checkpoint"));
        }

        let geometry = Geometry::new(self);
        let end = geometry.end_pose;
        let lap = self.lap_length();
        let gap = (end.x.powi(2) + end.y.powi(2)).sqrt();
        let turn = end.heading;
        if gap > 1e-6 * lap || ((turn.abs() - TAU).abs() > 1e-9) {
            return Err(Error::config(format!(
                "segments do not form a closed loop (gap {gap:.3e}, net turn {:.6} rad)",
                turn
            )));
        }

        for (i, opp) in self.opponents.iter().enumerate() {
            if opp.waypoints.is_empty() || !opp.speed.is_finite() || opp.speed < 0.0 {
                return Err(Error::config(format!("opponent {i}: bad speed or no waypoints")));
            }
            if opp.waypoints.windows(2).any(|w| w[0].at >= w[1].at)
                || opp.waypoints.iter().any(|w| w.at < 0.0 || w.at >= lap)
            {
                return Err(Error::config(format!(
                    "opponent {i}: waypoints must be sorted within [0, lap length)"
                )));
            }
        }
        Ok(())
    }

    /// The built-in 19-segment track with one loop.
    pub fn default_track() -> Self {
        use SegmentShape::*;
        let seg = |shape, length: f64, radius: Option<f64>, checkpoint| Segment {
            shape,
            length,
            radius,
            half_width: 7.0,
            checkpoint,
        };
        let arc = |deg: f64, r: f64| deg.to_radians() * r;
        // two straights are sized so the loop closes exactly
        let segments = vec![
            seg(Straight, 150.0, None, false),
            seg(CurveLeft, arc(90.0, 40.0), Some(40.0), true),
            seg(Straight, 44.745166004060955, None, false),
            seg(CurveRight, arc(45.0, 32.0), Some(32.0), true),
            seg(CurveLeft, arc(45.0, 32.0), Some(32.0), false),
            seg(Straight, 40.0, None, false),
            seg(Loop, 40.0, None, true),
            seg(Straight, 40.0, None, false),
            seg(CurveLeft, arc(90.0, 32.0), Some(32.0), true),
            seg(Straight, 60.60157246461191, None, false),
            seg(CurveLeft, arc(60.0, 32.0), Some(32.0), true),
            seg(CurveRight, arc(60.0, 32.0), Some(32.0), false),
            seg(Straight, 50.0, None, false),
            seg(CurveLeft, arc(90.0, 40.0), Some(40.0), true),
            seg(Straight, 70.0, None, false),
            seg(CurveRight, arc(30.0, 40.0), Some(40.0), true),
            seg(CurveLeft, arc(30.0, 40.0), Some(40.0), false),
            seg(Straight, 60.0, None, false),
            seg(CurveLeft, arc(90.0, 40.0), Some(40.0), true),
        ];
        let wp = |at: f64, lane: f64| Waypoint { at, lane };
        let opponents = vec![
            OpponentSpec {
                start: 12.0,
                speed: 30.0,
                waypoints: vec![wp(0.0, 3.5), wp(400.0, 3.5), wp(450.0, -3.5), wp(700.0, -3.5), wp(750.0, 3.5)],
            },
            OpponentSpec {
                start: 24.0,
                speed: 33.0,
                waypoints: vec![wp(0.0, 3.5), wp(200.0, 3.5), wp(250.0, -3.0), wp(600.0, -3.0), wp(650.0, 3.5)],
            },
            OpponentSpec {
                start: 36.0,
                speed: 36.0,
                waypoints: vec![wp(0.0, 4.5)],
            },
        ];
        TrackSpec {
            format: TRACK_FORMAT,
            name: "micro-rally".to_string(),
            start_lane: -3.5,
            segments,
            opponents,
            physics: Physics::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Precomputed per-segment start poses and cumulative offsets.
#[derive(Debug, Clone)]
pub struct Geometry {
    starts: Vec<f64>,
    poses: Vec<Pose>,
    curvature: Vec<f64>,
    lap_length: f64,
    end_pose: Pose,
    bounds: [f64; 4],
}

impl Geometry {
    pub fn new(spec: &TrackSpec) -> Self {
        let mut starts = Vec::with_capacity(spec.segments.len());
        let mut poses = Vec::with_capacity(spec.segments.len());
        let mut curvature = Vec::with_capacity(spec.segments.len());
        let mut pose = Pose { x: 0.0, y: 0.0, heading: 0.0 };
        let mut s = 0.0;
        for seg in &spec.segments {
            starts.push(s);
            poses.push(pose);
            let k = seg.curvature();
            curvature.push(k);
            pose = advance(pose, k, seg.length);
            s += seg.length;
        }
        let margin = spec
            .segments
            .iter()
            .map(|s| s.half_width)
            .fold(0.0, f64::max)
            + spec.physics.offroad_width;
        let mut geometry = Geometry {
            starts,
            poses,
            curvature,
            lap_length: s,
            end_pose: pose,
            bounds: [0.0; 4],
        };
        // sample the centreline densely for the bounding box
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        let samples = 2000;
        for i in 0..samples {
            let p = geometry.centreline(s * i as f64 / samples as f64);
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        geometry.bounds = [x0 - margin, y0 - margin, x1 + margin, y1 + margin];
        geometry
    }

    pub fn lap_length(&self) -> f64 {
        self.lap_length
    }

    /// Bounding box `[x_min, y_min, x_max, y_max]` including the grass band.
    pub fn bounds(&self) -> [f64; 4] {
        self.bounds
    }

    pub fn segment_count(&self) -> usize {
        self.starts.len()
    }

    pub fn segment_start(&self, index: usize) -> f64 {
        self.starts[index]
    }

    /// Segment index and offset into it for a lap position in `[0, lap)`.
    pub fn locate(&self, lap_position: f64) -> (usize, f64) {
        let idx = self.starts.partition_point(|&s| s <= lap_position).saturating_sub(1);
        (idx, lap_position - self.starts[idx])
    }

    pub fn curvature(&self, index: usize) -> f64 {
        self.curvature[index]
    }

    pub fn centreline(&self, lap_position: f64) -> Pose {
        let (idx, offset) = self.locate(lap_position);
        advance(self.poses[idx], self.curvature[idx], offset)
    }

    /// World-space pose for a point at `lateral` from the centreline.
    pub fn world(&self, lap_position: f64, lateral: f64) -> Pose {
        let c = self.centreline(lap_position);
        let (sin, cos) = c.heading.sin_cos();
        Pose {
            x: c.x - lateral * sin,
            y: c.y + lateral * cos,
            heading: c.heading,
        }
    }
}

fn advance(pose: Pose, curvature: f64, length: f64) -> Pose {
    if curvature == 0.0 {
        let (sin, cos) = pose.heading.sin_cos();
        return Pose {
            x: pose.x + length * cos,
            y: pose.y + length * sin,
            heading: pose.heading,
        };
    }
    let r = 1.0 / curvature;
    let h1 = pose.heading + curvature * length;
    Pose {
        x: pose.x + r * (h1.sin() - pose.heading.sin()),
        y: pose.y - r * (h1.cos() - pose.heading.cos()),
        heading: h1,
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}
