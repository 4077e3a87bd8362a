//! Exact k-nearest-neighbour arousal surrogate over demonstration windows.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::demos::DemoSession;
use crate::error::{Error, Result};

/// Guard added to neighbour distances before inversion.
pub const DEFAULT_EPSILON: f64 = 1e-6;

const LEAF_SIZE: usize = 12;

/// How neighbour arousal values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// `w = 1 / (d + eps)`: closer neighbours count more.
    #[default]
    InverseDistance,
    /// `sum(d * a) / sum(d)`, falling back to the plain mean when every `d` is zero.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArousalEstimate {
    /// Predicted arousal.
    pub h_a: f64,
    /// Population standard deviation of the neighbours' arousal.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Position in session-then-window order.
    pub index: usize,
    pub distance: f64,
}

/// Where a dataset row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origin {
    pub session: usize,
    pub window: usize,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Distance-weighted k-NN regressor. Ties at equal distance resolve to the
/// earlier (session, window) row.
#[derive(Debug, Clone)]
pub struct KnnSurrogate {
    dim: usize,
    k: usize,
    epsilon: f64,
    weighting: Weighting,
    points: Vec<f64>,
    arousal: Vec<f64>,
    origin: Vec<Origin>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KnnSurrogate {
    /// Index every window of `sessions`. `k` larger than the dataset is
    /// clamped with a warning.
    pub fn new(sessions: &[DemoSession], k: usize, weighting: Weighting) -> Result<Self> {
        let dim = sessions
            .iter()
            .flat_map(|s| s.windows.first())
            .map(|w| w.features.len())
            .next()
            .ok_or_else(|| Error::InsufficientData("k-NN dataset is empty".into()))?;
        let mut points = Vec::new();
        let mut arousal = Vec::new();
        let mut origin = Vec::new();
        for (si, s) in sessions.iter().enumerate() {
            for (wi, w) in s.windows.iter().enumerate() {
                if w.features.len() != dim {
                    return Err(Error::contract(format!(
                        "session {} window {wi}: {} features, expected {dim}",
                        s.id,
                        w.features.len()
                    )));
                }
                points.extend_from_slice(&w.features);
                arousal.push(w.arousal);
                origin.push(Origin { session: si, window: wi });
            }
        }
        Self::from_rows(dim, points, arousal, origin, k, weighting)
    }

    /// Build from a flat row-major matrix.
    pub fn from_points(dim: usize, points: Vec<f64>, arousal: Vec<f64>, k: usize) -> Result<Self> {
        let origin = (0..arousal.len()).map(|i| Origin { session: 0, window: i }).collect();
        Self::from_rows(dim, points, arousal, origin, k, Weighting::default())
    }

    fn from_rows(
        dim: usize,
        points: Vec<f64>,
        arousal: Vec<f64>,
        origin: Vec<Origin>,
        k: usize,
        weighting: Weighting,
    ) -> Result<Self> {
        let n = arousal.len();
        if dim == 0 || n == 0 {
            return Err(Error::InsufficientData("k-NN dataset is empty".into()));
        }
        if points.len() != n * dim {
            return Err(Error::contract("point matrix does not match arousal count"));
        }
        if points.iter().chain(&arousal).any(|v| !v.is_finite()) {
            return Err(Error::contract("k-NN dataset contains non-finite values"));
        }
        if k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        let k = if k > n {
            log::warn!("k = {k} exceeds the {n} dataset rows; using all of them");
            n
        } else {
            k
        };
        let mut knn = KnnSurrogate {
            dim,
            k,
            epsilon: DEFAULT_EPSILON,
            weighting,
            points,
            arousal,
            origin,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        knn.build(0, n);
        Ok(knn)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::config("epsilon must be positive"));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.arousal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arousal.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index * self.dim..(index + 1) * self.dim]
    }

    pub fn arousal(&self, index: usize) -> f64 {
        self.arousal[index]
    }

    pub fn origin(&self, index: usize) -> Origin {
        self.origin[index]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = (0..self.dim)
            .map(|a| {
                let (lo, hi) = self.order[start..end].iter().fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), &i| {
                        let v = self.points[i * self.dim + a];
                        (lo.min(v), hi.max(v))
                    },
                );
                (hi - lo, a)
            })
            .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)))
            .map(|(_, a)| a)
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        let (dim, points) = (self.dim, &self.points);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * dim + axis]
                .total_cmp(&points[b * dim + axis])
                .then(a.cmp(&b))
        });
        let value = self.points[self.order[mid] * self.dim + axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// The k nearest rows, nearest first.
    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<Neighbor>> {
        self.check(query)?;
        let mut best = Vec::with_capacity(self.k + 1);
        self.search(0, query, &mut best, &mut vec![0.0; self.dim], 0.0);
        Ok(best
            .into_iter()
            .map(|(d2, index): (f64, usize)| Neighbor { index, distance: d2.sqrt() })
            .collect())
    }

    pub fn estimate(&self, query: &[f64]) -> Result<ArousalEstimate> {
        self.check(query)?;
        let mut best = Vec::with_capacity(self.k + 1);
        self.search(0, query, &mut best, &mut vec![0.0; self.dim], 0.0);
        Ok(self.combine(&best))
    }

    fn check(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.dim {
            return Err(Error::contract(format!(
                "query has {} features, expected {}",
                query.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn combine(&self, best: &[(f64, usize)]) -> ArousalEstimate {
        let n = best.len() as f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut mean = 0.0;
        for &(_, i) in best {
            let a = self.arousal[i];
            lo = lo.min(a);
            hi = hi.max(a);
            mean += a;
        }
        if lo == hi {
            return ArousalEstimate { h_a: lo, sigma: 0.0 };
        }
        mean /= n;
        let var = best.iter().map(|&(_, i)| (self.arousal[i] - mean).powi(2)).sum::<f64>() / n;

        let (mut num, mut den) = (0.0, 0.0);
        for &(d2, i) in best {
            let d = d2.sqrt();
            let w = match self.weighting {
                Weighting::InverseDistance => 1.0 / (d + self.epsilon),
                Weighting::Distance => d,
            };
            num += w * self.arousal[i];
            den += w;
        }
        let h_a = if den > 0.0 { num / den } else { mean };
        ArousalEstimate { h_a: h_a.clamp(lo, hi), sigma: var.sqrt() }
    }

    /// Depth-first search with incremental box distances: `off[a]` is the
    /// gap between the query and the node's region along axis `a`, and `rd`
    /// the sum of their squares.
    fn search(&self, node: usize, q: &[f64], best: &mut Vec<(f64, usize)>, off: &mut [f64], rd: f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let p = &self.points[i * self.dim..(i + 1) * self.dim];
                    let d2 = squared_distance(q, p);
                    self.insert(best, d2, i);
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best, off, rd);
                let old = off[axis];
                let gap = old.max(diff.abs());
                let far_rd = rd - old * old + gap * gap;
                if self.reachable(best, far_rd) {
                    off[axis] = gap;
                    self.search(far, q, best, off, far_rd);
                    off[axis] = old;
                }
            }
        }
    }

    /// Whether a region at squared distance `rd` can still hold a neighbour.
    /// Equal distances may still hold a lower index, so only a strict excess
    /// prunes; the slack absorbs rounding in the incremental sum.
    fn reachable(&self, best: &[(f64, usize)], rd: f64) -> bool {
        best.len() < self.k || rd <= best[best.len() - 1].0 * (1.0 + 1e-9) + 1e-300
    }

    fn insert(&self, best: &mut Vec<(f64, usize)>, d2: f64, i: usize) {
        let key = (d2, i);
        if best.len() == self.k && cmp_pair(&key, &best[self.k - 1]) != Ordering::Less {
            return;
        }
        let at = best.partition_point(|e| cmp_pair(e, &key) == Ordering::Less);
        best.insert(at, key);
        best.truncate(self.k);
    }
}

fn cmp_pair(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Squared Euclidean distance, summed in index order.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
