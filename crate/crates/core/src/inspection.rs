//! Inspection geometry: the chief's surface points, illumination and
//! visibility, and the direction to the nearest cluster of points still to be
//! inspected.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{sun_vector, SunState};

pub const NUM_POINTS: usize = 99;

/// Direction reported when every point has been inspected.
pub const ALL_INSPECTED_DIRECTION: [f64; 3] = [1.0, 0.0, 0.0];

pub const DEFAULT_CLUSTERS: usize = 3;
pub const KMEANS_MAX_ITER: usize = 50;
const KMEANS_SEED: u64 = 0x5eed;

/// Unit directions of the chief's inspection points and which have been seen.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSphere {
    points: [Vector3<f64>; NUM_POINTS],
    inspected: [bool; NUM_POINTS],
}

impl Default for PointSphere {
    fn default() -> Self {
        Self::fibonacci()
    }
}

impl PointSphere {
    /// 99 points on a Fibonacci (golden-angle) lattice, none inspected.
    pub fn fibonacci() -> Self {
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        let mut points = [Vector3::zeros(); NUM_POINTS];
        for (i, p) in points.iter_mut().enumerate() {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / NUM_POINTS as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            *p = Vector3::new(r * c, r * s, z).normalize();
        }
        Self {
            points,
            inspected: [false; NUM_POINTS],
        }
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn is_inspected(&self, index: usize) -> bool {
        self.inspected[index]
    }

    pub fn inspected_count(&self) -> usize {
        self.inspected.iter().filter(|&&b| b).count()
    }

    pub fn with_inspected(mut self, index: usize) -> Self {
        self.inspected[index] = true;
        self
    }

    pub fn uninspected(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.points
            .iter()
            .zip(&self.inspected)
            .filter(|(_, &seen)| !seen)
            .map(|(p, _)| p)
    }
}

/// A surface point is visible when it is lit by the Sun and faces the deputy,
/// both with strict inequalities.
pub fn point_visible(point: &Vector3<f64>, deputy_position: &Vector3<f64>, sun: &SunState) -> bool {
    let lit = point.dot(&sun_vector(sun)) > 0.0;
    let range = deputy_position.norm();
    lit && range > 0.0 && point.dot(&(deputy_position / range)) > 0.0
}

/// Mark every visible point as inspected. Returns the new sphere and how many
/// points were newly inspected.
pub fn update_inspection(
    sphere: &PointSphere,
    deputy_position: &Vector3<f64>,
    sun: &SunState,
) -> (PointSphere, usize) {
    let mut next = sphere.clone();
    let mut added = 0;
    for i in 0..NUM_POINTS {
        if !next.inspected[i] && point_visible(&next.points[i], deputy_position, sun) {
            next.inspected[i] = true;
            added += 1;
        }
    }
    (next, added)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InspectionSummary {
    pub n_points: usize,
    /// Unit vector toward the nearest uninspected cluster.
    pub r_ups: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<Vector3<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to assigned centroids after each iteration.
    pub objective_history: Vec<f64>,
}

fn nearest_centroid(p: &Vector3<f64>, centroids: &[Vector3<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.iter().enumerate() {
        let d = (p - c).norm_squared();
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Lloyd's algorithm with farthest-point seeding from a seeded first pick.
///
/// `k` is reduced to the number of points when there are fewer points.
pub fn kmeans(points: &[Vector3<f64>], k: usize, max_iter: usize, seed: u64) -> KMeans {
    assert!(k >= 1, "k-means needs at least one cluster");
    if points.is_empty() {
        return KMeans {
            centroids: Vec::new(),
            assignments: Vec::new(),
            objective_history: Vec::new(),
        };
    }
    let k = k.min(points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    while centroids.len() < k {
        let far = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, nearest_centroid(p, &centroids).1))
            .fold(
                (0, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        centroids.push(points[far.0]);
    }

    let mut assignments = vec![0; points.len()];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest_centroid(p, &centroids);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![Vector3::zeros(); k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            sums[a] += p;
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c] / counts[c] as f64;
            }
        }
        let objective = points
            .iter()
            .zip(&assignments)
            .map(|(p, &a)| (p - centroids[a]).norm_squared())
            .sum();
        history.push(objective);
        if !changed && history.len() > 1 {
            break;
        }
    }
    KMeans {
        centroids,
        assignments,
        objective_history: history,
    }
}

/// Cluster the uninspected points and report the unit direction of the
/// cluster centroid closest in angle to the deputy's line of sight.
pub fn nearest_uninspected_cluster(
    sphere: &PointSphere,
    deputy_position: &Vector3<f64>,
    k: usize,
) -> InspectionSummary {
    let n_points = sphere.inspected_count();
    let remaining: Vec<Vector3<f64>> = sphere.uninspected().copied().collect();
    if remaining.is_empty() {
        return InspectionSummary {
            n_points,
            r_ups: Vector3::from(ALL_INSPECTED_DIRECTION),
        };
    }
    let clusters = kmeans(&remaining, k, KMEANS_MAX_ITER, KMEANS_SEED);
    let range = deputy_position.norm();
    let los = if range > 0.0 {
        deputy_position / range
    } else {
        Vector3::zeros()
    };

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for (c, centroid) in clusters.centroids.iter().enumerate() {
        let norm = centroid.norm();
        let dir = if norm > 1e-12 {
            centroid / norm
        } else {
            // antipodal cluster averaging to zero: use its first member
            let first = clusters
                .assignments
                .iter()
                .position(|&a| a == c)
                .unwrap_or(0);
            remaining[first]
        };
        let score = dir.dot(&los);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, dir));
        }
    }
    InspectionSummary {
        n_points,
        r_ups: best
            .map(|(_, d)| d)
            .unwrap_or_else(|| Vector3::from(ALL_INSPECTED_DIRECTION)),
    }
}
