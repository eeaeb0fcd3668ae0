//! Standoff viewpoint rays, self-occlusion correction, and pose selection.
//!
//! Every coverage waypoint gets a nominal ray along the cluster's proxy
//! normal at standoff distance `r_s`. Rays whose waypoint→standoff segment
//! is blocked by the part (or rejected by the validity oracle) are corrected
//! by scanning a packed set of alternative directions on the standoff
//! sphere, nearest-first. Each surviving ray is expanded into discrete roll
//! candidates, and one pose per waypoint is picked by a layered-graph
//! shortest path under a configuration-space metric.
//!
//! Ray convention: public rays point *inward* — origin at the standoff
//! point, direction toward the waypoint, so the waypoint sits at parameter
//! `r_s` along the ray.

mod packing;

pub use packing::candidate_ray_set;

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{Point, Ray, TriangleMesh, Vec3};

#[derive(Debug, Error)]
pub enum ViewpointError {
    #[error("invalid candidate-ray parameters: {0}")]
    InvalidParams(String),
    #[error(
        "{requested} circles of separation {separation:.4} cannot fit in the cap \
         (estimated maximum {max_feasible})"
    )]
    InfeasiblePacking { requested: usize, separation: f64, max_feasible: usize },
    #[error("packing solver stopped at separation {achieved:.6e} (required {required:.6e})")]
    PackingDidNotConverge { achieved: f64, required: f64 },
    #[error("waypoint layer {0} has no pose candidates")]
    EmptyLayer(usize),
}

/// Parameters of the candidate-ray construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateRayParams {
    /// Standoff sphere radius (m).
    pub r_s: f64,
    /// Nozzle/circle radius (m).
    pub r_c: f64,
    /// Elevation-angle cap bound (rad), in (0, π/2].
    pub phi: f64,
    /// Candidate count; `None` derives it from the cap area.
    pub n_c: Option<usize>,
}

impl CandidateRayParams {
    /// Benchmark defaults: `r_s = 0.05 m`, `r_c = 5√2×10⁻³ m`, `phi = π/3`,
    /// automatic candidate count.
    pub fn recipe() -> Self {
        Self {
            r_s: 0.05,
            r_c: 5.0 * 2.0_f64.sqrt() * 1e-3,
            phi: std::f64::consts::FRAC_PI_3,
            n_c: None,
        }
    }

    /// Minimal center separation of two adjacent candidate circles:
    /// `2 r_c cos(arctan(r_c / r_s))`.
    pub fn separation(&self) -> f64 {
        2.0 * self.r_c * (self.r_c / self.r_s).atan().cos()
    }

    /// Area of the spherical cap of elevation `phi`.
    pub fn cap_area(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.r_s * self.r_s * (1.0 - self.phi.cos())
    }

    /// Candidate count: explicit, or half the disk-packing upper bound of
    /// the cap (at least 1).
    pub fn candidate_count(&self) -> usize {
        match self.n_c {
            Some(n) => n,
            None => {
                let disk = std::f64::consts::PI * (self.separation() / 2.0).powi(2);
                ((0.5 * self.cap_area() / disk).floor() as usize).max(1)
            }
        }
    }

    pub fn validate(&self) -> Result<(), ViewpointError> {
        let fail = |m: String| Err(ViewpointError::InvalidParams(m));
        if !(self.r_s.is_finite() && self.r_s > 0.0) {
            return fail(format!("r_s must be > 0, got {}", self.r_s));
        }
        if !(self.r_c.is_finite() && self.r_c > 0.0) {
            return fail(format!("r_c must be > 0, got {}", self.r_c));
        }
        if !(self.phi > 0.0 && self.phi <= std::f64::consts::FRAC_PI_2) {
            return fail(format!("phi must be in (0, π/2], got {}", self.phi));
        }
        if self.n_c == Some(0) {
            return fail("candidate count must be positive".into());
        }
        Ok(())
    }
}

/// Packed candidate directions in the local frame: the sphere center is the
/// waypoint, the pole (+z) is the nominal approach direction, and
/// `centers[0]` sits exactly at the pole.
#[derive(Debug, Clone)]
pub struct CandidateRaySet {
    /// Sorted ascending by distance to `centers[0]`.
    pub centers: Vec<Point>,
    pub params: CandidateRayParams,
}

impl CandidateRaySet {
    /// Sum of squared lateral offsets — the packing objective.
    pub fn objective(&self) -> f64 {
        self.centers.iter().skip(1).map(|c| c.x * c.x + c.y * c.y).sum()
    }

    /// Checks every structural invariant within `tol` (1e-6 for the
    /// standard contract).
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        let p = &self.params;
        let l = p.separation();
        let first = self.centers.first().ok_or("empty candidate set")?;
        if (first - Point::new(0.0, 0.0, p.r_s)).norm() > tol {
            return Err(format!("first center {first:?} is not the pole"));
        }
        let cap_z = p.r_s * p.phi.cos();
        for (i, c) in self.centers.iter().enumerate() {
            if (c.coords.norm() - p.r_s).abs() > tol {
                return Err(format!("center {i} off the sphere by {}", (c.coords.norm() - p.r_s).abs()));
            }
            if c.z < cap_z - tol {
                return Err(format!("center {i} outside the cap: z = {}", c.z));
            }
        }
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                let d = (self.centers[j] - self.centers[i]).norm();
                if d < l - tol {
                    return Err(format!("centers {i},{j} separated by {d} < {l}"));
                }
            }
        }
        let mut prev = 0.0;
        for (i, c) in self.centers.iter().enumerate() {
            let d = (c - first).norm();
            if d + tol < prev {
                return Err(format!("center {i} breaks the ascending sort"));
            }
            prev = prev.max(d);
        }
        Ok(())
    }
}

/// Nominal viewpoint ray of a waypoint: origin at
/// `generator + r_s · proxyNormal`, pointing back at the generator.
pub fn make_viewpoint(generator: Point, proxy_normal: Vec3, r_s: f64) -> Ray {
    Ray { origin: generator + r_s * proxy_normal, direction: -proxy_normal }
}

/// Rigidly places the local candidate centers around `ray`'s waypoint: the
/// local pole is rotated onto the outward direction, the local origin onto
/// the waypoint. The transformed first center lands at the ray origin.
pub fn align_candidates(ray: &Ray, set: &CandidateRaySet) -> Vec<Point> {
    let waypoint = ray.origin + set.params.r_s * ray.direction;
    let outward = -ray.direction;
    let phi_y = outward.z.clamp(-1.0, 1.0).acos();
    let phi_z = outward.y.atan2(outward.x);
    let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), phi_z)
        * nalgebra::Rotation3::from_axis_angle(&Vec3::y_axis(), phi_y);
    set.centers.iter().map(|c| waypoint + rot * c.coords).collect()
}

/// A pose candidate at a waypoint: an inward standoff ray plus a roll angle
/// about it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCandidate {
    pub ray: Ray,
    pub roll_angle: f64,
    pub waypoint_index: u32,
}

/// Pluggable stand-in for robot reachability and collision checking.
///
/// `ray` is the inward standoff ray of a pose; implementations must be safe
/// for concurrent calls.
pub trait ValidityOracle: Sync {
    fn is_valid(&self, ray: &Ray, theta_r: f64) -> bool;
}

/// Accepts every pose. Useful for tests and unconstrained planning.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptAll;

impl ValidityOracle for AcceptAll {
    fn is_valid(&self, _ray: &Ray, _theta_r: f64) -> bool {
        true
    }
}

/// Default oracle: the outward direction must stay within `theta_r` of the
/// world up-axis, and the waypoint→standoff segment must clear both the part
/// mesh and every registered environment mesh.
pub struct DefaultValidityOracle<'a> {
    part: &'a TriangleMesh,
    env: &'a [TriangleMesh],
    r_s: f64,
    /// Segment-origin offset along the outward direction; defaults to
    /// `1e-6 ×` the part's bounding-box diagonal.
    eps: f64,
    up: Vec3,
}

impl<'a> DefaultValidityOracle<'a> {
    pub fn new(part: &'a TriangleMesh, env: &'a [TriangleMesh], r_s: f64) -> Self {
        Self { part, env, r_s, eps: 1e-6 * part.bbox_diagonal(), up: Vec3::z() }
    }

    pub fn with_up(mut self, up: Vec3) -> Self {
        self.up = up.normalize();
        self
    }
}

impl ValidityOracle for DefaultValidityOracle<'_> {
    fn is_valid(&self, ray: &Ray, theta_r: f64) -> bool {
        let outward = -ray.direction;
        let elevation = outward.dot(&self.up).clamp(-1.0, 1.0).acos();
        if elevation > theta_r {
            return false;
        }
        let waypoint = ray.origin + self.r_s * ray.direction;
        if segment_blocked(self.part, waypoint, outward, self.r_s, None, self.eps) {
            return false;
        }
        self.env
            .iter()
            .all(|m| !segment_blocked(m, waypoint, outward, self.r_s, None, self.eps))
    }
}

/// True when the open segment from the waypoint (offset by `eps` along
/// `outward`) to the standoff point at distance `r_s` hits `mesh`.
pub fn segment_blocked(
    mesh: &TriangleMesh,
    waypoint: Point,
    outward: Vec3,
    r_s: f64,
    ignore_face: Option<u32>,
    eps: f64,
) -> bool {
    let probe = Ray { origin: waypoint + eps * outward, direction: outward };
    let ignore = ignore_face.map(|f| [f]);
    mesh.ray_intersect(&probe, ignore.as_ref().map(|s| s.as_slice()))
        .is_some_and(|hit| hit.distance < r_s - eps)
}

/// Scans the aligned candidates nearest-first and returns the first inward
/// ray whose waypoint→center segment clears the part mesh (ignoring the
/// waypoint's own face) and which the oracle accepts. `None` marks the
/// waypoint unrecoverable.
pub fn get_free_ray(
    original: &Ray,
    waypoint_face: u32,
    set: &CandidateRaySet,
    mesh: &TriangleMesh,
    oracle: &dyn ValidityOracle,
    theta_r: f64,
) -> Option<Ray> {
    let r_s = set.params.r_s;
    let waypoint = original.origin + r_s * original.direction;
    let eps = 1e-6 * mesh.bbox_diagonal();
    for center in align_candidates(original, set) {
        let outward = (center - waypoint).normalize();
        if segment_blocked(mesh, waypoint, outward, r_s, Some(waypoint_face), eps) {
            continue;
        }
        let candidate = Ray { origin: center, direction: -outward };
        if oracle.is_valid(&candidate, theta_r) {
            return Some(candidate);
        }
    }
    None
}

/// What happened to one waypoint during planning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaypointStatus {
    Accepted,
    Corrected,
    Unrecoverable,
}

/// Planning result for one waypoint.
#[derive(Debug, Clone)]
pub struct WaypointOutcome {
    pub status: WaypointStatus,
    /// The ray actually used; `None` for unrecoverable waypoints.
    pub final_ray: Option<Ray>,
    /// `roll_steps` pose candidates on the final ray (empty if dropped).
    pub candidates: Vec<PoseCandidate>,
}

/// Aggregate counts over the planned waypoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PlanSummary {
    pub accepted: usize,
    pub corrected: usize,
    pub unrecoverable: usize,
}

pub fn summarize(outcomes: &[WaypointOutcome]) -> PlanSummary {
    let mut s = PlanSummary { accepted: 0, corrected: 0, unrecoverable: 0 };
    for o in outcomes {
        match o.status {
            WaypointStatus::Accepted => s.accepted += 1,
            WaypointStatus::Corrected => s.corrected += 1,
            WaypointStatus::Unrecoverable => s.unrecoverable += 1,
        }
    }
    s
}

/// Validates or corrects every waypoint ray (in coverage-tour order) and
/// expands the survivors into `roll_steps` discrete roll candidates
/// `{2π·t/I}`. Waypoints with no valid ray are reported unrecoverable and
/// carry no candidates.
pub fn plan_valid_configs(
    rays: &[(Ray, u32)],
    set: &CandidateRaySet,
    mesh: &TriangleMesh,
    oracle: &dyn ValidityOracle,
    theta_r: f64,
    roll_steps: usize,
) -> Vec<WaypointOutcome> {
    assert!(roll_steps >= 1, "at least one roll step");
    let r_s = set.params.r_s;
    let eps = 1e-6 * mesh.bbox_diagonal();
    rays.par_iter()
        .enumerate()
        .map(|(w, (ray, face))| {
            let waypoint = ray.origin + r_s * ray.direction;
            let outward = -ray.direction;
            let original_ok = !segment_blocked(mesh, waypoint, outward, r_s, Some(*face), eps)
                && oracle.is_valid(ray, theta_r);
            let (status, final_ray) = if original_ok {
                (WaypointStatus::Accepted, Some(*ray))
            } else {
                match get_free_ray(ray, *face, set, mesh, oracle, theta_r) {
                    Some(r) => (WaypointStatus::Corrected, Some(r)),
                    None => (WaypointStatus::Unrecoverable, None),
                }
            };
            let candidates = final_ray
                .map(|r| {
                    (0..roll_steps)
                        .map(|t| PoseCandidate {
                            ray: r,
                            roll_angle: 2.0 * std::f64::consts::PI * t as f64 / roll_steps as f64,
                            waypoint_index: w as u32,
                        })
                        .collect()
                })
                .unwrap_or_default();
            WaypointOutcome { status, final_ray, candidates }
        })
        .collect()
}

/// Configuration-space metric between consecutive poses: translation of the
/// standoff origin plus weighted direction and roll changes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigMetric {
    /// Weight of the angle between ray directions (m/rad).
    pub w_direction: f64,
    /// Weight of the circular roll difference (m/rad).
    pub w_roll: f64,
}

impl Default for ConfigMetric {
    fn default() -> Self {
        Self { w_direction: 0.05, w_roll: 0.01 }
    }
}

impl ConfigMetric {
    pub fn eval(&self, a: &PoseCandidate, b: &PoseCandidate) -> f64 {
        let translation = (b.ray.origin - a.ray.origin).norm();
        let angle = a.ray.direction.dot(&b.ray.direction).clamp(-1.0, 1.0).acos();
        let mut roll = (a.roll_angle - b.roll_angle).abs() % (2.0 * std::f64::consts::PI);
        if roll > std::f64::consts::PI {
            roll = 2.0 * std::f64::consts::PI - roll;
        }
        translation + self.w_direction * angle + self.w_roll * roll
    }
}

/// Picks one pose per waypoint minimizing the summed metric between
/// consecutive selections — a shortest path through the layered candidate
/// graph (virtual source → layer 1 → … → layer k → virtual sink).
///
/// Ties resolve to the lowest candidate index per layer. Layers must be
/// non-empty (drop unrecoverable waypoints before calling).
pub fn optimal_config_tour(
    layers: &[Vec<PoseCandidate>],
    metric: &dyn Fn(&PoseCandidate, &PoseCandidate) -> f64,
) -> Result<(Vec<PoseCandidate>, f64), ViewpointError> {
    if layers.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    for (i, layer) in layers.iter().enumerate() {
        if layer.is_empty() {
            return Err(ViewpointError::EmptyLayer(i));
        }
    }

    // Forward DP over the layered DAG.
    let mut cost: Vec<f64> = vec![0.0; layers[0].len()];
    let mut back: Vec<Vec<usize>> = vec![vec![0; layers[0].len()]];
    for t in 1..layers.len() {
        let mut next = vec![f64::INFINITY; layers[t].len()];
        let mut pred = vec![0usize; layers[t].len()];
        for (ci, cand) in layers[t].iter().enumerate() {
            for (pi, prev) in layers[t - 1].iter().enumerate() {
                let c = cost[pi] + metric(prev, cand);
                if c < next[ci] {
                    next[ci] = c;
                    pred[ci] = pi;
                }
            }
        }
        cost = next;
        back.push(pred);
    }

    let mut best = 0;
    for (i, &c) in cost.iter().enumerate() {
        if c < cost[best] {
            best = i;
        }
    }
    let total = cost[best];
    let mut picks = vec![0usize; layers.len()];
    picks[layers.len() - 1] = best;
    for t in (1..layers.len()).rev() {
        picks[t - 1] = back[t][picks[t]];
    }
    let selection = picks.iter().zip(layers).map(|(&i, layer)| layer[i]).collect();
    Ok((selection, total))
}

#[cfg(test)]
mod tests;
