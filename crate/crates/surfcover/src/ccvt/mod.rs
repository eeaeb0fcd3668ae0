//! Mesh segmentation by constrained centroidal Voronoi tessellation.
//!
//! The energy combines an L1/L2 distance term between face centroids and
//! cluster generators with a weighted normal-deviation term, so that Lloyd
//! iteration produces clusters that are simultaneously area-uniform and
//! low-curvature. Generators are constrained to the surface: each is the
//! member face centroid nearest the cluster's mass centroid.
//!
//! All argmin operations break ties toward the lowest index, and the random
//! generator selection is driven by a seeded ChaCha stream, so a fixed seed
//! reproduces a tessellation bit for bit.

mod lloyd;
mod repair;

pub use lloyd::lloyd_run;
pub use repair::{cluster_components, repair_connectivity};

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{Point, TriangleMesh, Vec3};

#[derive(Debug, Error)]
pub enum CcvtError {
    #[error("requested {requested} clusters but the mesh has only {faces} faces")]
    TooManyClusters { requested: usize, faces: usize },
    #[error("invalid energy parameters: {0}")]
    InvalidParams(String),
    #[error("cluster normals cancel out (resultant {magnitude:.3e})")]
    DegenerateNormal { magnitude: f64 },
}

/// Norm used by the distance term of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

/// Cluster count: explicit, or derived from the nozzle radius.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ClusterCount {
    Fixed(usize),
    /// `round(totalArea / (π r²))`, clamped to at least 1.
    #[serde(rename_all = "camelCase")]
    Auto {
        nozzle_radius: f64,
    },
}

/// Parameters of the segmentation energy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyParams {
    /// Positive normalizer of the distance term; the recipe sets it to one
    /// sixth of the bounding-box diagonal.
    pub alpha1: f64,
    /// Distance/normal trade-off in `[0, 1]`; ignored (treated as 1) when the
    /// normal cost is disabled.
    pub alpha2: f64,
    /// Dot-product threshold in `(-1, 1)` above which the normal cost keeps
    /// weight 1.
    pub alpha3: f64,
    /// Penalty weight (> 1) applied below the threshold.
    pub alpha4: f64,
    pub norm: Norm,
    pub normal_cost_enabled: bool,
    pub m: ClusterCount,
}

/// Threshold for very rough geometry (the recipe default is `1/1.9`).
pub const ALPHA3_ROUGH: f64 = 1.0 / 3.0;

impl EnergyParams {
    /// The benchmark parameter recipe: `alpha1 = d_dgn/6`, `alpha2 = 0.93`,
    /// `alpha3 = 1/1.9`, `alpha4 = 7`, L1 norm with the normal cost enabled.
    pub fn recipe(bbox_diagonal: f64, m: ClusterCount) -> Self {
        Self {
            alpha1: bbox_diagonal / 6.0,
            alpha2: 0.93,
            alpha3: 1.0 / 1.9,
            alpha4: 7.0,
            norm: Norm::L1,
            normal_cost_enabled: true,
            m,
        }
    }

    pub fn validate(&self) -> Result<(), CcvtError> {
        let fail = |msg: String| Err(CcvtError::InvalidParams(msg));
        if !(self.alpha1.is_finite() && self.alpha1 > 0.0) {
            return fail(format!("alpha1 must be > 0, got {}", self.alpha1));
        }
        if !(0.0..=1.0).contains(&self.alpha2) {
            return fail(format!("alpha2 must be in [0, 1], got {}", self.alpha2));
        }
        if !(self.alpha3 > -1.0 && self.alpha3 < 1.0) {
            return fail(format!("alpha3 must be in (-1, 1), got {}", self.alpha3));
        }
        if !(self.alpha4.is_finite() && self.alpha4 > 1.0) {
            return fail(format!("alpha4 must be > 1, got {}", self.alpha4));
        }
        if let ClusterCount::Fixed(0) = self.m {
            return fail("cluster count must be positive".into());
        }
        if let ClusterCount::Auto { nozzle_radius } = self.m {
            if !(nozzle_radius.is_finite() && nozzle_radius > 0.0) {
                return fail(format!("nozzle radius must be > 0, got {}", nozzle_radius));
            }
        }
        Ok(())
    }
}

/// A cluster generator: a face centroid plus the cluster's proxy normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub face: u32,
    pub point: Point,
    pub proxy_normal: Vec3,
}

impl Generator {
    pub fn at_face(mesh: &TriangleMesh, face: u32) -> Self {
        Self {
            face,
            point: mesh.face_centroid(face),
            proxy_normal: mesh.face_normal(face),
        }
    }
}

/// One cluster of a tessellation.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// Member faces, ascending.
    pub face_indices: Vec<u32>,
    /// Face whose centroid is the generator.
    pub generator_face: u32,
    /// Generator point (a member face centroid).
    pub generator: Point,
    /// Area-weighted mean of member face centroids.
    pub mass_centroid: Point,
    /// Normalized area-weighted mean of member face normals.
    pub proxy_normal: Vec3,
    /// Sum of member face areas.
    pub area: f64,
    /// Set when the member normals cancelled and the proxy fell back to the
    /// generator's own face normal.
    pub degenerate_normal: bool,
}

impl Cluster {
    pub fn generator_state(&self) -> Generator {
        Generator {
            face: self.generator_face,
            point: self.generator,
            proxy_normal: self.proxy_normal,
        }
    }
}

/// A partition of the mesh faces into clusters.
#[derive(Debug, Clone)]
pub struct Tessellation {
    pub clusters: Vec<Cluster>,
    /// Cluster index per face.
    pub face_to_cluster: Vec<u32>,
    /// Total energy of the partition against the stored generators.
    pub energy: f64,
    /// Assignment passes executed by the producing run (0 for raw assignments).
    pub iterations: usize,
    pub seed: u64,
    /// Per-iteration energy right after each assignment pass.
    pub energy_trace: Vec<f64>,
    pub params: EnergyParams,
}

impl Tessellation {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Indices of clusters that received no faces.
    pub fn empty_clusters(&self) -> Vec<u32> {
        self.clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.face_indices.is_empty())
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Checks disjointness and full coverage of the face set.
    pub fn is_partition(&self, mesh: &TriangleMesh) -> bool {
        if self.face_to_cluster.len() != mesh.face_count() {
            return false;
        }
        let mut seen = vec![false; mesh.face_count()];
        for (ci, cluster) in self.clusters.iter().enumerate() {
            for &f in &cluster.face_indices {
                let f = f as usize;
                if f >= seen.len() || seen[f] || self.face_to_cluster[f] != ci as u32 {
                    return false;
                }
                seen[f] = true;
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Expected cluster count for a nozzle of radius `r_c`:
/// `round(totalArea / (π r_c²))`, at least 1.
pub fn expected_cluster_count(mesh: &TriangleMesh, r_c: f64) -> usize {
    assert!(r_c > 0.0, "nozzle radius must be positive");
    let sigma_e = std::f64::consts::PI * r_c * r_c;
    ((mesh.total_area() / sigma_e).round() as usize).max(1)
}

pub(crate) fn resolve_cluster_count(mesh: &TriangleMesh, m: ClusterCount) -> usize {
    match m {
        ClusterCount::Fixed(n) => n,
        ClusterCount::Auto { nozzle_radius } => expected_cluster_count(mesh, nozzle_radius),
    }
}

/// Normal deviation cost: `β · (1 − n·p) / 2`, with `β = 1` when the dot
/// product exceeds `alpha3` and `β = alpha4` otherwise (equality penalized).
pub fn normal_cost(face_normal: &Vec3, proxy_normal: &Vec3, alpha3: f64, alpha4: f64) -> f64 {
    let dot = face_normal.dot(proxy_normal);
    let beta = if dot > alpha3 { 1.0 } else { alpha4 };
    beta * (1.0 - dot) / 2.0
}

fn norm_distance(norm: Norm, a: &Point, b: &Point) -> f64 {
    let d = a - b;
    match norm {
        Norm::L1 => d.x.abs() + d.y.abs() + d.z.abs(),
        Norm::L2 => d.norm(),
    }
}

/// Per-face cost against a generator: the area-weighted distance term plus,
/// when enabled, the area-weighted normal cost. With the normal cost off,
/// `alpha2` is treated as 1.
pub fn cost_xi(
    params: &EnergyParams,
    generator: &Point,
    proxy_normal: &Vec3,
    face_area: f64,
    face_centroid: &Point,
    face_normal: &Vec3,
) -> f64 {
    let dist = norm_distance(params.norm, face_centroid, generator);
    if params.normal_cost_enabled {
        let nc = normal_cost(face_normal, proxy_normal, params.alpha3, params.alpha4);
        params.alpha2 / params.alpha1 * face_area * dist
            + (1.0 - params.alpha2) * face_area * nc
    } else {
        face_area * dist / params.alpha1
    }
}

/// `cost_xi` for a mesh face by index.
pub fn cost_xi_face(
    params: &EnergyParams,
    generator: &Generator,
    mesh: &TriangleMesh,
    face: u32,
) -> f64 {
    cost_xi(
        params,
        &generator.point,
        &generator.proxy_normal,
        mesh.face_area(face),
        &mesh.face_centroid(face),
        &mesh.face_normal(face),
    )
}

/// Assigns every face to the generator with minimal `cost_xi` (ties to the
/// lowest generator index). Proxy normals are the callers' frozen values.
///
/// The result is an assignment-only tessellation: generators are copied from
/// the input and clusters may be empty (flagged via
/// [`Tessellation::empty_clusters`]).
pub fn assign_faces(
    mesh: &TriangleMesh,
    generators: &[Generator],
    params: &EnergyParams,
) -> Tessellation {
    assert!(!generators.is_empty(), "at least one generator required");
    let face_to_cluster: Vec<u32> = (0..mesh.face_count() as u32)
        .into_par_iter()
        .map(|f| {
            let mut best = (f64::INFINITY, 0u32);
            for (gi, g) in generators.iter().enumerate() {
                let c = cost_xi_face(params, g, mesh, f);
                if c < best.0 {
                    best = (c, gi as u32);
                }
            }
            best.1
        })
        .collect();
    build_tessellation(mesh, generators, params, face_to_cluster, 0, 0, Vec::new())
}

/// Assembles cluster records from a face assignment, keeping the provided
/// generator states. Mass centroids and areas are recomputed; the energy is
/// evaluated against the provided generators.
pub(crate) fn build_tessellation(
    mesh: &TriangleMesh,
    generators: &[Generator],
    params: &EnergyParams,
    face_to_cluster: Vec<u32>,
    iterations: usize,
    seed: u64,
    energy_trace: Vec<f64>,
) -> Tessellation {
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); generators.len()];
    for (f, &c) in face_to_cluster.iter().enumerate() {
        members[c as usize].push(f as u32);
    }
    let clusters: Vec<Cluster> = generators
        .iter()
        .zip(members)
        .map(|(g, faces)| {
            let area: f64 = faces.iter().map(|&f| mesh.face_area(f)).sum();
            let mass_centroid = if faces.is_empty() {
                g.point
            } else {
                mass_centroid(mesh, &faces)
            };
            Cluster {
                face_indices: faces,
                generator_face: g.face,
                generator: g.point,
                mass_centroid,
                proxy_normal: g.proxy_normal,
                area,
                degenerate_normal: false,
            }
        })
        .collect();
    let mut tess = Tessellation {
        clusters,
        face_to_cluster,
        energy: 0.0,
        iterations,
        seed,
        energy_trace,
        params: params.clone(),
    };
    tess.energy = total_energy(mesh, &tess, params);
    tess
}

/// Area-weighted mean of the member faces' centroids.
pub fn mass_centroid(mesh: &TriangleMesh, faces: &[u32]) -> Point {
    assert!(!faces.is_empty(), "cluster must be non-empty");
    let mut weighted = Vec3::zeros();
    let mut total = 0.0;
    for &f in faces {
        let a = mesh.face_area(f);
        weighted += a * mesh.face_centroid(f).coords;
        total += a;
    }
    Point::from(weighted / total)
}

/// The member face whose centroid is nearest (squared Euclidean) to
/// `target`; ties resolve to the lowest face index. Returns the face index.
pub fn constrain_centroid(mesh: &TriangleMesh, faces: &[u32], target: &Point) -> u32 {
    assert!(!faces.is_empty(), "cluster must be non-empty");
    let mut best = (f64::INFINITY, u32::MAX);
    for &f in faces {
        let d2 = (mesh.face_centroid(f) - target).norm_squared();
        if d2 < best.0 || (d2 == best.0 && f < best.1) {
            best = (d2, f);
        }
    }
    best.1
}

/// Normalized area-weighted mean of the member faces' normals.
pub fn proxy_normal(mesh: &TriangleMesh, faces: &[u32]) -> Result<Vec3, CcvtError> {
    assert!(!faces.is_empty(), "cluster must be non-empty");
    let mut sum = Vec3::zeros();
    for &f in faces {
        sum += mesh.face_area(f) * mesh.face_normal(f);
    }
    let magnitude = sum.norm();
    if magnitude <= 1e-9 {
        return Err(CcvtError::DegenerateNormal { magnitude });
    }
    Ok(sum / magnitude)
}

/// Sum of `cost_xi` over all faces against their assigned generator.
///
/// Costs are evaluated in parallel but summed sequentially in face order, so
/// the result is reproducible and monotone under per-face improvements.
pub fn total_energy(mesh: &TriangleMesh, tess: &Tessellation, params: &EnergyParams) -> f64 {
    let gens: Vec<Generator> = tess.clusters.iter().map(Cluster::generator_state).collect();
    let costs: Vec<f64> = (0..mesh.face_count() as u32)
        .into_par_iter()
        .map(|f| {
            let g = &gens[tess.face_to_cluster[f as usize] as usize];
            cost_xi_face(params, g, mesh, f)
        })
        .collect();
    costs.iter().sum()
}
