//! Coverage-quality metrics for a tessellation.
//!
//! Coverage and overlap are area-weighted and based on geodesic distances
//! from each face centroid to its own cluster's generator and to the
//! generators of edge-adjacent clusters, computed on the corresponding
//! cluster submeshes. The unreachable-face rate is count-weighted (an
//! area-weighted variant is reported alongside), and cluster-area
//! uniformity is summarized as a relative standard deviation against the
//! expected per-configuration area.

use rayon::prelude::*;

use crate::ccvt::Tessellation;
use crate::geodesic::{cluster_submesh, Backend, SteinerSolver, SurfacePoint};
use crate::mesh::TriangleMesh;

/// Thresholds used by a metrics run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsParams {
    /// Nozzle radius; sets `sigma_e = π r_c²`.
    pub r_c: f64,
    /// Normal-deviation bound for unreachable faces (rad).
    pub theta0: f64,
    /// Geodesic coverage radius; defaults to `r_c`.
    pub coverage_threshold: f64,
}

impl MetricsParams {
    /// Benchmark defaults for a given nozzle radius: `theta0 = π/3`,
    /// coverage threshold equal to `r_c`.
    pub fn for_nozzle(r_c: f64) -> Self {
        Self { r_c, theta0: std::f64::consts::FRAC_PI_3, coverage_threshold: r_c }
    }

    pub fn sigma_e(&self) -> f64 {
        std::f64::consts::PI * self.r_c * self.r_c
    }
}

/// The coverage-quality report.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub coverage_pct: f64,
    pub overlap_pct: f64,
    pub rsd_pct: f64,
    /// Count-weighted unreachable-face percentage.
    pub unreach_pct: f64,
    /// Area-weighted variant of the same set.
    pub unreach_area_pct: f64,
    /// Population standard deviation of cluster areas (m²).
    pub area_sd: f64,
    pub cluster_areas: Vec<f64>,
    pub unreachable_faces: Vec<u32>,
    pub params: MetricsParams,
}

/// Area-weighted coverage and overlap percentages.
///
/// A face is covered when the geodesic distance from its centroid to at
/// least one of {own generator, adjacent clusters' generators} is within
/// `threshold`, and overlapping when at least two are. Distances are
/// computed per cluster on the cluster-plus-neighbors submesh; faces
/// unreachable inside that submesh count as uncovered.
pub fn coverage_and_overlap(
    mesh: &TriangleMesh,
    tess: &Tessellation,
    backend: Backend,
    threshold: f64,
) -> (f64, f64) {
    let m = tess.cluster_count();
    // One distance field per generator, over its own + neighbor faces.
    let fields: Vec<std::collections::HashMap<u32, f64>> = (0..m as u32)
        .into_par_iter()
        .map(|c| {
            let sub = cluster_submesh(mesh, tess, c);
            let solver = SteinerSolver::new(mesh, Some(&sub.faces), backend);
            let cluster = &tess.clusters[c as usize];
            let source = SurfacePoint { face: cluster.generator_face, point: cluster.generator };
            solver
                .distances_to_face_centroids(source)
                .expect("generator face is part of its own submesh")
        })
        .collect();

    let mut within = vec![0u32; mesh.face_count()];
    for field in &fields {
        for (&face, &dist) in field {
            if dist <= threshold {
                within[face as usize] += 1;
            }
        }
    }
    let total_area = mesh.total_area();
    let mut covered = 0.0;
    let mut overlapping = 0.0;
    for (f, &count) in within.iter().enumerate() {
        if count >= 1 {
            covered += mesh.face_area(f as u32);
        }
        if count >= 2 {
            overlapping += mesh.face_area(f as u32);
        }
    }
    (100.0 * covered / total_area, 100.0 * overlapping / total_area)
}

/// Relative standard deviation (%) of cluster areas normalized by
/// `sigma_e`: `100 · popSD(a/σ) / mean(a/σ)`.
pub fn rsd(tess: &Tessellation, sigma_e: f64) -> f64 {
    let ratios: Vec<f64> = tess.clusters.iter().map(|c| c.area / sigma_e).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / ratios.len() as f64;
    100.0 * var.sqrt() / mean
}

/// Faces whose normal deviates from their cluster's proxy normal by more
/// than `theta0`. Returns the face set, the count-weighted percentage, and
/// the area-weighted percentage.
pub fn unreachable_faces(
    mesh: &TriangleMesh,
    tess: &Tessellation,
    theta0: f64,
) -> (Vec<u32>, f64, f64) {
    let mut faces = Vec::new();
    let mut area = 0.0;
    for f in 0..mesh.face_count() as u32 {
        let cluster = &tess.clusters[tess.face_to_cluster[f as usize] as usize];
        let angle = mesh.face_normal(f).dot(&cluster.proxy_normal).clamp(-1.0, 1.0).acos();
        if angle > theta0 {
            faces.push(f);
            area += mesh.face_area(f);
        }
    }
    let count_pct = 100.0 * faces.len() as f64 / mesh.face_count() as f64;
    let area_pct = 100.0 * area / mesh.total_area();
    (faces, count_pct, area_pct)
}

/// Population standard deviation of the cluster areas.
pub fn area_sd(tess: &Tessellation) -> f64 {
    let areas: Vec<f64> = tess.clusters.iter().map(|c| c.area).collect();
    let mean = areas.iter().sum::<f64>() / areas.len() as f64;
    let var = areas.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / areas.len() as f64;
    var.sqrt()
}

/// Computes the full report.
pub fn compute_report(
    mesh: &TriangleMesh,
    tess: &Tessellation,
    backend: Backend,
    params: MetricsParams,
) -> MetricsReport {
    let (coverage_pct, overlap_pct) =
        coverage_and_overlap(mesh, tess, backend, params.coverage_threshold);
    let (unreachable, unreach_pct, unreach_area_pct) =
        unreachable_faces(mesh, tess, params.theta0);
    MetricsReport {
        coverage_pct,
        overlap_pct,
        rsd_pct: rsd(tess, params.sigma_e()),
        unreach_pct,
        unreach_area_pct,
        area_sd: area_sd(tess),
        cluster_areas: tess.clusters.iter().map(|c| c.area).collect(),
        unreachable_faces: unreachable,
        params,
    }
}
