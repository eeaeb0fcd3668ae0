//! On-disk JSON formats for pipeline artifacts.
//!
//! Every artifact round-trips through these types, so downstream commands
//! can consume upstream outputs and tests can check the published schemas.
//! Points and vectors serialize as `[x, y, z]` triples; all collections are
//! emitted in deterministic order, so a fixed seed reproduces output files
//! byte for byte.

use serde::{Deserialize, Serialize};

use crate::ccvt::{Cluster, EnergyParams, Tessellation};
use crate::geodesic::{GeneratorGraph, GeneratorNode, GeodesicEdge};
use crate::mesh::{Point, Ray, TriangleMesh, Vec3};
use crate::tour::CoveragePath;
use crate::viewpoint::{
    CandidateRayParams, CandidateRaySet, PlanSummary, PoseCandidate, WaypointOutcome,
    WaypointStatus,
};

pub type Triple = [f64; 3];

fn point(p: &Point) -> Triple {
    [p.x, p.y, p.z]
}

fn vector(v: &Vec3) -> Triple {
    [v.x, v.y, v.z]
}

fn to_point(t: &Triple) -> Point {
    Point::new(t[0], t[1], t[2])
}

fn to_vector(t: &Triple) -> Vec3 {
    Vec3::new(t[0], t[1], t[2])
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("inconsistent artifact: {0}")]
pub struct ArtifactError(pub String);

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterRecord {
    pub generator: Triple,
    pub generator_face: u32,
    pub proxy_normal: Triple,
    pub area: f64,
    pub face_indices: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentationFile {
    pub params: EnergyParams,
    pub seed: u64,
    pub iterations: usize,
    pub energy: f64,
    pub energy_trace: Vec<f64>,
    pub clusters: Vec<ClusterRecord>,
    pub face_to_cluster: Vec<u32>,
}

impl SegmentationFile {
    pub fn from_tessellation(tess: &Tessellation) -> Self {
        Self {
            params: tess.params.clone(),
            seed: tess.seed,
            iterations: tess.iterations,
            energy: tess.energy,
            energy_trace: tess.energy_trace.clone(),
            clusters: tess
                .clusters
                .iter()
                .map(|c| ClusterRecord {
                    generator: point(&c.generator),
                    generator_face: c.generator_face,
                    proxy_normal: vector(&c.proxy_normal),
                    area: c.area,
                    face_indices: c.face_indices.clone(),
                })
                .collect(),
            face_to_cluster: tess.face_to_cluster.clone(),
        }
    }

    /// Rebuilds the tessellation, recomputing mass centroids from the mesh
    /// and validating the partition invariants.
    pub fn into_tessellation(self, mesh: &TriangleMesh) -> Result<Tessellation, ArtifactError> {
        if self.face_to_cluster.len() != mesh.face_count() {
            return Err(ArtifactError(format!(
                "faceToCluster covers {} faces but the mesh has {}",
                self.face_to_cluster.len(),
                mesh.face_count()
            )));
        }
        let clusters: Vec<Cluster> = self
            .clusters
            .iter()
            .map(|r| {
                let mass_centroid = if r.face_indices.is_empty() {
                    to_point(&r.generator)
                } else {
                    crate::ccvt::mass_centroid(mesh, &r.face_indices)
                };
                Cluster {
                    face_indices: r.face_indices.clone(),
                    generator_face: r.generator_face,
                    generator: to_point(&r.generator),
                    mass_centroid,
                    proxy_normal: to_vector(&r.proxy_normal),
                    area: r.area,
                    degenerate_normal: false,
                }
            })
            .collect();
        let tess = Tessellation {
            clusters,
            face_to_cluster: self.face_to_cluster,
            energy: self.energy,
            iterations: self.iterations,
            seed: self.seed,
            energy_trace: self.energy_trace,
            params: self.params,
        };
        if !tess.is_partition(mesh) {
            return Err(ArtifactError("clusters do not partition the mesh faces".into()));
        }
        Ok(tess)
    }
}

// ---------------------------------------------------------------------------
// Generator graph
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphNodeRecord {
    pub cluster: u32,
    pub point: Triple,
    pub face: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphEdgeRecord {
    pub i: u32,
    pub j: u32,
    pub cost: f64,
    pub path: Vec<Triple>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphFile {
    pub nodes: Vec<GraphNodeRecord>,
    pub edges: Vec<GraphEdgeRecord>,
    pub avg_neighbors: f64,
}

impl GraphFile {
    pub fn from_graph(graph: &GeneratorGraph) -> Self {
        Self {
            nodes: graph
                .nodes
                .iter()
                .map(|n| GraphNodeRecord { cluster: n.cluster, point: point(&n.point), face: n.face })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|(&(i, j), e)| GraphEdgeRecord {
                    i,
                    j,
                    cost: e.cost,
                    path: e.path.iter().map(point).collect(),
                })
                .collect(),
            avg_neighbors: graph.avg_neighbors,
        }
    }

    pub fn into_graph(self) -> Result<GeneratorGraph, ArtifactError> {
        let nodes: Vec<GeneratorNode> = self
            .nodes
            .iter()
            .map(|n| GeneratorNode { cluster: n.cluster, point: to_point(&n.point), face: n.face })
            .collect();
        let mut edges = std::collections::BTreeMap::new();
        for e in self.edges {
            if e.i >= nodes.len() as u32 || e.j >= nodes.len() as u32 || e.i == e.j {
                return Err(ArtifactError(format!("edge ({}, {}) out of range", e.i, e.j)));
            }
            let key = (e.i.min(e.j), e.i.max(e.j));
            edges.insert(
                key,
                GeodesicEdge { cost: e.cost, path: e.path.iter().map(to_point).collect() },
            );
        }
        Ok(GeneratorGraph { nodes, edges, avg_neighbors: self.avg_neighbors })
    }
}

// ---------------------------------------------------------------------------
// Coverage path
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathFile {
    pub order: Vec<u32>,
    pub total_cost: f64,
    pub polyline: Vec<Triple>,
    /// Closed tour minus its longest edge.
    pub open_order: Vec<u32>,
    pub open_cost: f64,
}

impl PathFile {
    pub fn from_path(path: &CoveragePath, graph: &GeneratorGraph) -> Self {
        let (open_order, open_cost) = path.open_variant(graph);
        Self {
            order: path.order.clone(),
            total_cost: path.total_cost,
            polyline: path.polyline.iter().map(point).collect(),
            open_order,
            open_cost,
        }
    }

    pub fn into_path(self) -> CoveragePath {
        CoveragePath {
            order: self.order,
            total_cost: self.total_cost,
            polyline: self.polyline.iter().map(to_point).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Viewpoint plan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RayRecord {
    pub origin: Triple,
    pub direction: Triple,
}

impl RayRecord {
    pub fn from_ray(ray: &Ray) -> Self {
        Self { origin: point(&ray.origin), direction: vector(&ray.direction) }
    }

    pub fn into_ray(&self) -> Ray {
        Ray { origin: to_point(&self.origin), direction: to_vector(&self.direction) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionRecord {
    pub waypoint_index: u32,
    pub ray_origin: Triple,
    pub ray_direction: Triple,
    pub roll_angle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewpointsFile {
    pub params: CandidateRayParams,
    pub theta_r: f64,
    pub roll_steps: usize,
    pub rays_original: Vec<RayRecord>,
    /// One per waypoint; `null` where unrecoverable.
    pub rays_final: Vec<Option<RayRecord>>,
    pub status: Vec<WaypointStatus>,
    pub summary: PlanSummary,
    /// Local-frame candidate centers (pole first, sorted by pole distance).
    pub candidate_set: Vec<Triple>,
    pub selection: Vec<SelectionRecord>,
    pub tour_metric_cost: f64,
}

impl ViewpointsFile {
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        set: &CandidateRaySet,
        theta_r: f64,
        roll_steps: usize,
        originals: &[Ray],
        outcomes: &[WaypointOutcome],
        selection: &[PoseCandidate],
        tour_metric_cost: f64,
    ) -> Self {
        Self {
            params: set.params,
            theta_r,
            roll_steps,
            rays_original: originals.iter().map(RayRecord::from_ray).collect(),
            rays_final: outcomes
                .iter()
                .map(|o| o.final_ray.as_ref().map(RayRecord::from_ray))
                .collect(),
            status: outcomes.iter().map(|o| o.status).collect(),
            summary: crate::viewpoint::summarize(outcomes),
            candidate_set: set.centers.iter().map(point).collect(),
            selection: selection
                .iter()
                .map(|p| SelectionRecord {
                    waypoint_index: p.waypoint_index,
                    ray_origin: point(&p.ray.origin),
                    ray_direction: vector(&p.ray.direction),
                    roll_angle: p.roll_angle,
                })
                .collect(),
            tour_metric_cost,
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics (the report itself is already serde; this adds the CSV row)
// ---------------------------------------------------------------------------

/// Header of the aggregation CSV.
pub const METRICS_CSV_HEADER: &str =
    "seed,clusters,rc,theta0,threshold,coveragePct,overlapPct,rsdPct,unreachPct,areaSd,runtimeSeconds";

/// One metrics row for multi-run aggregation.
pub fn metrics_csv_row(
    report: &crate::metrics::MetricsReport,
    seed: u64,
    clusters: usize,
    runtime_seconds: f64,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        seed,
        clusters,
        report.params.r_c,
        report.params.theta0,
        report.params.coverage_threshold,
        report.coverage_pct,
        report.overlap_pct,
        report.rsd_pct,
        report.unreach_pct,
        report.area_sd,
        runtime_seconds
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccvt::{lloyd_run, ClusterCount, EnergyParams};
    use crate::geodesic::{adjacent_generator_distances, complete_generator_graph, Backend};
    use crate::shapes;
    use crate::tour::three_opt_tour;

    #[test]
    fn segmentation_roundtrip_preserves_partition() {
        let mesh = shapes::icosphere(2, Some((0.1, 30)));
        let params = EnergyParams::recipe(mesh.bbox_diagonal(), ClusterCount::Fixed(6));
        let tess = lloyd_run(&mesh, &params, 11, 30, 1e-4).unwrap();
        let file = SegmentationFile::from_tessellation(&tess);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: SegmentationFile = serde_json::from_str(&text).unwrap();
        let back = parsed.into_tessellation(&mesh).unwrap();
        assert_eq!(back.face_to_cluster, tess.face_to_cluster);
        assert_eq!(back.energy, tess.energy);
        for (a, b) in back.clusters.iter().zip(&tess.clusters) {
            assert_eq!(a.generator_face, b.generator_face);
            assert_eq!(a.area, b.area);
        }
    }

    #[test]
    fn graph_and_path_roundtrip() {
        let mesh = shapes::icosphere(2, Some((0.1, 31)));
        let params = EnergyParams::recipe(mesh.bbox_diagonal(), ClusterCount::Fixed(5));
        let tess = lloyd_run(&mesh, &params, 2, 30, 1e-4).unwrap();
        let graph =
            complete_generator_graph(&adjacent_generator_distances(&mesh, &tess, Backend::default()))
                .unwrap();
        let file = GraphFile::from_graph(&graph);
        let parsed: GraphFile =
            serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
        let back = parsed.into_graph().unwrap();
        assert_eq!(back.edges.len(), graph.edges.len());
        for (k, e) in &graph.edges {
            assert_eq!(back.edges[k].cost, e.cost);
        }

        let path = three_opt_tour(&graph, 0).unwrap();
        let pf = PathFile::from_path(&path, &graph);
        let parsed: PathFile = serde_json::from_str(&serde_json::to_string(&pf).unwrap()).unwrap();
        assert_eq!(parsed.order, path.order);
        assert_eq!(parsed.total_cost, path.total_cost);
        assert!(parsed.open_cost <= parsed.total_cost);
    }
}
