//! Geodesic distances between cluster generators.
//!
//! Distances are computed with a Steiner-augmented edge graph: every mesh
//! edge is subdivided by `k` extra nodes, nodes on different edges of the
//! same face are linked by straight in-face segments, and Dijkstra runs over
//! the result. An optional straightening pass slides the path's edge nodes
//! along their mesh edges to tighten the polyline.
//!
//! The decomposition follows the coverage-path construction: geodesics are
//! computed only between generators of edge-adjacent clusters, each on the
//! submesh of the owning cluster and its neighbors, and the generator graph
//! is then completed by shortest paths over those edges. Restricting a query
//! to a submesh uses the exact same node placement and edge weights as the
//! full mesh, so a submesh distance can never undercut the full-mesh one.

mod steiner;

pub use steiner::SteinerSolver;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::ccvt::Tessellation;
use crate::mesh::{Point, TriangleMesh};

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("no surface path between the query points within the (sub)mesh")]
    Disconnected,
    #[error("generator graph is disconnected; completion impossible")]
    DisconnectedGraph,
    #[error("source/target face {face} is not part of the submesh")]
    FaceOutsideSubmesh { face: u32 },
}

/// Geodesic backend configuration.
///
/// `steiner_per_edge` is the number of extra nodes per mesh edge;
/// `straighten_passes` caps the polyline-tightening sweeps (they stop early
/// once converged; 0 disables tightening, leaving the raw graph distance,
/// which is guaranteed monotone under submesh restriction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Backend {
    pub steiner_per_edge: usize,
    pub straighten_passes: usize,
}

impl Default for Backend {
    fn default() -> Self {
        Self { steiner_per_edge: 3, straighten_passes: 100 }
    }
}

impl Backend {
    /// Pure graph distances: no straightening.
    pub fn graph_only(self) -> Self {
        Self { straighten_passes: 0, ..self }
    }
}

/// A point lying on a known face (generators are face centroids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub face: u32,
    pub point: Point,
}

impl SurfacePoint {
    pub fn face_centroid(mesh: &TriangleMesh, face: u32) -> Self {
        Self { face, point: mesh.face_centroid(face) }
    }
}

/// The faces of one cluster together with all edge-adjacent clusters.
#[derive(Debug, Clone)]
pub struct Submesh {
    pub cluster: u32,
    /// Clusters contributing faces besides `cluster`, ascending.
    pub adjacent_clusters: Vec<u32>,
    /// Parent-mesh face indices, ascending.
    pub faces: Vec<u32>,
}

/// Clusters sharing at least one mesh edge with `cluster`.
pub fn adjacent_clusters(mesh: &TriangleMesh, tess: &Tessellation, cluster: u32) -> Vec<u32> {
    let mut out = BTreeSet::new();
    for &f in &tess.clusters[cluster as usize].face_indices {
        for &n in mesh.adjacent_faces(f) {
            let c = tess.face_to_cluster[n as usize];
            if c != cluster {
                out.insert(c);
            }
        }
    }
    out.into_iter().collect()
}

/// The submesh of `cluster` and its edge-adjacent clusters, with face
/// indices mapping straight back to the parent mesh.
pub fn cluster_submesh(mesh: &TriangleMesh, tess: &Tessellation, cluster: u32) -> Submesh {
    let adjacent = adjacent_clusters(mesh, tess, cluster);
    let mut faces: Vec<u32> = Vec::new();
    faces.extend_from_slice(&tess.clusters[cluster as usize].face_indices);
    for &c in &adjacent {
        faces.extend_from_slice(&tess.clusters[c as usize].face_indices);
    }
    faces.sort_unstable();
    Submesh { cluster, adjacent_clusters: adjacent, faces }
}

/// Shortest surface path between two points of a submesh.
///
/// Returns the path cost and its polyline; the polyline's arc length equals
/// the cost by construction. For one-off queries; batch callers should build
/// a [`SteinerSolver`] once and reuse it.
pub fn geodesic_between(
    mesh: &TriangleMesh,
    submesh: &Submesh,
    source: SurfacePoint,
    target: SurfacePoint,
    backend: Backend,
) -> Result<(f64, Vec<Point>), GeodesicError> {
    let solver = SteinerSolver::new(mesh, Some(&submesh.faces), backend);
    solver.query(source, target)
}

/// Shortest surface path over the whole mesh; the testing oracle for the
/// decomposition.
pub fn full_mesh_geodesic_oracle(
    mesh: &TriangleMesh,
    source: SurfacePoint,
    target: SurfacePoint,
    backend: Backend,
) -> Result<(f64, Vec<Point>), GeodesicError> {
    let solver = SteinerSolver::new(mesh, None, backend);
    solver.query(source, target)
}

/// One node of the generator graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorNode {
    pub cluster: u32,
    pub point: Point,
    pub face: u32,
}

/// A geodesic edge; the stored polyline runs from the lower-index node to
/// the higher-index one.
#[derive(Debug, Clone)]
pub struct GeodesicEdge {
    pub cost: f64,
    pub path: Vec<Point>,
}

/// Weighted graph over the cluster generators with geodesic polylines.
#[derive(Debug, Clone, Default)]
pub struct GeneratorGraph {
    pub nodes: Vec<GeneratorNode>,
    /// Keyed by `(i, j)` with `i < j`.
    pub edges: BTreeMap<(u32, u32), GeodesicEdge>,
    /// Average number of adjacent clusters per cluster (diagnostic).
    pub avg_neighbors: f64,
}

impl GeneratorGraph {
    pub fn cost(&self, i: u32, j: u32) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.get(&key).map(|e| e.cost)
    }

    /// Edge polyline oriented from `i` to `j`.
    pub fn path(&self, i: u32, j: u32) -> Option<Vec<Point>> {
        let key = if i < j { (i, j) } else { (j, i) };
        let edge = self.edges.get(&key)?;
        let mut p = edge.path.clone();
        if i > j {
            p.reverse();
        }
        Some(p)
    }

    pub fn neighbors(&self, i: u32) -> Vec<u32> {
        self.edges
            .keys()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.nodes.len();
        self.edges.len() == n * (n - 1) / 2
    }
}

/// Geodesic edges between all pairs of adjacent generators.
///
/// Each unordered pair is computed once on the submesh of its lower-index
/// cluster. Pairs whose submesh is internally disconnected are skipped with
/// a warning; completion can still route around them.
pub fn adjacent_generator_distances(
    mesh: &TriangleMesh,
    tess: &Tessellation,
    backend: Backend,
) -> GeneratorGraph {
    let m = tess.cluster_count();
    let nodes: Vec<GeneratorNode> = tess
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| GeneratorNode { cluster: i as u32, point: c.generator, face: c.generator_face })
        .collect();

    let adjacency: Vec<Vec<u32>> =
        (0..m as u32).map(|c| adjacent_clusters(mesh, tess, c)).collect();
    let avg_neighbors =
        adjacency.iter().map(|a| a.len() as f64).sum::<f64>() / (m as f64).max(1.0);

    // Pair (i, j), i < j, is computed on cluster i's submesh.
    type PairResult = (u32, u32, f64, Vec<Point>);
    let per_cluster: Vec<Vec<PairResult>> = (0..m as u32)
        .into_par_iter()
        .map(|i| {
            let targets: Vec<u32> = adjacency[i as usize].iter().copied().filter(|&j| j > i).collect();
            if targets.is_empty() {
                return Vec::new();
            }
            let submesh = cluster_submesh(mesh, tess, i);
            let solver = SteinerSolver::new(mesh, Some(&submesh.faces), backend);
            let source = SurfacePoint { face: nodes[i as usize].face, point: nodes[i as usize].point };
            let mut out = Vec::with_capacity(targets.len());
            for &j in &targets {
                let tgt = SurfacePoint { face: nodes[j as usize].face, point: nodes[j as usize].point };
                match solver.query(source, tgt) {
                    Ok((cost, path)) => out.push((i, j, cost, path)),
                    Err(err) => {
                        log::warn!("generator pair ({i}, {j}) skipped: {err}");
                    }
                }
            }
            out
        })
        .collect();

    let mut edges = BTreeMap::new();
    for group in per_cluster {
        for (i, j, cost, path) in group {
            edges.insert((i, j), GeodesicEdge { cost, path });
        }
    }
    GeneratorGraph { nodes, edges, avg_neighbors }
}

/// Completes the generator graph: every missing pair gets the shortest path
/// over the existing edges, with the polylines concatenated along the hops.
/// Existing edges are left untouched.
pub fn complete_generator_graph(partial: &GeneratorGraph) -> Result<GeneratorGraph, GeodesicError> {
    let m = partial.nodes.len();
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
    for (&(i, j), e) in &partial.edges {
        adj[i as usize].push((j, e.cost));
        adj[j as usize].push((i, e.cost));
    }

    let mut graph = partial.clone();
    for src in 0..m as u32 {
        let (dist, pred) = dijkstra_graph(&adj, src);
        for dst in src + 1..m as u32 {
            if graph.edges.contains_key(&(src, dst)) {
                continue;
            }
            if !dist[dst as usize].is_finite() {
                return Err(GeodesicError::DisconnectedGraph);
            }
            // Hop sequence src .. dst via predecessors.
            let mut hops = vec![dst];
            while *hops.last().unwrap() != src {
                hops.push(pred[*hops.last().unwrap() as usize]);
            }
            hops.reverse();
            let mut path: Vec<Point> = Vec::new();
            for w in hops.windows(2) {
                let leg = partial.path(w[0], w[1]).expect("hop edge exists");
                let skip = usize::from(!path.is_empty()); // joint point already present
                path.extend_from_slice(&leg[skip..]);
            }
            graph.edges.insert((src, dst), GeodesicEdge { cost: dist[dst as usize], path });
        }
    }
    Ok(graph)
}

/// Plain Dijkstra over a small adjacency-list graph. Returns distances and
/// predecessors from `src`.
fn dijkstra_graph(adj: &[Vec<(u32, f64)>], src: u32) -> (Vec<f64>, Vec<u32>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![u32::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[src as usize] = 0.0;
    heap.push(MinEntry { cost: 0.0, node: src });
    while let Some(MinEntry { cost, node }) = heap.pop() {
        if settled[node as usize] {
            continue;
        }
        settled[node as usize] = true;
        for &(next, w) in &adj[node as usize] {
            let c = cost + w;
            if c < dist[next as usize] {
                dist[next as usize] = c;
                pred[next as usize] = node;
                heap.push(MinEntry { cost: c, node: next });
            }
        }
    }
    (dist, pred)
}

/// Min-heap entry ordered by cost (then node index, for determinism).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MinEntry {
    pub cost: f64,
    pub node: u32,
}

impl Eq for MinEntry {}

impl Ord for MinEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for MinEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests;
