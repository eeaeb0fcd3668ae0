//! Indexed triangle meshes and the geometric queries the planner is built on.
//!
//! A [`TriangleMesh`] is immutable after construction: vertices, faces, and
//! all derived per-face data (area, centroid, unit normal, edge adjacency)
//! are computed once at load time, together with a BVH for ray queries.
//! Degenerate faces are dropped during validation and reported in
//! [`MeshWarnings`]; non-manifold input is accepted with a warning and the
//! closed-mesh invariants are skipped for it.

mod bvh;
pub mod io;

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use bvh::Bvh;

/// Euclidean 3D point in meters.
pub type Point = Point3<f64>;
/// 3D vector; directions are unit length unless stated otherwise.
pub type Vec3 = Vector3<f64>;

/// Faces with area at or below this are dropped during validation.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("mesh has no valid faces after validation")]
    EmptyMesh,
    #[error("face {face} references vertex {vertex} but only {count} vertices exist")]
    InvalidIndex { face: usize, vertex: usize, count: usize },
}

/// Non-fatal findings from load-time validation.
#[derive(Debug, Clone, Default)]
pub struct MeshWarnings {
    /// Number of zero-area faces removed.
    pub degenerate_faces_removed: usize,
    /// Edges shared by more than two faces. Planning proceeds, but
    /// closed-mesh invariants are not checked.
    pub non_manifold_edges: usize,
}

impl MeshWarnings {
    pub fn is_clean(&self) -> bool {
        self.degenerate_faces_removed == 0 && self.non_manifold_edges == 0
    }
}

/// A ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Point, direction: Vec3) -> Self {
        Self { origin, direction: direction.normalize() }
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.origin + t * self.direction
    }
}

/// Nearest ray/mesh intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub face: u32,
    pub distance: f64,
}

/// An indexed triangle mesh with precomputed per-face data.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    faces: Vec<[u32; 3]>,
    face_areas: Vec<f64>,
    face_centroids: Vec<Point>,
    face_normals: Vec<Vec3>,
    /// Edge-adjacent face indices, sorted ascending per face.
    adjacency: Vec<Vec<u32>>,
    /// Undirected edges as (low, high) vertex pairs, sorted.
    edges: Vec<(u32, u32)>,
    warnings: MeshWarnings,
    closed: bool,
    bvh: Bvh,
}

impl TriangleMesh {
    /// Validates raw vertex/face data and computes all derived fields.
    ///
    /// Degenerate faces (area ≤ [`DEGENERATE_AREA`]) are removed and counted
    /// in the warnings. Returns `EmptyMesh` if nothing survives.
    pub fn build(vertices: Vec<Point>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v as usize >= vertices.len() {
                    return Err(MeshError::InvalidIndex {
                        face: fi,
                        vertex: v as usize,
                        count: vertices.len(),
                    });
                }
            }
        }

        let mut warnings = MeshWarnings::default();
        let mut kept = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        let mut face_centroids = Vec::with_capacity(faces.len());
        let mut face_normals = Vec::with_capacity(faces.len());
        for f in faces {
            let [a, b, c] = [
                vertices[f[0] as usize],
                vertices[f[1] as usize],
                vertices[f[2] as usize],
            ];
            let cross = (b - a).cross(&(c - a));
            let doubled = cross.norm();
            let area = 0.5 * doubled;
            if area <= DEGENERATE_AREA {
                warnings.degenerate_faces_removed += 1;
                continue;
            }
            kept.push(f);
            face_areas.push(area);
            face_centroids.push(Point::from((a.coords + b.coords + c.coords) / 3.0));
            face_normals.push(cross / doubled);
        }
        if kept.is_empty() {
            return Err(MeshError::EmptyMesh);
        }

        // Edge map: sorted vertex pair -> incident faces.
        let mut edge_faces: std::collections::HashMap<(u32, u32), Vec<u32>> =
            std::collections::HashMap::new();
        for (fi, f) in kept.iter().enumerate() {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                let key = if u < v { (u, v) } else { (v, u) };
                edge_faces.entry(key).or_default().push(fi as u32);
            }
        }

        let mut adjacency = vec![Vec::new(); kept.len()];
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(edge_faces.len());
        let mut closed = true;
        for (&key, incident) in &edge_faces {
            edges.push(key);
            match incident.len() {
                1 => closed = false,
                2 => {}
                _ => {
                    warnings.non_manifold_edges += 1;
                    closed = false;
                }
            }
            for (i, &fa) in incident.iter().enumerate() {
                for &fb in &incident[i + 1..] {
                    adjacency[fa as usize].push(fb);
                    adjacency[fb as usize].push(fa);
                }
            }
        }
        edges.sort_unstable();
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }

        let bvh = Bvh::build(&kept, &vertices);
        Ok(Self {
            vertices,
            faces: kept,
            face_areas,
            face_centroids,
            face_normals,
            adjacency,
            edges,
            warnings,
            closed,
            bvh,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_area(&self, face: u32) -> f64 {
        self.face_areas[face as usize]
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn face_centroid(&self, face: u32) -> Point {
        self.face_centroids[face as usize]
    }

    pub fn face_centroids(&self) -> &[Point] {
        &self.face_centroids
    }

    pub fn face_normal(&self, face: u32) -> Vec3 {
        self.face_normals[face as usize]
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normals
    }

    /// Edge-adjacent faces of `face`, sorted ascending.
    pub fn adjacent_faces(&self, face: u32) -> &[u32] {
        &self.adjacency[face as usize]
    }

    /// Undirected vertex-pair edges, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn warnings(&self) -> &MeshWarnings {
        &self.warnings
    }

    /// True when every edge is shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Corner points of a face.
    pub fn face_points(&self, face: u32) -> [Point; 3] {
        let f = self.faces[face as usize];
        [
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        ]
    }

    /// Sum of all face areas.
    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Length of the axis-aligned bounding-box diagonal.
    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Axis-aligned bounding box over all vertices referenced by faces.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for f in &self.faces {
            for &v in f {
                let p = self.vertices[v as usize];
                for k in 0..3 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        (lo, hi)
    }

    /// Nearest intersection of `ray` with any face not in `ignore`.
    ///
    /// BVH-accelerated, with hit/no-hit outcome and nearest face identical to
    /// an exhaustive scan over [`ray_triangle_intersection`] (ties on distance
    /// resolve to the lowest face index).
    pub fn ray_intersect(&self, ray: &Ray, ignore: Option<&[u32]>) -> Option<RayHit> {
        self.bvh.intersect(self, ray, ignore)
    }
}

/// Möller–Trumbore ray/triangle test. Returns the hit parameter `t ≥ 0`.
///
/// Two-sided; near-parallel rays (|det| < 1e-14) report no hit. This is the
/// single primitive behind both the BVH traversal and any exhaustive scan,
/// so the two paths agree bit for bit.
pub fn ray_triangle_intersection(ray: &Ray, a: Point, b: Point, c: Point) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.direction.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(&p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.direction.dot(&q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv_det;
    (t >= 0.0).then_some(t)
}

#[cfg(test)]
mod tests;
