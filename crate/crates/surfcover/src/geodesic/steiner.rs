//! Steiner-augmented edge-graph shortest paths on a (sub)mesh.

use std::collections::{BinaryHeap, HashMap};

use crate::mesh::{Point, TriangleMesh};

use super::{Backend, GeodesicError, MinEntry, SurfacePoint};

/// Where a graph node lives; edge nodes may slide during straightening and
/// flat mesh vertices may be bypassed entirely.
#[derive(Debug, Clone, Copy)]
enum NodeKind {
    /// A mesh vertex, by parent vertex index.
    Vertex(u32),
    /// Lies on the mesh edge between these two parent vertices.
    EdgePoint { a: u32, b: u32 },
}

/// A shortest-path solver over one face subset of a mesh.
///
/// Node positions and edge weights depend only on the mesh and the Steiner
/// density, never on the chosen face subset, so solvers over nested subsets
/// produce nested path systems: restricting the subset can only lengthen
/// distances, never shorten them.
pub struct SteinerSolver<'m> {
    mesh: &'m TriangleMesh,
    backend: Backend,
    positions: Vec<Point>,
    kinds: Vec<NodeKind>,
    offsets: Vec<u32>,
    arc_targets: Vec<u32>,
    arc_weights: Vec<f64>,
    face_nodes: HashMap<u32, Vec<u32>>,
    /// Subset faces incident to each subset vertex (for the flat-vertex
    /// bypass during straightening).
    vertex_faces: HashMap<u32, Vec<u32>>,
}

impl<'m> SteinerSolver<'m> {
    /// Builds the graph over `faces` (or the whole mesh when `None`).
    pub fn new(mesh: &'m TriangleMesh, faces: Option<&[u32]>, backend: Backend) -> Self {
        let face_list: Vec<u32> = match faces {
            Some(f) => f.to_vec(),
            None => (0..mesh.face_count() as u32).collect(),
        };
        let k = backend.steiner_per_edge;

        let mut positions: Vec<Point> = Vec::new();
        let mut kinds: Vec<NodeKind> = Vec::new();
        let mut vertex_node: HashMap<u32, u32> = HashMap::new();
        let mut edge_base: HashMap<(u32, u32), u32> = HashMap::new();
        let mut arcs: Vec<(u32, u32, f64)> = Vec::new();
        let mut face_nodes: HashMap<u32, Vec<u32>> = HashMap::with_capacity(face_list.len());

        let mut vertex_faces: HashMap<u32, Vec<u32>> = HashMap::new();
        for &f in &face_list {
            let tri = mesh.faces()[f as usize];
            let mut vn = [0u32; 3];
            for (slot, &v) in vn.iter_mut().zip(&tri) {
                *slot = *vertex_node.entry(v).or_insert_with(|| {
                    positions.push(mesh.vertices()[v as usize]);
                    kinds.push(NodeKind::Vertex(v));
                    positions.len() as u32 - 1
                });
                vertex_faces.entry(v).or_default().push(f);
            }
            // Edge Steiner nodes; positions parameterized from the lower
            // vertex index so every face subset places them identically.
            let mut edge_nodes: [Vec<u32>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                let base = match edge_base.get(&(a, b)) {
                    Some(&base) => base,
                    None => {
                        let pa = mesh.vertices()[a as usize];
                        let pb = mesh.vertices()[b as usize];
                        let base = positions.len() as u32;
                        for i in 0..k {
                            let t = (i + 1) as f64 / (k + 1) as f64;
                            positions.push(pa + t * (pb - pa));
                            kinds.push(NodeKind::EdgePoint { a, b });
                        }
                        // Chain the edge: a — s_0 — … — s_{k-1} — b.
                        let mut prev = vertex_node[&a];
                        for i in 0..k {
                            let id = base + i as u32;
                            arcs.push((
                                prev,
                                id,
                                (positions[id as usize] - positions[prev as usize]).norm(),
                            ));
                            prev = id;
                        }
                        let nb = vertex_node[&b];
                        arcs.push((prev, nb, (positions[nb as usize] - positions[prev as usize]).norm()));
                        edge_base.insert((a, b), base);
                        base
                    }
                };
                edge_nodes[e] = (0..k as u32).map(|i| base + i).collect();
            }

            // In-face cross connections: nodes on different boundary edges,
            // plus each vertex to its opposite edge.
            for (e1, e2) in [(0, 1), (1, 2), (0, 2)] {
                for &s in &edge_nodes[e1] {
                    for &t in &edge_nodes[e2] {
                        arcs.push((s, t, (positions[t as usize] - positions[s as usize]).norm()));
                    }
                }
            }
            for (vert, opposite) in [(2usize, 0usize), (0, 1), (1, 2)] {
                let vnode = vn[vert];
                for &t in &edge_nodes[opposite] {
                    arcs.push((vnode, t, (positions[t as usize] - positions[vnode as usize]).norm()));
                }
            }

            let mut boundary = vn.to_vec();
            for list in &edge_nodes {
                boundary.extend_from_slice(list);
            }
            face_nodes.insert(f, boundary);
        }

        // CSR over both arc directions.
        let n = positions.len();
        let mut degree = vec![0u32; n];
        for &(a, b, _) in &arcs {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets.clone();
        let mut arc_targets = vec![0u32; arcs.len() * 2];
        let mut arc_weights = vec![0.0; arcs.len() * 2];
        for &(a, b, w) in &arcs {
            let ca = cursor[a as usize] as usize;
            arc_targets[ca] = b;
            arc_weights[ca] = w;
            cursor[a as usize] += 1;
            let cb = cursor[b as usize] as usize;
            arc_targets[cb] = a;
            arc_weights[cb] = w;
            cursor[b as usize] += 1;
        }

        Self {
            mesh,
            backend,
            positions,
            kinds,
            offsets,
            arc_targets,
            arc_weights,
            face_nodes,
            vertex_faces,
        }
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    fn boundary_nodes(&self, face: u32) -> Result<&[u32], GeodesicError> {
        self.face_nodes
            .get(&face)
            .map(Vec::as_slice)
            .ok_or(GeodesicError::FaceOutsideSubmesh { face })
    }

    /// Shortest path between two on-face points. Returns `(cost, polyline)`
    /// with the cost equal to the polyline's arc length.
    pub fn query(
        &self,
        source: SurfacePoint,
        target: SurfacePoint,
    ) -> Result<(f64, Vec<Point>), GeodesicError> {
        let src_nodes = self.boundary_nodes(source.face)?;
        let tgt_nodes = self.boundary_nodes(target.face)?;

        let mut dist = vec![f64::INFINITY; self.positions.len()];
        let mut pred = vec![u32::MAX; self.positions.len()];
        let mut settled = vec![false; self.positions.len()];
        let mut heap = BinaryHeap::new();
        for &b in src_nodes {
            let d = (self.positions[b as usize] - source.point).norm();
            if d < dist[b as usize] {
                dist[b as usize] = d;
                heap.push(MinEntry { cost: d, node: b });
            }
        }

        // Exit hop lengths from each target boundary node to the target point.
        let tgt_hop: HashMap<u32, f64> = tgt_nodes
            .iter()
            .map(|&b| (b, (target.point - self.positions[b as usize]).norm()))
            .collect();

        // Straight in-face hop when both points share a face.
        let mut best = if source.face == target.face {
            (target.point - source.point).norm()
        } else {
            f64::INFINITY
        };
        let mut best_exit: Option<u32> = None;

        while let Some(MinEntry { cost, node }) = heap.pop() {
            if cost >= best {
                // Every unsettled node is at least this far; no exit hop can improve.
                break;
            }
            if settled[node as usize] {
                continue;
            }
            settled[node as usize] = true;
            if let Some(&hop) = tgt_hop.get(&node) {
                let total = cost + hop;
                if total < best {
                    best = total;
                    best_exit = Some(node);
                }
            }
            let (lo, hi) = (self.offsets[node as usize] as usize, self.offsets[node as usize + 1] as usize);
            for idx in lo..hi {
                let next = self.arc_targets[idx];
                let c = cost + self.arc_weights[idx];
                if c < dist[next as usize] {
                    dist[next as usize] = c;
                    pred[next as usize] = node;
                    heap.push(MinEntry { cost: c, node: next });
                }
            }
        }
        if !best.is_finite() {
            return Err(GeodesicError::Disconnected);
        }

        let mut chain: Vec<u32> = Vec::new();
        if let Some(exit) = best_exit {
            let mut n = exit;
            while n != u32::MAX {
                chain.push(n);
                n = pred[n as usize];
            }
            chain.reverse();
        }
        let polyline = self.straighten(source, target, &chain);
        Ok((polyline_length(&polyline), polyline))
    }

    /// Geodesic distance from `source` to the centroid of every face of the
    /// subset, as a map face → distance (∞ for unreachable faces).
    pub fn distances_to_face_centroids(&self, source: SurfacePoint) -> Result<HashMap<u32, f64>, GeodesicError> {
        let src_nodes = self.boundary_nodes(source.face)?;
        let mut dist = vec![f64::INFINITY; self.positions.len()];
        let mut settled = vec![false; self.positions.len()];
        let mut heap = BinaryHeap::new();
        for &b in src_nodes {
            let d = (self.positions[b as usize] - source.point).norm();
            if d < dist[b as usize] {
                dist[b as usize] = d;
                heap.push(MinEntry { cost: d, node: b });
            }
        }
        while let Some(MinEntry { cost: _, node }) = heap.pop() {
            if settled[node as usize] {
                continue;
            }
            settled[node as usize] = true;
            let (lo, hi) = (self.offsets[node as usize] as usize, self.offsets[node as usize + 1] as usize);
            for idx in lo..hi {
                let next = self.arc_targets[idx];
                let c = dist[node as usize] + self.arc_weights[idx];
                if c < dist[next as usize] {
                    dist[next as usize] = c;
                    heap.push(MinEntry { cost: c, node: next });
                }
            }
        }

        let mut out = HashMap::with_capacity(self.face_nodes.len());
        for (&f, nodes) in &self.face_nodes {
            if f == source.face {
                out.insert(f, (self.mesh.face_centroid(f) - source.point).norm());
                continue;
            }
            let centroid = self.mesh.face_centroid(f);
            let mut best = f64::INFINITY;
            for &b in nodes {
                if dist[b as usize].is_finite() {
                    best = best.min(dist[b as usize] + (centroid - self.positions[b as usize]).norm());
                }
            }
            out.insert(f, best);
        }
        Ok(out)
    }

    /// Polyline tightening. Phase 1 slides every edge node along its mesh
    /// edge to the locally optimal parameter (Gauss–Seidel sweeps until
    /// converged; both incident segments stay within their original faces).
    /// Phase 2 removes redundant nodes over coplanar regions: a span of the
    /// polyline collapses to a straight segment when a breadth-first walk
    /// over coplanar faces proves the segment never leaves the surface.
    /// Positions are static during phase 2, so every containment proof stays
    /// valid. Both phases are non-increasing in length.
    fn straighten(&self, source: SurfacePoint, target: SurfacePoint, chain: &[u32]) -> Vec<Point> {
        let mut pts: Vec<Point> = Vec::with_capacity(chain.len() + 2);
        // Seed faces per path node: faces known to contain the point.
        let mut seeds: Vec<Vec<u32>> = Vec::with_capacity(chain.len() + 2);
        // Slide segment for phase 1 (edge nodes only).
        let mut slides: Vec<Option<(Point, Point)>> = Vec::with_capacity(chain.len() + 2);

        pts.push(source.point);
        seeds.push(vec![source.face]);
        slides.push(None);
        for &n in chain {
            pts.push(self.positions[n as usize]);
            match self.kinds[n as usize] {
                NodeKind::Vertex(v) => {
                    seeds.push(self.vertex_faces.get(&v).cloned().unwrap_or_default());
                    slides.push(None);
                }
                NodeKind::EdgePoint { a, b } => {
                    // Faces containing the edge: incident to both endpoints.
                    let sa = self.vertex_faces.get(&a).cloned().unwrap_or_default();
                    let common: Vec<u32> = match self.vertex_faces.get(&b) {
                        Some(sb) => sa.iter().copied().filter(|f| sb.contains(f)).collect(),
                        None => Vec::new(),
                    };
                    seeds.push(common);
                    slides.push(Some((
                        self.mesh.vertices()[a as usize],
                        self.mesh.vertices()[b as usize],
                    )));
                }
            }
        }
        pts.push(target.point);
        seeds.push(vec![target.face]);
        slides.push(None);

        // Phase 1: slide to convergence. Corrections propagate one node per
        // sweep, so long paths need several sweeps.
        let mut prev_len = polyline_length(&pts);
        for _ in 0..self.backend.straighten_passes {
            for i in 1..pts.len() - 1 {
                if let Some((a, b)) = slides[i] {
                    pts[i] = slide_point(pts[i - 1], pts[i + 1], a, b);
                }
            }
            let len = polyline_length(&pts);
            if prev_len - len <= 1e-12 * prev_len {
                break;
            }
            prev_len = len;
        }
        if self.backend.straighten_passes == 0 {
            pts.dedup_by(|p, q| (*p - *q).norm() == 0.0);
            return pts;
        }

        // Phase 2: collapse spans across coplanar regions, greedily taking
        // the farthest provable shortcut from each node.
        let mut out_pts: Vec<Point> = Vec::with_capacity(pts.len());
        let mut i = 0;
        while i < pts.len() {
            out_pts.push(pts[i]);
            if i + 2 >= pts.len() {
                i += 1;
                continue;
            }
            let mut jumped = false;
            for j in (i + 2..pts.len()).rev() {
                if self.coplanar_cover(&seeds[i], pts[i], pts[j]) {
                    i = j;
                    jumped = true;
                    break;
                }
            }
            if !jumped {
                i += 1;
            }
        }

        // Collapse exact duplicates from slides that hit an endpoint.
        out_pts.dedup_by(|p, q| (*p - *q).norm() == 0.0);
        out_pts
    }

    /// Proves that the segment `a → b` lies on the mesh surface inside a
    /// single coplanar patch reachable from the seed faces of `a`.
    ///
    /// Walks edge-adjacent subset faces that share the seed plane and
    /// intersect the segment; succeeds when their parameter intervals cover
    /// `[0, 1]`. Fails fast on curved geometry (the first neighbor with a
    /// different normal simply stops the walk).
    fn coplanar_cover(&self, seed_faces: &[u32], a: Point, b: Point) -> bool {
        const FACE_WALK_CAP: usize = 512;
        let eps = 1e-9;
        let Some(&first) = seed_faces.first() else {
            return false;
        };
        let normal = self.mesh.face_normal(first);
        let scale = self.mesh.bbox_diagonal().max(1e-30);
        let origin = self.mesh.face_centroid(first);
        if normal.dot(&(a - origin)).abs() > eps * scale
            || normal.dot(&(b - origin)).abs() > eps * scale
        {
            return false;
        }

        let mut intervals: Vec<(f64, f64)> = Vec::new();
        let mut visited: std::collections::HashSet<u32> = std::collections::HashSet::new();
        let mut queue: Vec<u32> = Vec::new();
        for &f in seed_faces {
            if visited.insert(f) {
                queue.push(f);
            }
        }
        while let Some(f) = queue.pop() {
            if visited.len() > FACE_WALK_CAP {
                return false;
            }
            if (self.mesh.face_normal(f) - normal).norm() > eps {
                continue; // patch boundary
            }
            let [q0, q1, q2] = self.mesh.face_points(f);
            let Some(interval) = segment_in_triangle_interval(a, b, q0, q1, q2, &normal) else {
                continue; // coplanar but off the segment
            };
            intervals.push(interval);
            for &n in self.mesh.adjacent_faces(f) {
                if self.face_nodes.contains_key(&n) && visited.insert(n) {
                    queue.push(n);
                }
            }
        }

        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut reach = 0.0_f64;
        for (lo, hi) in intervals {
            if lo > reach + eps {
                return false;
            }
            reach = reach.max(hi);
            if reach >= 1.0 - eps {
                return true;
            }
        }
        false
    }
}

/// Parameter interval of segment `a + t(b−a)`, `t ∈ [0, 1]`, inside the
/// triangle `(q0, q1, q2)` lying in the plane with normal `n`. `None` when
/// the overlap is empty.
fn segment_in_triangle_interval(
    a: Point,
    b: Point,
    q0: Point,
    q1: Point,
    q2: Point,
    n: &crate::mesh::Vec3,
) -> Option<(f64, f64)> {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let d = b - a;
    for (p, q, opposite) in [(q0, q1, q2), (q1, q2, q0), (q2, q0, q1)] {
        // Inward edge normal within the plane.
        let edge = q - p;
        let mut inward = n.cross(&edge);
        if inward.dot(&(opposite - p)) < 0.0 {
            inward = -inward;
        }
        let h0 = inward.dot(&(a - p));
        let slope = inward.dot(&d);
        // Clip h0 + t·slope ≥ 0 against [lo, hi].
        if slope.abs() < 1e-300 {
            if h0 < 0.0 {
                return None;
            }
        } else {
            let t = -h0 / slope;
            if slope > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo, hi))
}

pub(crate) fn polyline_length(pts: &[Point]) -> f64 {
    let mut sum = 0.0;
    for w in pts.windows(2) {
        sum += (w[1] - w[0]).norm();
    }
    sum
}

/// Minimizes |prev − p(t)| + |p(t) − next| for p(t) = a + t(b − a), t ∈ [0, 1].
/// The objective is convex in t; ternary search suffices.
fn slide_point(prev: Point, next: Point, a: Point, b: Point) -> Point {
    let eval = |t: f64| {
        let p = a + t * (b - a);
        (prev - p).norm() + (next - p).norm()
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..48 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) <= eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    a + t * (b - a)
}
