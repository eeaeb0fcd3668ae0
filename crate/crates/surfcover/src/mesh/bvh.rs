//! Axis-aligned BVH over triangles for nearest-hit ray queries.
//!
//! Traversal never prunes a node whose entry parameter equals the current
//! best hit distance, and leaf hits compare as (distance, face index), so the
//! reported hit is exactly the one an exhaustive scan would return.

use super::{ray_triangle_intersection, Point, Ray, RayHit, TriangleMesh};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Point,
    hi: Point,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            hi: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: Point) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(p[k]);
            self.hi[k] = self.hi[k].max(p[k]);
        }
    }

    fn merge(&mut self, other: &Aabb) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(other.lo[k]);
            self.hi[k] = self.hi[k].max(other.hi[k]);
        }
    }

    /// Entry parameter of the ray into the box, or None on a miss.
    /// Returns the interval intersected with t ≥ 0.
    fn entry(&self, origin: &Point, inv_dir: &[f64; 3]) -> Option<f64> {
        let mut t_min = 0.0_f64;
        let mut t_max = f64::INFINITY;
        for k in 0..3 {
            if inv_dir[k].is_finite() {
                let t1 = (self.lo[k] - origin[k]) * inv_dir[k];
                let t2 = (self.hi[k] - origin[k]) * inv_dir[k];
                let (near, far) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                t_min = t_min.max(near);
                t_max = t_max.min(far);
            } else if origin[k] < self.lo[k] || origin[k] > self.hi[k] {
                // Ray parallel to this slab and outside it.
                return None;
            }
            if t_min > t_max {
                return None;
            }
        }
        Some(t_min)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { faces: Vec<u32> },
    Inner { aabb_l: Aabb, aabb_r: Aabb, left: u32, right: u32 },
}

#[derive(Debug, Clone)]
pub(super) struct Bvh {
    nodes: Vec<Node>,
    root_aabb: Aabb,
}

impl Bvh {
    pub(super) fn build(faces: &[[u32; 3]], vertices: &[Point]) -> Self {
        let face_aabb = |f: &[u32; 3]| {
            let mut bb = Aabb::empty();
            for &v in f {
                bb.grow(vertices[v as usize]);
            }
            bb
        };
        let centroids: Vec<Point> = faces
            .iter()
            .map(|f| {
                Point::from(
                    (vertices[f[0] as usize].coords
                        + vertices[f[1] as usize].coords
                        + vertices[f[2] as usize].coords)
                        / 3.0,
                )
            })
            .collect();
        let mut order: Vec<u32> = (0..faces.len() as u32).collect();
        let mut nodes = Vec::new();
        let mut root_aabb = Aabb::empty();
        for f in faces {
            root_aabb.merge(&face_aabb(f));
        }
        build_node(&mut nodes, &mut order, faces, &centroids, &face_aabb);
        Self { nodes, root_aabb }
    }

    pub(super) fn intersect(
        &self,
        mesh: &TriangleMesh,
        ray: &Ray,
        ignore: Option<&[u32]>,
    ) -> Option<RayHit> {
        let inv_dir = [
            1.0 / ray.direction.x,
            1.0 / ray.direction.y,
            1.0 / ray.direction.z,
        ];
        self.root_aabb.entry(&ray.origin, &inv_dir)?;
        let mut best: Option<RayHit> = None;
        let mut stack = vec![(self.nodes.len() as u32 - 1, 0.0_f64)];
        while let Some((node_idx, t_entry)) = stack.pop() {
            if let Some(b) = &best {
                // Strict: a node entered exactly at the best distance can
                // still contain an equal-distance, lower-index face.
                if t_entry > b.distance {
                    continue;
                }
            }
            match &self.nodes[node_idx as usize] {
                Node::Leaf { faces } => {
                    for &fi in faces {
                        if ignore.is_some_and(|ig| ig.contains(&fi)) {
                            continue;
                        }
                        let [a, b, c] = mesh.face_points(fi);
                        if let Some(t) = ray_triangle_intersection(ray, a, b, c) {
                            let better = match &best {
                                None => true,
                                Some(h) => t < h.distance || (t == h.distance && fi < h.face),
                            };
                            if better {
                                best = Some(RayHit { face: fi, distance: t });
                            }
                        }
                    }
                }
                Node::Inner { aabb_l, aabb_r, left, right } => {
                    let tl = aabb_l.entry(&ray.origin, &inv_dir);
                    let tr = aabb_r.entry(&ray.origin, &inv_dir);
                    // Push the farther child first so the nearer pops first.
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            if a <= b {
                                stack.push((*right, b));
                                stack.push((*left, a));
                            } else {
                                stack.push((*left, a));
                                stack.push((*right, b));
                            }
                        }
                        (Some(a), None) => stack.push((*left, a)),
                        (None, Some(b)) => stack.push((*right, b)),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }
}

/// Recursively builds the subtree over `order`, returning its node index and AABB.
fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    faces: &[[u32; 3]],
    centroids: &[Point],
    face_aabb: &impl Fn(&[u32; 3]) -> Aabb,
) -> (u32, Aabb) {
    let mut aabb = Aabb::empty();
    for &fi in order.iter() {
        aabb.merge(&face_aabb(&faces[fi as usize]));
    }
    if order.len() <= LEAF_SIZE {
        let mut leaf: Vec<u32> = order.to_vec();
        leaf.sort_unstable();
        nodes.push(Node::Leaf { faces: leaf });
        return (nodes.len() as u32 - 1, aabb);
    }

    // Median split along the widest centroid axis.
    let mut cb = Aabb::empty();
    for &fi in order.iter() {
        cb.grow(centroids[fi as usize]);
    }
    let extent = cb.hi - cb.lo;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis]
            .partial_cmp(&centroids[b as usize][axis])
            .unwrap()
            .then(a.cmp(&b))
    });
    let (lo_part, hi_part) = order.split_at_mut(mid);
    let (left, aabb_l) = build_node(nodes, lo_part, faces, centroids, face_aabb);
    let (right, aabb_r) = build_node(nodes, hi_part, faces, centroids, face_aabb);
    nodes.push(Node::Inner { aabb_l, aabb_r, left, right });
    (nodes.len() as u32 - 1, aabb)
}
