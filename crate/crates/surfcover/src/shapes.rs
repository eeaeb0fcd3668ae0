//! Procedural meshes: spheres, planar grids, boxes, and a knotted tube.
//!
//! These are the reference geometries for examples and benchmarks. The
//! icosphere accepts an optional tangential jitter so that symmetric
//! shortest-path ties disappear while every vertex stays exactly on the
//! sphere.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{Point, TriangleMesh, Vec3};

/// Regular icosahedron inscribed in the unit sphere (20 faces).
pub fn icosahedron() -> TriangleMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let vertices: Vec<Point> = raw
        .iter()
        .map(|&(x, y, z)| {
            let v = Vector3::new(x, y, z).normalize();
            Point::from(v)
        })
        .collect();
    let faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    TriangleMesh::build(vertices, faces).expect("icosahedron is valid")
}

/// Unit sphere by icosahedron subdivision: 20·4ⁿ faces.
///
/// `jitter` displaces each vertex tangentially by up to that fraction of the
/// local edge length (seeded, then re-normalized onto the sphere); pass
/// `None` for the exact symmetric mesh.
pub fn icosphere(subdivisions: u32, jitter: Option<(f64, u64)>) -> TriangleMesh {
    let base = icosahedron();
    let mut vertices: Vec<Point> = base.vertices().to_vec();
    let mut faces: Vec<[u32; 3]> = base.faces().to_vec();
    for _ in 0..subdivisions {
        let mut midpoint: std::collections::HashMap<(u32, u32), u32> =
            std::collections::HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mids = [0u32; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = if a < b { (a, b) } else { (b, a) };
                mids[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize].coords + vertices[b as usize].coords).normalize();
                    vertices.push(Point::from(m));
                    vertices.len() as u32 - 1
                });
            }
            next.push([f[0], mids[0], mids[2]]);
            next.push([f[1], mids[1], mids[0]]);
            next.push([f[2], mids[2], mids[1]]);
            next.push([mids[0], mids[1], mids[2]]);
        }
        faces = next;
    }
    if let Some((amount, seed)) = jitter {
        let edge_len = (vertices[faces[0][0] as usize] - vertices[faces[0][1] as usize]).norm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut vertices {
            let n = v.coords.normalize();
            let (t1, t2) = tangent_basis(&n);
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let moved = (v.coords + amount * edge_len * (a * t1 + b * t2)).normalize();
            *v = Point::from(moved);
        }
    }
    TriangleMesh::build(vertices, faces).expect("icosphere is valid")
}

/// Sphere of radius `r`: latitude/longitude bands, 2·`lat`·`lon` faces
/// counting the pole fans as full quads' worth of triangles.
pub fn uv_sphere(lat: usize, lon: usize, r: f64) -> TriangleMesh {
    assert!(lat >= 2 && lon >= 3);
    let mut vertices = vec![Point::new(0.0, 0.0, r)];
    for i in 1..lat {
        let theta = std::f64::consts::PI * i as f64 / lat as f64;
        for j in 0..lon {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / lon as f64;
            vertices.push(Point::new(
                r * theta.sin() * phi.cos(),
                r * theta.sin() * phi.sin(),
                r * theta.cos(),
            ));
        }
    }
    vertices.push(Point::new(0.0, 0.0, -r));
    let south = vertices.len() as u32 - 1;
    let ring = |i: usize, j: usize| 1 + ((i - 1) * lon + j % lon) as u32;

    let mut faces = Vec::new();
    for j in 0..lon {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..lat - 1 {
        for j in 0..lon {
            let (a, b) = (ring(i, j), ring(i, j + 1));
            let (c, d) = (ring(i + 1, j), ring(i + 1, j + 1));
            faces.push([a, c, d]);
            faces.push([a, d, b]);
        }
    }
    for j in 0..lon {
        faces.push([south, ring(lat - 1, j + 1), ring(lat - 1, j)]);
    }
    TriangleMesh::build(vertices, faces).expect("uv sphere is valid")
}

/// Flat rectangular grid in the z = 0 plane, `nx`×`ny` cells of size `dx`,
/// each split into two triangles. Normals point +z.
pub fn grid(nx: usize, ny: usize, dx: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(i as f64 * dx, j as f64 * dx, 0.0));
        }
    }
    let at = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    TriangleMesh::build(vertices, faces).expect("grid is valid")
}

/// Axis-aligned box from `lo` to `hi`, 12 triangles with outward normals.
pub fn cuboid(lo: Point, hi: Point) -> TriangleMesh {
    let v = |x: f64, y: f64, z: f64| Point::new(x, y, z);
    let vertices = vec![
        v(lo.x, lo.y, lo.z),
        v(hi.x, lo.y, lo.z),
        v(hi.x, hi.y, lo.z),
        v(lo.x, hi.y, lo.z),
        v(lo.x, lo.y, hi.z),
        v(hi.x, lo.y, hi.z),
        v(hi.x, hi.y, hi.z),
        v(lo.x, hi.y, hi.z),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2], // bottom (-z)
        [4, 5, 6],
        [4, 6, 7], // top (+z)
        [0, 1, 5],
        [0, 5, 4], // front (-y)
        [2, 3, 7],
        [2, 7, 6], // back (+y)
        [1, 2, 6],
        [1, 6, 5], // right (+x)
        [3, 0, 4],
        [3, 4, 7], // left (-x)
    ];
    TriangleMesh::build(vertices, faces).expect("cuboid is valid")
}

/// Unit cube `[0,1]³`.
pub fn unit_cube() -> TriangleMesh {
    cuboid(Point::new(0.0, 0.0, 0.0), Point::new(1.0, 1.0, 1.0))
}

/// Closed tube of radius `tube_r` around a trefoil knot: 2·`segments`·`ring`
/// faces. Small `tube_r` gives a high-curvature benchmark surface.
///
/// Ring frames are rotation-minimizing with the closure holonomy spread
/// evenly over the segments, so the tube is watertight.
pub fn trefoil_tube(segments: usize, ring: usize, tube_r: f64) -> TriangleMesh {
    assert!(segments >= 3 && ring >= 3);
    let curve = |t: f64| {
        Point::new(
            t.sin() + 2.0 * (2.0 * t).sin(),
            t.cos() - 2.0 * (2.0 * t).cos(),
            -(3.0 * t).sin(),
        )
    };
    let tangent = |t: f64| {
        Vector3::new(
            t.cos() + 4.0 * (2.0 * t).cos(),
            -t.sin() + 4.0 * (2.0 * t).sin(),
            -3.0 * (3.0 * t).cos(),
        )
        .normalize()
    };

    let step = 2.0 * std::f64::consts::PI / segments as f64;
    let centers: Vec<Point> = (0..segments).map(|i| curve(i as f64 * step)).collect();
    let tangents: Vec<Vec3> = (0..segments).map(|i| tangent(i as f64 * step)).collect();

    // Parallel-transport a normal frame along the closed curve.
    let mut normals = Vec::with_capacity(segments);
    let (first, _) = tangent_basis(&tangents[0]);
    normals.push(first);
    for i in 1..segments {
        let prev: Vec3 = normals[i - 1];
        let projected = prev - tangents[i] * prev.dot(&tangents[i]);
        normals.push(projected.normalize());
    }
    // Transport once more around the seam to measure the holonomy angle.
    let wrapped = {
        let prev: Vec3 = normals[segments - 1];
        let projected = prev - tangents[0] * prev.dot(&tangents[0]);
        projected.normalize()
    };
    let holonomy = {
        let cosang = wrapped.dot(&normals[0]).clamp(-1.0, 1.0);
        let sinang = tangents[0].dot(&wrapped.cross(&normals[0]));
        sinang.atan2(cosang)
    };

    let mut vertices = Vec::with_capacity(segments * ring);
    for i in 0..segments {
        let untwist = holonomy * i as f64 / segments as f64;
        let n = rotate_about(&normals[i], &tangents[i], untwist);
        let b = tangents[i].cross(&n);
        for j in 0..ring {
            let a = 2.0 * std::f64::consts::PI * j as f64 / ring as f64;
            vertices.push(centers[i] + tube_r * (a.cos() * n + a.sin() * b));
        }
    }
    let at = |i: usize, j: usize| ((i % segments) * ring + j % ring) as u32;
    let mut faces = Vec::with_capacity(2 * segments * ring);
    for i in 0..segments {
        for j in 0..ring {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    TriangleMesh::build(vertices, faces).expect("trefoil tube is valid")
}

/// Deterministic orthonormal basis of the plane perpendicular to `n`.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

fn rotate_about(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    // Rodrigues rotation; axis is unit length.
    v * angle.cos() + axis.cross(v) * angle.sin() + axis * axis.dot(v) * (1.0 - angle.cos())
}
