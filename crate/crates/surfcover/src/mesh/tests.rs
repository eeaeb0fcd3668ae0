use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::io::{load_mesh, MeshFormat};
use super::*;
use crate::shapes;

/// Exhaustive nearest-hit scan; the independent oracle for `ray_intersect`.
fn exhaustive_intersect(mesh: &TriangleMesh, ray: &Ray, ignore: Option<&[u32]>) -> Option<RayHit> {
    let mut best: Option<RayHit> = None;
    for fi in 0..mesh.face_count() as u32 {
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
    best
}

fn write_temp(contents: &[u8], ext: &str) -> tempfile::TempPath {
    let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
    f.write_all(contents).unwrap();
    f.into_temp_path()
}

#[test]
fn single_triangle_obj() {
    let path = write_temp(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", ".obj");
    let mesh = load_mesh(&path, MeshFormat::Obj).unwrap();
    assert_eq!(mesh.face_count(), 1);
    assert!((mesh.face_area(0) - 0.5).abs() < 1e-15);
    assert!((mesh.face_normal(0) - Vec3::z()).norm() < 1e-15);
    assert!((mesh.face_centroid(0).coords - Vec3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);
}

#[test]
fn icosahedron_counts() {
    let mesh = shapes::icosahedron();
    assert_eq!(mesh.face_count(), 20);
    assert_eq!(mesh.edges().len(), 30);
    for f in 0..20 {
        assert_eq!(mesh.adjacent_faces(f).len(), 3);
    }
    assert!(mesh.is_closed());
}

#[test]
fn unit_cube_stl_roundtrip() {
    // Binary STL of the unit cube, written by hand from the cuboid shape.
    let cube = shapes::unit_cube();
    let mut bytes = vec![0u8; 80];
    bytes.extend_from_slice(&(cube.face_count() as u32).to_le_bytes());
    for fi in 0..cube.face_count() as u32 {
        let n = cube.face_normal(fi);
        for v in [n.x, n.y, n.z] {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        for p in cube.face_points(fi) {
            for v in [p.x, p.y, p.z] {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        bytes.extend_from_slice(&0u16.to_le_bytes());
    }
    let path = write_temp(&bytes, ".stl");
    let mesh = load_mesh(&path, MeshFormat::Stl).unwrap();
    assert_eq!(mesh.face_count(), 12);
    assert_eq!(mesh.vertex_count(), 8); // welded
    assert!((mesh.total_area() - 6.0).abs() < 1e-9);
    assert!(mesh.is_closed());
}

#[test]
fn ascii_stl_and_ply_parse() {
    let stl = b"solid tri
facet normal 0 0 1
  outer loop
    vertex 0 0 0
    vertex 1 0 0
    vertex 0 1 0
  endloop
endfacet
endsolid tri
";
    let mesh = load_mesh(&write_temp(stl, ".stl"), MeshFormat::Stl).unwrap();
    assert_eq!(mesh.face_count(), 1);
    assert!((mesh.face_area(0) - 0.5).abs() < 1e-12);

    let ply = b"ply
format ascii 1.0
element vertex 4
property float x
property float y
property float z
element face 2
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
1 1 0
0 1 0
3 0 1 2
3 0 2 3
";
    let mesh = load_mesh(&write_temp(ply, ".ply"), MeshFormat::Ply).unwrap();
    assert_eq!(mesh.face_count(), 2);
    assert!((mesh.total_area() - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_faces_dropped_with_report() {
    let path = write_temp(
        b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n",
        ".obj",
    );
    let mesh = load_mesh(&path, MeshFormat::Obj).unwrap();
    assert_eq!(mesh.face_count(), 1);
    assert_eq!(mesh.warnings().degenerate_faces_removed, 1);
}

#[test]
fn empty_mesh_rejected() {
    // All faces collinear => everything dropped.
    let path = write_temp(b"v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n", ".obj");
    match load_mesh(&path, MeshFormat::Obj) {
        Err(MeshError::EmptyMesh) => {}
        other => panic!("expected EmptyMesh, got {:?}", other.map(|m| m.face_count())),
    }
}

#[test]
fn out_of_range_face_index_is_parse_error() {
    let path = write_temp(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n", ".obj");
    assert!(matches!(
        load_mesh(&path, MeshFormat::Obj),
        Err(MeshError::Parse { .. })
    ));
}

#[test]
fn non_manifold_edge_warned_not_fatal() {
    // Three faces share the edge (0,1).
    let obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 1 2 4\nf 1 2 5\n";
    let mesh = load_mesh(&write_temp(obj, ".obj"), MeshFormat::Obj).unwrap();
    assert_eq!(mesh.warnings().non_manifold_edges, 1);
    assert!(!mesh.is_closed());
    // All three faces are mutually adjacent through the shared edge.
    assert_eq!(mesh.adjacent_faces(0), &[1, 2]);
}

#[test]
fn bbox_diagonal_cube_and_scaling() {
    let cube = shapes::unit_cube();
    assert!((cube.bbox_diagonal() - 3.0_f64.sqrt()).abs() < 1e-12);
    let scaled = shapes::cuboid(Point::new(0.0, 0.0, 0.0), Point::new(2.0, 2.0, 2.0));
    assert!((scaled.bbox_diagonal() - 2.0 * cube.bbox_diagonal()).abs() < 1e-12);
}

#[test]
fn adjacency_is_symmetric() {
    let mesh = shapes::icosphere(2, Some((0.15, 3)));
    for f in 0..mesh.face_count() as u32 {
        for &g in mesh.adjacent_faces(f) {
            assert!(mesh.adjacent_faces(g).contains(&f), "asymmetric {f} {g}");
        }
    }
}

#[test]
fn area_additivity_stable_under_reordering() {
    let mesh = shapes::icosphere(2, None);
    let total = mesh.total_area();
    let mut areas: Vec<f64> = mesh.face_areas().to_vec();
    areas.reverse();
    // Same multiset of areas sums to the same total within fp tolerance.
    let reordered: f64 = areas.iter().sum();
    assert!((total - reordered).abs() < 1e-12 * total.max(1.0));
}

#[test]
fn ray_from_sphere_center_hits_pole_face() {
    let mesh = shapes::icosphere(3, None);
    let ray = Ray::new(Point::origin(), Vec3::z());
    let hit = mesh.ray_intersect(&ray, None).expect("must hit");
    // Sphere of radius 1: hit distance within one edge length of the radius.
    let edge = (mesh.face_points(0)[0] - mesh.face_points(0)[1]).norm();
    assert!((hit.distance - 1.0).abs() < edge);
    let centroid = mesh.face_centroid(hit.face);
    assert!(centroid.z > 0.9);
}

#[test]
fn ray_away_from_plane_misses() {
    let plane = shapes::grid(4, 4, 1.0);
    let ray = Ray::new(Point::new(2.0, 2.0, 1.0), Vec3::z());
    assert!(plane.ray_intersect(&ray, None).is_none());
}

#[test]
fn ray_ignore_set_skips_faces() {
    let plane = shapes::grid(1, 1, 1.0);
    let ray = Ray::new(Point::new(0.9, 0.1, 1.0), -Vec3::z());
    let hit = plane.ray_intersect(&ray, None).unwrap();
    let ignored = plane.ray_intersect(&ray, Some(&[hit.face]));
    assert_ne!(ignored.map(|h| h.face), Some(hit.face));
}

#[test]
fn bvh_matches_exhaustive_oracle_on_random_rays() {
    let mesh = shapes::icosphere(3, Some((0.2, 11)));
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut hits = 0;
    for i in 0..1000 {
        let origin = Point::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let dir = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if dir.norm() < 1e-6 {
            continue;
        }
        let ray = Ray::new(origin, dir);
        let ignore: Option<Vec<u32>> = if i % 4 == 0 {
            Some(vec![rng.random_range(0..mesh.face_count() as u32)])
        } else {
            None
        };
        let fast = mesh.ray_intersect(&ray, ignore.as_deref());
        let slow = exhaustive_intersect(&mesh, &ray, ignore.as_deref());
        match (fast, slow) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                assert_eq!(a.face, b.face, "ray {i}");
                assert!((a.distance - b.distance).abs() < 1e-9, "ray {i}");
                hits += 1;
            }
            other => panic!("ray {i}: hit/miss mismatch {other:?}"),
        }
    }
    assert!(hits > 100, "test should exercise plenty of hits, got {hits}");
}

#[test]
fn closed_mesh_edge_count_relation() {
    for mesh in [shapes::icosahedron(), shapes::unit_cube(), shapes::icosphere(2, None)] {
        assert!(mesh.is_closed());
        assert_eq!(2 * mesh.edges().len(), 3 * mesh.face_count());
    }
}
