use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::steiner::polyline_length;
use super::*;
use crate::ccvt::{lloyd_run, ClusterCount, EnergyParams, Norm};
use crate::shapes;

fn sphere_params(m: usize) -> EnergyParams {
    EnergyParams {
        alpha1: 1.0,
        alpha2: 1.0,
        alpha3: 0.0,
        alpha4: 2.0,
        norm: Norm::L2,
        normal_cost_enabled: false,
        m: ClusterCount::Fixed(m),
    }
}

#[test]
fn submesh_of_single_cluster_is_whole_mesh() {
    let mesh = shapes::icosphere(2, None);
    let tess = lloyd_run(&mesh, &sphere_params(1), 1, 10, 1e-4).unwrap();
    let sub = cluster_submesh(&mesh, &tess, 0);
    assert_eq!(sub.faces.len(), mesh.face_count());
    assert!(sub.adjacent_clusters.is_empty());

    let tess2 = lloyd_run(&mesh, &sphere_params(2), 1, 30, 1e-4).unwrap();
    for c in 0..2 {
        let sub = cluster_submesh(&mesh, &tess2, c);
        assert_eq!(sub.faces.len(), mesh.face_count(), "two clusters neighbor each other");
    }
}

#[test]
fn submesh_size_tracks_neighborhood_fraction() {
    let mesh = shapes::icosphere(3, Some((0.1, 2)));
    let m = 32;
    let tess = lloyd_run(&mesh, &sphere_params(m), 3, 50, 1e-4).unwrap();
    let mut sizes = Vec::new();
    let mut neighbor_counts = Vec::new();
    for c in 0..m as u32 {
        let sub = cluster_submesh(&mesh, &tess, c);
        sizes.push(sub.faces.len() as f64);
        neighbor_counts.push(sub.adjacent_clusters.len() as f64);
    }
    let mean_size = sizes.iter().sum::<f64>() / m as f64;
    let varpi = neighbor_counts.iter().sum::<f64>() / m as f64;
    let predicted = (1.0 + varpi) * mesh.face_count() as f64 / m as f64;
    assert!(
        mean_size < 2.0 * predicted && mean_size > predicted / 2.0,
        "mean submesh size {mean_size:.1} vs predicted {predicted:.1}"
    );
}

#[test]
fn planar_geodesic_is_euclidean() {
    let mesh = shapes::grid(20, 20, 0.1);
    let all: Vec<u32> = (0..mesh.face_count() as u32).collect();
    let solver = SteinerSolver::new(&mesh, Some(&all), Backend::default());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let a = rng.random_range(0..mesh.face_count() as u32);
        let b = rng.random_range(0..mesh.face_count() as u32);
        let src = SurfacePoint::face_centroid(&mesh, a);
        let tgt = SurfacePoint::face_centroid(&mesh, b);
        let (cost, path) = solver.query(src, tgt).unwrap();
        let euclid = (tgt.point - src.point).norm();
        assert!(cost >= euclid - 1e-12, "metric lower bound");
        if euclid > 0.3 {
            assert!((cost - euclid) / euclid < 0.01, "cost {cost}, euclid {euclid}");
        }
        assert!((polyline_length(&path) - cost).abs() <= 1e-12 * cost.max(1.0));
    }
}

#[test]
fn sphere_geodesic_matches_great_circle() {
    let mesh = shapes::icosphere(5, Some((0.15, 4)));
    assert!(mesh.face_count() >= 20_000);
    let solver = SteinerSolver::new(&mesh, None, Backend::default());
    // Near-antipodal pair: the face nearest +z and the face nearest -z.
    let top = (0..mesh.face_count() as u32)
        .max_by(|&a, &b| mesh.face_centroid(a).z.total_cmp(&mesh.face_centroid(b).z))
        .unwrap();
    let bottom = (0..mesh.face_count() as u32)
        .min_by(|&a, &b| mesh.face_centroid(a).z.total_cmp(&mesh.face_centroid(b).z))
        .unwrap();
    let src = SurfacePoint::face_centroid(&mesh, top);
    let tgt = SurfacePoint::face_centroid(&mesh, bottom);
    let (cost, _) = solver.query(src, tgt).unwrap();
    let analytic = src
        .point
        .coords
        .normalize()
        .dot(&tgt.point.coords.normalize())
        .clamp(-1.0, 1.0)
        .acos();
    let rel = (cost - analytic).abs() / analytic;
    assert!(rel < 0.02, "cost {cost:.5} vs great-circle {analytic:.5} ({:.2}%)", rel * 100.0);
}

#[test]
fn adjacent_distances_edge_bookkeeping() {
    let mesh = shapes::icosphere(2, Some((0.1, 6)));
    let tess = lloyd_run(&mesh, &sphere_params(2), 7, 30, 1e-4).unwrap();
    let graph = adjacent_generator_distances(&mesh, &tess, Backend::default());
    assert_eq!(graph.edges.len(), 1, "two clusters, one edge");

    let tess = lloyd_run(&mesh, &sphere_params(8), 7, 50, 1e-4).unwrap();
    let graph = adjacent_generator_distances(&mesh, &tess, Backend::default());
    // Edge count equals the number of adjacent cluster pairs.
    let mut pairs = std::collections::BTreeSet::new();
    for f in 0..mesh.face_count() as u32 {
        for &n in mesh.adjacent_faces(f) {
            let (a, b) = (tess.face_to_cluster[f as usize], tess.face_to_cluster[n as usize]);
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    assert_eq!(graph.edges.len(), pairs.len());
    // avg_neighbors diagnostic is consistent with the pair set.
    assert!((graph.avg_neighbors - 2.0 * pairs.len() as f64 / 8.0).abs() < 1e-12);

    // Edge paths start and end at the generators.
    for (&(i, j), e) in &graph.edges {
        let pi = graph.nodes[i as usize].point;
        let pj = graph.nodes[j as usize].point;
        assert!((e.path.first().unwrap() - pi).norm() < 1e-9);
        assert!((e.path.last().unwrap() - pj).norm() < 1e-9);
        assert!((polyline_length(&e.path) - e.cost).abs() <= 1e-9 * e.cost.max(1.0));
    }
}

#[test]
fn submesh_distances_dominate_full_mesh_oracle() {
    let mesh = shapes::icosphere(3, Some((0.15, 8)));
    let tess = lloyd_run(&mesh, &sphere_params(10), 9, 50, 1e-4).unwrap();
    // Pure graph distances on both sides: restriction can never shorten.
    let backend = Backend::default().graph_only();
    let graph = adjacent_generator_distances(&mesh, &tess, backend);
    let full = SteinerSolver::new(&mesh, None, backend);
    for (&(i, j), e) in &graph.edges {
        let src = SurfacePoint { face: graph.nodes[i as usize].face, point: graph.nodes[i as usize].point };
        let tgt = SurfacePoint { face: graph.nodes[j as usize].face, point: graph.nodes[j as usize].point };
        let (oracle, _) = full.query(src, tgt).unwrap();
        assert!(
            e.cost >= oracle,
            "submesh pair ({i},{j}) cost {} undercuts oracle {}",
            e.cost,
            oracle
        );
    }
}

fn hand_graph(costs: &[(u32, u32, f64)], points: &[Point]) -> GeneratorGraph {
    let nodes: Vec<GeneratorNode> = points
        .iter()
        .enumerate()
        .map(|(i, &p)| GeneratorNode { cluster: i as u32, point: p, face: i as u32 })
        .collect();
    let mut edges = std::collections::BTreeMap::new();
    for &(i, j, cost) in costs {
        edges.insert(
            (i.min(j), i.max(j)),
            GeodesicEdge {
                cost,
                path: vec![nodes[i.min(j) as usize].point, nodes[i.max(j) as usize].point],
            },
        );
    }
    GeneratorGraph { nodes, edges, avg_neighbors: 0.0 }
}

#[test]
fn completion_of_path_graph() {
    let pts =
        vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(3.0, 0.0, 0.0)];
    let partial = hand_graph(&[(0, 1, 1.0), (1, 2, 2.0)], &pts);
    let complete = complete_generator_graph(&partial).unwrap();
    assert!(complete.is_complete());
    assert_eq!(complete.cost(0, 2), Some(3.0));
    let path = complete.path(0, 2).unwrap();
    assert_eq!(path.len(), 3, "concatenated polyline shares the joint point");
    assert_eq!(path[1], pts[1]);
    // Existing edges untouched.
    assert_eq!(complete.cost(0, 1), Some(1.0));

    // Completing an already-complete graph changes nothing.
    let again = complete_generator_graph(&complete).unwrap();
    assert_eq!(again.edges.len(), complete.edges.len());
    for (k, e) in &again.edges {
        assert_eq!(e.cost, complete.edges[k].cost);
    }
}

#[test]
fn completion_disconnected_graph_errors() {
    let pts = vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(5.0, 0.0, 0.0)];
    let partial = hand_graph(&[(0, 1, 1.0)], &pts);
    assert!(matches!(
        complete_generator_graph(&partial),
        Err(GeodesicError::DisconnectedGraph)
    ));
}

/// Bellman–Ford over the partial graph; the independent completion oracle.
fn bellman_ford(partial: &GeneratorGraph, src: u32) -> Vec<f64> {
    let n = partial.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[src as usize] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for (&(i, j), e) in &partial.edges {
            let (i, j) = (i as usize, j as usize);
            if dist[i].is_finite() && dist[i] + e.cost < dist[j] {
                dist[j] = dist[i] + e.cost;
                changed = true;
            }
            if dist[j].is_finite() && dist[j] + e.cost < dist[i] {
                dist[i] = dist[j] + e.cost;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

#[test]
fn completion_matches_bellman_ford_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _case in 0..20 {
        let n = rng.random_range(4..12usize);
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        // Random connected partial graph: a spanning path plus extras.
        let mut costs: Vec<(u32, u32, f64)> = Vec::new();
        for i in 1..n as u32 {
            costs.push((i - 1, i, rng.random_range(0.1..2.0)));
        }
        for _ in 0..n {
            let i = rng.random_range(0..n as u32);
            let j = rng.random_range(0..n as u32);
            if i != j && !costs.iter().any(|&(a, b, _)| (a, b) == (i.min(j), i.max(j))) {
                costs.push((i.min(j), i.max(j), rng.random_range(0.1..2.0)));
            }
        }
        let partial = hand_graph(&costs, &pts);
        let complete = complete_generator_graph(&partial).unwrap();
        // Existing edges keep their direct cost; every ADDED edge must carry
        // the exact shortest-path cost over the partial graph.
        for src in 0..n as u32 {
            let oracle = bellman_ford(&partial, src);
            for dst in src + 1..n as u32 {
                if partial.edges.contains_key(&(src, dst)) {
                    continue;
                }
                let got = complete.cost(src, dst).unwrap();
                assert_eq!(got, oracle[dst as usize], "pair ({src},{dst})");
            }
        }
        // Triangle inequality holds for every completed (added) pair: its
        // cost is a graph shortest path, which no detour can undercut.
        for i in 0..n as u32 {
            for j in i + 1..n as u32 {
                if partial.edges.contains_key(&(i, j)) {
                    continue;
                }
                for k in 0..n as u32 {
                    if k == i || k == j {
                        continue;
                    }
                    let direct = complete.cost(i, j).unwrap();
                    let detour = complete.cost(i, k).unwrap() + complete.cost(k, j).unwrap();
                    assert!(direct <= detour + 1e-12 * detour.abs());
                }
            }
        }
    }
}

#[test]
fn completed_geodesic_graph_satisfies_triangle_inequality() {
    // On a real generator graph the direct edges are geodesics, so the
    // completed metric obeys the triangle inequality on all triples.
    let mesh = shapes::icosphere(3, Some((0.12, 14)));
    let tess = lloyd_run(&mesh, &sphere_params(12), 4, 50, 1e-4).unwrap();
    let partial = adjacent_generator_distances(&mesh, &tess, Backend::default().graph_only());
    let complete = complete_generator_graph(&partial).unwrap();
    assert!(complete.is_complete());
    let n = complete.nodes.len() as u32;
    for i in 0..n {
        for j in i + 1..n {
            let direct = complete.cost(i, j).unwrap();
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let detour = complete.cost(i, k).unwrap() + complete.cost(k, j).unwrap();
                assert!(
                    direct <= detour * (1.0 + 1e-12),
                    "triple ({i},{j},{k}): {direct} > {detour}"
                );
            }
        }
    }
}

#[test]
fn oracle_equals_between_on_whole_mesh() {
    let mesh = shapes::icosphere(2, Some((0.1, 12)));
    let sub = Submesh {
        cluster: 0,
        adjacent_clusters: vec![],
        faces: (0..mesh.face_count() as u32).collect(),
    };
    let src = SurfacePoint::face_centroid(&mesh, 3);
    let tgt = SurfacePoint::face_centroid(&mesh, 200);
    let a = geodesic_between(&mesh, &sub, src, tgt, Backend::default()).unwrap();
    let b = full_mesh_geodesic_oracle(&mesh, src, tgt, Backend::default()).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1.len(), b.1.len());
}

#[test]
fn same_face_query_is_straight_segment() {
    let mesh = shapes::grid(2, 2, 1.0);
    let src = SurfacePoint::face_centroid(&mesh, 0);
    let p = mesh.face_points(0);
    let inside = Point::from((p[0].coords + 0.6 * p[1].coords + 0.2 * p[2].coords) / 1.8);
    let tgt = SurfacePoint { face: 0, point: inside };
    let solver = SteinerSolver::new(&mesh, None, Backend::default());
    let (cost, path) = solver.query(src, tgt).unwrap();
    assert!((cost - (tgt.point - src.point).norm()).abs() < 1e-12);
    assert_eq!(path.len(), 2);
}

#[test]
fn centroid_distance_field_is_sane() {
    let mesh = shapes::grid(10, 10, 0.2);
    let solver = SteinerSolver::new(&mesh, None, Backend::default().graph_only());
    let src = SurfacePoint::face_centroid(&mesh, 0);
    let field = solver.distances_to_face_centroids(src).unwrap();
    assert_eq!(field.len(), mesh.face_count());
    assert_eq!(field[&0], 0.0);
    for f in 0..mesh.face_count() as u32 {
        let euclid = (mesh.face_centroid(f) - src.point).norm();
        let d = field[&f];
        assert!(d >= euclid - 1e-12, "face {f}: {d} < {euclid}");
        assert!(d <= euclid * 1.15 + 1e-12, "face {f}: {d} way above planar {euclid}");
    }
}
